#pragma once

#include <optional>
#include <string>

namespace seroifr {

/// Oldest age tracked anywhere in the model; open-ended bins resolve here.
inline constexpr double kAgeCeiling = 100.0;

/// Continuous age interval [lo, hi). Input tables label bins with closed
/// integer ages ("9-20" meaning completed years 9 through 20), which map to
/// the continuous interval [9, 21); an empty upper label means an open-ended
/// bin that resolves to [lo, 100].
struct AgeBin {
  double lo = 0.0;
  double hi = 0.0;   // always resolved; kAgeCeiling when open_top
  bool open_top = false;

  static AgeBin from_labels(long lo_label, std::optional<long> hi_label);
  static AgeBin range(double lo, double hi);  // direct continuous interval

  double width() const { return hi - lo; }
  bool contains(double age) const { return age >= lo && age < hi; }
  bool overlaps(const AgeBin& other) const { return lo < other.hi && other.lo < hi; }

  long lo_label() const { return static_cast<long>(lo); }
  std::optional<long> hi_label() const;

  std::string describe() const;  // "[9,21)" or "[81,100] (open)"
  bool operator==(const AgeBin& o) const { return lo == o.lo && hi == o.hi && open_top == o.open_top; }
};

}  // namespace seroifr
