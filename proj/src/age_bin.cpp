#include "seroifr/age_bin.hpp"

#include <cmath>

#include "seroifr/common.hpp"

namespace seroifr {

AgeBin AgeBin::from_labels(long lo_label, std::optional<long> hi_label) {
  if (lo_label < 0) fail(Errc::schema_violation, "age_lo must be >= 0, got " + std::to_string(lo_label));
  AgeBin b;
  b.lo = static_cast<double>(lo_label);
  if (hi_label) {
    if (*hi_label < lo_label)
      fail(Errc::schema_violation, "age_hi label " + std::to_string(*hi_label) +
                                       " below age_lo " + std::to_string(lo_label));
    // closed integer labels: "9-20" covers completed years 9..20 -> [9, 21)
    b.hi = static_cast<double>(*hi_label + 1);
    b.open_top = false;
    if (b.hi > kAgeCeiling)
      fail(Errc::schema_violation, "bin " + b.describe() + " exceeds the age ceiling of 100");
  } else {
    b.hi = kAgeCeiling;
    b.open_top = true;
    if (b.lo >= b.hi) fail(Errc::schema_violation, "open bin starts at or above the age ceiling");
  }
  return b;
}

AgeBin AgeBin::range(double lo, double hi) {
  if (!(lo < hi)) fail(Errc::schema_violation, "bin requires lo < hi");
  AgeBin b;
  b.lo = lo;
  b.hi = hi;
  b.open_top = false;
  return b;
}

std::optional<long> AgeBin::hi_label() const {
  if (open_top) return std::nullopt;
  return static_cast<long>(hi) - 1;
}

std::string AgeBin::describe() const {
  auto fmt = [](double v) {
    if (v == std::floor(v)) return std::to_string(static_cast<long>(v));
    return std::to_string(v);
  };
  std::string s = "[" + fmt(lo) + "," + fmt(hi) + ")";
  if (open_top) s += " (open)";
  return s;
}

}  // namespace seroifr
