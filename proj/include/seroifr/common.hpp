#pragma once

#include <stdexcept>
#include <string>

namespace seroifr {

enum class Errc {
  missing_file,
  schema_violation,
  referential_integrity,
  bin_overlap,
  count_violation,
  non_normalized,
  zero_national_mass,
  degenerate_fit,
  empty_bin,
  zero_mass_bin,
  non_finite,
  initialization_failure,
  all_divergent,
  insufficient_chains,
  no_draws,
  insufficient_draws,
  zero_infections,
  degenerate_test,
  zero_prevalence,
  bad_config,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::missing_file: return "MissingFile";
    case Errc::schema_violation: return "SchemaViolation";
    case Errc::referential_integrity: return "ReferentialIntegrity";
    case Errc::bin_overlap: return "BinOverlap";
    case Errc::count_violation: return "CountViolation";
    case Errc::non_normalized: return "NonNormalized";
    case Errc::zero_national_mass: return "ZeroNationalMass";
    case Errc::degenerate_fit: return "DegenerateFit";
    case Errc::empty_bin: return "EmptyBin";
    case Errc::zero_mass_bin: return "ZeroMassBin";
    case Errc::non_finite: return "NonFinite";
    case Errc::initialization_failure: return "InitializationFailure";
    case Errc::all_divergent: return "AllDivergent";
    case Errc::insufficient_chains: return "InsufficientChains";
    case Errc::no_draws: return "NoDraws";
    case Errc::insufficient_draws: return "InsufficientDraws";
    case Errc::zero_infections: return "ZeroInfections";
    case Errc::degenerate_test: return "DegenerateTest";
    case Errc::zero_prevalence: return "ZeroPrevalence";
    case Errc::bad_config: return "BadConfig";
  }
  return "Error";
}

/// Library-wide exception: every validation failure carries a code plus a
/// message naming the offending file/row/field or parameter.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace seroifr
