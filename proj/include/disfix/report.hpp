#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace disfix {

/// A concrete point (or tuple) at which a checked condition is violated,
/// with the measured slack. Coordinates keep the order they were sampled in.
struct Witness {
  std::vector<std::pair<std::string, double>> coords;
  double violation = 0.0;
};

/// Outcome of one sampled axiom or condition check.
///
/// A "pass" verdict means no counterexample was found among samples_checked
/// samples; it is not a proof. Reports carry the seed so verdicts are
/// auditable and reproducible.
struct AxiomReport {
  std::string axiom;
  bool passed = true;
  std::optional<Witness> witness;
  std::uint64_t samples_checked = 0;
  double max_violation = 0.0;
  std::uint64_t seed = 0;
  /// Contraction-style checks: max observed d(Tx,Ty)/d(x,y) over sampled
  /// pairs with d(x,y) above tolerance.
  std::optional<double> max_ratio;
  bool heuristic = false;
  std::string note;
};

/// Outcome of the A2 trigger check with the estimated uniform bound k_hat
/// (the max observed ratio a/b over triggered cases).
struct A2Report {
  bool passed = true;
  double k_hat = 0.0;
  double k_max = 0.0;
  std::optional<Witness> witness;
  std::string trigger_case;  // which trigger inequality fired for the witness
  std::uint64_t samples_checked = 0;
  std::uint64_t seed = 0;
  std::string note;
};

}  // namespace disfix
