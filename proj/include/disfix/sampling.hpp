#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "disfix/error.hpp"
#include "disfix/report.hpp"

namespace disfix {

/// Deterministic sampling schedule shared by all sampled checks.
/// Same plan (including seed) => identical verdict and witness.
struct SamplingPlan {
  int grid_points_per_axis = 64;
  int random_samples = 4096;
  std::uint64_t seed = 42;
  double violation_atol = 1e-9;
};

inline void validate(const SamplingPlan& plan) {
  if (plan.grid_points_per_axis < 2) {
    throw ConfigError("sampling.grid_points_per_axis must be >= 2");
  }
  if (plan.random_samples < 0) {
    throw ConfigError("sampling.random_samples must be >= 0");
  }
  if (!(plan.violation_atol > 0.0)) {
    throw ConfigError("sampling.violation_atol must be > 0");
  }
}

/// Grid coordinate i of n over [lo,hi]; endpoints land exactly on lo and hi.
inline double grid_point(double lo, double hi, int i, int n) {
  if (i <= 0) return lo;
  if (i >= n - 1) return hi;
  return lo + (hi - lo) * (static_cast<double>(i) / (n - 1));
}

/// Uniform double in [0,1) from the top 53 bits of the generator output.
/// Unlike std::uniform_real_distribution this is the same on every platform.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

namespace detail {

/// Triangle-style triple checks cap the grid to keep the O(g^3) cost down.
inline int triple_grid_points(const SamplingPlan& plan) {
  return std::min(plan.grid_points_per_axis, 32);
}

/// Keeps the largest-slack candidate seen so far. Ties break
/// lexicographically on coordinate values, so the reported witness does not
/// depend on sample order or on how the sample set is partitioned.
class WitnessTracker {
public:
  void offer(double violation, std::span<const double> coords, int tag = 0) {
    if (!std::isfinite(violation)) return;
    if (!has_candidate_ || violation > best_violation_ ||
        (violation == best_violation_ && lex_less(coords))) {
      best_violation_ = violation;
      best_coords_.assign(coords.begin(), coords.end());
      best_tag_ = tag;
      has_candidate_ = true;
    }
  }

  bool has_candidate() const { return has_candidate_; }
  double best_violation() const { return best_violation_; }
  std::span<const double> best_coords() const { return best_coords_; }
  int best_tag() const { return best_tag_; }

  /// Replace the candidate only when strictly better.
  void improve(double violation, std::span<const double> coords) {
    if (has_candidate_ && violation > best_violation_) {
      best_violation_ = violation;
      best_coords_.assign(coords.begin(), coords.end());
    }
  }

private:
  bool lex_less(std::span<const double> coords) const {
    return std::lexicographical_compare(coords.begin(), coords.end(),
                                        best_coords_.begin(),
                                        best_coords_.end());
  }

  bool has_candidate_ = false;
  double best_violation_ = 0.0;
  std::vector<double> best_coords_;
  int best_tag_ = 0;
};

/// Golden-section maximization of f over [lo,hi]. Returns the abscissa of
/// the best point found. Deterministic.
template <class F>
double golden_max(F&& f, double lo, double hi, int iters = 72) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  return f1 >= f2 ? x1 : x2;
}

/// Coordinate-ascent refinement of the tracker's candidate against a
/// continuous violation function. The refined witness replaces the sampled
/// one only when its slack is strictly larger.
template <class F>  // F: std::span<const double> -> double
void polish_candidate(WitnessTracker& tracker, F&& violation,
                      std::span<const std::pair<double, double>> bounds,
                      int sweeps = 3) {
  if (!tracker.has_candidate()) return;
  std::vector<double> coords(tracker.best_coords().begin(),
                             tracker.best_coords().end());
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t i = 0; i < coords.size(); ++i) {
      double best_xi = golden_max(
          [&](double xi) {
            double saved = coords[i];
            coords[i] = xi;
            double v = violation(std::span<const double>(coords));
            coords[i] = saved;
            return v;
          },
          bounds[i].first, bounds[i].second);
      double cur = violation(std::span<const double>(coords));
      double saved = coords[i];
      coords[i] = best_xi;
      if (violation(std::span<const double>(coords)) < cur) coords[i] = saved;
    }
  }
  tracker.improve(violation(std::span<const double>(coords)), coords);
}

inline Witness make_witness(std::span<const char* const> names,
                            std::span<const double> coords, double violation) {
  Witness w;
  w.violation = violation;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    w.coords.emplace_back(names[i], coords[i]);
  }
  return w;
}

/// Assemble a standard report from a finished tracker: fail iff the worst
/// slack exceeds the tolerance.
inline AxiomReport finish_report(std::string axiom, const SamplingPlan& plan,
                                 std::uint64_t samples,
                                 const WitnessTracker& tracker,
                                 std::span<const char* const> names) {
  AxiomReport report;
  report.axiom = std::move(axiom);
  report.samples_checked = samples;
  report.seed = plan.seed;
  report.max_violation = tracker.has_candidate() ? tracker.best_violation() : 0.0;
  if (tracker.has_candidate() &&
      tracker.best_violation() > plan.violation_atol) {
    report.passed = false;
    report.witness =
        make_witness(names, tracker.best_coords(), tracker.best_violation());
  }
  return report;
}

}  // namespace detail
}  // namespace disfix
