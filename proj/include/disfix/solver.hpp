#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "disfix/control.hpp"
#include "disfix/error.hpp"
#include "disfix/map.hpp"
#include "disfix/metric.hpp"
#include "disfix/report.hpp"
#include "disfix/sampling.hpp"

namespace disfix {

struct SolverConfig {
  double x0 = 0.0;
  double tol = 1e-9;
  std::int64_t max_iters = 10000;
  bool record_trace = false;
};

inline void validate(const SolverConfig& cfg, const Domain& dom) {
  if (!(cfg.tol > 0.0)) throw ConfigError("solver.tol must be > 0");
  if (cfg.max_iters < 1) throw ConfigError("solver.max_iters must be >= 1");
  if (!dom.contains(cfg.x0)) {
    throw ConfigError("solver.x0 = " + format_double(cfg.x0) +
                      " lies outside the domain");
  }
}

struct TraceRow {
  std::int64_t n = 0;
  double x = 0.0;
  double step_distance = 0.0;
  std::string map_label;  // empty for single-map solves; "T"/"S" alternating
};
using IterationTrace = std::vector<TraceRow>;

using ConditionReport = std::variant<AxiomReport, A2Report>;

/// Result of a Picard-style solve.
///
/// apriori_bound_at_stop is k^n/(1-k) * d(x0,x1) at the stopping n: the
/// Cauchy estimate for the distance from the n-th iterate to the limit.
struct FixedPointCertificate {
  bool converged = false;
  std::string failure_reason;  // "", "max_iters_exceeded", "contraction_violation"
  double z = 0.0;
  double residual = 0.0;       // d(z, Tz)
  double self_distance = 0.0;  // d(z, z); reported, not asserted to vanish
  std::int64_t iterations = 0;
  std::optional<double> k_used;
  std::string k_source = "absent";  // "declared" | "estimated" | "absent"
  double d01 = 0.0;                 // d(x0, x1)
  std::optional<double> apriori_bound_at_stop;
  double x0 = 0.0;
  double tol = 0.0;
  std::optional<IterationTrace> trace;
  std::vector<ConditionReport> condition_reports;
  std::string note;
};

/// k^n/(1-k) * d01, the geometric tail bound from the existence proof.
inline double apriori_bound(double k, double d01, std::int64_t n) {
  if (!(k >= 0.0 && k < 1.0)) throw ConfigError("apriori_bound: k must be in [0,1)");
  if (!(d01 >= 0.0)) throw ConfigError("apriori_bound: d01 must be >= 0");
  if (n < 0) throw ConfigError("apriori_bound: n must be >= 0");
  return std::pow(k, static_cast<double>(n)) * d01 / (1.0 - k);
}

/// Slack of the contraction inequality at one pair:
/// d(Tx,Ty) - alpha(d(x,y), d(x,Tx), d(y,Ty)).
inline double contraction_violation(const SelfMap& T, const DislocatedMetric& d,
                                    const ControlFunction& alpha, double x,
                                    double y, double escape_atol = 1e-9) {
  double tx = T.apply(x, escape_atol);
  double ty = T.apply(y, escape_atol);
  return d(tx, ty) - alpha(d(x, y), d(x, tx), d(y, ty));
}

/// Samples the contraction inequality over domain pairs. The report also
/// carries the max observed ratio d(Tx,Ty)/d(x,y) over pairs with
/// d(x,y) above tolerance.
inline AxiomReport verify_contraction(const SelfMap& T,
                                      const DislocatedMetric& d,
                                      const ControlFunction& alpha,
                                      const SamplingPlan& plan) {
  validate(plan);
  const Domain& dom = d.domain();
  const double atol = plan.violation_atol;
  detail::WitnessTracker tracker;
  double max_ratio = 0.0;
  std::uint64_t samples = 0;

  auto visit = [&](double x, double y) {
    double tx = T.apply(x, atol);
    double ty = T.apply(y, atol);
    double dxy = d(x, y);
    double dtt = d(tx, ty);
    double v = dtt - alpha(dxy, d(x, tx), d(y, ty));
    const std::array<double, 2> c{x, y};
    tracker.offer(v, c);
    if (dxy > atol) max_ratio = std::max(max_ratio, dtt / dxy);
    ++samples;
  };

  const int g = plan.grid_points_per_axis;
  for (int ix = 0; ix < g; ++ix) {
    double x = grid_point(dom.lo, dom.hi, ix, g);
    for (int iy = 0; iy < g; ++iy) visit(x, grid_point(dom.lo, dom.hi, iy, g));
  }
  std::mt19937_64 rng(plan.seed);
  for (int r = 0; r < plan.random_samples; ++r) {
    double x = uniform_in(rng, dom.lo, dom.hi);
    double y = uniform_in(rng, dom.lo, dom.hi);
    visit(x, y);
  }
  const std::array<std::pair<double, double>, 2> bounds{
      std::pair{dom.lo, dom.hi}, std::pair{dom.lo, dom.hi}};
  detail::polish_candidate(
      tracker,
      [&](std::span<const double> c) {
        return contraction_violation(T, d, alpha, c[0], c[1], atol);
      },
      bounds);

  static constexpr std::array<const char*, 2> names{"x", "y"};
  AxiomReport report =
      detail::finish_report("contraction", plan, samples, tracker, names);
  report.max_ratio = max_ratio;
  return report;
}

namespace detail {

struct KInfo {
  std::optional<double> k;
  std::string source = "absent";
  std::optional<A2Report> estimation;
};

inline KInfo resolve_k(const std::optional<ControlFunction>& alpha,
                       const DislocatedMetric& d, const SamplingPlan& plan) {
  KInfo info;
  if (!alpha) return info;
  if (alpha->declared_k()) {
    info.k = *alpha->declared_k();
    info.source = "declared";
    return info;
  }
  double box = suggest_alpha_box(d, plan);
  A2Report rep = check_a2(*alpha, plan, 0.999, box);
  if (!(rep.k_hat < 1.0)) {
    throw ConfigError("estimated contraction constant k_hat = " +
                      format_double(rep.k_hat) +
                      " is not < 1; no Cauchy bound can be certified");
  }
  info.k = rep.k_hat;
  info.source = "estimated";
  info.estimation = std::move(rep);
  return info;
}

struct IterationOutcome {
  bool converged = false;
  std::string failure_reason;
  double z = 0.0;
  double gate_residual = 0.0;
  std::int64_t iterations = 0;
  double d01 = 0.0;
  IterationTrace trace;
  std::optional<Witness> runtime_violation;
};

/// Shared iteration driver. Stops when the step distance satisfies the
/// a-posteriori rule step <= tol*(1-k)/max(k,atol) (plain step <= tol when
/// no k is available) and the caller's residual gate is within tol.
/// With enforce_geometric, a step growing beyond k*previous + atol aborts
/// as a runtime contraction violation.
template <class NextFn, class LabelFn, class StepFn, class ResidualFn>
IterationOutcome iterate_fixed_point(double x0, double tol,
                                     std::int64_t max_iters, bool record_trace,
                                     std::optional<double> k, double atol,
                                     bool enforce_geometric, NextFn&& next,
                                     LabelFn&& label, StepFn&& step_dist,
                                     ResidualFn&& residual) {
  IterationOutcome out;
  double threshold = tol;
  if (k) threshold = tol * (1.0 - *k) / std::max(*k, atol);

  double x = x0;
  std::optional<double> prev_step;
  for (std::int64_t n = 0;; ++n) {
    if (n >= max_iters) {
      out.failure_reason = "max_iters_exceeded";
      out.z = x;
      out.iterations = n;
      out.gate_residual = residual(x);
      return out;
    }
    double xn1 = next(n, x);
    double s = step_dist(x, xn1);
    if (record_trace) out.trace.push_back({n, x, s, label(n)});
    if (n == 0) out.d01 = s;
    if (prev_step && k && enforce_geometric && s > *k * *prev_step + atol) {
      out.failure_reason = "contraction_violation";
      Witness w;
      w.coords = {{"n", static_cast<double>(n)},
                  {"step_prev", *prev_step},
                  {"step", s}};
      w.violation = s - *k * *prev_step;
      out.runtime_violation = w;
      out.z = xn1;
      out.iterations = n + 1;
      out.gate_residual = residual(xn1);
      return out;
    }
    if (s <= threshold) {
      double r = residual(xn1);
      if (r <= tol) {
        out.converged = true;
        out.z = xn1;
        out.iterations = n + 1;
        out.gate_residual = r;
        return out;
      }
    }
    prev_step = s;
    x = xn1;
  }
}

}  // namespace detail

/// Picard iteration x_{n+1} = T x_n with certified stopping.
///
/// When alpha carries no declared k, the constant is estimated by check_a2
/// and the certificate records the estimation report. Success guarantees
/// residual = d(z, Tz) <= tol.
inline FixedPointCertificate solve_picard(
    const SelfMap& T, const DislocatedMetric& d,
    const std::optional<ControlFunction>& alpha, const SolverConfig& cfg,
    const SamplingPlan& plan = {}) {
  validate(plan);
  validate(cfg, d.domain());
  const double atol = plan.violation_atol;
  detail::KInfo kinfo = detail::resolve_k(alpha, d, plan);

  detail::IterationOutcome out = detail::iterate_fixed_point(
      cfg.x0, cfg.tol, cfg.max_iters, cfg.record_trace, kinfo.k, atol,
      /*enforce_geometric=*/alpha.has_value(),
      [&](std::int64_t, double x) { return T.apply(x, atol); },
      [](std::int64_t) { return std::string(); },
      [&](double a, double b) { return d(a, b); },
      [&](double z) { return d(z, T.apply(z, atol)); });

  FixedPointCertificate cert;
  cert.converged = out.converged;
  cert.failure_reason = out.failure_reason;
  cert.z = out.z;
  cert.residual = out.gate_residual;
  cert.self_distance = d(out.z, out.z);
  cert.iterations = out.iterations;
  cert.k_used = kinfo.k;
  cert.k_source = kinfo.source;
  cert.d01 = out.d01;
  if (kinfo.k) {
    cert.apriori_bound_at_stop = apriori_bound(*kinfo.k, out.d01, out.iterations);
  } else {
    cert.note = "no control function: stopping used plain step distance <= tol";
  }
  cert.x0 = cfg.x0;
  cert.tol = cfg.tol;
  if (cfg.record_trace) cert.trace = std::move(out.trace);
  if (kinfo.estimation) cert.condition_reports.emplace_back(*kinfo.estimation);
  if (out.runtime_violation) {
    AxiomReport rt;
    rt.axiom = "runtime-contraction";
    rt.passed = false;
    rt.witness = out.runtime_violation;
    rt.max_violation = out.runtime_violation->violation;
    rt.seed = plan.seed;
    rt.note = "step distance grew beyond k * previous step during iteration";
    cert.condition_reports.emplace_back(std::move(rt));
  }
  return cert;
}

/// Theorem-2-style iteration x_n = f_n x_{n-1}; the member index advances
/// with the iteration count and wraps at the budget (noted in the
/// certificate). The residual is the max of d(z, f_m z) over a verification
/// subset of member indices.
inline FixedPointCertificate solve_sequence(
    const MapFamily& F, const DislocatedMetric& d,
    const std::optional<ControlFunction>& alpha, const SolverConfig& cfg,
    const SamplingPlan& plan = {}) {
  validate(plan);
  validate(cfg, d.domain());
  const double atol = plan.violation_atol;
  detail::KInfo kinfo = detail::resolve_k(alpha, d, plan);
  const int budget = F.index_budget();

  std::vector<int> residual_indices{1};
  if (budget >= 2) residual_indices.push_back(2);
  if (budget > 2) residual_indices.push_back(budget);
  auto residual = [&](double z) {
    double worst = 0.0;
    for (int m : residual_indices) {
      worst = std::max(worst, d(z, F.member(m).apply(z, atol)));
    }
    return worst;
  };

  detail::IterationOutcome out = detail::iterate_fixed_point(
      cfg.x0, cfg.tol, cfg.max_iters, cfg.record_trace, kinfo.k, atol,
      /*enforce_geometric=*/alpha.has_value(),
      [&](std::int64_t n, double x) {
        int idx = static_cast<int>(n % budget) + 1;
        return F.member(idx).apply(x, atol);
      },
      [](std::int64_t) { return std::string(); },
      [&](double a, double b) { return d(a, b); }, residual);

  FixedPointCertificate cert;
  cert.converged = out.converged;
  cert.failure_reason = out.failure_reason;
  cert.z = out.z;
  cert.residual = out.gate_residual;
  cert.self_distance = d(out.z, out.z);
  cert.iterations = out.iterations;
  cert.k_used = kinfo.k;
  cert.k_source = kinfo.source;
  cert.d01 = out.d01;
  if (kinfo.k) {
    cert.apriori_bound_at_stop = apriori_bound(*kinfo.k, out.d01, out.iterations);
  }
  cert.x0 = cfg.x0;
  cert.tol = cfg.tol;
  if (cfg.record_trace) cert.trace = std::move(out.trace);
  if (kinfo.estimation) cert.condition_reports.emplace_back(*kinfo.estimation);
  if (out.runtime_violation) {
    AxiomReport rt;
    rt.axiom = "runtime-contraction";
    rt.passed = false;
    rt.witness = out.runtime_violation;
    rt.max_violation = out.runtime_violation->violation;
    rt.seed = plan.seed;
    cert.condition_reports.emplace_back(std::move(rt));
  }
  if (out.iterations > budget) {
    cert.note = "family index wrapped at index_budget = " + std::to_string(budget);
  }
  cert.note += (cert.note.empty() ? "" : "; ");
  cert.note += "residual verified over member indices {";
  for (std::size_t i = 0; i < residual_indices.size(); ++i) {
    cert.note += (i ? ", " : "") + std::to_string(residual_indices[i]);
  }
  cert.note += "}";
  return cert;
}

/// Slack of the cross-index contraction inequality at one (i, j, x, y).
inline double family_contraction_violation(const MapFamily& F,
                                           const DislocatedMetric& d,
                                           const ControlFunction& alpha, int i,
                                           int j, double x, double y,
                                           double escape_atol = 1e-9) {
  SelfMap fi = F.member(i);
  SelfMap fj = F.member(j);
  double fx = fi.apply(x, escape_atol);
  double fy = fj.apply(y, escape_atol);
  return d(fx, fy) - alpha(d(x, y), d(x, fx), d(y, fy));
}

/// Checks d(f_i x, f_j y) <= alpha(d(x,y), d(x,f_i x), d(y,f_j y)) over a
/// truncated index set: by default all i,j up to min(budget, 8) plus
/// (1, budget). The hypothesis quantifies over all of N; the note records
/// the truncation.
inline AxiomReport verify_family_contraction(
    const MapFamily& F, const DislocatedMetric& d, const ControlFunction& alpha,
    const SamplingPlan& plan,
    const std::optional<std::vector<std::pair<int, int>>>& index_pairs = {}) {
  validate(plan);
  const Domain& dom = F.domain();
  const double atol = plan.violation_atol;

  std::vector<std::pair<int, int>> pairs;
  if (index_pairs) {
    pairs = *index_pairs;
  } else {
    int m = std::min(F.index_budget(), 8);
    for (int i = 1; i <= m; ++i)
      for (int j = 1; j <= m; ++j) pairs.emplace_back(i, j);
    if (F.index_budget() > m) pairs.emplace_back(1, F.index_budget());
  }

  detail::WitnessTracker tracker;
  std::uint64_t samples = 0;
  const int g = plan.grid_points_per_axis;
  for (const auto& [i, j] : pairs) {
    SelfMap fi = F.member(i);
    SelfMap fj = F.member(j);
    auto visit = [&](double x, double y) {
      double fx = fi.apply(x, atol);
      double fy = fj.apply(y, atol);
      double v = d(fx, fy) - alpha(d(x, y), d(x, fx), d(y, fy));
      const std::array<double, 4> c{static_cast<double>(i),
                                    static_cast<double>(j), x, y};
      tracker.offer(v, c);
      ++samples;
    };
    for (int ix = 0; ix < g; ++ix) {
      double x = grid_point(dom.lo, dom.hi, ix, g);
      for (int iy = 0; iy < g; ++iy) visit(x, grid_point(dom.lo, dom.hi, iy, g));
    }
    std::mt19937_64 rng(plan.seed);
    for (int r = 0; r < plan.random_samples; ++r) {
      double x = uniform_in(rng, dom.lo, dom.hi);
      double y = uniform_in(rng, dom.lo, dom.hi);
      visit(x, y);
    }
  }

  // Refine only the continuous coordinates; the winning index pair is fixed.
  if (tracker.has_candidate()) {
    int bi = static_cast<int>(tracker.best_coords()[0]);
    int bj = static_cast<int>(tracker.best_coords()[1]);
    double bx = tracker.best_coords()[2];
    double by = tracker.best_coords()[3];
    double x1 = detail::golden_max(
        [&](double x) {
          return family_contraction_violation(F, d, alpha, bi, bj, x, by, atol);
        },
        dom.lo, dom.hi);
    double v1 = family_contraction_violation(F, d, alpha, bi, bj, x1, by, atol);
    double bx2 = v1 > tracker.best_violation() ? x1 : bx;
    double y1 = detail::golden_max(
        [&](double y) {
          return family_contraction_violation(F, d, alpha, bi, bj, bx2, y, atol);
        },
        dom.lo, dom.hi);
    double v2 = family_contraction_violation(F, d, alpha, bi, bj, bx2, y1, atol);
    double best = std::max(v1, v2);
    const std::array<double, 4> refined{static_cast<double>(bi),
                                        static_cast<double>(bj), bx2,
                                        v2 >= v1 ? y1 : by};
    tracker.improve(best, refined);
  }

  static constexpr std::array<const char*, 4> names{"i", "j", "x", "y"};
  AxiomReport report =
      detail::finish_report("family-contraction", plan, samples, tracker, names);
  report.note = "index set truncated to " + std::to_string(pairs.size()) +
                " pairs (budget " + std::to_string(F.index_budget()) +
                "); the hypothesis quantifies over all i, j";
  return report;
}

}  // namespace disfix
