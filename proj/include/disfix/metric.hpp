#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <variant>

#include "disfix/error.hpp"
#include "disfix/expr.hpp"
#include "disfix/report.hpp"
#include "disfix/sampling.hpp"

namespace disfix {

/// Closed real interval realizing the carrier set.
struct Domain {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
  double clamp(double x) const { return std::min(std::max(x, lo), hi); }
  double width() const { return hi - lo; }
};

inline void validate(const Domain& d) {
  if (!std::isfinite(d.lo) || !std::isfinite(d.hi) || d.lo > d.hi) {
    throw ConfigError("domain: lo and hi must be finite with lo <= hi");
  }
}

/// A dislocated metric on a closed interval: symmetric, triangle inequality,
/// d(x,y)=0 => x=y, but self-distance d(x,x) may be positive.
///
/// Values are nonnegative by contract; a body that evaluates negative is an
/// invalid definition and evaluation throws rather than returning the value.
class DislocatedMetric {
public:
  /// |x-y| + x + y.
  static DislocatedMetric abs_plus(Domain dom) {
    return DislocatedMetric(dom, Body{AbsPlus{}});
  }

  /// |x-y| + |x-c| + |y-c|; self-distance at x is 2|x-c|.
  static DislocatedMetric centered(Domain dom, double c) {
    if (!std::isfinite(c)) throw ConfigError("centered metric: c must be finite");
    return DislocatedMetric(dom, Body{Centered{c}});
  }

  /// s * inner(x,y) with s > 0.
  static DislocatedMetric scaled(DislocatedMetric inner, double s) {
    if (!(s > 0.0)) throw ConfigError("scaled metric: factor must be > 0");
    Domain dom = inner.domain();
    return DislocatedMetric(
        dom, Body{Scaled{std::make_shared<DislocatedMetric>(std::move(inner)), s}});
  }

  /// Expression body in variables {x, y}.
  static DislocatedMetric from_expression(Domain dom, Expression body) {
    for (const auto& var : body.free_variables()) {
      if (var != "x" && var != "y") {
        throw ConfigError("metric expression: variable '" + var +
                          "' not allowed (only x, y)");
      }
    }
    return DislocatedMetric(dom, Body{ExprBody{std::move(body)}});
  }

  /// d(x,y). Throws DomainError if a point is outside the domain and
  /// EvalError if the body produces a negative value.
  double operator()(double x, double y) const {
    if (!domain_.contains(x) || !domain_.contains(y)) {
      throw DomainError("metric evaluated outside domain at (" +
                        format_double(x) + ", " + format_double(y) + ")");
    }
    double v = raw(x, y);
    if (v < 0.0) {
      throw EvalError("metric '" + describe() + "' produced negative value " +
                      format_double(v) + " at (" + format_double(x) + ", " +
                      format_double(y) + ")");
    }
    return v;
  }

  const Domain& domain() const { return domain_; }

  std::string describe() const {
    if (std::holds_alternative<AbsPlus>(body_.v)) return "absplus";
    if (const auto* c = std::get_if<Centered>(&body_.v)) {
      return "centered(" + format_double(c->c) + ")";
    }
    if (const auto* s = std::get_if<Scaled>(&body_.v)) {
      return "scale(" + s->inner->describe() + ", " + format_double(s->factor) +
             ")";
    }
    return "expr(" + std::get<ExprBody>(body_.v).body.str() + ")";
  }

private:
  struct AbsPlus {};
  struct Centered {
    double c;
  };
  struct Scaled {
    std::shared_ptr<const DislocatedMetric> inner;
    double factor;
  };
  struct ExprBody {
    Expression body;
  };
  struct Body {
    std::variant<AbsPlus, Centered, Scaled, ExprBody> v;
  };

  DislocatedMetric(Domain dom, Body body)
      : domain_(dom), body_(std::move(body)) {
    validate(domain_);
  }

  double raw(double x, double y) const {
    if (std::holds_alternative<AbsPlus>(body_.v)) {
      return std::fabs(x - y) + x + y;
    }
    if (const auto* c = std::get_if<Centered>(&body_.v)) {
      return std::fabs(x - y) + std::fabs(x - c->c) + std::fabs(y - c->c);
    }
    if (const auto* s = std::get_if<Scaled>(&body_.v)) {
      return s->factor * (*s->inner)(x, y);
    }
    const std::array<Binding, 2> env{{{"x", x}, {"y", y}}};
    return std::get<ExprBody>(body_.v).body.evaluate(env);
  }

  Domain domain_;
  Body body_;
};

// Pointwise violation measures. The checkers maximize these over samples;
// tests re-evaluate them at reported witnesses.

inline double symmetry_violation(const DislocatedMetric& m, double x, double y) {
  return std::fabs(m(x, y) - m(y, x));
}

/// Positive only when two separated points sit at (numerically) zero
/// distance, which contradicts d(x,y)=0 => x=y.
inline double identity_violation(const DislocatedMetric& m, double x, double y,
                                 double atol) {
  return m(x, y) <= atol ? std::fabs(x - y) : 0.0;
}

inline double triangle_violation(const DislocatedMetric& m, double x, double y,
                                 double z) {
  return m(x, y) - m(x, z) - m(z, y);
}

namespace detail {

/// Grid + seeded random pairs over domain^2, tracking the worst slack.
template <class F2>  // F2(x, y) -> violation
AxiomReport run_pair_check(const char* axiom, const Domain& dom,
                           const SamplingPlan& plan, F2&& violation,
                           bool polish) {
  validate(plan);
  WitnessTracker tracker;
  std::uint64_t samples = 0;
  const int g = plan.grid_points_per_axis;
  for (int ix = 0; ix < g; ++ix) {
    double x = grid_point(dom.lo, dom.hi, ix, g);
    for (int iy = 0; iy < g; ++iy) {
      double y = grid_point(dom.lo, dom.hi, iy, g);
      const std::array<double, 2> c{x, y};
      tracker.offer(violation(x, y), c);
      ++samples;
    }
  }
  std::mt19937_64 rng(plan.seed);
  for (int r = 0; r < plan.random_samples; ++r) {
    double x = uniform_in(rng, dom.lo, dom.hi);
    double y = uniform_in(rng, dom.lo, dom.hi);
    const std::array<double, 2> c{x, y};
    tracker.offer(violation(x, y), c);
    ++samples;
  }
  if (polish) {
    const std::array<std::pair<double, double>, 2> bounds{
        std::pair{dom.lo, dom.hi}, std::pair{dom.lo, dom.hi}};
    polish_candidate(
        tracker,
        [&](std::span<const double> c) { return violation(c[0], c[1]); },
        bounds);
  }
  static constexpr std::array<const char*, 2> names{"x", "y"};
  return finish_report(axiom, plan, samples, tracker, names);
}

template <class F3>  // F3(x, y, z) -> violation
AxiomReport run_triple_check(const char* axiom, const Domain& dom,
                             const SamplingPlan& plan, F3&& violation,
                             bool polish) {
  validate(plan);
  WitnessTracker tracker;
  std::uint64_t samples = 0;
  const int g = triple_grid_points(plan);
  for (int ix = 0; ix < g; ++ix) {
    double x = grid_point(dom.lo, dom.hi, ix, g);
    for (int iy = 0; iy < g; ++iy) {
      double y = grid_point(dom.lo, dom.hi, iy, g);
      for (int iz = 0; iz < g; ++iz) {
        double z = grid_point(dom.lo, dom.hi, iz, g);
        const std::array<double, 3> c{x, y, z};
        tracker.offer(violation(x, y, z), c);
        ++samples;
      }
    }
  }
  std::mt19937_64 rng(plan.seed);
  for (int r = 0; r < plan.random_samples; ++r) {
    double x = uniform_in(rng, dom.lo, dom.hi);
    double y = uniform_in(rng, dom.lo, dom.hi);
    double z = uniform_in(rng, dom.lo, dom.hi);
    const std::array<double, 3> c{x, y, z};
    tracker.offer(violation(x, y, z), c);
    ++samples;
  }
  if (polish) {
    const std::array<std::pair<double, double>, 3> bounds{
        std::pair{dom.lo, dom.hi}, std::pair{dom.lo, dom.hi},
        std::pair{dom.lo, dom.hi}};
    polish_candidate(
        tracker,
        [&](std::span<const double> c) { return violation(c[0], c[1], c[2]); },
        bounds);
  }
  static constexpr std::array<const char*, 3> names{"x", "y", "z"};
  return finish_report(axiom, plan, samples, tracker, names);
}

}  // namespace detail

/// Axiom (i): d(x,y) = d(y,x) at every sampled pair.
inline AxiomReport check_symmetry(const DislocatedMetric& m,
                                  const SamplingPlan& plan) {
  return detail::run_pair_check(
      "symmetry", m.domain(), plan,
      [&](double x, double y) { return symmetry_violation(m, x, y); },
      /*polish=*/true);
}

/// Axiom (ii): no separated sampled pair may have d(x,y) ~ 0.
inline AxiomReport check_identity(const DislocatedMetric& m,
                                  const SamplingPlan& plan) {
  return detail::run_pair_check(
      "identity", m.domain(), plan,
      [&](double x, double y) {
        return identity_violation(m, x, y, plan.violation_atol);
      },
      /*polish=*/false);
}

/// Axiom (iii): d(x,y) <= d(x,z) + d(z,y) at every sampled triple.
inline AxiomReport check_triangle(const DislocatedMetric& m,
                                  const SamplingPlan& plan) {
  return detail::run_triple_check(
      "triangle", m.domain(), plan,
      [&](double x, double y, double z) {
        return triangle_violation(m, x, y, z);
      },
      /*polish=*/true);
}

}  // namespace disfix
