#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <variant>

#include "disfix/error.hpp"
#include "disfix/expr.hpp"
#include "disfix/metric.hpp"
#include "disfix/report.hpp"
#include "disfix/sampling.hpp"

namespace disfix {

class MapFamily;

namespace detail {

struct HarmonicShiftFamily {};
struct ExprFamily {
  Expression body;  // variables {x, n}
};

struct FamilyState {
  std::variant<HarmonicShiftFamily, ExprFamily> v;
  Domain domain;
  int index_budget = 64;

  double member_value(int n, double x) const {
    if (std::holds_alternative<HarmonicShiftFamily>(v)) {
      return x / (n + 3.0);
    }
    const std::array<Binding, 2> env{
        {{"x", x}, {"n", static_cast<double>(n)}}};
    return std::get<ExprFamily>(v).body.evaluate(env);
  }

  std::string describe() const {
    if (std::holds_alternative<HarmonicShiftFamily>(v)) return "harmonic_shift";
    return "expr(" + std::get<ExprFamily>(v).body.str() + ")";
  }
};

}  // namespace detail

/// A self-mapping of the domain. Outputs that escape the domain by at most
/// the given tolerance are clamped to the boundary; larger escapes signal
/// that the body is not a self-map and raise DomainError.
class SelfMap {
public:
  /// x -> a*x + b.
  static SelfMap affine(Domain dom, double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b)) {
      throw ConfigError("affine map: a and b must be finite");
    }
    return SelfMap(dom, Body{Affine{a, b}});
  }

  /// Expression body in variable {x}.
  static SelfMap from_expression(Domain dom, Expression body) {
    for (const auto& var : body.free_variables()) {
      if (var != "x") {
        throw ConfigError("map expression: variable '" + var +
                          "' not allowed (only x)");
      }
    }
    return SelfMap(dom, Body{ExprBody{std::move(body)}});
  }

  double apply(double x, double escape_atol = 1e-9) const {
    if (!domain_.contains(x)) {
      throw DomainError("map applied outside domain at x=" + format_double(x));
    }
    double y = raw(x);
    if (!domain_.contains(y)) {
      double escape = std::max(domain_.lo - y, y - domain_.hi);
      if (!(escape <= escape_atol)) {
        throw DomainError("map '" + describe() + "' escapes domain: T(" +
                          format_double(x) + ") = " + format_double(y));
      }
      y = domain_.clamp(y);
    }
    return y;
  }

  double operator()(double x) const { return apply(x); }

  /// Body value before self-map clamping (for escape measurement).
  double raw_value(double x) const {
    if (!domain_.contains(x)) {
      throw DomainError("map applied outside domain at x=" + format_double(x));
    }
    return raw(x);
  }

  const Domain& domain() const { return domain_; }

  std::string describe() const {
    if (const auto* a = std::get_if<Affine>(&body_.v)) {
      return "affine(" + format_double(a->a) + ", " + format_double(a->b) + ")";
    }
    if (const auto* f = std::get_if<FamilyMember>(&body_.v)) {
      return f->state->describe() + "[n=" + std::to_string(f->n) + "]";
    }
    return "expr(" + std::get<ExprBody>(body_.v).body.str() + ")";
  }

private:
  friend class MapFamily;

  struct Affine {
    double a;
    double b;
  };
  struct ExprBody {
    Expression body;
  };
  struct FamilyMember {
    std::shared_ptr<const detail::FamilyState> state;
    int n;
  };
  struct Body {
    std::variant<Affine, ExprBody, FamilyMember> v;
  };

  SelfMap(Domain dom, Body body) : domain_(dom), body_(std::move(body)) {
    validate(domain_);
  }

  double raw(double x) const {
    if (const auto* a = std::get_if<Affine>(&body_.v)) {
      return a->a * x + a->b;
    }
    if (const auto* f = std::get_if<FamilyMember>(&body_.v)) {
      return f->state->member_value(f->n, x);
    }
    const std::array<Binding, 1> env{{{"x", x}}};
    return std::get<ExprBody>(body_.v).body.evaluate(env);
  }

  Domain domain_;
  Body body_;
};

/// Checks T(x) stays in the domain on the sampling grid. Run at load time.
inline AxiomReport check_self_map(const SelfMap& T, const SamplingPlan& plan) {
  validate(plan);
  const Domain& dom = T.domain();
  detail::WitnessTracker tracker;
  std::uint64_t samples = 0;
  auto escape = [&](double x) {
    double y = T.raw_value(x);
    return std::max({dom.lo - y, y - dom.hi, 0.0});
  };
  const int g = plan.grid_points_per_axis;
  for (int i = 0; i < g; ++i) {
    double x = grid_point(dom.lo, dom.hi, i, g);
    const std::array<double, 1> c{x};
    tracker.offer(escape(x), c);
    ++samples;
  }
  std::mt19937_64 rng(plan.seed);
  for (int r = 0; r < plan.random_samples; ++r) {
    double x = uniform_in(rng, dom.lo, dom.hi);
    const std::array<double, 1> c{x};
    tracker.offer(escape(x), c);
    ++samples;
  }
  static constexpr std::array<const char*, 1> names{"x"};
  return detail::finish_report("self-map", plan, samples, tracker, names);
}

/// An indexed family {f_n} of self-mappings, n = 1..index_budget.
/// Verification over all of N truncates to the budget; reports say so.
class MapFamily {
public:
  /// f_n(x) = x / (n + 3).
  static MapFamily harmonic_shift(Domain dom, int index_budget = 64) {
    return MapFamily(detail::FamilyState{detail::HarmonicShiftFamily{}, dom,
                                         check_budget(index_budget)});
  }

  /// Template expression in variables {x, n}.
  static MapFamily from_expression(Domain dom, Expression template_body,
                                   int index_budget = 64) {
    for (const auto& var : template_body.free_variables()) {
      if (var != "x" && var != "n") {
        throw ConfigError("family expression: variable '" + var +
                          "' not allowed (only x, n)");
      }
    }
    return MapFamily(detail::FamilyState{
        detail::ExprFamily{std::move(template_body)}, dom,
        check_budget(index_budget)});
  }

  /// The n-th member as a SelfMap; 1 <= n <= index_budget.
  SelfMap member(int n) const {
    if (n < 1 || n > state_->index_budget) {
      throw ConfigError("family index " + std::to_string(n) +
                        " out of budget [1, " +
                        std::to_string(state_->index_budget) + "]");
    }
    return SelfMap(state_->domain,
                   SelfMap::Body{SelfMap::FamilyMember{state_, n}});
  }

  int index_budget() const { return state_->index_budget; }
  const Domain& domain() const { return state_->domain; }
  std::string describe() const { return state_->describe(); }

private:
  explicit MapFamily(detail::FamilyState state)
      : state_(std::make_shared<const detail::FamilyState>(std::move(state))) {
    validate(state_->domain);
  }

  static int check_budget(int budget) {
    if (budget < 1) throw ConfigError("family index_budget must be >= 1");
    return budget;
  }

  std::shared_ptr<const detail::FamilyState> state_;
};

/// Fixed point of x -> a*x + b for a != 1; used as an analytic oracle.
inline double affine_fixed_point(double a, double b) {
  if (a == 1.0) throw ConfigError("affine map with a=1 has no unique fixed point");
  return b / (1.0 - a);
}

}  // namespace disfix
