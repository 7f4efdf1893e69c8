#include "disfix/expr.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace disfix {
namespace {

TEST(ExprParse, GrammarForcedShapeOfAbsPlus) {
  Expression e = Expression::parse("abs(x-y)+x+y");
  // Left associativity forces root '+' with left subtree abs(x-y)+x.
  const auto* root = std::get_if<BinaryNode>(&e.root()->v);
  ASSERT_NE(root, nullptr);
  EXPECT_EQ(root->op, '+');
  EXPECT_EQ(detail::print_node(*root->lhs), "abs(x-y)+x");
  EXPECT_EQ(detail::print_node(*root->rhs), "y");
}

TEST(ExprParse, PrecedenceOfDivideTimes) {
  Expression e = Expression::parse("1/2*x + 1/3");
  EXPECT_EQ(e.str(), "1/2*x+1/3");
  double at2 = e.evaluate({{"x", 2.0}});
  EXPECT_DOUBLE_EQ(at2, 1.0 + 1.0 / 3.0);
  double at4 = e.evaluate({{"x", 4.0}});
  EXPECT_DOUBLE_EQ(at4, 2.0 + 1.0 / 3.0);
}

TEST(ExprParse, UnaryMinusBindsTighterThanTimes) {
  Expression e = Expression::parse("-x*y");
  double v = e.evaluate({{"x", 2.0}, {"y", 3.0}});
  EXPECT_DOUBLE_EQ(v, -6.0);
  EXPECT_EQ(e.str(), "-x*y");
  EXPECT_EQ(Expression::parse("-(x*y)").str(), "-(x*y)");
  EXPECT_EQ(Expression::parse("--x").str(), "--x");
}

TEST(ExprParse, TruncatedCallReportsOffset) {
  try {
    Expression::parse("min(x,");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 6u);
  }
}

TEST(ExprParse, ErrorCases) {
  EXPECT_THROW(Expression::parse(""), ParseError);
  EXPECT_THROW(Expression::parse("   "), ParseError);
  EXPECT_THROW(Expression::parse("foo(x)"), ParseError);   // unknown function
  EXPECT_THROW(Expression::parse("abs"), ParseError);      // reserved as variable
  EXPECT_THROW(Expression::parse("2x"), ParseError);       // no implicit product
  EXPECT_THROW(Expression::parse("x +"), ParseError);
  EXPECT_THROW(Expression::parse("(x"), ParseError);
  EXPECT_THROW(Expression::parse("abs(x, y)"), ParseError);  // arity
  EXPECT_THROW(Expression::parse("min(x)"), ParseError);     // arity
  EXPECT_THROW(Expression::parse("1."), ParseError);
  EXPECT_THROW(Expression::parse("1e"), ParseError);
  EXPECT_THROW(Expression::parse("X"), ParseError);  // identifiers are lowercase
}

TEST(ExprParse, NumberLiterals) {
  EXPECT_DOUBLE_EQ(Expression::parse("1e-3").evaluate({}), 1e-3);
  EXPECT_DOUBLE_EQ(Expression::parse("2.5E+4").evaluate({}), 2.5e4);
  EXPECT_DOUBLE_EQ(Expression::parse("0.125").evaluate({}), 0.125);
}

TEST(ExprFreeVariables, ReportsExactSet) {
  EXPECT_EQ(Expression::parse("abs(x-y)+x+y").free_variables(),
            (std::set<std::string>{"x", "y"}));
  EXPECT_EQ(Expression::parse("0.5*u").free_variables(),
            (std::set<std::string>{"u"}));
  EXPECT_TRUE(Expression::parse("3.0").free_variables().empty());
}

TEST(ExprEvaluate, DirectArithmetic) {
  Expression e = Expression::parse("abs(x-y)+x+y");
  EXPECT_DOUBLE_EQ(e.evaluate({{"x", 0.25}, {"y", 0.5}}), 1.0);
  EXPECT_DOUBLE_EQ(Expression::parse("x/4").evaluate({{"x", 1.0}}), 0.25);
}

TEST(ExprEvaluate, ErrorsNameTheOffendingNode) {
  Expression div = Expression::parse("x/y");
  EXPECT_THROW(div.evaluate({{"x", 1.0}, {"y", 0.0}}), EvalError);
  try {
    div.evaluate({{"x", 1.0}, {"y", 0.0}});
  } catch (const EvalError& e) {
    EXPECT_NE(std::string(e.what()).find("x/y"), std::string::npos);
  }
  EXPECT_THROW(Expression::parse("sqrt(x)").evaluate({{"x", -1.0}}), EvalError);
  EXPECT_THROW(Expression::parse("x+q").evaluate({{"x", 1.0}}), EvalError);
}

TEST(ExprEvaluate, PureBitForBit) {
  Expression e = Expression::parse("sqrt(x)*min(x,y)/max(y,0.3)-1/3");
  double first = e.evaluate({{"x", 0.7}, {"y", 0.2}});
  for (int i = 0; i < 10; ++i) {
    double again = e.evaluate({{"x", 0.7}, {"y", 0.2}});
    EXPECT_EQ(std::memcmp(&first, &again, sizeof first), 0);
  }
}

TEST(ExprEvaluate, AbsPlusNonnegativeOnNonnegativeInputs) {
  Expression e = Expression::parse("abs(x-y)+x+y");
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    double x = (rng() >> 11) * 0x1.0p-53 * 10.0;
    double y = (rng() >> 11) * 0x1.0p-53 * 10.0;
    EXPECT_GE(e.evaluate({{"x", x}, {"y", y}}), 0.0);
  }
}

// Random AST source generator for the round-trip property.
std::string random_source(std::mt19937_64& rng, int depth) {
  auto pick = [&](int n) { return static_cast<int>(rng() % n); };
  if (depth <= 0 || pick(4) == 0) {
    switch (pick(3)) {
      case 0: return std::to_string(pick(100)) + "." + std::to_string(pick(100) + 1);
      case 1: return std::string(1, static_cast<char>('x' + pick(3)));
      default: return std::to_string(pick(50));
    }
  }
  switch (pick(7)) {
    case 0: return "(" + random_source(rng, depth - 1) + "+" + random_source(rng, depth - 1) + ")";
    case 1: return "(" + random_source(rng, depth - 1) + "-" + random_source(rng, depth - 1) + ")";
    case 2: return "(" + random_source(rng, depth - 1) + "*" + random_source(rng, depth - 1) + ")";
    case 3: return "(" + random_source(rng, depth - 1) + "/" + random_source(rng, depth - 1) + ")";
    case 4: return "-" + random_source(rng, depth - 1);
    case 5: return "abs(" + random_source(rng, depth - 1) + ")";
    default:
      return "min(" + random_source(rng, depth - 1) + "," +
             random_source(rng, depth - 1) + ")";
  }
}

TEST(ExprRoundTrip, PrintParsePrintIsIdempotent) {
  const std::vector<std::string> sources = {
      "abs(x-y)+x+y", "1/2*x + 1/3", "-x*y", "-(x+y)", "min(x, max(y, 0.5))",
      "sqrt(x)/(1+y)", "x-y-z", "x-(y-z)", "2e3*x", "0.5*u",
  };
  for (const auto& src : sources) {
    std::string once = Expression::parse(src).str();
    std::string twice = Expression::parse(once).str();
    EXPECT_EQ(once, twice) << "source: " << src;
  }
  std::mt19937_64 rng(42);
  for (int i = 0; i < 500; ++i) {
    std::string src = random_source(rng, 5);
    std::string once = Expression::parse(src).str();
    std::string twice = Expression::parse(once).str();
    EXPECT_EQ(once, twice) << "source: " << src;
  }
}

}  // namespace
}  // namespace disfix
