#include <doctest.h>

#include <cmath>

#include "densan/errors.hpp"
#include "densan/jet.hpp"

using namespace densan;

TEST_CASE("layout respects order and caps") {
  const auto L = JetLayout::get(2, 4, {1, 4});
  for (std::size_t i = 0; i < L->size(); ++i) {
    CHECK(L->term(i).order() <= 4);
    CHECK(L->term(i)[0] <= 1);
    CHECK(L->index_of(L->term(i)) == i);
    if (i > 0) CHECK(L->term(i - 1).order() <= L->term(i).order());
  }
  CHECK_FALSE(L->find(MultiIndex{2, 0}).has_value());
  CHECK(L->size() == 9);  // (0,0..4) and (1,0..3)
}

TEST_CASE("univariate series of exp, sqrt and reciprocal") {
  const auto L = JetLayout::get(1, 10);
  const Jet t = Jet::variable(L, 0, 0.0);
  const Jet e = exp(t);
  double fact = 1.0;
  for (int k = 0; k <= 10; ++k) {
    if (k > 0) fact *= k;
    CHECK(e.coefficient(MultiIndex{k}) == doctest::Approx(1.0 / fact));
  }
  const Jet g = reciprocal(1.0 + (-1.0) * t);  // 1/(1-t)
  for (int k = 0; k <= 10; ++k) CHECK(g.coefficient(MultiIndex{k}) == doctest::Approx(1.0));
  const Jet s = sqrt(1.0 + t);  // generalized binomial series
  double c = 1.0;
  for (int k = 0; k <= 10; ++k) {
    CHECK(s.coefficient(MultiIndex{k}) == doctest::Approx(c).epsilon(1e-12));
    c *= (0.5 - k) / (k + 1.0);
  }
  CHECK_THROWS_AS(reciprocal(t), SingularityError);
  CHECK_THROWS_AS(sqrt(t), SingularityError);
}

TEST_CASE("multivariate derivatives of a composed function") {
  // f(x, y) = exp(x y) / sqrt(1 + x^2 + y^2) at (0.3, -0.7); oracle by central differences.
  const double x0 = 0.3, y0 = -0.7;
  auto f = [](double x, double y) { return std::exp(x * y) / std::sqrt(1.0 + x * x + y * y); };
  const auto L = JetLayout::get(2, 4);
  const Jet x = Jet::variable(L, 0, x0), y = Jet::variable(L, 1, y0);
  const Jet j = exp(x * y) * reciprocal(sqrt(1.0 + square(x) + square(y)));
  CHECK(j.value() == doctest::Approx(f(x0, y0)));
  const double h = 1e-3;
  const double fx = (f(x0 + h, y0) - f(x0 - h, y0)) / (2 * h);
  const double fxy = (f(x0 + h, y0 + h) - f(x0 + h, y0 - h) - f(x0 - h, y0 + h) + f(x0 - h, y0 - h)) / (4 * h * h);
  const double fyy = (f(x0, y0 + h) - 2 * f(x0, y0) + f(x0, y0 - h)) / (h * h);
  CHECK(j.derivative(MultiIndex{1, 0}) == doctest::Approx(fx).epsilon(1e-6));
  CHECK(j.derivative(MultiIndex{1, 1}) == doctest::Approx(fxy).epsilon(1e-5));
  CHECK(j.derivative(MultiIndex{0, 2}) == doctest::Approx(fyy).epsilon(1e-5));
}

TEST_CASE("factorials stay finite at high order") {
  const auto L = JetLayout::get(1, 24);
  const Jet e = exp(Jet::variable(L, 0, 0.0));
  // every derivative of exp at 0 is 1
  CHECK(e.derivative(MultiIndex{24}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.derivative(MultiIndex{21}) == doctest::Approx(1.0).epsilon(1e-12));
}
