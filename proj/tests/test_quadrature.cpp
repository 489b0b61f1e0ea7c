#include <doctest.h>

#include <cmath>
#include <numbers>

#include "densan/quadrature.hpp"

using namespace densan;

TEST_CASE("gauss-legendre integrates polynomials of degree 2n-1") {
  const auto r = gauss_legendre(8);
  for (int p = 0; p <= 15; ++p) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], p);
    CHECK(s == doctest::Approx(p % 2 ? 0.0 : 2.0 / (p + 1)).scale(1.0));
  }
}

TEST_CASE("sphere rules") {
  for (const auto& rule : {lebedev26(), product_sphere_rule(12)}) {
    double w = 0.0, x2 = 0.0, x4y2 = 0.0;
    for (std::size_t i = 0; i < rule.directions.size(); ++i) {
      const auto& d = rule.directions[i];
      w += rule.weights[i];
      x2 += rule.weights[i] * d[0] * d[0];
      x4y2 += rule.weights[i] * std::pow(d[0], 4) * d[1] * d[1];
      CHECK(norm(d) == doctest::Approx(1.0));
    }
    CHECK(w == doctest::Approx(4 * std::numbers::pi));
    CHECK(x2 == doctest::Approx(4 * std::numbers::pi / 3));
    CHECK(x4y2 == doctest::Approx(4 * std::numbers::pi / 35));
  }
}

TEST_CASE("multicenter quadrature of cusped integrands") {
  // int exp(-|y|) = 8 pi; int exp(-|y|) exp(-|y - c|) has a closed form in d = |c|:
  // pi (1 + d + d^2/3) exp(-d).
  const Vec3 c{0.0, 0.0, 1.3};
  const double d = 1.3;
  const auto res = integrate_multicenter({{0, 0, 0}, c}, {{}, {}}, 2, [&](const Vec3& y, std::span<double> out) {
    out[0] = std::exp(-norm(y));
    out[1] = std::exp(-norm(y)) * std::exp(-norm(y - c));
  });
  CHECK(res.converged);
  CHECK(res.values[0] == doctest::Approx(8 * std::numbers::pi).epsilon(1e-8));
  CHECK(res.values[1] == doctest::Approx(std::numbers::pi * (1 + d + d * d / 3) * std::exp(-d)).epsilon(1e-8));
}

TEST_CASE("a fixed level is covariant under translation of the centers") {
  auto f = [](const Vec3& shift) {
    const Vec3 a = shift, b = shift + Vec3{0.4, 0.0, 0.0};
    return integrate_multicenter_at_level({a, b}, {{}, {}}, 1,
                                          [&](const Vec3& y, std::span<double> out) {
                                            out[0] = std::exp(-norm(y - a) - 2 * norm(y - b));
                                          },
                                          2, 1.0)[0];
  };
  CHECK(f({0, 0, 0}) == doctest::Approx(f({3.0, -1.0, 2.0})).epsilon(1e-10));
}

TEST_CASE("exponential sampler density integrates to one") {
  const ExponentialSampler s(1.5);
  const auto res = integrate_multicenter({{0, 0, 0}}, {{}}, 1,
                                         [&](const Vec3& y, std::span<double> out) { out[0] = s.density(y); });
  CHECK(res.values[0] == doctest::Approx(1.0).epsilon(1e-8));
  const Vec3 p = s.map(0.5, 0.5, 0.5);
  CHECK(std::isfinite(norm(p)));
}

TEST_CASE("randomized Sobol integration of a product density") {
  // The integrand equal to the sampling density integrates to 1 at every node.
  const ExponentialSampler s(1.0);
  const auto r = qmc_integrate(
      2, 1.0, 1, [&](std::span<const Vec3> y, std::span<double> out) { out[0] = s.density(y[0]) * s.density(y[1]); },
      1024, 3, 5);
  CHECK(r.values[0] == doctest::Approx(1.0));
  const auto e = qmc_integrate(1, 1.0, 1,
                               [](std::span<const Vec3> y, std::span<double> out) {
                                 out[0] = std::exp(-2 * norm(y[0]));
                               },
                               1 << 14, 4, 6);
  // int exp(-2|y|) = 8 pi / 8 = pi
  CHECK(e.values[0] == doctest::Approx(std::numbers::pi).epsilon(1e-3));
  CHECK(e.errors[0] < 1e-2);
}
