#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <numbers>

#include "densan/density.hpp"
#include "densan/errors.hpp"

using namespace densan;

namespace {

const double kPi = std::numbers::pi;

double product_marginal(double a, const Vec3& x) { return a * a * a / kPi * std::exp(-2 * a * norm(x)); }

double fd_partial(const std::function<double(const Vec3&)>& f, const Vec3& t, const MultiIndex& alpha, double h) {
  for (std::size_t i = 0; i < 3; ++i) {
    if (alpha[i] == 0) continue;
    MultiIndex rest = alpha;
    rest.set(i, alpha[i] - 1);
    auto at = [&](double s) {
      Vec3 u = t;
      u[i] += s;
      return fd_partial(f, u, rest, h);
    };
    return (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
  }
  return f(t);
}

// Radial density of c e^{-a(r1+r2)}(1 + lambda r12 / 2), reduced to one-dimensional
// integrals: with b = 2a, rho(r) = c^2 e^{-b r} (I0 + lambda F(r) + lambda^2/4 G(r)),
// F(r) = int e^{-b|y|} |x - y| dy, G(r) = int e^{-b|y|} |x - y|^2 dy.
struct CorrelatedRadial {
  using LD = long double;
  LD b, lambda, c2 = 1;

  static LD integrate(const std::function<LD(LD)>& f, LD lo, LD hi) {
    return boost::math::quadrature::gauss_kronrod<LD, 61>::integrate(f, lo, hi, 15, 1e-18L);
  }
  LD F(LD r) const {
    const LD inner = integrate([&](LD s) { return s * s * std::exp(-b * s) * (r + s * s / (3 * r)); }, 0, r);
    const LD outer = integrate([&](LD s) { return s * s * std::exp(-b * s) * (s + r * r / (3 * s)); }, r, r + 80);
    return 4 * std::numbers::pi_v<LD> * (inner + outer);
  }
  LD G(LD r) const { return 4 * std::numbers::pi_v<LD> * (2 * r * r / (b * b * b) + 24 / (b * b * b * b * b)); }
  LD unnormalized(LD r) const {
    const LD I0 = 8 * std::numbers::pi_v<LD> / (b * b * b);
    return std::exp(-b * r) * (I0 + lambda * F(r) + lambda * lambda / 4 * G(r));
  }
  void normalize() {
    const LD total =
        integrate([&](LD r) { return 4 * std::numbers::pi_v<LD> * r * r * unnormalized(r); }, 0, 60);
    c2 = 1 / total;
  }
  LD rho(LD r) const { return c2 * unnormalized(r); }
  // d^k rho / dr^k by Richardson-extrapolated central differences.
  LD d(int k, LD r) const {
    auto st = [&](LD h) {
      if (k == 1) return (rho(r + h) - rho(r - h)) / (2 * h);
      if (k == 2) return (rho(r + h) - 2 * rho(r) + rho(r - h)) / (h * h);
      return (rho(r + 2 * h) - 2 * rho(r + h) + 2 * rho(r - h) - rho(r - 2 * h)) / (2 * h * h * h);
    };
    const LD h = 2e-2L;
    const LD a = st(h), bb = st(h / 2), c = st(h / 4);
    const LD r1 = (4 * bb - a) / 3, r2 = (4 * c - bb) / 3;
    return (16 * r2 - r1) / 15;
  }
};

}  // namespace

TEST_CASE("hydrogen density is the squared orbital") {
  const auto m = WavefunctionModel::hydrogenic_product({0.5});
  for (const Vec3& x : {Vec3{1, 0, 0}, Vec3{0.3, -0.2, 0.9}, Vec3{0, 0, 0}}) {
    CHECK(rho(m, x).value == doctest::Approx(product_marginal(0.5, x)).epsilon(1e-14));
  }
}

TEST_CASE("N = 2 product densities match separable closed forms") {
  const auto sym = WavefunctionModel::hydrogenic_product({1.0, 1.0});
  const auto asym = WavefunctionModel::hydrogenic_product({1.0, 0.5});
  for (const Vec3& x : {Vec3{1, 0, 0}, Vec3{0.2, 0.5, -0.4}, Vec3{0, 0, 2.5}}) {
    const auto r = rho(sym, x);
    CHECK(std::abs(r.value / product_marginal(1.0, x) - 1) < 1e-8);
    CHECK(std::abs(rho_hat(sym, x).value / (2 * r.value) - 1) < 1e-8);
    const double m1 = slot_marginal(asym, 1, x).value, m2 = slot_marginal(asym, 2, x).value;
    CHECK(std::abs(m1 / product_marginal(1.0, x) - 1) < 1e-8);
    CHECK(std::abs(m2 / product_marginal(0.5, x) - 1) < 1e-8);
    CHECK(rho_hat(asym, x).value == doctest::Approx(m1 + m2).epsilon(1e-10));
  }
}

TEST_CASE("density matrices of the product model") {
  const auto m = WavefunctionModel::hydrogenic_product({1.0, 1.0});
  auto orbital = [](const Vec3& x) { return std::sqrt(1.0 / kPi) * std::exp(-norm(x)); };
  const Vec3 x{0.5, 0.1, 0}, xp{-0.3, 0.4, 0.8};
  CHECK(gamma1(m, x, xp).value == doctest::Approx(2 * orbital(x) * orbital(xp)).epsilon(1e-8));
  CHECK(gamma1(m, x, x).value == doctest::Approx(rho_hat(m, x).value).epsilon(1e-8));
  CHECK(rho2(m, x, xp).value == doctest::Approx(rho2(m, xp, x).value).epsilon(1e-8));
  // rho2 for a product: 2 |phi(x)|^2 |phi(x')|^2
  CHECK(rho2(m, x, xp).value ==
        doctest::Approx(2 * std::pow(orbital(x) * orbital(xp), 2)).epsilon(1e-8));
  CHECK_THROWS_AS(rho2(WavefunctionModel::hydrogenic_product({1.0}), x, xp), UnsupportedError);
}

TEST_CASE("partition pieces sum to the density") {
  const auto m = WavefunctionModel::correlated_pair(0.5);
  const Vec3 x{0.8, 0.3, 0};
  const CutoffPair cut(0.5, 2);
  double sum = 0.0;
  for (const auto& t : all_partition_terms(2)) sum += rho_I(m, t, x, cut).value;
  CHECK(sum == doctest::Approx(rho(m, x).value).epsilon(1e-7));
}

TEST_CASE("expansion structure") {
  for (int n = 1; n <= 3; ++n) {
    for (const MultiIndex& alpha : multiindices_up_to(3, 3)) {
      if (alpha.is_zero()) continue;
      const Expansion e = expand_all(n, alpha);
      std::size_t roots = 0;
      for (const IntegralTerm& t : e.terms) {
        if (t.parent < 0) {
          ++roots;
          CHECK(t.outer == alpha);
          continue;
        }
        const IntegralTerm& p = e.terms[static_cast<std::size_t>(t.parent)];
        CHECK(t.outer.order() == p.outer.order() - 1);
        if (t.phi != p.phi) {
          CHECK(t.cluster.size() > p.cluster.size());
        } else {
          CHECK(t.cluster == p.cluster);
          CHECK(t.inner.order() == p.inner.order() + 1);
        }
        CHECK(t.cluster == cluster_of_term(t.phi));
      }
      CHECK(roots == (std::size_t{1} << (n * (n - 1) / 2)));
      for (int id : e.leaves) CHECK(e.terms[static_cast<std::size_t>(id)].is_leaf());
    }
  }
  const auto root = root_term(PhiTerm(2), MultiIndex{1, 0, 0});
  const auto kids = expand_derivative(root, 0);
  REQUIRE(kids.size() == 2);
  CHECK(kids[0].coefficient == doctest::Approx(1.0));  // sqrt|P| with P = {1}
  CHECK(kids[1].cluster.size() == 2);
  CHECK_THROWS(expand_derivative(root, 1));
}

TEST_CASE("derivatives of the product density match the closed form") {
  const auto m = WavefunctionModel::hydrogenic_product({1.0, 1.0});
  const Vec3 x{0.7, -0.4, 0.5};
  const auto table = rho_deriv_table(m, x, 0.4, 3);
  CHECK(table.size() == 20);
  auto f = [](const Vec3& y) { return product_marginal(1.0, y); };
  for (const auto& e : table) {
    const double want = fd_partial(f, x, e.alpha, 1e-3);
    CHECK(e.result.value == doctest::Approx(want).epsilon(1e-6).scale(1e-6));
  }
  CHECK_THROWS_AS(rho_deriv(m, MultiIndex{1, 0, 0}, Vec3{0.3, 0, 0}, 0.4), DomainError);
}

TEST_CASE("correlated density and derivatives against a semi-analytic radial oracle") {
  const auto m = WavefunctionModel::correlated_pair(0.5, 0.5);
  CorrelatedRadial oracle{1.0L, 0.5L};
  oracle.normalize();
  // Normalization of the model and of the oracle are computed independently.
  const long double r = 1;
  const double f0 = static_cast<double>(oracle.rho(r)), f1 = static_cast<double>(oracle.d(1, r)),
               f2 = static_cast<double>(oracle.d(2, r)), f3 = static_cast<double>(oracle.d(3, r));
  const Vec3 x{1, 0, 0};
  CHECK(rho(m, x).value == doctest::Approx(f0).epsilon(1e-8));
  const auto table = rho_deriv_table(m, x, 0.5, 3);
  auto find = [&](const MultiIndex& a) {
    for (const auto& e : table) {
      if (e.alpha == a) return e.result.value;
    }
    return std::nan("");
  };
  // Radial function at x = r e_1: d_xx = f'', d_yy = f'/r, d_xxx = f''', d_xyy = f''/r - f'/r^2.
  CHECK(find(MultiIndex{1, 0, 0}) == doctest::Approx(f1).epsilon(1e-7));
  CHECK(find(MultiIndex{2, 0, 0}) == doctest::Approx(f2).epsilon(1e-7));
  CHECK(find(MultiIndex{0, 2, 0}) == doctest::Approx(f1).epsilon(1e-7));
  CHECK(find(MultiIndex{3, 0, 0}) == doctest::Approx(f3).epsilon(1e-6));
  CHECK(find(MultiIndex{1, 2, 0}) == doctest::Approx(f2 - f1).epsilon(1e-6));
  CHECK(std::abs(find(MultiIndex{0, 1, 0})) < 1e-12);
}

TEST_CASE("finite-difference oracle agrees with closed-form derivatives") {
  const auto m = WavefunctionModel::hydrogenic_product({1.0, 1.0});
  const Vec3 x{0.9, 0.2, -0.3};
  FiniteDifferenceOracle fd(m, x, 2);
  auto f = [](const Vec3& y) { return product_marginal(1.0, y); };
  for (const MultiIndex& a : multiindices_up_to(3, 3)) {
    const auto r = fd.derivative(a);
    CHECK(r.raw.size() == 3);
    const double want = fd_partial(f, x, a, 1e-3);
    CHECK(std::abs(r.value - want) <= 3 * r.error + 1e-9 * std::abs(want) + 1e-10);
  }
}

TEST_CASE("slice coefficients of hydrogen across the radial direction") {
  // rho(x + t e_2) = e^{-sqrt(1 + t^2)} / (8 pi) = e^{-1} (1 - t^2/2 + t^4/4 - ...) / (8 pi)
  const auto m = WavefunctionModel::hydrogenic_product({0.5});
  const auto c = rho_slice_coefficients(m, {1, 0, 0}, {0, 1, 0}, 6, 0.5);
  REQUIRE(c.size() == 7);
  const double s = std::exp(-1.0) / (8 * kPi);
  CHECK(c[0] == doctest::Approx(s).epsilon(1e-12));
  CHECK(std::abs(c[1]) < 1e-15);
  CHECK(c[2] == doctest::Approx(-s / 2).epsilon(1e-12));
  CHECK(c[4] == doctest::Approx(s / 4).epsilon(1e-12));
}

TEST_CASE("spherical average and behaviour at the nucleus") {
  const auto h = WavefunctionModel::hydrogenic_product({0.5});
  // rho_tilde(r) = 4 a^3 e^{-2 a r}
  CHECK(rho_tilde(h, 0.7) == doctest::Approx(0.5 * std::exp(-0.7)).epsilon(1e-12));
  CHECK(cusp_ratio(h) == doctest::Approx(-1.0).epsilon(1e-4));
  const auto d2 = radial_derivs_at_zero(h, 2);
  CHECK(d2.stable);
  CHECK(d2.value == doctest::Approx(16 * std::pow(0.5, 5)).epsilon(1e-3));
  CHECK_THROWS_AS(radial_derivs_at_zero(h, 3), UnsupportedError);

  const auto p = WavefunctionModel::hydrogenic_product({1.0, 1.0});
  CHECK(cusp_ratio(p) == doctest::Approx(-2.0).epsilon(1e-4));
}

TEST_CASE("lebedev average agrees with the rotation-invariant shortcut") {
  const auto u = WavefunctionModel::user_callable(
      1, [](const Configuration& x) { return std::exp(-0.5 * norm(x[0])); }, -0.25, std::sqrt(0.125 / kPi));
  const auto h = WavefunctionModel::hydrogenic_product({0.5});
  CHECK(rho_tilde(u, 0.6) == doctest::Approx(rho_tilde(h, 0.6)).epsilon(1e-12));
}
