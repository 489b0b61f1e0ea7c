#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "densan/errors.hpp"
#include "densan/wavefunctions.hpp"

using namespace densan;

namespace {

Configuration random_config(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.2);
  Configuration x(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) x[static_cast<std::size_t>(j)] = {g(rng), g(rng), g(rng)};
  return x;
}

double fd_laplacian(const WavefunctionModel& m, const Configuration& x) {
  const double h = 1e-3;
  double lap = 0.0;
  const std::size_t dim = 3 * x.size();
  for (std::size_t i = 0; i < dim; ++i) {
    std::vector<double> v(dim, 0.0);
    v[i] = 1.0;
    const double f0 = m.value(x);
    lap += (-m.value(x.shifted(v, 2 * h)) + 16 * m.value(x.shifted(v, h)) - 30 * f0 + 16 * m.value(x.shifted(v, -h)) -
            m.value(x.shifted(v, -2 * h))) /
           (12 * h * h);
  }
  return lap;
}

double local_energy(const WavefunctionModel& m, const PotentialSpec& spec, const Configuration& x) {
  return (-laplacian_psi(m, x) + potential_value(spec, x) * m.value(x)) / m.value(x);
}

}  // namespace

TEST_CASE("hydrogenic product normalization and energy") {
  const auto m = WavefunctionModel::hydrogenic_product({0.5});
  CHECK(m.value(Configuration{{0, 0, 0}}) == doctest::Approx(std::sqrt(0.125 / std::numbers::pi)));
  CHECK(m.nominal_energy() == doctest::Approx(-0.25));
  CHECK(m.exchange_symmetric());
  CHECK_FALSE(WavefunctionModel::hydrogenic_product({1.0, 0.5}).exchange_symmetric());
  CHECK_THROWS_AS(WavefunctionModel::hydrogenic_product({}), ConfigError);
  CHECK_THROWS_AS(m.value(Configuration{{0, 0, 0}, {1, 0, 0}}), DimensionMismatch);
}

TEST_CASE("correlated pair normalization against an independent Monte Carlo estimate") {
  // Sample both electrons from b^3/(8 pi) exp(-b r) with b = 2a; E[(1 + lambda r12/2)^2] * (8 pi / b^3)^2 = 1/c^2.
  const double a = 0.5, lambda = 0.5, b = 2 * a;
  const auto m = WavefunctionModel::correlated_pair(a, lambda);
  std::mt19937_64 rng(21);
  std::gamma_distribution<double> radius(3.0, 1.0 / b);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto draw = [&] {
    const double r = radius(rng), c = 2 * u(rng) - 1, p = 2 * std::numbers::pi * u(rng), s = std::sqrt(1 - c * c);
    return Vec3{r * s * std::cos(p), r * s * std::sin(p), r * c};
  };
  double sum = 0.0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    const double f = 1 + 0.5 * lambda * norm(draw() - draw());
    sum += f * f;
  }
  const double base = 8 * std::numbers::pi / (b * b * b);
  const double inv_c2 = base * base * sum / n;
  CHECK(m.normalization() * m.normalization() * inv_c2 == doctest::Approx(1.0).epsilon(5e-3));
}

TEST_CASE("laplacian matches finite differences") {
  std::mt19937_64 rng(8);
  const auto h = WavefunctionModel::hydrogenic_product({0.7, 1.1});
  const auto c = WavefunctionModel::correlated_pair(0.6, 0.5);
  for (int s = 0; s < 20; ++s) {
    const Configuration x = random_config(2, rng);
    CHECK(laplacian_psi(h, x) == doctest::Approx(fd_laplacian(h, x)).epsilon(1e-6));
    CHECK(laplacian_psi(c, x) == doctest::Approx(fd_laplacian(c, x)).epsilon(1e-6));
  }
}

TEST_CASE("exact eigenfunctions have vanishing residual") {
  const auto h1 = WavefunctionModel::hydrogenic_product({0.5});
  const auto r1 = eigen_residual(h1, PotentialSpec::coulomb_atom(1.0, 1), 0.1, 20000, 1);
  CHECK(r1.residual < 1e-10);
  auto spec = PotentialSpec::coulomb_atom(2.0, 2);
  spec.include_repulsion = false;
  const auto h2 = WavefunctionModel::hydrogenic_product({1.0, 1.0});
  CHECK(eigen_residual(h2, spec, 0.1, 20000, 2).residual < 1e-10);
  // With repulsion switched on the product is no longer exact.
  CHECK(eigen_residual(h2, PotentialSpec::coulomb_atom(2.0, 2), 0.1, 20000, 2).residual > 1e-3);
}

TEST_CASE("lambda = 1/2 cancels the electron-electron singularity of the local energy") {
  const auto spec = PotentialSpec::coulomb_atom(1.0, 2);
  auto spread = [&](double lambda) {
    const auto m = WavefunctionModel::correlated_pair(0.5, lambda);
    const Vec3 x1{0.8, 0.3, -0.2};
    const double e1 = local_energy(m, spec, Configuration{x1, x1 + Vec3{1e-3, 0, 0}});
    const double e2 = local_energy(m, spec, Configuration{x1, x1 + Vec3{1e-5, 0, 0}});
    return std::abs(e1 - e2);
  };
  CHECK(spread(0.5) < 1e-2);
  CHECK(spread(0.3) > 1e3);
}

TEST_CASE("jet derivatives agree with the user-callable fallback") {
  const auto c = WavefunctionModel::correlated_pair(0.5, 0.5);
  const double norm_c = c.normalization();
  const auto u = WavefunctionModel::user_callable(
      2,
      [](const Configuration& x) {
        return std::exp(-0.5 * (norm(x[0]) + norm(x[1]))) * (1.0 + 0.25 * norm(x[0] - x[1]));
      },
      -0.5, norm_c);
  const Configuration x{{0.9, 0.1, -0.4}, {-0.5, 0.7, 0.3}};
  const std::vector<std::vector<double>> dirs{{1, 0, 0, 0, 0, 0}, {0, 0, 0, 0.6, 0.8, 0}};
  const auto layout = JetLayout::get(2, 3);
  const auto exact = c.directional_derivatives(x, dirs, layout);
  const auto fd = u.directional_derivatives(x, dirs, layout);
  for (std::size_t i = 0; i < layout->size(); ++i) {
    CHECK(fd[i] == doctest::Approx(exact[i]).epsilon(1e-4).scale(1e-3));
  }
}

TEST_CASE("cluster derivative of psi moves the cluster coordinate") {
  const auto m = WavefunctionModel::hydrogenic_product({0.5, 0.8});
  const Configuration x{{0.9, 0.1, -0.4}, {-0.5, 0.7, 0.3}};
  const ClusterSet P({1, 2}, 2);
  ClusterMultiIndex alpha;
  alpha.add(P, MultiIndex{0, 1, 0});
  const auto v = cluster_direction(P, 1);
  const double h = 1e-4;
  const double fd = (8 * (m.value(x.shifted(v, h)) - m.value(x.shifted(v, -h))) -
                     (m.value(x.shifted(v, 2 * h)) - m.value(x.shifted(v, -2 * h)))) /
                    (12 * h);
  CHECK(cluster_derivative_psi(m, alpha, x) == doctest::Approx(fd).epsilon(1e-8));
}

TEST_CASE("cluster L2 norm of hydrogen outside a ball") {
  // ||psi||^2 over |x| > eps is exp(-2 a eps)(1 + 2 a eps + 2 a^2 eps^2).
  const double a = 0.5, eps = 1.0;
  const auto m = WavefunctionModel::hydrogenic_product({a});
  const auto est = cluster_l2_norm(m, {ClusterSet({1}, 1)}, MultiIndex{0, 0, 0}, eps, 200000, 3);
  const double want = std::sqrt(std::exp(-2 * a * eps) * (1 + 2 * a * eps + 2 * a * a * eps * eps));
  CHECK(std::abs(est.value - want) < 4 * est.stderr_estimate + 1e-3);
  const auto table = cluster_norm_table(m, {ClusterSet({1}, 1)}, eps, 2, 50000, 3);
  CHECK(table.size() == 10);
  for (const auto& e : table) CHECK(std::isfinite(e.l1.value));
}
