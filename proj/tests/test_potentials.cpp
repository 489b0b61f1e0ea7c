#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "densan/errors.hpp"
#include "densan/potentials.hpp"

using namespace densan;

namespace {

double g_coulomb(const Vec3& t) { return 1.0 / norm(t); }

// Mixed partials of a scalar field by nested fourth-order central differences.
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

Configuration random_config(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.5);
  Configuration x(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) x[static_cast<std::size_t>(j)] = {g(rng), g(rng), g(rng)};
  return x;
}

}  // namespace

TEST_CASE("coulomb tensor matches closed-form first and second derivatives") {
  const Vec3 t{0.4, -0.9, 1.3};
  const double r = norm(t);
  for (int i = 0; i < 3; ++i) {
    MultiIndex a(3);
    a.set(static_cast<std::size_t>(i), 1);
    CHECK(radial_derivative_tensor(a, t) == doctest::Approx(-t[i] / (r * r * r)).epsilon(1e-13));
    for (int j = 0; j < 3; ++j) {
      MultiIndex b = a;
      b.increment(static_cast<std::size_t>(j));
      const double want = (3 * t[i] * t[j] - (i == j ? r * r : 0.0)) / std::pow(r, 5);
      CHECK(radial_derivative_tensor(b, t) == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("coulomb tensor is harmonic at every order") {
  // Delta partial^beta (1/r) = 0 away from the origin.
  const RadialTensorTable table({0.7, 0.2, -0.5}, 8);
  for (const MultiIndex& beta : multiindices_up_to(3, 6)) {
    double lap = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      MultiIndex b = beta;
      b.increment(i, 2);
      lap += table.derivative(b);
      scale += std::abs(table.derivative(b));
    }
    CHECK(std::abs(lap) <= 1e-11 * scale);
  }
}

TEST_CASE("coulomb and yukawa tensors match finite differences") {
  const Vec3 t{1.1, 0.3, -0.6};
  const auto yuk = Interaction::yukawa(0.8);
  auto gy = [&](const Vec3& u) { return std::exp(-0.8 * norm(u)) / norm(u); };
  for (const MultiIndex& a : multiindices_up_to(3, 3)) {
    if (a.is_zero()) continue;
    CHECK(radial_derivative_tensor(a, t) == doctest::Approx(fd_partial(g_coulomb, t, a, 1e-3)).epsilon(1e-6));
    CHECK(radial_derivative_tensor(a, t, yuk) == doctest::Approx(fd_partial(gy, t, a, 1e-3)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(radial_derivative_tensor(MultiIndex{1, 0, 0}, Vec3{0, 0, 0}), SingularityError);
}

TEST_CASE("potential value for an atom") {
  const auto spec = PotentialSpec::coulomb_atom(2.0, 2);
  const Configuration x{{1, 0, 0}, {0, 2, 0}};
  CHECK(potential_value(spec, x) == doctest::Approx(-2.0 - 1.0 + 1.0 / std::sqrt(5.0)));
  PotentialSpec bad = spec;
  bad.nuclei.push_back(bad.nuclei.front());
  CHECK_THROWS(bad.validate());
}

TEST_CASE("cluster derivatives: moving terms match differences, others vanish exactly") {
  PotentialSpec spec;
  spec.n_electrons = 3;
  spec.nuclei = {{{0, 0, 0}, 2.0, {}}, {{1.5, 0, 0}, 1.0, Interaction::yukawa(0.5)}};
  spec.validate();
  std::mt19937_64 rng(11);
  const std::vector<ClusterSet> Ps{ClusterSet({1}, 3), ClusterSet({1, 2}, 3), ClusterSet({2, 3}, 3)};
  int zeros = 0;
  for (int s = 0; s < 30; ++s) {
    const Configuration x = random_config(3, rng);
    for (const ClusterSet& P : Ps) {
      for (int axis = 0; axis < 3; ++axis) {
        ClusterMultiIndex alpha;
        alpha.add(P, MultiIndex::unit(3, static_cast<std::size_t>(axis)));
        const auto v = cluster_direction(P, axis);
        const double h = 1e-4;
        const double fd = (8.0 * (potential_value(spec, x.shifted(v, h)) - potential_value(spec, x.shifted(v, -h))) -
                           (potential_value(spec, x.shifted(v, 2 * h)) - potential_value(spec, x.shifted(v, -2 * h)))) /
                          (12.0 * h);
        const double exact = cluster_derivative_of_V(spec, alpha, x);
        CHECK(std::abs(fd - exact) <= 1e-6 * std::max(1.0, std::abs(exact)));
      }
      for (const MultiIndex& a : multiindices_up_to(3, 4)) {
        if (a.is_zero()) continue;
        ClusterMultiIndex alpha;
        alpha.add(P, a);
        double sum = 0.0;
        for (const auto& d : cluster_derivative_terms(spec, alpha, x)) {
          if (d.relation != PotentialTermDerivative::Relation::moving) {
            CHECK(d.value == 0.0);
            ++zeros;
          }
          sum += d.value;
        }
        CHECK(sum == doctest::Approx(cluster_derivative_of_V(spec, alpha, x)).epsilon(1e-12));
      }
    }
  }
  CHECK(zeros > 0);
}

TEST_CASE("cluster derivative of a pair term carries the (1[j in P] - 1[k in P])/sqrt|P| factor") {
  PotentialSpec spec;
  spec.n_electrons = 3;
  spec.include_repulsion = false;
  spec.nuclei = {{{0, 0, 0}, 1.0, {}}};
  const Configuration x{{1, 0.2, 0}, {-0.3, 1, 0.4}, {0.5, -0.6, 1.2}};
  // Only electron-nucleus terms: partial_{x_P} V = -sum_{j in P} partial g(x_j) / sqrt|P|.
  const ClusterSet P({1, 3}, 3);
  ClusterMultiIndex alpha;
  alpha.add(P, MultiIndex{0, 0, 1});
  const double want = -(radial_derivative_tensor(MultiIndex{0, 0, 1}, x.electron(1)) +
                        radial_derivative_tensor(MultiIndex{0, 0, 1}, x.electron(3))) /
                      std::sqrt(2.0);
  CHECK(cluster_derivative_of_V(spec, alpha, x) == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("potential growth fit and its stability") {
  const auto spec = PotentialSpec::coulomb_atom(1.0, 2);
  const std::vector<ClusterSet> Ps{ClusterSet({1}, 2)};
  const auto a = potential_growth_check(spec, Ps, 1.0, 4, 4000, 1);
  CHECK(a.all_pass);
  CHECK(a.samples_used == 4000);
  for (const auto& e : a.entries) {
    CHECK(e.alpha.order() >= 1);
    CHECK(e.sup_estimate <= e.bound * (1 + 1e-12));
  }
  const auto rows = offset_region_check(spec, Ps, 1.0, 0.1, a.fitted_LV, 3, 2000, 2);
  CHECK_FALSE(rows.empty());
  for (const auto& r : rows) CHECK(r.pass);
}

TEST_CASE("hardy kernel integrals for a Gaussian") {
  // u = exp(-r^2): int u^2/r^2 = 2 pi sqrt(pi/2), int |grad u|^2 = (3 pi / 2) sqrt(pi/2).
  const auto k = hardy_kernel_integrals({OrbitalTerm{OrbitalTerm::Kind::gaussian, {0, 0, 0}, 1.0, 1.0}});
  const double s = std::sqrt(std::numbers::pi / 2);
  CHECK(k.weighted == doctest::Approx(2 * std::numbers::pi * s).epsilon(1e-8));
  CHECK(k.gradient == doctest::Approx(1.5 * std::numbers::pi * s).epsilon(1e-8));
  CHECK(k.weighted <= 4 * k.gradient);
}

TEST_CASE("hardy ratio is finite under scaling") {
  const auto spec = PotentialSpec::coulomb_atom(2.0, 2);
  const auto family = hardy_test_family(2, 1, 3);
  CHECK(family.size() >= 3);
  for (double lambda : {0.5, 1.0, 2.0}) {
    const auto r = hardy_check(spec, family.front().scaled(lambda), 20000, 4);
    CHECK(r.finite);
    CHECK(r.ratio > 0.0);
    CHECK(std::isfinite(r.ratio));
  }
}
