#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "densan/clusters.hpp"
#include "densan/errors.hpp"

using namespace densan;

namespace {

Configuration random_config(int n, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, scale);
  Configuration x(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) x[static_cast<std::size_t>(j)] = {g(rng), g(rng), g(rng)};
  return x;
}

// Connected component of 1 by repeated relaxation, no union-find.
std::set<int> component_of_one(int n, const PairSet& I) {
  std::set<int> comp{1};
  bool grew = true;
  while (grew) {
    grew = false;
    for (int j = 1; j <= n; ++j) {
      for (int k = j + 1; k <= n; ++k) {
        if (!I.contains(j, k)) continue;
        if (comp.count(j) != comp.count(k)) {
          comp.insert(j);
          comp.insert(k);
          grew = true;
        }
      }
    }
  }
  return comp;
}

}  // namespace

TEST_CASE("cluster sets and coordinates") {
  const ClusterSet P({2, 1}, 3);
  CHECK(P.members() == std::vector<int>{1, 2});
  CHECK(P.to_string() == "{1,2}");
  CHECK(P.complement() == std::vector<int>{3});
  CHECK(ClusterSet::all(3).size() == 3);
  CHECK_THROWS(ClusterSet({4}, 3));
  CHECK_THROWS(ClusterSet({}, 3));

  const Configuration x{{1, 0, 0}, {0, 1, 0}, {0, 0, 5}};
  const Vec3 xp = cluster_coordinate(P, x);
  CHECK(xp[0] == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(xp[1] == doctest::Approx(1 / std::sqrt(2.0)));
  const auto v = cluster_direction(P, 2);
  double n2 = 0.0;
  for (double c : v) n2 += c * c;
  CHECK(n2 == doctest::Approx(1.0));
  CHECK(v[2] == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(v[8] == 0.0);
  // moving along v shifts x_P by the step and leaves x_3
  const Configuration y = x.shifted(v, 0.3);
  CHECK(cluster_coordinate(P, y)[2] == doctest::Approx(xp[2] + 0.3));
  CHECK(y.electron(3)[2] == 5.0);
}

TEST_CASE("U_P membership") {
  const ClusterSet P({1}, 2);
  CHECK(in_U_P(Configuration{{2, 0, 0}, {0, 0, 0}}, P, 1.0));
  CHECK_FALSE(in_U_P(Configuration{{0.5, 0, 0}, {3, 0, 0}}, P, 1.0));  // |x_1| too small
  CHECK_FALSE(in_U_P(Configuration{{2, 0, 0}, {2.5, 0, 0}}, P, 1.0));  // x_2 too close
  CHECK(in_U_P(Configuration{{2, 0, 0}, {2.5, 0, 0}}, ClusterSet({1, 2}, 2), 1.0));
  CHECK_THROWS_AS(in_U_Pvec(Configuration{{2, 0, 0}}, {}, 1.0), std::invalid_argument);
}

TEST_CASE("cluster multiindex is canonical") {
  const ClusterSet A({1}, 2), B({1, 2}, 2);
  ClusterMultiIndex m;
  m.add(B, MultiIndex{0, 1, 0});
  m.add(A, MultiIndex{1, 0, 0});
  m.add(B, MultiIndex{1, 0, 0});
  m.add(A, MultiIndex{0, 0, 0});
  CHECK(m.parts().size() == 2);
  CHECK(m.order() == 3);
  const ClusterMultiIndex n({A, B}, MultiIndex{1, 0, 0, 1, 1, 0});
  CHECK(m == n);
  CHECK_THROWS_AS(ClusterMultiIndex({A}, MultiIndex{1, 0}), DimensionMismatch);
}

TEST_CASE("cutoff functions") {
  const CutoffPair cut(1.0, 2);
  CHECK(cut.inner_radius() == doctest::Approx(0.125));
  CHECK(cut.outer_radius() == doctest::Approx(0.25));
  CHECK(cut.chi1({0.1, 0, 0}) == 1.0);
  CHECK(cut.chi1({0.3, 0, 0}) == 0.0);
  CHECK(smooth_step(0.0) == 1.0);
  CHECK(smooth_step(1.0) == 0.0);
  CHECK(smooth_step_complement(0.0) == 0.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  double prev = -1.0;
  for (int i = 0; i <= 100; ++i) {
    const double s = smooth_step_complement(i / 100.0);
    CHECK(s >= prev);
    prev = s;
  }
  for (int i = 0; i < 200; ++i) {
    const Vec3 t{u(rng), u(rng), u(rng)};
    CHECK(cut.chi1(t) + cut.chi2(t) == doctest::Approx(1.0).epsilon(1e-15));
    for (int axis = 0; axis < 3; ++axis) {
      Vec3 tp = t, tm = t;
      const double h = 1e-6;
      tp[axis] += h;
      tm[axis] -= h;
      const double fd = (cut.chi2(tp) - cut.chi2(tm)) / (2 * h);
      CHECK(cut.dchi2(t, axis) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("partition of unity for N = 1..4") {
  std::mt19937_64 rng(7);
  for (int n = 1; n <= 4; ++n) {
    const CutoffPair cut(1.0, n);
    const auto terms = all_partition_terms(n);
    CHECK(terms.size() == (std::size_t{1} << (n * (n - 1) / 2)));
    for (int s = 0; s < 500; ++s) {
      const Configuration x = random_config(n, cut.outer_radius(), rng);
      double sum = 0.0;
      for (const auto& t : terms) {
        const double v = phi_term_value(t, x, cut);
        CHECK(v >= 0.0);
        sum += v;
      }
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("cluster of electron 1 matches a relaxation oracle") {
  for (int n = 1; n <= 5; ++n) {
    const auto pairs = all_pairs(n);
    const std::size_t subsets = std::size_t{1} << pairs.size();
    for (std::size_t mask = 0; mask < subsets; mask += (n == 5 ? 7 : 1)) {
      std::vector<ElectronPair> chosen;
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        if (mask >> p & 1) chosen.push_back(pairs[p]);
      }
      const PairSet I(chosen, n);
      const auto P = cluster_of_one(I, n);
      const auto want = component_of_one(n, I);
      CHECK(std::set<int>(P.members().begin(), P.members().end()) == want);
    }
  }
}

TEST_CASE("phi term bookkeeping") {
  const PhiTerm all2(3);
  CHECK(cluster_of_term(all2) == ClusterSet({1}, 3));
  const PhiTerm t = all2.with_factor(2, 3, FactorKind::chi1).with_factor(1, 2, FactorKind::dchi2_y);
  CHECK(cluster_of_term(t) == ClusterSet({1, 2, 3}, 3));
  CHECK(t.factor(1, 3) == FactorKind::chi2);
  CHECK(factor_kind_from_string(to_string(FactorKind::dchi2_z)) == FactorKind::dchi2_z);
  CHECK(dchi2_axis(dchi2_kind(1)) == 1);
  CHECK(dchi2_axis(FactorKind::chi1) == -1);
}

TEST_CASE("support condition holds and the negative control fires") {
  for (int n = 1; n <= 3; ++n) {
    std::uint64_t seed = 100;
    for (const PhiTerm& t : support_term_family(n)) {
      const auto r = support_condition_check(t, 1.0, 4000, seed++);
      CHECK(r.violations == 0);
      CHECK(r.cluster_tested == cluster_of_term(t));
    }
  }
  const PhiTerm linked = PhiTerm(2).with_factor(1, 2, FactorKind::chi1);
  const auto r = support_condition_check(linked, 1.0, 4000, 9, ClusterSet({1}, 2));
  CHECK(r.violations > 0);
}
