#include <doctest.h>

#include <cmath>

#include "densan/analyticity.hpp"

using namespace densan;

namespace {

std::vector<GrowthEntry> synthetic(double C, double L, int kmax) {
  std::vector<GrowthEntry> out;
  for (const MultiIndex& a : multiindices_up_to(2, kmax)) {
    const int k = a.order();
    out.push_back({a, C * std::pow(L, k) * std::pow(k + 1.0, k) * 0.5 * (k == 0 ? 2.0 : 1.0), 0.0});
  }
  return out;
}

}  // namespace

TEST_CASE("growth fit recovers synthetic constants and dominates its data") {
  const auto fit = fit_growth(synthetic(3.0, 0.7, 6));
  CHECK(fit.C == doctest::Approx(3.0));
  CHECK(fit.alpha_max == 6);
  CHECK(fit.L <= 0.7 * (1 + 1e-12));
  CHECK(fit.L == doctest::Approx(0.7 * std::pow(0.5, 1.0 / 6)));
  CHECK(fit.dominates());
  for (const auto& e : fit.entries) CHECK(e.magnitude <= fit.bound(e.alpha.order()) * (1 + 1e-12));
  const auto low = fit_growth_up_to(fit.entries, 4);
  CHECK(low.alpha_max == 4);
  CHECK(low.L <= fit.L);
}

TEST_CASE("growth fit with a vanishing constant term") {
  std::vector<GrowthEntry> e{{MultiIndex{0}, 0.0, 0.0}, {MultiIndex{1}, 2.0, 0.0}, {MultiIndex{2}, 1.0, 0.0}};
  const auto fit = fit_growth(e);
  CHECK(fit.zero_constant);
  CHECK(fit.C == doctest::Approx(2.0));
  CHECK(fit.dominates());
}

TEST_CASE("error bars enter the fit") {
  std::vector<GrowthEntry> e{{MultiIndex{0}, 1.0, 0.0}, {MultiIndex{1}, 1.0, 0.5}};
  // (1 + 2*0.5) / 1 over (k+1) = 2 / 2
  CHECK(fit_growth(e).L == doctest::Approx(1.0));
}

TEST_CASE("taylor radius of model series") {
  std::vector<double> geo, even, osc;
  for (int k = 0; k <= 20; ++k) {
    geo.push_back(std::pow(1 / 1.7, k));                                         // 1/(1 - t/1.7)
    even.push_back(k % 2 ? 0.0 : std::pow(-1.0, k / 2));                         // 1/(1 + t^2)
    osc.push_back(std::cos(0.9 * k) / std::pow(1.3, k));                         // poles at 1.3 e^{+-0.9i}
  }
  const auto g = taylor_radius(geo);
  CHECK(g.radius == doctest::Approx(1.7).epsilon(1e-10));
  CHECK(g.recurrence == doctest::Approx(1.7).epsilon(1e-8));
  CHECK(g.band_low <= g.radius);
  CHECK(g.band_high >= g.radius);
  const auto e = taylor_radius(even);
  CHECK(e.radius == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(e.recurrence == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(taylor_radius(osc).recurrence == doctest::Approx(1.3).epsilon(1e-8));
}

TEST_CASE("taylor radius flags truncation and polynomials") {
  std::vector<double> c{1.0, 0.5, 0.25, 0.125, 0.0, 0.0, 0.0};
  const auto r = taylor_radius(c);
  CHECK(r.truncated);
  CHECK(r.used_order == 3);
  CHECK_FALSE(r.warning.empty());
  const auto p = taylor_radius({1.0, 0.0, 0.0, 0.0, 0.0});
  CHECK(std::isinf(p.radius));
  CHECK_THROWS(taylor_radius({1.0, 2.0}));
}

TEST_CASE("density growth for hydrogen") {
  const auto m = WavefunctionModel::hydrogenic_product({0.5});
  DensityGrowthOptions opts;
  opts.seed = 4;
  opts.radius_lines = 2;
  const auto rep = verify_density_growth(m, {1, 0, 0}, 0.5, 6, opts);
  CHECK(rep.passed);
  CHECK(rep.fit.alpha_max == 6);
  CHECK(rep.lower_fit.alpha_max == 4);
  CHECK(rep.radii.size() == 2);
  CHECK(rep.radius_floor == doctest::Approx(0.5));
}

TEST_CASE("cluster growth fits for hydrogen") {
  const auto m = WavefunctionModel::hydrogenic_product({0.5});
  const auto rep = verify_cluster_growth(m, {ClusterSet({1}, 1)}, 1.0, 4, ClusterNorm::l1_density, 20000, 5);
  CHECK(rep.finite);
  CHECK(rep.l1_fit.C <= 1.1 * rep.l2_fit.C * rep.l2_fit.C);
  CHECK(rep.leibniz_consistent);
  CHECK(rep.l2_fit.dominates());
  CHECK(rep.l1_fit.dominates());
}
