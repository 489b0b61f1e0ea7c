#include "densan/analyticity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "densan/errors.hpp"

namespace densan {

double GrowthFit::bound(int order) const {
  return C * std::pow(L, order) * std::pow(order + 1.0, order);
}

bool GrowthFit::dominates() const {
  for (const auto& e : entries) {
    const double m = e.magnitude + 2.0 * e.sigma;
    if (m > bound(e.alpha.order()) * (1.0 + 1e-12)) return false;
  }
  return true;
}

GrowthFit fit_growth(const std::vector<GrowthEntry>& entries) {
  if (entries.empty()) throw std::invalid_argument("growth fit needs at least one entry");
  GrowthFit fit;
  fit.entries = entries;
  const GrowthEntry* zero = nullptr;
  double largest = 0.0;
  for (const auto& e : entries) {
    if (!(e.magnitude >= 0.0) || !(e.sigma >= 0.0)) throw std::invalid_argument("growth entries must be nonnegative");
    if (e.alpha.is_zero()) zero = &e;
    fit.alpha_max = std::max(fit.alpha_max, e.alpha.order());
    largest = std::max(largest, e.magnitude + 2.0 * e.sigma);
  }
  if (!zero) throw std::invalid_argument("growth fit needs the alpha = 0 entry");
  constexpr double floor = std::numeric_limits<double>::min();
  fit.C = zero->magnitude + 2.0 * zero->sigma;
  if (fit.C == 0.0) {
    fit.zero_constant = true;
    fit.C = largest;
  }
  fit.C = std::max(fit.C, floor);
  fit.L = floor;
  for (const auto& e : entries) {
    const int k = e.alpha.order();
    if (k == 0) continue;
    const double m = e.magnitude + 2.0 * e.sigma;
    if (m == 0.0) continue;
    fit.L = std::max(fit.L, std::pow(m / fit.C, 1.0 / k) / (k + 1.0));
  }
  return fit;
}

GrowthFit fit_growth_up_to(const std::vector<GrowthEntry>& entries, int max_order) {
  std::vector<GrowthEntry> kept;
  for (const auto& e : entries) {
    if (e.alpha.order() <= max_order) kept.push_back(e);
  }
  return fit_growth(kept);
}

namespace {

int used_order_floor(const std::vector<double>& c, double floor) {
  int k = static_cast<int>(c.size()) - 1;
  while (k > 0 && !(std::abs(c[static_cast<std::size_t>(k)]) > floor)) --k;
  return k;
}

double recurrence_radius(const std::vector<double>& c, int K) {
  // Normal equations of the scaled least-squares problem for (p, q).
  double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
  for (int k = K / 3; k + 2 <= K; ++k) {
    const double c0 = c[static_cast<std::size_t>(k)], c1 = c[static_cast<std::size_t>(k + 1)],
                 c2 = c[static_cast<std::size_t>(k + 2)];
    const double s = std::abs(c0) + std::abs(c1) + std::abs(c2);
    if (s == 0.0) continue;
    const double u = c1 / s, v = c0 / s, w = c2 / s;
    a11 += u * u;
    a12 += u * v;
    a22 += v * v;
    b1 += u * w;
    b2 += v * w;
  }
  const double det = a11 * a22 - a12 * a12;
  double p = 0.0, q = 0.0;
  if (std::abs(det) > 1e-14 * std::max(1e-300, a11 * a22)) {
    p = (b1 * a22 - b2 * a12) / det;
    q = (a11 * b2 - a12 * b1) / det;
  } else if (a11 > 0.0) {
    p = b1 / a11;  // one real singularity
  } else if (a22 > 0.0) {
    q = b2 / a22;  // even or odd series
  }
  const double disc = p * p + 4.0 * q;
  const double zmax = disc >= 0.0 ? 0.5 * (std::abs(p) + std::sqrt(disc)) : std::sqrt(-q);
  return zmax > 0.0 ? 1.0 / zmax : std::numeric_limits<double>::infinity();
}

}  // namespace

RadiusEstimate taylor_radius(const std::vector<double>& coefficients, double noise_floor) {
  if (coefficients.size() < 5) throw std::invalid_argument("taylor radius needs coefficients up to order >= 4");
  RadiusEstimate out;
  const int K = static_cast<int>(coefficients.size()) - 1;
  double cmax = 0.0;
  for (double c : coefficients) cmax = std::max(cmax, std::abs(c));
  if (cmax == 0.0) throw std::invalid_argument("all Taylor coefficients vanish");
  const double floor = noise_floor * cmax;
  std::vector<int> ks;
  for (int k = 1; k <= K; ++k) {
    if (std::abs(coefficients[static_cast<std::size_t>(k)]) > floor) ks.push_back(k);
  }
  out.used_order = ks.empty() ? 0 : ks.back();
  if (out.used_order < K) {
    out.truncated = true;
    out.warning = "coefficients above order " + std::to_string(out.used_order) + " are below the noise floor";
  }
  if (ks.size() < 2) {
    // Polynomial up to noise: nothing limits the radius.
    out.radius = out.band_low = out.band_high = out.root_test = out.recurrence = std::numeric_limits<double>::infinity();
    if (out.warning.empty()) out.warning = "fewer than two coefficients above the noise floor";
    return out;
  }
  const std::size_t window = std::min(ks.size(), std::max<std::size_t>(4, ks.size() / 3));
  const std::vector<int> use(ks.end() - static_cast<std::ptrdiff_t>(window), ks.end());
  double sk = 0.0, sy = 0.0;
  for (int k : use) {
    sk += k;
    sy += std::log(std::abs(coefficients[static_cast<std::size_t>(k)]));
  }
  const double n = static_cast<double>(use.size());
  const double kbar = sk / n, ybar = sy / n;
  double skk = 0.0, sky = 0.0;
  for (int k : use) {
    const double y = std::log(std::abs(coefficients[static_cast<std::size_t>(k)]));
    skk += (k - kbar) * (k - kbar);
    sky += (k - kbar) * (y - ybar);
  }
  const double slope = sky / skk;
  double rss = 0.0;
  for (int k : use) {
    const double y = std::log(std::abs(coefficients[static_cast<std::size_t>(k)]));
    const double r = y - (ybar + slope * (k - kbar));
    rss += r * r;
  }
  const double se = n > 2.0 ? std::sqrt(rss / (n - 2.0) / skk) : 0.0;
  out.radius = std::exp(-slope);
  out.band_low = std::exp(-slope - 2.0 * se);
  out.band_high = std::exp(-slope + 2.0 * se);
  double root = 0.0;
  for (int k : use) root = std::max(root, std::pow(std::abs(coefficients[static_cast<std::size_t>(k)]), 1.0 / k));
  out.root_test = 1.0 / root;
  out.recurrence = recurrence_radius(coefficients, used_order_floor(coefficients, floor));
  return out;
}

DensityGrowthReport verify_density_growth(const WavefunctionModel& model, const Vec3& x, double eps, int alpha_max,
                                          const DensityGrowthOptions& opts) {
  if (alpha_max < 2) throw std::invalid_argument("density growth needs alpha_max >= 2");
  DensityGrowthReport rep;
  const auto table = rho_deriv_table(model, x, eps, alpha_max, opts.density);
  std::vector<GrowthEntry> entries;
  for (const auto& e : table) entries.push_back({e.alpha, std::abs(e.result.value), e.result.error});
  rep.fit = fit_growth(entries);
  rep.lower_fit = fit_growth_up_to(entries, alpha_max - 2);
  rep.L_change = std::abs(rep.fit.L - rep.lower_fit.L) / rep.lower_fit.L;
  rep.stable = std::isfinite(rep.fit.L) && rep.L_change <= opts.stability_tol;

  rep.radius_floor = 0.5 * norm(x);
  rep.radius_ok = true;
  if (model.kind() != WavefunctionModel::Kind::user_callable && opts.radius_lines > 0) {
    const int K = opts.radius_order > 0 ? opts.radius_order : (model.n_electrons() == 1 ? 24 : 12);
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss;
    for (int line = 0; line < opts.radius_lines; ++line) {
      Vec3 v{gauss(rng), gauss(rng), gauss(rng)};
      v = (1.0 / norm(v)) * v;
      const auto c = rho_slice_coefficients(model, x, v, K, eps, opts.density);
      RadiusEstimate r = taylor_radius(c);
      r.direction = {v[0], v[1], v[2]};
      // The log-linear fit is biased low when the coefficients oscillate.
      rep.radius_ok = rep.radius_ok && std::max(r.radius, r.recurrence) >= rep.radius_floor;
      rep.radii.push_back(std::move(r));
    }
  }
  rep.passed = rep.stable && rep.radius_ok && rep.fit.dominates();
  return rep;
}

ClusterGrowthReport verify_cluster_growth(const WavefunctionModel& model, const std::vector<ClusterSet>& Ps,
                                          double eps, int alpha_max, ClusterNorm norm, std::size_t n_samples,
                                          std::uint64_t seed) {
  if (!(eps > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (alpha_max < 2) throw std::invalid_argument("cluster growth needs alpha_max >= 2");
  ClusterGrowthReport rep;
  rep.norm = norm;
  const auto table = cluster_norm_table(model, Ps, eps, alpha_max, n_samples, seed);
  std::vector<GrowthEntry> l2, l1;
  for (const auto& e : table) {
    l2.push_back({e.alpha, e.l2.value, e.l2.stderr_estimate});
    l1.push_back({e.alpha, e.l1.value, e.l1.stderr_estimate});
  }
  rep.l2_fit = fit_growth(l2);
  rep.l1_fit = fit_growth(l1);
  rep.l2_lower = fit_growth_up_to(l2, alpha_max - 2);
  rep.l1_lower = fit_growth_up_to(l1, alpha_max - 2);
  auto stable = [](const GrowthFit& hi, const GrowthFit& lo) {
    return std::isfinite(hi.L) && std::abs(hi.L - lo.L) <= 0.25 * lo.L;
  };
  rep.finite = std::isfinite(rep.l2_fit.C) && std::isfinite(rep.l2_fit.L) && std::isfinite(rep.l1_fit.C) &&
               std::isfinite(rep.l1_fit.L);
  rep.leibniz_consistent =
      rep.l1_fit.C <= 1.1 * rep.l2_fit.C * rep.l2_fit.C && rep.l1_fit.L <= 2.2 * rep.l2_fit.L;
  if (norm == ClusterNorm::l2_psi) {
    rep.stable = stable(rep.l2_fit, rep.l2_lower);
    rep.passed = rep.finite && rep.stable && rep.l2_fit.dominates();
  } else {
    rep.stable = stable(rep.l1_fit, rep.l1_lower);
    rep.passed = rep.finite && rep.stable && rep.leibniz_consistent && rep.l1_fit.dominates();
  }
  return rep;
}

}  // namespace densan
