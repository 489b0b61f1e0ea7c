#include "densan/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/random/sobol.hpp>

#include "densan/clusters.hpp"
#include "densan/errors.hpp"

namespace densan {

namespace {

constexpr double kPi = std::numbers::pi;

const Rule1D& cached_gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, Rule1D> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Rule1D rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    rule.nodes[static_cast<std::size_t>(i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

const SphereRule& cached_product_rule(int n_theta) {
  static std::mutex mutex;
  static std::map<int, SphereRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n_theta);
  if (it != cache.end()) return it->second;
  const Rule1D& gl = cached_gauss_legendre(n_theta);
  const int n_phi = 2 * n_theta;
  SphereRule rule;
  for (int i = 0; i < n_theta; ++i) {
    const double z = gl.nodes[static_cast<std::size_t>(i)];
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int k = 0; k < n_phi; ++k) {
      const double phi = 2.0 * kPi * (k + 0.5) / n_phi;
      rule.directions.push_back({s * std::cos(phi), s * std::sin(phi), z});
      rule.weights.push_back(gl.weights[static_cast<std::size_t>(i)] * 2.0 * kPi / n_phi);
    }
  }
  return cache.emplace(n_theta, std::move(rule)).first->second;
}

// s(mu) = 1 for mu <= -1/2, 0 for mu >= 1/2; s(mu) + s(-mu) = 1.
double cell_step(double mu) { return smooth_step(mu + 0.5); }

std::vector<Vec3> merge_centers(const std::vector<Vec3>& centers, const std::vector<std::vector<double>>& breaks,
                                std::vector<std::vector<double>>& merged_breaks) {
  std::vector<Vec3> out;
  merged_breaks.clear();
  for (std::size_t i = 0; i < centers.size(); ++i) {
    std::size_t found = out.size();
    for (std::size_t j = 0; j < out.size(); ++j) {
      if (norm(centers[i] - out[j]) < 1e-12) found = j;
    }
    if (found == out.size()) {
      out.push_back(centers[i]);
      merged_breaks.emplace_back();
    }
    if (i < breaks.size()) {
      merged_breaks[found].insert(merged_breaks[found].end(), breaks[i].begin(), breaks[i].end());
    }
  }
  return out;
}

}  // namespace

Rule1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre needs n >= 1");
  return cached_gauss_legendre(n);
}

SphereRule lebedev26() {
  SphereRule rule;
  const double a1 = 4.0 * kPi / 21.0, a2 = 4.0 * kPi * 4.0 / 105.0, a3 = 4.0 * kPi * 9.0 / 280.0;
  for (int axis = 0; axis < 3; ++axis) {
    for (double s : {1.0, -1.0}) {
      Vec3 v{0, 0, 0};
      v[static_cast<std::size_t>(axis)] = s;
      rule.directions.push_back(v);
      rule.weights.push_back(a1);
    }
  }
  const double h = 1.0 / std::sqrt(2.0);
  for (int skip = 2; skip >= 0; --skip) {
    for (double s1 : {1.0, -1.0}) {
      for (double s2 : {1.0, -1.0}) {
        Vec3 v{0, 0, 0};
        int used = 0;
        for (int axis = 0; axis < 3; ++axis) {
          if (axis == skip) continue;
          v[static_cast<std::size_t>(axis)] = (used++ == 0 ? s1 : s2) * h;
        }
        rule.directions.push_back(v);
        rule.weights.push_back(a2);
      }
    }
  }
  const double c = 1.0 / std::sqrt(3.0);
  for (double s1 : {1.0, -1.0}) {
    for (double s2 : {1.0, -1.0}) {
      for (double s3 : {1.0, -1.0}) {
        rule.directions.push_back({s1 * c, s2 * c, s3 * c});
        rule.weights.push_back(a3);
      }
    }
  }
  return rule;
}

SphereRule product_sphere_rule(int n_theta) {
  if (n_theta < 1) throw std::invalid_argument("sphere rule needs n_theta >= 1");
  return cached_product_rule(n_theta);
}

MultiCenterLevel multicenter_level(int level) {
  static constexpr int kTheta[] = {12, 20, 32, 48, 64, 96};
  level = std::clamp(level, 0, 5);
  return {4 << level, 8, kTheta[level]};
}

std::vector<double> integrate_multicenter_at_level(const std::vector<Vec3>& centers_in,
                                                   const std::vector<std::vector<double>>& breakpoints,
                                                   std::size_t n_out, const VectorIntegrand& f, int level,
                                                   double length_scale, std::size_t* nodes) {
  if (centers_in.empty()) throw std::invalid_argument("multicenter integration needs a center");
  if (!(length_scale > 0.0)) throw std::invalid_argument("length scale must be positive");
  std::vector<std::vector<double>> breaks;
  const std::vector<Vec3> centers = merge_centers(centers_in, breakpoints, breaks);
  const std::size_t nc = centers.size();
  const MultiCenterLevel lv = multicenter_level(level);
  const Rule1D& gl = cached_gauss_legendre(lv.radial_points);
  const SphereRule& sphere = cached_product_rule(lv.n_theta);

  std::vector<double> dist(nc * nc, 0.0);
  for (std::size_t i = 0; i < nc; ++i) {
    for (std::size_t j = 0; j < nc; ++j) dist[i * nc + j] = norm(centers[i] - centers[j]);
  }
  auto cell_weight = [&](std::size_t i, const Vec3& y) {
    if (nc == 1) return 1.0;
    std::vector<double> r(nc);
    for (std::size_t k = 0; k < nc; ++k) r[k] = norm(y - centers[k]);
    double own = 0.0, total = 0.0;
    for (std::size_t k = 0; k < nc; ++k) {
      double p = 1.0;
      for (std::size_t m = 0; m < nc && p > 0.0; ++m) {
        if (m == k) continue;
        p *= cell_step((r[k] - r[m]) / dist[k * nc + m]);
      }
      total += p;
      if (k == i) own = p;
    }
    return own == 0.0 ? 0.0 : own / total;
  };

  std::vector<double> result(n_out, 0.0);
  std::vector<double> comp(n_out, 0.0);
  std::vector<double> tmp(n_out, 0.0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < nc; ++i) {
    std::vector<double> radii = breaks[i];
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nc; ++j) {
      if (j != i) dmin = std::min(dmin, dist[i * nc + j]);
    }
    // With several centers every radius scales with the distance to the
    // nearest one, so the rule moves covariantly with the geometry.
    const double L = std::isfinite(dmin) ? dmin : length_scale;
    if (std::isfinite(dmin)) {
      for (double s : {0.25, 0.5}) radii.push_back(s * dmin);
    }
    for (double r = L; r <= 64.0 * length_scale; r *= 2.0) radii.push_back(r);
    std::vector<double> cuts;
    for (int k = 0; k <= lv.radial_panels; ++k) cuts.push_back(static_cast<double>(k) / lv.radial_panels);
    for (double r : radii) {
      if (r > 0.0 && std::isfinite(r)) cuts.push_back(r / (L + r));
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return std::abs(a - b) < 1e-14; }),
               cuts.end());

    // Pole of the angular grid points at the nearest other center, so the
    // rule moves rigidly with the geometry.
    std::array<Vec3, 3> frame{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
    if (std::isfinite(dmin)) {
      std::size_t nearest = i;
      for (std::size_t j = 0; j < nc; ++j) {
        if (j != i && dist[i * nc + j] == dmin) {
          nearest = j;
          break;
        }
      }
      const Vec3 e3 = (1.0 / dmin) * (centers[nearest] - centers[i]);
      Vec3 a = std::abs(e3[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
      a = a - dot(a, e3) * e3;
      const Vec3 e1 = (1.0 / norm(a)) * a;
      const Vec3 e2{e3[1] * e1[2] - e3[2] * e1[1], e3[2] * e1[0] - e3[0] * e1[2], e3[0] * e1[1] - e3[1] * e1[0]};
      frame = {e1, e2, e3};
    }
    std::vector<Vec3> dirs(sphere.directions.size());
    for (std::size_t a = 0; a < dirs.size(); ++a) {
      const Vec3& w = sphere.directions[a];
      dirs[a] = w[0] * frame[0] + w[1] * frame[1] + w[2] * frame[2];
    }

    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
      const double ua = cuts[p], ub = cuts[p + 1];
      const double half = 0.5 * (ub - ua), mid = 0.5 * (ub + ua);
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        const double u = mid + half * gl.nodes[q];
        const double r = L * u / (1.0 - u);
        const double jac = half * gl.weights[q] * L / ((1.0 - u) * (1.0 - u)) * r * r;
        if (!(jac > 0.0) || !std::isfinite(jac)) continue;
        for (std::size_t a = 0; a < sphere.directions.size(); ++a) {
          const Vec3 y = centers[i] + r * dirs[a];
          const double w = cell_weight(i, y);
          if (w == 0.0) continue;
          std::fill(tmp.begin(), tmp.end(), 0.0);
          f(y, tmp);
          ++count;
          const double scale = jac * sphere.weights[a] * w;
          for (std::size_t o = 0; o < n_out; ++o) {
            // Neumaier summation keeps the rule a smooth function of the centers.
            const double term = scale * tmp[o];
            const double t = result[o] + term;
            comp[o] += std::abs(result[o]) >= std::abs(term) ? (result[o] - t) + term : (term - t) + result[o];
            result[o] = t;
          }
        }
      }
    }
  }
  if (nodes) *nodes = count;
  for (std::size_t o = 0; o < n_out; ++o) result[o] += comp[o];
  return result;
}

VectorIntegral integrate_multicenter(const std::vector<Vec3>& centers,
                                     const std::vector<std::vector<double>>& breakpoints, std::size_t n_out,
                                     const VectorIntegrand& f, const MultiCenterOptions& opts) {
  VectorIntegral out;
  std::vector<double> prev;
  for (int level = 0; level <= opts.max_level; ++level) {
    std::size_t nodes = 0;
    auto cur = integrate_multicenter_at_level(centers, breakpoints, n_out, f, level, opts.length_scale, &nodes);
    out.nodes = nodes;
    out.level = level;
    if (!prev.empty()) {
      out.errors.assign(n_out, 0.0);
      double scale = 0.0;
      for (double v : cur) scale = std::max(scale, std::abs(v));
      bool ok = true;
      for (std::size_t o = 0; o < n_out; ++o) {
        out.errors[o] = std::abs(cur[o] - prev[o]);
        if (out.errors[o] > std::max(opts.rel_tol * scale, opts.abs_tol)) ok = false;
      }
      out.values = cur;
      if (ok && level >= opts.min_level) {
        out.converged = true;
        return out;
      }
    }
    out.values = cur;
    prev = std::move(cur);
  }
  return out;
}

ExponentialSampler::ExponentialSampler(double rate) : rate_(rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("sampler rate must be positive");
}

Vec3 ExponentialSampler::map(double u_radius, double u_cos, double u_phi) const {
  const double r = boost::math::gamma_p_inv(3.0, std::min(u_radius, 1.0 - 1e-16)) / rate_;
  const double z = 2.0 * u_cos - 1.0;
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double phi = 2.0 * kPi * u_phi;
  return {r * s * std::cos(phi), r * s * std::sin(phi), r * z};
}

double ExponentialSampler::density(const Vec3& y) const {
  return rate_ * rate_ * rate_ / (8.0 * kPi) * std::exp(-rate_ * norm(y));
}

RadialExponentialSampler::RadialExponentialSampler(double rate) : rate_(rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("sampler rate must be positive");
}

Vec3 RadialExponentialSampler::map(double u_radius, double u_cos, double u_phi) const {
  const double r = -std::log1p(-std::min(u_radius, 1.0 - 1e-16)) / rate_;
  const double z = 2.0 * u_cos - 1.0;
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double phi = 2.0 * kPi * u_phi;
  return {r * s * std::cos(phi), r * s * std::sin(phi), r * z};
}

double RadialExponentialSampler::density(const Vec3& y) const {
  const double r = norm(y);
  return rate_ * std::exp(-rate_ * r) / (4.0 * kPi * r * r);
}

QmcResult qmc_integrate(std::size_t n_free, double rate, std::size_t n_out,
                        const std::function<void(std::span<const Vec3>, std::span<double>)>& f,
                        std::size_t n_points, int randomizations, std::uint64_t seed) {
  if (n_free == 0) throw std::invalid_argument("qmc needs at least one free electron");
  if (randomizations < 2) throw std::invalid_argument("qmc needs at least two randomizations");
  const ExponentialSampler sampler(rate);
  const std::size_t dim = 3 * n_free;
  std::vector<std::vector<double>> means(static_cast<std::size_t>(randomizations), std::vector<double>(n_out, 0.0));
  std::vector<Vec3> ys(n_free);
  std::vector<double> tmp(n_out);
  std::vector<double> u(dim);
  for (int rr = 0; rr < randomizations; ++rr) {
    std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(rr + 1));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> shift(dim);
    for (double& s : shift) s = unif(rng);
    boost::random::sobol engine(dim);
    auto& acc = means[static_cast<std::size_t>(rr)];
    for (std::size_t n = 0; n < n_points; ++n) {
      for (std::size_t d = 0; d < dim; ++d) {
        double v = std::ldexp(static_cast<double>(engine()), -64) + shift[d];
        u[d] = v - std::floor(v);
      }
      double q = 1.0;
      for (std::size_t e = 0; e < n_free; ++e) {
        ys[e] = sampler.map(u[3 * e], u[3 * e + 1], u[3 * e + 2]);
        q *= sampler.density(ys[e]);
      }
      std::fill(tmp.begin(), tmp.end(), 0.0);
      f(ys, tmp);
      for (std::size_t o = 0; o < n_out; ++o) acc[o] += tmp[o] / q;
    }
    for (double& a : acc) a /= static_cast<double>(n_points);
  }
  QmcResult res;
  res.values.assign(n_out, 0.0);
  res.errors.assign(n_out, 0.0);
  res.nodes = n_points * static_cast<std::size_t>(randomizations);
  const double R = randomizations;
  for (std::size_t o = 0; o < n_out; ++o) {
    double m = 0.0;
    for (const auto& acc : means) m += acc[o];
    m /= R;
    double v = 0.0;
    for (const auto& acc : means) v += (acc[o] - m) * (acc[o] - m);
    v /= (R - 1.0);
    res.values[o] = m;
    res.errors[o] = std::sqrt(v / R);
  }
  return res;
}

}  // namespace densan
