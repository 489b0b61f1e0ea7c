#include "densan/wavefunctions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "densan/errors.hpp"
#include "densan/quadrature.hpp"

namespace densan {

namespace {

constexpr double kPi = std::numbers::pi;

struct RunningMoments {
  double sum = 0.0;
  double sum_sq = 0.0;
  void add(double v) {
    sum += v;
    sum_sq += v * v;
  }
  // Mean over n samples and the standard error of that mean.
  std::pair<double, double> mean_and_error(std::size_t n) const {
    const double dn = static_cast<double>(n);
    const double mean = sum / dn;
    const double var = std::max(0.0, sum_sq / dn - mean * mean);
    return {mean, n > 1 ? std::sqrt(var / (dn - 1.0)) : 0.0};
  }
};

std::vector<Jet> electron_radii(const Configuration& x, const std::vector<std::vector<double>>& directions,
                                const std::shared_ptr<const JetLayout>& layout, std::vector<std::array<Jet, 3>>& coords) {
  const std::size_t n = x.size();
  coords.assign(n, {});
  std::vector<Jet> radii;
  radii.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t d = 0; d < 3; ++d) {
      Jet c(layout, x[j][d]);
      for (std::size_t i = 0; i < directions.size(); ++i) {
        const double v = directions[i][3 * j + d];
        if (v != 0.0) c.coefficients()[layout->index_of(MultiIndex::unit(layout->variables(), i))] += v;
      }
      coords[j][d] = std::move(c);
    }
    radii.push_back(sqrt(square(coords[j][0]) + square(coords[j][1]) + square(coords[j][2])));
  }
  return radii;
}

// Nested central differences along the flattened list of directions.
double nested_difference(const WavefunctionModel& model, const Configuration& x,
                         const std::vector<const std::vector<double>*>& dirs, std::size_t pos,
                         std::vector<double>& shift, double h) {
  if (pos == dirs.size()) return model.value(x.shifted(shift, 1.0));
  const auto& v = *dirs[pos];
  for (std::size_t i = 0; i < shift.size(); ++i) shift[i] += h * v[i];
  const double plus = nested_difference(model, x, dirs, pos + 1, shift, h);
  for (std::size_t i = 0; i < shift.size(); ++i) shift[i] -= 2.0 * h * v[i];
  const double minus = nested_difference(model, x, dirs, pos + 1, shift, h);
  for (std::size_t i = 0; i < shift.size(); ++i) shift[i] += h * v[i];
  return (plus - minus) / (2.0 * h);
}

std::vector<std::vector<double>> cluster_directions(const std::vector<ClusterSet>& Ps) {
  std::vector<std::vector<double>> dirs;
  for (const ClusterSet& P : Ps) {
    for (int axis = 0; axis < 3; ++axis) dirs.push_back(cluster_direction(P, axis));
  }
  return dirs;
}

// Independent exponential placement of every electron; returns the density.
double sample_configuration(const WavefunctionModel& model, std::mt19937_64& rng, Configuration& x) {
  double q = 1.0;
  for (int j = 1; j <= model.n_electrons(); ++j) {
    const ExponentialSampler s(model.decay_rate(j));
    x[static_cast<std::size_t>(j - 1)] = s.sample(rng);
    q *= s.density(x[static_cast<std::size_t>(j - 1)]);
  }
  return q;
}

}  // namespace

WavefunctionModel WavefunctionModel::hydrogenic_product(std::vector<double> exponents, std::optional<double> energy) {
  if (exponents.empty()) throw ConfigError("exponents", "at least one exponent is required");
  WavefunctionModel m;
  m.kind_ = Kind::hydrogenic_product;
  m.n_electrons_ = static_cast<int>(exponents.size());
  double e = 0.0, c = 1.0;
  for (double a : exponents) {
    if (!(a > 0.0)) throw ConfigError("exponents", "exponents must be positive");
    e -= a * a;
    c *= std::sqrt(a * a * a / kPi);
  }
  m.exponents_ = std::move(exponents);
  m.energy_ = energy.value_or(e);
  m.norm_ = c;
  return m;
}

WavefunctionModel WavefunctionModel::correlated_pair(double a, double lambda, double energy) {
  if (!(a > 0.0)) throw ConfigError("a", "exponent must be positive");
  if (!(lambda >= 0.0)) throw ConfigError("lambda", "correlation strength must be nonnegative");
  WavefunctionModel m;
  m.kind_ = Kind::correlated_pair;
  m.n_electrons_ = 2;
  m.exponents_ = {a, a};
  m.lambda_ = lambda;
  m.energy_ = energy;
  // With b = 2a: int e^{-b r} = 8 pi / b^3, <r12> = 35 / (8 b), <r12^2> = 24 / b^2.
  const double b = 2.0 * a;
  const double base = 8.0 * kPi / (b * b * b);
  const double mean_r12 = 35.0 / (8.0 * b);
  const double mean_r12_sq = 24.0 / (b * b);
  const double inv_sq = base * base * (1.0 + lambda * mean_r12 + 0.25 * lambda * lambda * mean_r12_sq);
  m.norm_ = 1.0 / std::sqrt(inv_sq);
  return m;
}

WavefunctionModel WavefunctionModel::user_callable(int n_electrons, Callable f, double energy, double normalization) {
  if (n_electrons < 1) throw ConfigError("N", "number of electrons must be at least 1");
  if (!f) throw ConfigError("callable", "a callable is required");
  WavefunctionModel m;
  m.kind_ = Kind::user_callable;
  m.n_electrons_ = n_electrons;
  m.callable_ = std::move(f);
  m.energy_ = energy;
  m.norm_ = normalization;
  m.exponents_.assign(static_cast<std::size_t>(n_electrons), 0.5);
  return m;
}

bool WavefunctionModel::exchange_symmetric() const {
  switch (kind_) {
    case Kind::hydrogenic_product:
      return std::all_of(exponents_.begin(), exponents_.end(), [&](double a) { return a == exponents_[0]; });
    case Kind::correlated_pair:
      return true;
    case Kind::user_callable:
      return false;
  }
  return false;
}

double WavefunctionModel::decay_rate(int electron) const {
  if (electron < 1 || electron > n_electrons_) throw std::out_of_range("electron index out of range");
  return 2.0 * exponents_[static_cast<std::size_t>(electron - 1)];
}

double WavefunctionModel::value(const Configuration& x) const {
  if (static_cast<int>(x.size()) != n_electrons_) throw DimensionMismatch("configuration size does not match model");
  switch (kind_) {
    case Kind::hydrogenic_product: {
      double s = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) s += exponents_[j] * norm(x[j]);
      return norm_ * std::exp(-s);
    }
    case Kind::correlated_pair: {
      const double a = exponents_[0];
      return norm_ * std::exp(-a * (norm(x[0]) + norm(x[1]))) * (1.0 + 0.5 * lambda_ * norm(x[0] - x[1]));
    }
    case Kind::user_callable:
      return norm_ * callable_(x);
  }
  return 0.0;
}

Jet WavefunctionModel::jet(const Configuration& x, const std::vector<std::vector<double>>& directions,
                           const std::shared_ptr<const JetLayout>& layout) const {
  if (kind_ == Kind::user_callable) throw UnsupportedError("jets are available for built-in models only");
  if (static_cast<int>(x.size()) != n_electrons_) throw DimensionMismatch("configuration size does not match model");
  if (directions.size() != layout->variables()) throw DimensionMismatch("one direction per jet variable is required");
  for (const auto& v : directions) {
    if (v.size() != 3 * x.size()) throw DimensionMismatch("direction must have dimension 3N");
  }
  std::vector<std::array<Jet, 3>> coords;
  const auto radii = electron_radii(x, directions, layout, coords);
  if (kind_ == Kind::hydrogenic_product) {
    Jet s(layout);
    for (std::size_t j = 0; j < radii.size(); ++j) s += radii[j] * exponents_[j];
    return exp(-s) * norm_;
  }
  const double a = exponents_[0];
  Jet d2(layout);
  for (std::size_t d = 0; d < 3; ++d) d2 += square(coords[0][d] - coords[1][d]);
  const Jet r12 = sqrt(d2);
  return exp((radii[0] + radii[1]) * (-a)) * (1.0 + r12 * (0.5 * lambda_)) * norm_;
}

double WavefunctionModel::fd_step(int order) {
  static constexpr double kSteps[] = {0.0, 1e-5, 1e-4, 1e-3, 2e-3};
  if (order < 0 || order > 4) throw UnsupportedError("finite-difference derivatives are limited to order 4");
  return kSteps[order];
}

std::vector<double> WavefunctionModel::directional_derivatives(const Configuration& x,
                                                               const std::vector<std::vector<double>>& directions,
                                                               const std::shared_ptr<const JetLayout>& layout) const {
  if (kind_ != Kind::user_callable) {
    const Jet j = jet(x, directions, layout);
    std::vector<double> out(layout->size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = j.derivative(i);
    return out;
  }
  if (layout->max_order() > 4) throw UnsupportedError("finite-difference derivatives are limited to order 4");
  std::vector<double> out(layout->size());
  std::vector<double> shift(3 * x.size(), 0.0);
  for (std::size_t t = 0; t < layout->size(); ++t) {
    const MultiIndex& beta = layout->term(t);
    std::vector<const std::vector<double>*> dirs;
    for (std::size_t i = 0; i < beta.dimension(); ++i) {
      for (int r = 0; r < beta[i]; ++r) dirs.push_back(&directions[i]);
    }
    std::fill(shift.begin(), shift.end(), 0.0);
    out[t] = nested_difference(*this, x, dirs, 0, shift, fd_step(beta.order()));
  }
  return out;
}

double cluster_derivative_psi(const WavefunctionModel& model, const ClusterMultiIndex& alpha, const Configuration& x) {
  std::vector<std::vector<double>> dirs;
  std::vector<int> caps, target;
  for (const auto& part : alpha.parts()) {
    if (part.cluster.n_electrons() != model.n_electrons()) {
      throw DimensionMismatch("cluster does not match the number of electrons");
    }
    for (int axis = 0; axis < 3; ++axis) {
      const int k = part.alpha[static_cast<std::size_t>(axis)];
      if (k == 0) continue;
      dirs.push_back(cluster_direction(part.cluster, axis));
      caps.push_back(k);
      target.push_back(k);
    }
  }
  if (dirs.empty()) return model.value(x);
  const auto layout = JetLayout::get(dirs.size(), alpha.order(), caps);
  if (model.kind() != WavefunctionModel::Kind::user_callable) {
    return model.jet(x, dirs, layout).derivative(MultiIndex(target));
  }
  const auto table = model.directional_derivatives(x, dirs, layout);
  return table[layout->index_of(MultiIndex(target))];
}

double laplacian_psi(const WavefunctionModel& model, const Configuration& x) {
  const std::size_t n = 3 * x.size();
  std::vector<std::vector<double>> dirs(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) dirs[i][i] = 1.0;
  const auto layout = JetLayout::get(n, 2);
  double lap = 0.0;
  if (model.kind() != WavefunctionModel::Kind::user_callable) {
    const Jet j = model.jet(x, dirs, layout);
    for (std::size_t i = 0; i < n; ++i) lap += 2.0 * j.coefficient(layout->index_of(MultiIndex::unit(n, i) + MultiIndex::unit(n, i)));
    return lap;
  }
  const double h = WavefunctionModel::fd_step(2);
  const double f0 = model.value(x);
  for (std::size_t i = 0; i < n; ++i) {
    lap += (model.value(x.shifted(dirs[i], h)) - 2.0 * f0 + model.value(x.shifted(dirs[i], -h))) / (h * h);
  }
  return lap;
}

ResidualReport eigen_residual(const WavefunctionModel& model, const PotentialSpec& spec, double delta,
                              std::size_t n_samples, std::uint64_t seed, std::optional<double> energy) {
  if (spec.n_electrons != model.n_electrons()) {
    throw DimensionMismatch("model and potential disagree on the number of electrons");
  }
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  const double E = energy.value_or(model.nominal_energy());
  std::mt19937_64 rng(seed);
  Configuration x(static_cast<std::size_t>(model.n_electrons()));
  constexpr std::size_t kBatches = 10;
  std::vector<double> num(kBatches, 0.0), den(kBatches, 0.0);
  std::size_t used = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double q = sample_configuration(model, rng, x);
    bool ok = true;
    for (std::size_t j = 0; j < x.size() && ok; ++j) {
      for (const Nucleus& nuc : spec.nuclei) ok = ok && norm(x[j] - nuc.position) > delta;
      for (std::size_t k = j + 1; k < x.size(); ++k) ok = ok && norm(x[j] - x[k]) > delta;
    }
    if (!ok) continue;
    ++used;
    const double psi = model.value(x);
    const double h = -laplacian_psi(model, x) + (potential_value(spec, x) - E) * psi;
    num[i % kBatches] += h * h / q;
    den[i % kBatches] += psi * psi / q;
  }
  ResidualReport rep;
  rep.samples = used;
  double n = 0.0, d = 0.0;
  for (std::size_t b = 0; b < kBatches; ++b) {
    n += num[b];
    d += den[b];
  }
  rep.residual = d > 0.0 ? std::sqrt(n / d) : 0.0;
  double mean = 0.0, var = 0.0;
  std::vector<double> r(kBatches, 0.0);
  for (std::size_t b = 0; b < kBatches; ++b) {
    r[b] = den[b] > 0.0 ? std::sqrt(num[b] / den[b]) : 0.0;
    mean += r[b];
  }
  mean /= kBatches;
  for (double v : r) var += (v - mean) * (v - mean);
  rep.stderr_estimate = std::sqrt(var / (kBatches - 1.0) / kBatches);
  return rep;
}

ResidualReport norm_estimate(const WavefunctionModel& model, std::size_t n_samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Configuration x(static_cast<std::size_t>(model.n_electrons()));
  RunningMoments m;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double q = sample_configuration(model, rng, x);
    const double psi = model.value(x);
    m.add(psi * psi / q);
  }
  const auto [mean, err] = m.mean_and_error(n_samples);
  ResidualReport rep;
  rep.residual = std::sqrt(mean);
  rep.stderr_estimate = mean > 0.0 ? err / (2.0 * rep.residual) : 0.0;
  rep.samples = n_samples;
  return rep;
}

std::vector<ClusterNormEntry> cluster_norm_table(const WavefunctionModel& model, const std::vector<ClusterSet>& Ps,
                                                 double eps, int alpha_max, std::size_t n_samples,
                                                 std::uint64_t seed) {
  if (!(eps > 0.0)) throw ConfigError("epsilon", "epsilon must be positive");
  if (Ps.empty()) throw std::invalid_argument("at least one cluster is required");
  if (n_samples < 2) throw std::invalid_argument("at least two samples are required");
  const auto dirs = cluster_directions(Ps);
  const auto layout = JetLayout::get(dirs.size(), alpha_max);
  const std::size_t nt = layout->size();
  std::vector<RunningMoments> l2(nt), l1(nt);
  std::mt19937_64 rng(seed);
  Configuration x(static_cast<std::size_t>(model.n_electrons()));
  std::vector<double> psi2(nt);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double q = sample_configuration(model, rng, x);
    if (!in_U_Pvec(x, Ps, eps)) {
      for (std::size_t t = 0; t < nt; ++t) {
        l2[t].add(0.0);
        l1[t].add(0.0);
      }
      continue;
    }
    const auto d = model.directional_derivatives(x, dirs, layout);
    // Leibniz: partial^alpha psi^2 = sum_beta binom(alpha, beta) psi^(beta) psi^(alpha - beta)
    for (std::size_t t = 0; t < nt; ++t) {
      double s = 0.0;
      for (const auto& term : leibniz_expansion(layout->term(t))) {
        s += static_cast<double>(term.coefficient) * d[layout->index_of(term.beta)] *
             d[layout->index_of(layout->term(t) - term.beta)];
      }
      psi2[t] = s;
    }
    for (std::size_t t = 0; t < nt; ++t) {
      l2[t].add(d[t] * d[t] / q);
      l1[t].add(std::abs(psi2[t]) / q);
    }
  }
  std::vector<ClusterNormEntry> out;
  out.reserve(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    ClusterNormEntry e;
    e.alpha = layout->term(t);
    const auto [m2, e2] = l2[t].mean_and_error(n_samples);
    e.l2.value = std::sqrt(m2);
    e.l2.stderr_estimate = m2 > 0.0 ? e2 / (2.0 * e.l2.value) : 0.0;
    const auto [m1, e1] = l1[t].mean_and_error(n_samples);
    e.l1.value = m1;
    e.l1.stderr_estimate = e1;
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [](const ClusterNormEntry& a, const ClusterNormEntry& b) {
    if (a.alpha.order() != b.alpha.order()) return a.alpha.order() < b.alpha.order();
    return a.alpha > b.alpha;
  });
  return out;
}

NormEstimate cluster_l2_norm(const WavefunctionModel& model, const std::vector<ClusterSet>& Ps,
                             const MultiIndex& alpha, double eps, std::size_t n_samples, std::uint64_t seed) {
  if (alpha.dimension() != 3 * Ps.size()) throw DimensionMismatch("alpha must have dimension 3M");
  if (!(eps > 0.0)) throw ConfigError("epsilon", "epsilon must be positive");
  if (n_samples < 2) throw std::invalid_argument("at least two samples are required");
  const ClusterMultiIndex cm(Ps, alpha);
  std::mt19937_64 rng(seed);
  Configuration x(static_cast<std::size_t>(model.n_electrons()));
  RunningMoments m;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double q = sample_configuration(model, rng, x);
    if (!in_U_Pvec(x, Ps, eps)) {
      m.add(0.0);
      continue;
    }
    const double d = cluster_derivative_psi(model, cm, x);
    m.add(d * d / q);
  }
  const auto [mean, err] = m.mean_and_error(n_samples);
  NormEstimate e;
  e.value = std::sqrt(mean);
  e.stderr_estimate = mean > 0.0 ? err / (2.0 * e.value) : 0.0;
  return e;
}

}  // namespace densan
