#include "densan/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "densan/errors.hpp"
#include "densan/quadrature.hpp"

namespace densan {

namespace {

constexpr double kPi = std::numbers::pi;

// One term of V: weight * g(|u|) with u = x_j - R_l (k == 0) or x_j - x_k.
struct VTerm {
  int j = 0;
  int k = 0;
  std::size_t nucleus = 0;
  double weight = 0.0;
  Interaction g;
};

std::vector<VTerm> potential_terms(const PotentialSpec& spec) {
  std::vector<VTerm> terms;
  for (int j = 1; j <= spec.n_electrons; ++j) {
    for (std::size_t l = 0; l < spec.nuclei.size(); ++l) {
      terms.push_back({j, 0, l, -spec.nuclei[l].charge, spec.nuclei[l].interaction});
    }
  }
  if (spec.include_repulsion) {
    for (int j = 1; j <= spec.n_electrons; ++j) {
      for (int k = j + 1; k <= spec.n_electrons; ++k) terms.push_back({j, k, 0, 1.0, spec.electron_interaction});
    }
  }
  return terms;
}

Vec3 term_argument(const PotentialSpec& spec, const VTerm& term, const Configuration& x) {
  if (term.k == 0) return x.electron(term.j) - spec.nuclei[term.nucleus].position;
  return x.electron(term.j) - x.electron(term.k);
}

double cluster_coefficient(const VTerm& term, const ClusterSet& P) {
  double c = P.contains(term.j) ? 1.0 : 0.0;
  if (term.k != 0 && P.contains(term.k)) c -= 1.0;
  return c / std::sqrt(static_cast<double>(P.size()));
}

double nuclear_repulsion(const PotentialSpec& spec) {
  double e = 0.0;
  for (std::size_t l = 0; l < spec.nuclei.size(); ++l) {
    for (std::size_t k = l + 1; k < spec.nuclei.size(); ++k) {
      e += spec.nuclei[l].charge * spec.nuclei[k].charge / norm(spec.nuclei[l].position - spec.nuclei[k].position);
    }
  }
  return e;
}

// Derivative of V for one cluster multiindex, given per-term coefficient
// tables. Returns the term-wise sum; zero-coefficient terms never touch tables.
double assemble_cluster_derivative(const std::vector<VTerm>& terms, const std::vector<ClusterSet>& Ps,
                                   const MultiIndex& alpha, const std::vector<RadialTensorTable>& tables) {
  const std::size_t M = Ps.size();
  double total = 0.0;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    double factor = terms[t].weight;
    MultiIndex beta(3);
    for (std::size_t s = 0; s < M && factor != 0.0; ++s) {
      const MultiIndex block = alpha.slice(3 * s, 3);
      if (block.is_zero()) continue;
      const double c = cluster_coefficient(terms[t], Ps[s]);
      if (c == 0.0) {
        factor = 0.0;
        break;
      }
      factor *= std::pow(c, block.order());
      beta = beta + block;
    }
    if (factor == 0.0) continue;
    total += factor * tables[t].derivative(beta);
  }
  return total;
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return lo * std::exp(u(rng) * std::log(hi / lo));
}

Vec3 random_direction(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double z = 2.0 * u(rng) - 1.0;
  const double phi = 2.0 * kPi * u(rng);
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {s * std::cos(phi), s * std::sin(phi), z};
}

// Proposal concentrated near the boundary of U_P(delta): electron distances to
// the nuclei and to earlier electrons log-uniform on [delta, 8].
Configuration propose_near_boundary(const PotentialSpec& spec, double delta, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Configuration x(static_cast<std::size_t>(spec.n_electrons));
  const double hi = std::max(8.0, 4.0 * delta);
  for (int j = 0; j < spec.n_electrons; ++j) {
    Vec3 anchor{0, 0, 0};
    if (j > 0 && u(rng) < 0.5) {
      anchor = x[static_cast<std::size_t>(std::min<int>(j - 1, static_cast<int>(u(rng) * j)))];
    } else if (!spec.nuclei.empty()) {
      const auto l = std::min(spec.nuclei.size() - 1, static_cast<std::size_t>(u(rng) * spec.nuclei.size()));
      anchor = spec.nuclei[l].position;
    }
    x[static_cast<std::size_t>(j)] = anchor + log_uniform(rng, delta, hi) * random_direction(rng);
  }
  return x;
}

bool in_region(const PotentialSpec& spec, const Configuration& x, const std::vector<ClusterSet>& Ps, double delta) {
  // U_P is stated for a nucleus at the origin; with several nuclei every
  // cluster electron must keep distance delta from each of them.
  for (const ClusterSet& P : Ps) {
    for (int j : P.members()) {
      for (const Nucleus& n : spec.nuclei) {
        if (!(norm(x.electron(j) - n.position) > delta)) return false;
      }
      for (int k : P.complement()) {
        if (!(norm(x.electron(j) - x.electron(k)) > delta)) return false;
      }
    }
  }
  return true;
}

std::vector<RadialTensorTable> build_tables(const PotentialSpec& spec, const std::vector<VTerm>& terms,
                                            const Configuration& x, const std::vector<ClusterSet>& Ps,
                                            int max_order) {
  std::vector<RadialTensorTable> tables;
  tables.reserve(terms.size());
  for (const VTerm& t : terms) {
    bool moves = false;
    for (const ClusterSet& P : Ps) moves = moves || cluster_coefficient(t, P) != 0.0;
    // Terms frozen by every cluster only need their value.
    tables.emplace_back(term_argument(spec, t, x), moves ? max_order : 0, t.g);
  }
  return tables;
}

// sup over sampled configurations of |partial^alpha V| for every alpha with
// 1 <= |alpha| <= alpha_max.
std::vector<double> sampled_sups(const PotentialSpec& spec, const std::vector<ClusterSet>& Ps, double delta,
                                 const std::vector<MultiIndex>& alphas, int alpha_max, std::size_t n_samples,
                                 std::uint64_t seed, std::size_t* used) {
  const auto terms = potential_terms(spec);
  std::mt19937_64 rng(seed);
  std::vector<double> sups(alphas.size(), 0.0);
  std::size_t accepted = 0, attempts = 0;
  const std::size_t max_attempts = 200 * n_samples + 1000;
  while (accepted < n_samples && attempts < max_attempts) {
    ++attempts;
    const Configuration x = propose_near_boundary(spec, delta, rng);
    if (!in_region(spec, x, Ps, delta)) continue;
    ++accepted;
    const auto tables = build_tables(spec, terms, x, Ps, alpha_max);
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      sups[a] = std::max(sups[a], std::abs(assemble_cluster_derivative(terms, Ps, alphas[a], tables)));
    }
  }
  if (used) *used = accepted;
  return sups;
}

double orbital_value(const OrbitalTerm& o, const Vec3& y) {
  const Vec3 d = y - o.center;
  if (o.kind == OrbitalTerm::Kind::gaussian) return o.weight * std::exp(-o.rate * dot(d, d));
  return o.weight * std::exp(-o.rate * norm(d));
}

Vec3 orbital_gradient(const OrbitalTerm& o, const Vec3& y) {
  const Vec3 d = y - o.center;
  if (o.kind == OrbitalTerm::Kind::gaussian) return (-2.0 * o.rate * o.weight * std::exp(-o.rate * dot(d, d))) * d;
  const double r = norm(d);
  if (r == 0.0) return {0, 0, 0};
  return (-o.rate * o.weight * std::exp(-o.rate * r) / r) * d;
}

double superposition_value(const std::vector<OrbitalTerm>& orb, const Vec3& y) {
  double v = 0.0;
  for (const auto& o : orb) v += orbital_value(o, y);
  return v;
}

Vec3 superposition_gradient(const std::vector<OrbitalTerm>& orb, const Vec3& y) {
  Vec3 g{0, 0, 0};
  for (const auto& o : orb) g = g + orbital_gradient(o, y);
  return g;
}

// Length scale of the slowest-decaying orbital term.
double decay_rate(const TestFunction& u) {
  double b = std::numeric_limits<double>::infinity();
  for (const auto& orb : u.orbitals) {
    for (const auto& o : orb) {
      b = std::min(b, o.kind == OrbitalTerm::Kind::gaussian ? std::sqrt(o.rate) : o.rate);
    }
  }
  return std::isfinite(b) ? b : 1.0;
}

}  // namespace

Interaction Interaction::yukawa(double kappa) {
  if (!(kappa > 0.0)) throw ConfigError("screening", "Yukawa screening must be positive");
  return {Kind::yukawa, kappa};
}

double Interaction::value(double r) const {
  if (r == 0.0) throw SingularityError("radial profile evaluated at r = 0");
  return kind == Kind::coulomb ? 1.0 / r : std::exp(-screening * r) / r;
}

PotentialSpec PotentialSpec::coulomb_atom(double Z, int n_electrons) {
  PotentialSpec spec;
  spec.n_electrons = n_electrons;
  spec.nuclei.push_back({{0, 0, 0}, Z, Interaction::coulomb()});
  spec.validate();
  return spec;
}

void PotentialSpec::validate() const {
  if (n_electrons < 1) throw ConfigError("N", "number of electrons must be at least 1");
  for (std::size_t l = 0; l < nuclei.size(); ++l) {
    if (!(nuclei[l].charge > 0.0)) throw ConfigError("Z", "nuclear charges must be positive");
    if (nuclei[l].interaction.kind == Interaction::Kind::yukawa && !(nuclei[l].interaction.screening > 0.0)) {
      throw ConfigError("screening", "Yukawa screening must be positive");
    }
    for (std::size_t k = l + 1; k < nuclei.size(); ++k) {
      if (norm(nuclei[l].position - nuclei[k].position) == 0.0) {
        throw ConfigError("nuclei", "nuclear positions must be pairwise distinct");
      }
    }
  }
  if (electron_interaction.kind == Interaction::Kind::yukawa && !(electron_interaction.screening > 0.0)) {
    throw ConfigError("screening", "Yukawa screening must be positive");
  }
}

double potential_value(const PotentialSpec& spec, const Configuration& x) {
  if (static_cast<int>(x.size()) != spec.n_electrons) {
    throw DimensionMismatch("configuration size does not match the number of electrons");
  }
  double v = nuclear_repulsion(spec);
  for (const VTerm& t : potential_terms(spec)) {
    const double r = norm(term_argument(spec, t, x));
    if (r == 0.0) throw SingularityError("configuration lies on a singular set of V");
    v += t.weight * t.g.value(r);
  }
  return v;
}

RadialTensorTable::RadialTensorTable(const Vec3& t, int max_order, const Interaction& kind)
    : max_order_(max_order), layout_(JetLayout::get(3, max_order)) {
  if (max_order < 0) throw std::invalid_argument("max_order must be nonnegative");
  const double r2 = dot(t, t);
  if (r2 == 0.0) throw SingularityError("radial derivative tensor at t = 0");
  const JetLayout& L = *layout_;
  coeffs_.assign(L.size(), 0.0);
  coeffs_[0] = 1.0 / std::sqrt(r2);
  for (std::size_t i = 1; i < L.size(); ++i) {
    const MultiIndex& b = L.term(i);
    const int n = b.order();
    double first = 0.0, second = 0.0;
    for (std::size_t d = 0; d < 3; ++d) {
      if (b[d] >= 1) {
        MultiIndex c = b;
        c.set(d, b[d] - 1);
        first += t[d] * coeffs_[L.index_of(c)];
      }
      if (b[d] >= 2) {
        MultiIndex c = b;
        c.set(d, b[d] - 2);
        second += coeffs_[L.index_of(c)];
      }
    }
    coeffs_[i] = -((2.0 * n - 1.0) * first + (n - 1.0) * second) / (n * r2);
  }
  if (kind.kind == Interaction::Kind::yukawa) {
    Jet inv(layout_);
    std::copy(coeffs_.begin(), coeffs_.end(), inv.coefficients().begin());
    Jet rsq(layout_);
    for (std::size_t d = 0; d < 3; ++d) {
      const Jet v = Jet::variable(layout_, d, t[d]);
      rsq += v * v;
    }
    const Jet r = rsq * inv;
    const Jet screened = exp(r * (-kind.screening)) * inv;
    std::copy(screened.coefficients().begin(), screened.coefficients().end(), coeffs_.begin());
  }
}

double RadialTensorTable::coefficient(const MultiIndex& beta) const {
  if (beta.dimension() != 3) throw DimensionMismatch("radial tensor index must have dimension 3");
  if (beta.order() > max_order_) throw std::out_of_range("order exceeds the table");
  return coeffs_[layout_->index_of(beta)];
}

double RadialTensorTable::derivative(const MultiIndex& beta) const {
  if (beta.dimension() != 3) throw DimensionMismatch("radial tensor index must have dimension 3");
  if (beta.order() > max_order_) throw std::out_of_range("order exceeds the table");
  const std::size_t i = layout_->index_of(beta);
  return coeffs_[i] * layout_->factorial(i);
}

double radial_derivative_tensor(const MultiIndex& alpha, const Vec3& t, const Interaction& kind) {
  if (alpha.dimension() != 3) throw DimensionMismatch("radial tensor index must have dimension 3");
  return RadialTensorTable(t, alpha.order(), kind).derivative(alpha);
}

std::vector<PotentialTermDerivative> cluster_derivative_terms(const PotentialSpec& spec, const ClusterMultiIndex& alpha,
                                                              const Configuration& x) {
  if (static_cast<int>(x.size()) != spec.n_electrons) {
    throw DimensionMismatch("configuration size does not match the number of electrons");
  }
  std::vector<ClusterSet> Ps;
  std::vector<int> flat;
  for (const auto& part : alpha.parts()) {
    if (part.cluster.n_electrons() != spec.n_electrons) {
      throw DimensionMismatch("cluster does not match the number of electrons");
    }
    Ps.push_back(part.cluster);
    for (int e : part.alpha.entries()) flat.push_back(e);
  }
  const MultiIndex a(flat.empty() ? std::vector<int>{0, 0, 0} : flat);
  std::vector<PotentialTermDerivative> out;
  for (const VTerm& t : potential_terms(spec)) {
    PotentialTermDerivative d;
    d.j = t.j;
    d.k = t.k;
    d.nucleus = t.k == 0 ? static_cast<int>(t.nucleus) : -1;
    d.relation = PotentialTermDerivative::Relation::moving;
    double factor = t.weight;
    MultiIndex beta(3);
    for (std::size_t s = 0; s < Ps.size(); ++s) {
      const MultiIndex block = a.slice(3 * s, 3);
      const double c = cluster_coefficient(t, Ps[s]);
      if (c == 0.0) {
        const bool j_in = Ps[s].contains(t.j);
        d.relation = j_in ? PotentialTermDerivative::Relation::both_in_cluster
                          : PotentialTermDerivative::Relation::out_of_cluster;
        factor = 0.0;
        break;
      }
      factor *= std::pow(c, block.order());
      beta = beta + block;
    }
    if (factor != 0.0) d.value = factor * radial_derivative_tensor(beta, term_argument(spec, t, x), t.g);
    out.push_back(d);
  }
  return out;
}

double cluster_derivative_of_V(const PotentialSpec& spec, const ClusterMultiIndex& alpha, const Configuration& x) {
  if (static_cast<int>(x.size()) != spec.n_electrons) {
    throw DimensionMismatch("configuration size does not match the number of electrons");
  }
  if (alpha.empty()) return potential_value(spec, x);
  double total = 0.0;
  for (const auto& d : cluster_derivative_terms(spec, alpha, x)) total += d.value;
  return total;
}

PotentialGrowthReport potential_growth_check(const PotentialSpec& spec, const std::vector<ClusterSet>& Ps,
                                             double eps, int alpha_max, std::size_t n_samples,
                                             std::uint64_t seed) {
  if (!(eps > 0.0)) throw ConfigError("epsilon", "epsilon must be positive");
  if (Ps.empty()) throw std::invalid_argument("potential growth check needs at least one cluster");
  spec.validate();
  std::vector<MultiIndex> alphas;
  for (const MultiIndex& a : multiindices_up_to(3 * Ps.size(), alpha_max)) {
    if (a.order() >= 1) alphas.push_back(a);
  }
  PotentialGrowthReport report;
  const auto sups = sampled_sups(spec, Ps, eps / 2.0, alphas, alpha_max, n_samples, seed, &report.samples_used);
  double LV = 0.0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const int k = alphas[i].order();
    LV = std::max(LV, std::pow(sups[i] / std::tgamma(k + 1.0), 1.0 / (k + 1.0)));
  }
  report.fitted_LV = LV;
  report.all_pass = report.samples_used > 0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const int k = alphas[i].order();
    PotentialGrowthEntry e;
    e.alpha = alphas[i];
    e.sup_estimate = sups[i];
    e.bound = std::pow(LV, k + 1.0) * std::tgamma(k + 1.0);
    e.pass = sups[i] <= e.bound * (1.0 + 1e-12);
    report.all_pass = report.all_pass && e.pass;
    report.entries.push_back(std::move(e));
  }
  return report;
}

std::vector<OffsetRegionCheck> offset_region_check(const PotentialSpec& spec, const std::vector<ClusterSet>& Ps,
                                                   double eps, double eta, double fitted_LV, int alpha_max,
                                                   std::size_t n_samples, std::uint64_t seed) {
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
  std::vector<MultiIndex> alphas;
  for (const MultiIndex& a : multiindices_up_to(3 * Ps.size(), alpha_max)) {
    if (a.order() >= 1) alphas.push_back(a);
  }
  std::vector<OffsetRegionCheck> out;
  for (int j = 1; j * eta < 1.0; ++j) {
    const auto sups = sampled_sups(spec, Ps, eps / 2.0 + j * eta, alphas, alpha_max, n_samples,
                                   seed + static_cast<std::uint64_t>(j), nullptr);
    for (int k = 1; k <= alpha_max; ++k) {
      double sup = 0.0;
      for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (alphas[i].order() == k) sup = std::max(sup, sups[i]);
      }
      OffsetRegionCheck c;
      c.j = j;
      c.eta = eta;
      c.order = k;
      c.lhs = std::pow(eta, k) * sup;
      c.rhs = std::pow(fitted_LV, k + 1.0) * std::tgamma(k + 1.0) * std::pow(static_cast<double>(j), -k);
      c.pass = c.lhs <= c.rhs * (1.0 + 1e-12);
      out.push_back(c);
    }
  }
  return out;
}

double TestFunction::value(const Configuration& x) const {
  if (x.size() != orbitals.size()) throw DimensionMismatch("configuration size does not match the test function");
  double v = 1.0;
  for (std::size_t j = 0; j < orbitals.size(); ++j) v *= superposition_value(orbitals[j], x[j]);
  return v;
}

std::vector<double> TestFunction::gradient(const Configuration& x) const {
  if (x.size() != orbitals.size()) throw DimensionMismatch("configuration size does not match the test function");
  const std::size_t n = orbitals.size();
  std::vector<double> vals(n), grad(3 * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) vals[j] = superposition_value(orbitals[j], x[j]);
  for (std::size_t j = 0; j < n; ++j) {
    double others = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i != j) others *= vals[i];
    }
    const Vec3 g = superposition_gradient(orbitals[j], x[j]);
    for (std::size_t d = 0; d < 3; ++d) grad[3 * j + d] = others * g[d];
  }
  return grad;
}

TestFunction TestFunction::scaled(double lambda) const {
  if (!(lambda > 0.0)) throw std::invalid_argument("scale must be positive");
  TestFunction out = *this;
  for (auto& orb : out.orbitals) {
    for (auto& o : orb) {
      o.center = (1.0 / lambda) * o.center;
      o.rate *= o.kind == OrbitalTerm::Kind::gaussian ? lambda * lambda : lambda;
    }
  }
  return out;
}

std::vector<TestFunction> hardy_test_family(int n_electrons, std::size_t n_random, std::uint64_t seed) {
  if (n_electrons < 1) throw std::invalid_argument("test family needs at least one electron");
  const auto n = static_cast<std::size_t>(n_electrons);
  std::vector<TestFunction> family;
  TestFunction gauss, expo;
  gauss.orbitals.assign(n, {OrbitalTerm{OrbitalTerm::Kind::gaussian, {0, 0, 0}, 1.0, 1.0}});
  expo.orbitals.assign(n, {OrbitalTerm{OrbitalTerm::Kind::exponential, {0, 0, 0}, 1.0, 1.0}});
  family.push_back(gauss);
  family.push_back(expo);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t r = 0; r < n_random; ++r) {
    TestFunction f;
    f.orbitals.resize(n);
    for (auto& orb : f.orbitals) {
      const int terms = 1 + static_cast<int>(u(rng) * 3.0);
      for (int t = 0; t < terms; ++t) {
        OrbitalTerm o;
        o.kind = u(rng) < 0.5 ? OrbitalTerm::Kind::gaussian : OrbitalTerm::Kind::exponential;
        o.center = {2.0 * u(rng) - 1.0, 2.0 * u(rng) - 1.0, 2.0 * u(rng) - 1.0};
        o.rate = 0.5 + 1.5 * u(rng);
        o.weight = 0.25 + u(rng);
        orb.push_back(o);
      }
    }
    family.push_back(std::move(f));
  }
  return family;
}

HardyReport hardy_check(const PotentialSpec& spec, const TestFunction& u, std::size_t n_samples,
                        std::uint64_t seed) {
  if (u.n_electrons() != spec.n_electrons) {
    throw DimensionMismatch("test function and potential disagree on the number of electrons");
  }
  const int N = spec.n_electrons;
  const auto n = static_cast<std::size_t>(N);
  const RadialExponentialSampler q(decay_rate(u));
  std::vector<Vec3> anchors;
  for (const auto& nuc : spec.nuclei) anchors.push_back(nuc.position);
  if (anchors.empty()) anchors.push_back({0, 0, 0});
  const auto pairs = all_pairs(N);
  const std::size_t n_components = 1 + pairs.size();

  auto electron_density = [&](const Vec3& y) {
    double s = 0.0;
    for (const Vec3& a : anchors) s += q.density(y - a);
    return s / static_cast<double>(anchors.size());
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  constexpr std::size_t kBatches = 10;
  std::vector<double> A(kBatches, 0.0), B(kBatches, 0.0);
  bool finite = true;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const std::size_t comp = std::min(n_components - 1, static_cast<std::size_t>(unif(rng) * n_components));
    Configuration x(n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto l = std::min(anchors.size() - 1, static_cast<std::size_t>(unif(rng) * anchors.size()));
      x[j] = anchors[l] + q.sample(rng);
    }
    if (comp > 0) {
      const auto [j, k] = pairs[comp - 1];
      x[static_cast<std::size_t>(k - 1)] = x.electron(j) + q.sample(rng);
    }
    double density = 0.0;
    {
      double p = 1.0;
      for (std::size_t j = 0; j < n; ++j) p *= electron_density(x[j]);
      density += p;
    }
    for (const auto& [j, k] : pairs) {
      double p = q.density(x.electron(k) - x.electron(j));
      for (int m = 1; m <= N; ++m) {
        if (m != k) p *= electron_density(x.electron(m));
      }
      density += p;
    }
    density /= static_cast<double>(n_components);

    double v = 0.0;
    try {
      v = potential_value(spec, x) - spec.energy_shift;
    } catch (const SingularityError&) {
      continue;
    }
    const double val = u.value(x);
    double g2 = 0.0;
    for (double g : u.gradient(x)) g2 += g * g;
    const std::size_t b = i % kBatches;
    A[b] += v * v * val * val / density;
    B[b] += (val * val + g2) / density;
  }
  HardyReport rep;
  double a = 0.0, bsum = 0.0;
  for (std::size_t b = 0; b < kBatches; ++b) {
    a += A[b];
    bsum += B[b];
  }
  rep.v_norm = std::sqrt(a / static_cast<double>(n_samples));
  rep.w12_norm = std::sqrt(bsum / static_cast<double>(n_samples));
  rep.ratio = rep.v_norm / rep.w12_norm;
  double mean = 0.0, var = 0.0;
  std::vector<double> ratios(kBatches);
  for (std::size_t b = 0; b < kBatches; ++b) {
    ratios[b] = B[b] > 0.0 ? std::sqrt(A[b] / B[b]) : 0.0;
    mean += ratios[b];
  }
  mean /= kBatches;
  for (double r : ratios) var += (r - mean) * (r - mean);
  rep.ratio_stderr = std::sqrt(var / (kBatches - 1.0) / kBatches);
  finite = finite && std::isfinite(rep.ratio) && std::isfinite(rep.ratio_stderr) && rep.w12_norm > 0.0;
  rep.finite = finite;
  return rep;
}

HardyKernelValues hardy_kernel_integrals(const std::vector<OrbitalTerm>& orbital) {
  std::vector<Vec3> centers{{0, 0, 0}};
  double scale = 1.0;
  for (const auto& o : orbital) {
    centers.push_back(o.center);
    scale = std::min(scale, o.kind == OrbitalTerm::Kind::gaussian ? 1.0 / std::sqrt(o.rate) : 1.0 / o.rate);
  }
  MultiCenterOptions opts;
  opts.rel_tol = 1e-8;
  opts.length_scale = scale;
  const auto res = integrate_multicenter(centers, {}, 2, [&](const Vec3& y, std::span<double> out) {
    const double r2 = dot(y, y);
    const double v = superposition_value(orbital, y);
    const Vec3 g = superposition_gradient(orbital, y);
    out[0] = r2 > 0.0 ? v * v / r2 : 0.0;
    out[1] = dot(g, g);
  }, opts);
  return {res.values[0], res.values[1]};
}

}  // namespace densan
