#include "densan/clusters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "densan/errors.hpp"

namespace densan {

ClusterSet::ClusterSet(std::vector<int> members, int n_electrons)
    : n_electrons_(n_electrons), members_(std::move(members)) {
  if (n_electrons < 1) throw std::invalid_argument("cluster needs N >= 1");
  if (members_.empty()) throw std::invalid_argument("cluster set must be nonempty");
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  if (members_.front() < 1 || members_.back() > n_electrons) {
    throw std::invalid_argument("cluster members must lie in {1..N}");
  }
}

ClusterSet ClusterSet::all(int n_electrons) {
  std::vector<int> m(static_cast<std::size_t>(n_electrons));
  std::iota(m.begin(), m.end(), 1);
  return ClusterSet(std::move(m), n_electrons);
}

bool ClusterSet::contains(int j) const { return std::binary_search(members_.begin(), members_.end(), j); }

std::vector<int> ClusterSet::complement() const {
  std::vector<int> q;
  for (int j = 1; j <= n_electrons_; ++j) {
    if (!contains(j)) q.push_back(j);
  }
  return q;
}

std::string ClusterSet::to_string() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < members_.size(); ++i) os << (i ? "," : "") << members_[i];
  os << '}';
  return os.str();
}

Vec3 cluster_coordinate(const ClusterSet& P, const Configuration& x) {
  if (static_cast<int>(x.size()) != P.n_electrons()) throw DimensionMismatch("configuration size != N");
  Vec3 s{0, 0, 0};
  for (int j : P.members()) s = s + x.electron(j);
  return (1.0 / std::sqrt(static_cast<double>(P.size()))) * s;
}

std::vector<double> cluster_direction(const ClusterSet& P, int axis) {
  if (axis < 0 || axis > 2) throw std::invalid_argument("axis must be 0, 1 or 2");
  std::vector<double> v(3 * static_cast<std::size_t>(P.n_electrons()), 0.0);
  const double w = 1.0 / std::sqrt(static_cast<double>(P.size()));
  for (int j : P.members()) v[3 * static_cast<std::size_t>(j - 1) + static_cast<std::size_t>(axis)] = w;
  return v;
}

bool in_U_P(const Configuration& x, const ClusterSet& P, double eps) {
  if (static_cast<int>(x.size()) != P.n_electrons()) throw DimensionMismatch("configuration size != N");
  for (int j : P.members()) {
    if (!(norm(x.electron(j)) > eps)) return false;
  }
  for (int j : P.members()) {
    for (int k = 1; k <= P.n_electrons(); ++k) {
      if (P.contains(k)) continue;
      if (!(norm(x.electron(j) - x.electron(k)) > eps)) return false;
    }
  }
  return true;
}

bool in_U_Pvec(const Configuration& x, const std::vector<ClusterSet>& Ps, double eps) {
  if (Ps.empty()) throw std::invalid_argument("U_P intersection needs at least one cluster");
  return std::all_of(Ps.begin(), Ps.end(), [&](const ClusterSet& P) { return in_U_P(x, P, eps); });
}

ClusterMultiIndex::ClusterMultiIndex(const std::vector<ClusterSet>& Ps, const MultiIndex& alpha) {
  if (alpha.dimension() != 3 * Ps.size()) throw DimensionMismatch("cluster multiindex must have dimension 3M");
  for (std::size_t s = 0; s < Ps.size(); ++s) add(Ps[s], alpha.slice(3 * s, 3));
}

void ClusterMultiIndex::add(const ClusterSet& P, const MultiIndex& alpha) {
  if (alpha.dimension() != 3) throw DimensionMismatch("cluster block multiindex must have dimension 3");
  if (alpha.is_zero()) return;
  if (!parts_.empty() && parts_.front().cluster.n_electrons() != P.n_electrons()) {
    throw DimensionMismatch("clusters refer to different N");
  }
  auto it = std::find_if(parts_.begin(), parts_.end(), [&](const ClusterOrder& c) { return c.cluster == P; });
  if (it != parts_.end()) {
    it->alpha = it->alpha + alpha;
    return;
  }
  parts_.push_back({P, alpha});
  std::sort(parts_.begin(), parts_.end());
}

int ClusterMultiIndex::order() const {
  int n = 0;
  for (const auto& p : parts_) n += p.alpha.order();
  return n;
}

std::string ClusterMultiIndex::to_string() const {
  if (parts_.empty()) return "1";
  std::ostringstream os;
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    os << (i ? " " : "") << "d_" << parts_[i].cluster.to_string() << "^" << parts_[i].alpha;
  }
  return os.str();
}

std::vector<ElectronPair> all_pairs(int n_electrons) {
  std::vector<ElectronPair> out;
  for (int j = 1; j <= n_electrons; ++j) {
    for (int k = j + 1; k <= n_electrons; ++k) out.emplace_back(j, k);
  }
  return out;
}

PairSet::PairSet(std::vector<ElectronPair> pairs, int n_electrons)
    : n_electrons_(n_electrons), pairs_(std::move(pairs)) {
  for (const auto& [j, k] : pairs_) {
    if (!(1 <= j && j < k && k <= n_electrons)) throw std::invalid_argument("pairs must satisfy 1 <= j < k <= N");
  }
  std::sort(pairs_.begin(), pairs_.end());
  pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
}

bool PairSet::contains(int j, int k) const {
  if (j > k) std::swap(j, k);
  return std::binary_search(pairs_.begin(), pairs_.end(), ElectronPair{j, k});
}

namespace {

double bump_g(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }

}  // namespace

double smooth_step(double u) {
  if (u <= 0.0) return 1.0;
  if (u >= 1.0) return 0.0;
  const double a = bump_g(u), b = bump_g(1.0 - u);
  return b / (a + b);
}

double smooth_step_complement(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double a = bump_g(u), b = bump_g(1.0 - u);
  return a / (a + b);
}

double smooth_step_derivative(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double a = bump_g(u), b = bump_g(1.0 - u);
  const double s = a + b;
  return -(a * b) * (1.0 / (u * u) + 1.0 / ((1.0 - u) * (1.0 - u))) / (s * s);
}

CutoffPair::CutoffPair(double epsilon, int n_electrons) : epsilon_(epsilon), n_electrons_(n_electrons) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("cutoff epsilon must be positive");
  if (n_electrons < 1) throw std::invalid_argument("cutoff needs N >= 1");
}

double CutoffPair::chi1(const Vec3& t) const {
  const double r0 = inner_radius();
  return smooth_step((norm(t) - r0) / r0);
}

double CutoffPair::chi2(const Vec3& t) const {
  const double r0 = inner_radius();
  return smooth_step_complement((norm(t) - r0) / r0);
}

double CutoffPair::dchi2(const Vec3& t, int axis) const {
  if (axis < 0 || axis > 2) throw std::invalid_argument("axis must be 0, 1 or 2");
  const double r = norm(t);
  const double r0 = inner_radius();
  if (r <= r0) return 0.0;
  return -smooth_step_derivative((r - r0) / r0) / r0 * (t[static_cast<std::size_t>(axis)] / r);
}

std::string to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::chi1: return "chi1";
    case FactorKind::chi2: return "chi2";
    case FactorKind::dchi2_x: return "dchi2_1";
    case FactorKind::dchi2_y: return "dchi2_2";
    case FactorKind::dchi2_z: return "dchi2_3";
  }
  return "?";
}

FactorKind factor_kind_from_string(const std::string& s) {
  if (s == "chi1") return FactorKind::chi1;
  if (s == "chi2") return FactorKind::chi2;
  if (s == "dchi2_1") return FactorKind::dchi2_x;
  if (s == "dchi2_2") return FactorKind::dchi2_y;
  if (s == "dchi2_3") return FactorKind::dchi2_z;
  throw std::invalid_argument("unknown factor kind '" + s + "'");
}

FactorKind dchi2_kind(int axis) {
  switch (axis) {
    case 0: return FactorKind::dchi2_x;
    case 1: return FactorKind::dchi2_y;
    case 2: return FactorKind::dchi2_z;
  }
  throw std::invalid_argument("axis must be 0, 1 or 2");
}

int dchi2_axis(FactorKind kind) {
  switch (kind) {
    case FactorKind::dchi2_x: return 0;
    case FactorKind::dchi2_y: return 1;
    case FactorKind::dchi2_z: return 2;
    default: return -1;
  }
}

PhiTerm::PhiTerm(int n_electrons)
    : n_electrons_(n_electrons),
      factors_(static_cast<std::size_t>(n_electrons * (n_electrons - 1) / 2), FactorKind::chi2) {
  if (n_electrons < 1) throw std::invalid_argument("phi term needs N >= 1");
}

PhiTerm::PhiTerm(int n_electrons, std::vector<FactorKind> factors)
    : n_electrons_(n_electrons), factors_(std::move(factors)) {
  if (n_electrons < 1) throw std::invalid_argument("phi term needs N >= 1");
  if (factors_.size() != static_cast<std::size_t>(n_electrons * (n_electrons - 1) / 2)) {
    throw DimensionMismatch("phi term needs exactly one factor per pair");
  }
}

PhiTerm PhiTerm::from_pair_set(const PairSet& I) {
  PhiTerm t(I.n_electrons());
  for (const auto& [j, k] : I.pairs()) t.factors_[t.position(j, k)] = FactorKind::chi1;
  return t;
}

std::size_t PhiTerm::position(int j, int k) const {
  if (j > k) std::swap(j, k);
  if (!(1 <= j && j < k && k <= n_electrons_)) throw std::invalid_argument("invalid electron pair");
  // Pairs (j, k) in lexicographic order: rows j = 1..N-1 of lengths N-j.
  const int before = (j - 1) * n_electrons_ - (j - 1) * j / 2;
  return static_cast<std::size_t>(before + (k - j - 1));
}

FactorKind PhiTerm::factor(int j, int k) const { return factors_[position(j, k)]; }

PhiTerm PhiTerm::with_factor(int j, int k, FactorKind kind) const {
  PhiTerm t = *this;
  t.factors_[position(j, k)] = kind;
  return t;
}

std::string PhiTerm::to_string() const {
  std::ostringstream os;
  const auto pairs = all_pairs(n_electrons_);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    os << (i ? " " : "") << densan::to_string(factors_[i]) << "(" << pairs[i].first << "," << pairs[i].second << ")";
  }
  return pairs.empty() ? std::string("1") : os.str();
}

std::vector<PhiTerm> all_partition_terms(int n_electrons) {
  const auto pairs = all_pairs(n_electrons);
  if (pairs.size() > 20) throw UnsupportedError("too many pairs for an explicit partition");
  std::vector<PhiTerm> out;
  const std::size_t count = std::size_t{1} << pairs.size();
  for (std::size_t mask = 0; mask < count; ++mask) {
    std::vector<ElectronPair> I;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      if (mask & (std::size_t{1} << p)) I.push_back(pairs[p]);
    }
    out.push_back(PhiTerm::from_pair_set(PairSet(std::move(I), n_electrons)));
  }
  return out;
}

double phi_term_value(const PhiTerm& term, const Configuration& x, const CutoffPair& cut) {
  if (static_cast<int>(x.size()) != term.n_electrons()) throw DimensionMismatch("configuration size != N");
  double v = 1.0;
  std::size_t p = 0;
  for (int j = 1; j <= term.n_electrons(); ++j) {
    for (int k = j + 1; k <= term.n_electrons(); ++k, ++p) {
      const Vec3 t = x.electron(j) - x.electron(k);
      const FactorKind kind = term.factors()[p];
      switch (kind) {
        case FactorKind::chi1: v *= cut.chi1(t); break;
        case FactorKind::chi2: v *= cut.chi2(t); break;
        default: v *= cut.dchi2(t, dchi2_axis(kind)); break;
      }
      if (v == 0.0) return 0.0;
    }
  }
  return v;
}

PairSet pair_index_set(const PhiTerm& term) {
  std::vector<ElectronPair> I;
  const auto pairs = all_pairs(term.n_electrons());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (term.factors()[p] != FactorKind::chi2) I.push_back(pairs[p]);
  }
  return PairSet(std::move(I), term.n_electrons());
}

ClusterSet cluster_of_one(const PairSet& I, int n_electrons) {
  std::vector<int> parent(static_cast<std::size_t>(n_electrons + 1));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  };
  for (const auto& [j, k] : I.pairs()) {
    if (k > n_electrons) throw std::invalid_argument("pair outside {1..N}");
    parent[static_cast<std::size_t>(find(j))] = find(k);
  }
  std::vector<int> members;
  const int root = find(1);
  for (int j = 1; j <= n_electrons; ++j) {
    if (find(j) == root) members.push_back(j);
  }
  return ClusterSet(std::move(members), n_electrons);
}

namespace {

Vec3 random_direction(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> a(0.0, 2.0 * std::numbers::pi);
  const double z = u(rng);
  const double phi = a(rng);
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {s * std::cos(phi), s * std::sin(phi), z};
}

}  // namespace

SupportReport support_condition_check(const PhiTerm& term, double epsilon, std::size_t n_samples,
                                      std::uint64_t seed, std::optional<ClusterSet> claimed) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  const int N = term.n_electrons();
  const CutoffPair cut(epsilon, N);
  const double r_in = cut.inner_radius();
  const double r_out = cut.outer_radius();
  const double half_box = 2.0 * epsilon;
  const double region = epsilon / (4.0 * N);

  SupportReport rep;
  rep.cluster_tested = claimed ? *claimed : cluster_of_term(term);
  if (rep.cluster_tested.n_electrons() != N) throw DimensionMismatch("claimed cluster refers to a different N");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> mode(0, 4);
  const std::size_t max_attempts = 200 * n_samples;

  Configuration x(static_cast<std::size_t>(N));
  while (rep.accepted < n_samples && rep.attempts < max_attempts) {
    ++rep.attempts;
    const double r1 = unif(rng) < 0.5 ? epsilon * (1.0 + 0.02 * unif(rng)) : epsilon * (1.0 + unif(rng));
    x[0] = r1 * random_direction(rng);
    for (int k = 2; k <= N; ++k) {
      std::uniform_int_distribution<int> anchor(1, k - 1);
      const Vec3 base = x.electron(anchor(rng));
      double r = 0.0;
      switch (mode(rng)) {
        case 0: r = r_in * (1.0 + 0.1 * (unif(rng) - 0.5)); break;
        case 1: r = r_out * (1.0 + 0.1 * (unif(rng) - 0.5)); break;
        case 2: r = 1.2 * r_out * unif(rng); break;
        case 3: r = region * (1.0 + 0.02 * (unif(rng) - 0.5)); break;
        default: r = 4.0 * epsilon * unif(rng); break;
      }
      x[static_cast<std::size_t>(k - 1)] = base + r * random_direction(rng);
    }
    bool in_box = true;
    for (std::size_t j = 0; j < x.size() && in_box; ++j) {
      for (double c : x[j]) in_box = in_box && std::abs(c) <= half_box;
    }
    if (!in_box || !(norm(x[0]) > epsilon)) continue;
    if (phi_term_value(term, x, cut) == 0.0) continue;
    ++rep.accepted;
    if (!in_U_P(x, rep.cluster_tested, region)) ++rep.violations;
  }
  return rep;
}

std::vector<PhiTerm> support_term_family(int n_electrons) {
  std::vector<PhiTerm> out = all_partition_terms(n_electrons);
  const std::size_t base = out.size();
  const auto pairs = all_pairs(n_electrons);
  int axis = 0;
  for (std::size_t t = 0; t < base; ++t) {
    for (const auto& [j, k] : pairs) {
      if (out[t].factor(j, k) == FactorKind::chi1) {
        out.push_back(out[t].with_factor(j, k, dchi2_kind(axis)));
        axis = (axis + 1) % 3;
      }
    }
  }
  return out;
}

}  // namespace densan
