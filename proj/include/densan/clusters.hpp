#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "densan/geometry.hpp"
#include "densan/multiindex.hpp"

namespace densan {

/// Nonempty subset P of {1, ..., N}. Members are kept sorted.
class ClusterSet {
 public:
  ClusterSet() = default;
  ClusterSet(std::vector<int> members, int n_electrons);
  static ClusterSet all(int n_electrons);

  const std::vector<int>& members() const noexcept { return members_; }
  int n_electrons() const noexcept { return n_electrons_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool contains(int j) const;
  /// Q = {1..N} \ P (may be empty).
  std::vector<int> complement() const;

  bool operator==(const ClusterSet&) const = default;
  std::strong_ordering operator<=>(const ClusterSet&) const = default;
  std::string to_string() const;

 private:
  int n_electrons_ = 0;
  std::vector<int> members_;
};

/// x_P = |P|^{-1/2} sum_{j in P} x_j
Vec3 cluster_coordinate(const ClusterSet& P, const Configuration& x);

/// Unit vector v in R^{3N} with v_j = e_axis / sqrt|P| for j in P, 0 otherwise.
/// `axis` is zero-based (0, 1, 2).
std::vector<double> cluster_direction(const ClusterSet& P, int axis);

/// x in U_P(eps): |x_j| > eps for j in P and |x_j - x_k| > eps for j in P, k not in P.
bool in_U_P(const Configuration& x, const ClusterSet& P, double eps);

/// Intersection of U_{P_s}(eps) over the list; throws on an empty list.
bool in_U_Pvec(const Configuration& x, const std::vector<ClusterSet>& Ps, double eps);

/// One cluster derivative block partial_{x_P}^alpha with alpha in N^3.
struct ClusterOrder {
  ClusterSet cluster;
  MultiIndex alpha;
  bool operator==(const ClusterOrder&) const = default;
  std::strong_ordering operator<=>(const ClusterOrder&) const = default;
};

/// Product of cluster derivatives partial_{x_P1}^{alpha_1} ... partial_{x_PM}^{alpha_M}.
///
/// Cluster derivatives have constant coefficients and commute, so the
/// representation is canonical: one block per distinct cluster, sorted, with
/// zero blocks dropped.
class ClusterMultiIndex {
 public:
  ClusterMultiIndex() = default;
  /// Ps paired with a flat multiindex of dimension 3M.
  ClusterMultiIndex(const std::vector<ClusterSet>& Ps, const MultiIndex& alpha);

  void add(const ClusterSet& P, const MultiIndex& alpha);
  const std::vector<ClusterOrder>& parts() const noexcept { return parts_; }
  int order() const;
  bool empty() const noexcept { return parts_.empty(); }

  bool operator==(const ClusterMultiIndex&) const = default;
  std::strong_ordering operator<=>(const ClusterMultiIndex&) const = default;
  std::string to_string() const;

 private:
  std::vector<ClusterOrder> parts_;
};

/// Unordered electron pair (j, k), j < k, 1-based.
using ElectronPair = std::pair<int, int>;

/// All pairs M = {(j,k) : 1 <= j < k <= N} in lexicographic order.
std::vector<ElectronPair> all_pairs(int n_electrons);

/// Subset I of M.
class PairSet {
 public:
  PairSet() = default;
  PairSet(std::vector<ElectronPair> pairs, int n_electrons);

  const std::vector<ElectronPair>& pairs() const noexcept { return pairs_; }
  int n_electrons() const noexcept { return n_electrons_; }
  bool contains(int j, int k) const;
  bool operator==(const PairSet&) const = default;

 private:
  int n_electrons_ = 0;
  std::vector<ElectronPair> pairs_;
};

/// Smooth radial partition of unity chi_1 + chi_2 = 1 on R^3 with
/// chi_1 = 1 on |t| <= eps/(4N) and chi_1 = 0 on |t| >= eps/(2N).
///
/// Profile: chi_1(t) = sigma((|t| - r0) / r0), r0 = eps/(4N), with the smooth
/// step sigma(u) = g(1-u) / (g(u) + g(1-u)), g(u) = exp(-1/u) for u > 0.
class CutoffPair {
 public:
  CutoffPair(double epsilon, int n_electrons);

  double epsilon() const noexcept { return epsilon_; }
  int n_electrons() const noexcept { return n_electrons_; }
  double inner_radius() const noexcept { return epsilon_ / (4.0 * n_electrons_); }
  double outer_radius() const noexcept { return epsilon_ / (2.0 * n_electrons_); }

  double chi1(const Vec3& t) const;
  double chi2(const Vec3& t) const;
  /// Exact partial derivative of chi_2 along axis (0-based). Zero at t = 0.
  double dchi2(const Vec3& t, int axis) const;

 private:
  double epsilon_;
  int n_electrons_;
};

/// Smooth step: 1 for u <= 0, 0 for u >= 1. `smooth_step_complement` is 1 - sigma
/// evaluated without cancellation; `smooth_step_derivative` is sigma'.
double smooth_step(double u);
double smooth_step_complement(double u);
double smooth_step_derivative(double u);

enum class FactorKind { chi1, chi2, dchi2_x, dchi2_y, dchi2_z };

std::string to_string(FactorKind kind);
FactorKind factor_kind_from_string(const std::string& s);
FactorKind dchi2_kind(int axis);
/// Axis of a dchi2 kind, or -1 for chi1/chi2.
int dchi2_axis(FactorKind kind);

/// phi = prod_{j<k} f_{j,k}(x_j - x_k) with each factor chi1, chi2 or a first
/// partial derivative of chi2.
class PhiTerm {
 public:
  PhiTerm() = default;
  /// All-chi2 term.
  explicit PhiTerm(int n_electrons);
  PhiTerm(int n_electrons, std::vector<FactorKind> factors);

  /// phi_I: chi1 on the pairs of I, chi2 elsewhere.
  static PhiTerm from_pair_set(const PairSet& I);

  int n_electrons() const noexcept { return n_electrons_; }
  const std::vector<FactorKind>& factors() const noexcept { return factors_; }
  FactorKind factor(int j, int k) const;
  PhiTerm with_factor(int j, int k, FactorKind kind) const;

  bool operator==(const PhiTerm&) const = default;
  std::strong_ordering operator<=>(const PhiTerm&) const = default;
  std::string to_string() const;

 private:
  std::size_t position(int j, int k) const;
  int n_electrons_ = 0;
  std::vector<FactorKind> factors_;
};

/// All 2^{|M|} terms phi_I, I subset of M.
std::vector<PhiTerm> all_partition_terms(int n_electrons);

double phi_term_value(const PhiTerm& term, const Configuration& x, const CutoffPair& cut);

/// I(phi): pairs whose factor is not chi2.
PairSet pair_index_set(const PhiTerm& term);

/// Connected component of electron 1 in the graph on {1..N} with edges I.
ClusterSet cluster_of_one(const PairSet& I, int n_electrons);

/// P(phi) = cluster_of_one(I(phi)).
inline ClusterSet cluster_of_term(const PhiTerm& term) {
  return cluster_of_one(pair_index_set(term), term.n_electrons());
}

struct SupportReport {
  ClusterSet cluster_tested;
  std::size_t accepted = 0;    // samples with |x_1| > eps and phi(x) != 0
  std::size_t violations = 0;  // accepted samples outside U_P(eps/(4N))
  std::size_t attempts = 0;
};

/// Statistical check of supp(phi) ∩ {|x_1| > eps} ⊂ U_{P(phi)}(eps/(4N)).
///
/// Proposals live in the box [-2eps, 2eps]^{3N} and are biased toward the
/// sphere |x_1| = eps and the cutoff radii eps/(4N), eps/(2N). Passing
/// `claimed` tests that cluster instead of P(phi) (negative controls).
SupportReport support_condition_check(const PhiTerm& term, double epsilon, std::size_t n_samples,
                                      std::uint64_t seed,
                                      std::optional<ClusterSet> claimed = std::nullopt);

/// Partition terms plus, for every chi1 factor of every partition term, the
/// variant where that factor is replaced by a dchi2 factor.
std::vector<PhiTerm> support_term_family(int n_electrons);

}  // namespace densan
