#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "densan/clusters.hpp"
#include "densan/geometry.hpp"
#include "densan/jet.hpp"
#include "densan/multiindex.hpp"

namespace densan {

/// Radial interaction profile: 1/r (Coulomb) or exp(-kappa r)/r (Yukawa).
struct Interaction {
  enum class Kind { coulomb, yukawa };
  Kind kind = Kind::coulomb;
  double screening = 0.0;  // kappa, inverse length; Yukawa only

  static Interaction coulomb() { return {}; }
  static Interaction yukawa(double kappa);
  double value(double r) const;
  bool operator==(const Interaction&) const = default;
};

struct Nucleus {
  Vec3 position{0, 0, 0};
  double charge = 1.0;
  Interaction interaction;  // electron-nucleus profile
};

/// Many-body potential
///   V(x) = -sum_{j,l} Z_l g_l(|x_j - R_l|) + sum_{i<j} w(|x_i - x_j|) + sum_{l<k} Z_l Z_k / |R_l - R_k|.
struct PotentialSpec {
  int n_electrons = 1;
  std::vector<Nucleus> nuclei;
  Interaction electron_interaction;
  bool include_repulsion = true;
  double energy_shift = 0.0;  // E in (V - E)

  static PotentialSpec coulomb_atom(double Z, int n_electrons);
  /// Throws on coincident nuclei or nonpositive charges.
  void validate() const;
};

double potential_value(const PotentialSpec& spec, const Configuration& x);

/// Taylor coefficients a_beta = partial^beta g(t) / beta! of the radial profile
/// for every |beta| <= max_order.
///
/// Coulomb uses the three-term recursion
///   |b| r^2 a_b + (2|b| - 1) sum_i t_i a_{b-e_i} + (|b| - 1) sum_i a_{b-2e_i} = 0;
/// Yukawa multiplies those coefficients by the Taylor series of exp(-kappa r).
class RadialTensorTable {
 public:
  RadialTensorTable(const Vec3& t, int max_order, const Interaction& kind = Interaction::coulomb());

  int max_order() const noexcept { return max_order_; }
  double coefficient(const MultiIndex& beta) const;
  double derivative(const MultiIndex& beta) const;

 private:
  int max_order_;
  std::shared_ptr<const JetLayout> layout_;
  std::vector<double> coeffs_;
};

/// partial^alpha g(t) for alpha in N^3. Throws SingularityError at t = 0.
double radial_derivative_tensor(const MultiIndex& alpha, const Vec3& t,
                                const Interaction& kind = Interaction::coulomb());

/// partial_{x_P1}^{alpha_1} ... partial_{x_PM}^{alpha_M} V at x, assembled term
/// by term. A term depending on u = x_j - R_l or u = x_j - x_k moves with
/// coefficient c_s = (1[j in P_s] - 1[k in P_s]) / sqrt|P_s| under the s-th
/// cluster derivative; the term's contribution is prod_s c_s^{|alpha_s|} times
/// partial^{sum alpha_s} g(u), and is exactly zero when some c_s = 0 with
/// |alpha_s| > 0.
double cluster_derivative_of_V(const PotentialSpec& spec, const ClusterMultiIndex& alpha,
                               const Configuration& x);

/// Contribution of one term of V to a cluster derivative of order >= 1.
struct PotentialTermDerivative {
  /// out_of_cluster: no cluster moves the term; both_in_cluster: some cluster
  /// moves both electrons of the pair. Either way the value is exactly zero.
  enum class Relation { moving, out_of_cluster, both_in_cluster };
  int j = 0;
  int k = 0;         // 0 for an electron-nucleus term
  int nucleus = -1;  // index into spec.nuclei, -1 for a pair term
  Relation relation = Relation::moving;
  double value = 0.0;
};

std::vector<PotentialTermDerivative> cluster_derivative_terms(const PotentialSpec& spec, const ClusterMultiIndex& alpha,
                                                              const Configuration& x);

struct PotentialGrowthEntry {
  MultiIndex alpha;  // dimension 3M
  double sup_estimate = 0.0;
  double bound = 0.0;  // L_V^{|alpha|+1} |alpha|!
  bool pass = false;
};

struct PotentialGrowthReport {
  double fitted_LV = 0.0;
  std::size_t samples_used = 0;
  std::vector<PotentialGrowthEntry> entries;  // |alpha| >= 1 only
  bool all_pass = false;
};

/// Sampled sup of |partial_{x_P}^alpha V| over U_P(eps/2) for 1 <= |alpha| <= alpha_max,
/// and the smallest L_V with every estimate <= L_V^{|alpha|+1} |alpha|!.
/// Electron radii and P-to-Q distances are drawn log-uniformly from
/// [eps/2, 8] so that the region boundary is sampled densely.
PotentialGrowthReport potential_growth_check(const PotentialSpec& spec, const std::vector<ClusterSet>& Ps,
                                             double eps, int alpha_max, std::size_t n_samples,
                                             std::uint64_t seed);

struct OffsetRegionCheck {
  int j = 0;
  double eta = 0.0;
  int order = 0;
  double lhs = 0.0;  // eta^{|alpha|} sup_{U_P(eps/2 + j eta)} |partial^alpha V|
  double rhs = 0.0;  // L_V^{|alpha|+1} |alpha|! j^{-|alpha|}
  bool pass = false;
};

/// Weakened bound on the shrunken regions U_P(eps/2 + j eta), j eta < 1.
std::vector<OffsetRegionCheck> offset_region_check(const PotentialSpec& spec, const std::vector<ClusterSet>& Ps,
                                                   double eps, double eta, double fitted_LV, int alpha_max,
                                                   std::size_t n_samples, std::uint64_t seed);

/// One-electron test function with analytic gradient.
struct OrbitalTerm {
  enum class Kind { gaussian, exponential };
  Kind kind = Kind::gaussian;
  Vec3 center{0, 0, 0};
  double rate = 1.0;  // exp(-rate |y-c|^2) or exp(-rate |y-c|)
  double weight = 1.0;
};

/// u(x) = prod_j u_j(x_j), each u_j a superposition of orbital terms.
struct TestFunction {
  std::vector<std::vector<OrbitalTerm>> orbitals;  // one superposition per electron

  int n_electrons() const { return static_cast<int>(orbitals.size()); }
  double value(const Configuration& x) const;
  /// Gradient in R^{3N}, electron-major.
  std::vector<double> gradient(const Configuration& x) const;
  /// u_lambda(x) = u(lambda x)
  TestFunction scaled(double lambda) const;
};

/// Built-in family: centered Gaussian, exponential, and randomized superpositions.
std::vector<TestFunction> hardy_test_family(int n_electrons, std::size_t n_random, std::uint64_t seed);

struct HardyReport {
  double v_norm = 0.0;  // ||(V - E) u||_2
  double w12_norm = 0.0;  // ||u||_{W^{1,2}}
  double ratio = 0.0;
  double ratio_stderr = 0.0;
  bool finite = false;
};

/// Monte Carlo ratio ||(V - E) u||_2 / ||u||_{W^{1,2}}. The importance density
/// mixes independent radial-exponential electrons with pair-anchored placements
/// so that both 1/|x_j|^2 and 1/|x_j - x_k|^2 weights have finite variance.
HardyReport hardy_check(const PotentialSpec& spec, const TestFunction& u, std::size_t n_samples,
                        std::uint64_t seed);

struct HardyKernelValues {
  double weighted = 0.0;  // int |u|^2 / |x|^2
  double gradient = 0.0;  // int |grad u|^2
};

/// One-electron Hardy integrals by spherical quadrature about the origin.
HardyKernelValues hardy_kernel_integrals(const std::vector<OrbitalTerm>& orbital);

}  // namespace densan
