#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <tuple>
#include <optional>
#include <string>
#include <vector>

#include "densan/clusters.hpp"
#include "densan/multiindex.hpp"
#include "densan/quadrature.hpp"
#include "densan/wavefunctions.hpp"

namespace densan {

struct DensityOptions {
  MultiCenterOptions quadrature{};  // N = 2 (one free electron)
  std::size_t qmc_points = 1 << 14;  // N = 3 (two free electrons), per randomization
  int qmc_randomizations = 3;
  std::uint64_t seed = 0;
  /// Evaluate at exactly this quadrature level instead of refining.
  std::optional<int> fixed_level;
};

struct DensityResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t n_terms = 1;
  std::size_t n_nodes = 0;
  int level = 0;
  bool converged = true;
};

/// rho(x) = int |psi(x, x_2, ..., x_N)|^2 dx_2 ... dx_N.
DensityResult rho(const WavefunctionModel& model, const Vec3& x, const DensityOptions& opts = {});

/// rho at one fixed quadrature level; a smooth function of x, used by difference oracles.
DensityResult rho_at_level(const WavefunctionModel& model, const Vec3& x, int level, const DensityOptions& opts = {});

/// Sum over slots j of the marginal with x in slot j.
DensityResult rho_hat(const WavefunctionModel& model, const Vec3& x, const DensityOptions& opts = {});

/// Marginal of |psi|^2 with x in slot j (1-based).
DensityResult slot_marginal(const WavefunctionModel& model, int slot, const Vec3& x, const DensityOptions& opts = {});

DensityResult gamma1(const WavefunctionModel& model, const Vec3& x, const Vec3& xp, const DensityOptions& opts = {});
DensityResult rho2(const WavefunctionModel& model, const Vec3& x, const Vec3& xp, const DensityOptions& opts = {});

/// int |psi(x, y)|^2 phi(x, y) dy for one partition or expansion term.
DensityResult rho_I(const WavefunctionModel& model, const PhiTerm& term, const Vec3& x, const CutoffPair& cut,
                    const DensityOptions& opts = {});

/// One term  coefficient * partial_{x}^{outer} int (inner |psi|^2) phi dy.
struct IntegralTerm {
  ClusterMultiIndex inner;
  PhiTerm phi;
  MultiIndex outer{3};
  ClusterSet cluster;  // P(phi)
  double coefficient = 1.0;
  int id = -1;
  int parent = -1;
  std::string step;  // how this term arose from its parent

  bool is_leaf() const { return outer.is_zero(); }
};

/// Root term for phi_I: P(phi_I), inner = 0, outer = alpha.
IntegralTerm root_term(const PhiTerm& phi, const MultiIndex& alpha);

/// One derivative step along `axis` (0-based; requires outer[axis] > 0).
/// Child 0 moves the derivative onto |psi|^2 as sqrt|P| partial_{x_P}; every
/// chi2 factor linking P to its complement gives one child with that factor
/// differentiated and a strictly larger P.
std::vector<IntegralTerm> expand_derivative(const IntegralTerm& term, int axis);

struct Expansion {
  std::vector<IntegralTerm> terms;  // every term ever created, indexed by id
  std::vector<int> leaves;          // ids of the merged leaves
  std::size_t merges = 0;           // children merged into an existing term
};

/// Expands all 2^{|M|} root terms of partial^alpha rho until every derivative
/// is inner. Children sharing (inner, phi, outer) are merged with summed
/// coefficients.
Expansion expand_all(int n_electrons, const MultiIndex& alpha);

/// partial^alpha rho(x) through the expansion; leaves are integrated with
/// partial(|psi|^2) assembled by the Leibniz rule. Requires |x| > eps.
DensityResult rho_deriv(const WavefunctionModel& model, const MultiIndex& alpha, const Vec3& x, double eps,
                        const DensityOptions& opts = {}, Expansion* trace = nullptr);

struct DerivativeEntry {
  MultiIndex alpha;
  DensityResult result;
};

/// partial^alpha rho(x) for every |alpha| <= alpha_max from one shared node set.
std::vector<DerivativeEntry> rho_deriv_table(const WavefunctionModel& model, const Vec3& x, double eps, int alpha_max,
                                             const DensityOptions& opts = {});

/// Taylor coefficients c_k = (1/k!) d^k/dt^k rho(x + t v) at t = 0 for k <= K,
/// computed through the same expansion with a single jet variable.
std::vector<double> rho_slice_coefficients(const WavefunctionModel& model, const Vec3& x, const Vec3& direction,
                                           int max_order, double eps, const DensityOptions& opts = {});

struct FiniteDifferenceResult {
  double value = 0.0;
  double error = 0.0;
  std::vector<double> raw;  // central differences at h = 1e-2, 5e-3, 2.5e-3
  /// Error: Richardson remainder + roundoff + change of the h = 5e-3 difference
  /// against one quadrature level lower.
};

/// Richardson-extrapolated central differences of rho at a fixed quadrature
/// level. Results for several alpha at the same x share cached stencil values.
class FiniteDifferenceOracle {
 public:
  FiniteDifferenceOracle(const WavefunctionModel& model, const Vec3& x, int level, const DensityOptions& opts = {});
  FiniteDifferenceResult derivative(const MultiIndex& alpha);
  std::size_t evaluations() const noexcept { return cache_.size(); }

 private:
  double value_at(int step_index, const std::array<int, 3>& offset);
  const WavefunctionModel& model_;
  Vec3 x_;
  int level_;
  DensityOptions opts_;
  std::map<std::tuple<int, int, int, int>, double> cache_;
};

/// Spherical average int_{S^2} rho(r omega) d omega: 4 pi rho(r e_z) for the
/// rotation-invariant built-in models, the 26-point Lebedev rule otherwise.
double rho_tilde(const WavefunctionModel& model, double r, const DensityOptions& opts = {});

struct RadialDerivative {
  double value = 0.0;
  std::vector<double> estimates;  // successive step-halving estimates
  std::vector<double> steps;
  bool stable = false;  // last two estimates within 5%
};

/// One-sided difference estimates of d^k rho_tilde / dr^k at 0+, k in {0, 1, 2}.
RadialDerivative radial_derivs_at_zero(const WavefunctionModel& model, int k, const DensityOptions& opts = {},
                                       double h0 = 0.02, int halvings = 4);

/// rho_tilde'(0+) / rho_tilde(0).
double cusp_ratio(const WavefunctionModel& model, const DensityOptions& opts = {});

struct NaiveVarianceReport {
  MultiIndex alpha;
  double naive_variance = 0.0;       // per-sample variance, naive differentiation under the integral
  double decomposed_variance = 0.0;  // same budget, expansion leaves
  double ratio = 0.0;
};

/// Importance-sampled per-sample variance of two estimators of partial^alpha rho(x)
/// for N = 2: differentiating |psi(x, y)|^2 in x directly, and the expansion leaves.
NaiveVarianceReport naive_variance_ratio(const WavefunctionModel& model, const MultiIndex& alpha, const Vec3& x,
                                         double eps, std::size_t n_samples, std::uint64_t seed);

}  // namespace densan
