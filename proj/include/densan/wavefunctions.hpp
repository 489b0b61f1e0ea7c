#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "densan/clusters.hpp"
#include "densan/geometry.hpp"
#include "densan/jet.hpp"
#include "densan/multiindex.hpp"
#include "densan/potentials.hpp"

namespace densan {

/// Explicit real N-electron wavefunction.
///
/// Built-in kinds:
///   hydrogenic_product  psi = c prod_j exp(-a_j |x_j|)
///   correlated_pair     psi = c exp(-a (|x_1| + |x_2|)) (1 + lambda |x_1 - x_2| / 2)
/// and user_callable, a plain function differentiated by finite differences.
class WavefunctionModel {
 public:
  enum class Kind { hydrogenic_product, correlated_pair, user_callable };
  using Callable = std::function<double(const Configuration&)>;

  /// Nominal energy defaults to -sum a_j^2, exact for -Delta - sum 2 a_j / |x_j|.
  static WavefunctionModel hydrogenic_product(std::vector<double> exponents,
                                              std::optional<double> energy = std::nullopt);
  /// lambda = 1/2 matches the electron-electron cusp of -Delta_1 - Delta_2 + 1/|x_1 - x_2|.
  static WavefunctionModel correlated_pair(double a, double lambda = 0.5, double energy = -0.5);
  /// `normalization` multiplies f; derivatives use nested central differences.
  static WavefunctionModel user_callable(int n_electrons, Callable f, double energy, double normalization = 1.0);

  Kind kind() const noexcept { return kind_; }
  int n_electrons() const noexcept { return n_electrons_; }
  double nominal_energy() const noexcept { return energy_; }
  double normalization() const noexcept { return norm_; }
  const std::vector<double>& exponents() const noexcept { return exponents_; }
  double lambda() const noexcept { return lambda_; }
  /// Invariant under every permutation of the electrons.
  bool exchange_symmetric() const;
  /// Decay rate b with |psi|^2 <~ exp(-b |x_j|) in each electron; used by samplers.
  double decay_rate(int electron) const;

  double value(const Configuration& x) const;

  /// Derivatives partial^beta of t -> psi(x + sum_i t_i v_i) at t = 0 for every
  /// term beta of `layout` (indexed like the layout). Built-in kinds are exact;
  /// user_callable supports total order <= 4.
  std::vector<double> directional_derivatives(const Configuration& x,
                                              const std::vector<std::vector<double>>& directions,
                                              const std::shared_ptr<const JetLayout>& layout) const;

  /// Taylor jet of t -> psi(x + sum_i t_i v_i). Built-in kinds only.
  Jet jet(const Configuration& x, const std::vector<std::vector<double>>& directions,
          const std::shared_ptr<const JetLayout>& layout) const;

  /// Step used by the finite-difference fallback for derivatives of total order k.
  static double fd_step(int order);

 private:
  Kind kind_ = Kind::hydrogenic_product;
  int n_electrons_ = 1;
  double energy_ = 0.0;
  double norm_ = 1.0;
  std::vector<double> exponents_;
  double lambda_ = 0.0;
  Callable callable_;
};

/// partial_{x_P1}^{alpha_1} ... partial_{x_PM}^{alpha_M} psi at x.
double cluster_derivative_psi(const WavefunctionModel& model, const ClusterMultiIndex& alpha, const Configuration& x);

/// Laplacian of psi (sum of second derivatives over all 3N coordinates).
double laplacian_psi(const WavefunctionModel& model, const Configuration& x);

struct ResidualReport {
  double residual = 0.0;  // ||(H - E) psi|| / ||psi|| over the sampled region
  double stderr_estimate = 0.0;
  std::size_t samples = 0;
};

/// Monte Carlo estimate over {|x_j| > delta, |x_j - x_k| > delta} of the
/// relative residual of H = -Delta + V. E defaults to the model's nominal energy.
ResidualReport eigen_residual(const WavefunctionModel& model, const PotentialSpec& spec, double delta,
                              std::size_t n_samples, std::uint64_t seed,
                              std::optional<double> energy = std::nullopt);

/// Monte Carlo estimate of ||psi||_2 over R^{3N}.
ResidualReport norm_estimate(const WavefunctionModel& model, std::size_t n_samples, std::uint64_t seed);

struct NormEstimate {
  double value = 0.0;
  double stderr_estimate = 0.0;
};

/// ||partial_{x_P}^alpha psi||_{L^2(U_P(eps))} by Monte Carlo.
NormEstimate cluster_l2_norm(const WavefunctionModel& model, const std::vector<ClusterSet>& Ps,
                             const MultiIndex& alpha, double eps, std::size_t n_samples, std::uint64_t seed);

struct ClusterNormEntry {
  MultiIndex alpha;  // dimension 3M
  NormEstimate l2;   // ||partial^alpha psi||_{L^2(U)}
  NormEstimate l1;   // ||partial^alpha |psi|^2||_{L^1(U)}
};

/// Both norms for every |alpha| <= alpha_max from one shared sample set.
std::vector<ClusterNormEntry> cluster_norm_table(const WavefunctionModel& model, const std::vector<ClusterSet>& Ps,
                                                 double eps, int alpha_max, std::size_t n_samples,
                                                 std::uint64_t seed);

}  // namespace densan
