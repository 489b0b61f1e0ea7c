#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "densan/clusters.hpp"
#include "densan/density.hpp"
#include "densan/multiindex.hpp"
#include "densan/wavefunctions.hpp"

namespace densan {

struct GrowthEntry {
  MultiIndex alpha;
  double magnitude = 0.0;
  double sigma = 0.0;  // error bar; the fit uses magnitude + 2 sigma
};

/// Growth bound |entry(alpha)| <= C L^{|alpha|} (|alpha| + 1)^{|alpha|}.
struct GrowthFit {
  std::vector<GrowthEntry> entries;
  double C = 0.0;
  double L = 0.0;
  int alpha_max = 0;
  /// entry(0) vanished and C was taken from the largest entry instead.
  bool zero_constant = false;

  double bound(int order) const;
  /// Every entry (magnitude + 2 sigma) lies under the bound, up to rounding.
  bool dominates() const;
};

/// C := entry(0) (floored at the smallest normal double); L := max over
/// |alpha| >= 1 of ((magnitude + 2 sigma) / C)^{1/|alpha|} / (|alpha| + 1).
GrowthFit fit_growth(const std::vector<GrowthEntry>& entries);

/// The fit restricted to entries with |alpha| <= max_order.
GrowthFit fit_growth_up_to(const std::vector<GrowthEntry>& entries, int max_order);

struct RadiusEstimate {
  double radius = 0.0;      // exp(-slope) of a least-squares fit of log|c_k| against k
  double band_low = 0.0;    // slope +- 2 standard errors
  double band_high = 0.0;
  double root_test = 0.0;   // 1 / max |c_k|^{1/k} over the fit window
  /// 1 / max|z| for the roots of z^2 = p z + q, where c_{k+2} ~ p c_{k+1} + q c_k
  /// is fitted over the upper two thirds. Resolves a complex-conjugate pair of
  /// singularities whose oscillating coefficients spoil the log-linear fit.
  double recurrence = 0.0;
  int used_order = 0;       // highest k above the noise floor
  bool truncated = false;
  std::string warning;
  std::vector<double> direction;  // slice direction when taken through a density
};

/// Radius of convergence from Taylor coefficients c_0..c_K (K >= 4).
/// Coefficients below noise_floor * max|c_k| are ignored; the fit uses the
/// upper third (at least four) of the remaining ones.
RadiusEstimate taylor_radius(const std::vector<double>& coefficients, double noise_floor = 1e-13);

struct DensityGrowthOptions {
  DensityOptions density{};
  int radius_lines = 3;
  int radius_order = 0;  // 0 picks 24 for one electron and 12 otherwise
  std::uint64_t seed = 0;
  double stability_tol = 0.25;
};

struct DensityGrowthReport {
  GrowthFit fit;        // |alpha| <= alpha_max
  GrowthFit lower_fit;  // |alpha| <= alpha_max - 2
  double L_change = 0.0;
  bool stable = false;
  std::vector<RadiusEstimate> radii;
  double radius_floor = 0.0;  // half the distance to the nucleus
  bool radius_ok = false;
  bool passed = false;
};

/// Derivative table of rho at x for |alpha| <= alpha_max, its growth fit, the
/// stability of L against alpha_max - 2, and Taylor radii along random lines.
DensityGrowthReport verify_density_growth(const WavefunctionModel& model, const Vec3& x, double eps, int alpha_max,
                                          const DensityGrowthOptions& opts = {});

enum class ClusterNorm { l2_psi, l1_density };

struct ClusterGrowthReport {
  GrowthFit l2_fit;  // ||partial^alpha psi||_{L^2(U)}
  GrowthFit l1_fit;  // ||partial^alpha |psi|^2||_{L^1(U)}
  GrowthFit l2_lower;
  GrowthFit l1_lower;
  bool stable = false;  // L of the selected norm within 25% of its alpha_max - 2 fit
  bool finite = false;
  /// C_1 <= 1.1 C^2 and L_1 <= 2.2 L.
  bool leibniz_consistent = false;
  ClusterNorm norm = ClusterNorm::l2_psi;
  bool passed = false;
};

/// Tabulates both cluster norms over U_P(eps) from one Monte Carlo sample and
/// fits each. `norm` selects the table the pass flag is about; the
/// Leibniz consistency of the L^1 fit against the L^2 fit is always checked
/// for l1_density.
ClusterGrowthReport verify_cluster_growth(const WavefunctionModel& model, const std::vector<ClusterSet>& Ps,
                                          double eps, int alpha_max, ClusterNorm norm, std::size_t n_samples,
                                          std::uint64_t seed);

}  // namespace densan
