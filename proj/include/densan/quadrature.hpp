#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "densan/geometry.hpp"

namespace densan {

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
Rule1D gauss_legendre(int n);

/// Directions on the unit sphere with weights summing to 4 pi.
struct SphereRule {
  std::vector<Vec3> directions;
  std::vector<double> weights;
};

/// 26-point Lebedev rule (exact through spherical harmonic degree 7).
SphereRule lebedev26();

/// Gauss-Legendre in cos(theta) times 2 n_theta uniform azimuths.
SphereRule product_sphere_rule(int n_theta);

/// Integrand writing `out.size()` values at a point of R^3.
using VectorIntegrand = std::function<void(const Vec3& y, std::span<double> out)>;

struct MultiCenterOptions {
  double rel_tol = 1e-7;
  double abs_tol = 1e-300;
  int min_level = 1;
  int max_level = 4;
  double length_scale = 1.0;  // radial scale about an isolated center
};

/// Node layout for one refinement level.
struct MultiCenterLevel {
  int radial_panels;  // uniform panels in u before breakpoints are inserted
  int radial_points;  // Gauss-Legendre points per panel
  int n_theta;
};

MultiCenterLevel multicenter_level(int level);

struct VectorIntegral {
  std::vector<double> values;
  std::vector<double> errors;  // |I_level - I_{level-1}|
  std::size_t nodes = 0;  // integrand evaluations at the final level
  int level = 0;
  bool converged = false;
};

/// Integral over R^3 of an integrand that may have cusps at the given centers.
///
/// R^3 is split by a smooth multi-center partition w_i(y) (products of smooth
/// steps in the confocal coordinate (|y-c_i| - |y-c_j|)/|c_i-c_j|, exactly 1
/// near c_i and 0 near every other center); each piece w_i f is integrated in
/// spherical coordinates about c_i with the radial map u = r/(L + r) and
/// composite Gauss-Legendre panels that include the supplied radial breakpoints.
/// L is the distance to the nearest other center (length_scale when there is
/// none), so the node set scales with the geometry; the angular grid is turned
/// to put its pole on that nearest center.
/// Centers closer than 1e-12 are merged.
std::vector<double> integrate_multicenter_at_level(const std::vector<Vec3>& centers,
                                                   const std::vector<std::vector<double>>& breakpoints,
                                                   std::size_t n_out, const VectorIntegrand& f, int level,
                                                   double length_scale, std::size_t* nodes = nullptr);

/// Refines levels until the max relative change over outputs is below rel_tol.
VectorIntegral integrate_multicenter(const std::vector<Vec3>& centers,
                                     const std::vector<std::vector<double>>& breakpoints, std::size_t n_out,
                                     const VectorIntegrand& f, const MultiCenterOptions& opts = {});

/// Density q(y) = b^3/(8 pi) exp(-b |y|) on R^3 sampled by inverse transform.
class ExponentialSampler {
 public:
  explicit ExponentialSampler(double rate);
  double rate() const noexcept { return rate_; }
  /// Map three uniforms in [0,1) to a point.
  Vec3 map(double u_radius, double u_cos, double u_phi) const;
  double density(const Vec3& y) const;
  template <class Rng>
  Vec3 sample(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return map(u(rng), u(rng), u(rng));
  }

 private:
  double rate_;
};

/// Density with radial part rate * exp(-rate r) (so q(y) ~ 1/|y|^2 near 0);
/// used where integrands carry 1/|y|^2 weights.
class RadialExponentialSampler {
 public:
  explicit RadialExponentialSampler(double rate);
  Vec3 map(double u_radius, double u_cos, double u_phi) const;
  double density(const Vec3& y) const;
  template <class Rng>
  Vec3 sample(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return map(u(rng), u(rng), u(rng));
  }

 private:
  double rate_;
};

struct QmcResult {
  std::vector<double> values;
  std::vector<double> errors;  // standard error over randomizations
  std::size_t nodes = 0;
};

/// Randomly shifted Sobol estimate of int f(y_1..y_m) dy over R^{3m}, with each
/// y_i drawn from ExponentialSampler(rate). `f` receives the m points.
QmcResult qmc_integrate(std::size_t n_free, double rate, std::size_t n_out,
                        const std::function<void(std::span<const Vec3>, std::span<double>)>& f,
                        std::size_t n_points, int randomizations, std::uint64_t seed);

}  // namespace densan
