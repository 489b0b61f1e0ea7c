#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace densan {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Electron positions x = (x_1, ..., x_N) in atomic units. Electrons are
/// labelled 1..N in the public API; `operator[]` is zero-based.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::size_t n_electrons) : positions_(n_electrons, Vec3{0, 0, 0}) {}
  explicit Configuration(std::vector<Vec3> positions) : positions_(std::move(positions)) {}
  Configuration(std::initializer_list<Vec3> positions) : positions_(positions) {}

  std::size_t size() const noexcept { return positions_.size(); }
  const Vec3& operator[](std::size_t i) const { return positions_[i]; }
  Vec3& operator[](std::size_t i) { return positions_[i]; }
  /// Position of electron j (1-based).
  const Vec3& electron(int j) const { return positions_.at(static_cast<std::size_t>(j - 1)); }
  std::span<const Vec3> positions() const noexcept { return positions_; }

  /// x + s * v for a direction v in R^{3N} laid out electron-major.
  Configuration shifted(std::span<const double> direction, double s) const;

 private:
  std::vector<Vec3> positions_;
};

}  // namespace densan
