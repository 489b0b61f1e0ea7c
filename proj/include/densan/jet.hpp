#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "densan/multiindex.hpp"

namespace densan {

/// Index set and convolution tables for truncated multivariate Taylor series.
///
/// The index set is {beta : |beta| <= max_order, beta <= caps}; it is
/// downward closed, so products and the exp/sqrt/reciprocal recurrences stay
/// inside it. Terms are stored by nondecreasing total order.
class JetLayout {
 public:
  struct Pair {
    std::uint32_t left;   // beta
    std::uint32_t right;  // gamma - beta
    std::int32_t pivot_weight;  // beta[pivot(gamma)]
  };

  /// Shared, cached layout. Empty caps means no per-variable cap.
  static std::shared_ptr<const JetLayout> get(std::size_t variables, int max_order,
                                              std::vector<int> caps = {});

  JetLayout(std::size_t variables, int max_order, std::vector<int> caps);

  std::size_t variables() const noexcept { return variables_; }
  int max_order() const noexcept { return max_order_; }
  std::size_t size() const noexcept { return terms_.size(); }
  const MultiIndex& term(std::size_t i) const { return terms_[i]; }
  std::optional<std::size_t> find(const MultiIndex& beta) const;
  std::size_t index_of(const MultiIndex& beta) const;
  /// All (beta, gamma - beta) pairs for term gamma, ordered by beta.
  std::span<const Pair> pairs(std::size_t gamma) const;
  int pivot(std::size_t gamma) const { return pivots_[gamma]; }
  double factorial(std::size_t i) const { return factorials_[i]; }

 private:
  std::uint64_t key(const MultiIndex& beta) const;

  std::size_t variables_;
  int max_order_;
  std::vector<int> caps_;
  std::vector<MultiIndex> terms_;
  std::vector<std::uint64_t> keys_;  // sorted copy with positions in key_pos_
  std::vector<std::uint32_t> key_pos_;
  std::vector<Pair> pairs_;
  std::vector<std::size_t> pair_offsets_;
  std::vector<int> pivots_;
  std::vector<double> factorials_;
};

/// Truncated multivariate Taylor expansion f(x0 + t) = sum_beta c_beta t^beta.
///
/// Arithmetic propagates exact Taylor coefficients, so derivatives of
/// compositions of +, *, exp, sqrt and reciprocal come out without finite
/// differencing.
class Jet {
 public:
  Jet() = default;
  explicit Jet(std::shared_ptr<const JetLayout> layout, double constant = 0.0);

  static Jet variable(std::shared_ptr<const JetLayout> layout, std::size_t var, double value);

  const JetLayout& layout() const { return *layout_; }
  const std::shared_ptr<const JetLayout>& layout_ptr() const { return layout_; }
  std::span<const double> coefficients() const { return coeffs_; }
  std::span<double> coefficients() { return coeffs_; }
  double value() const { return coeffs_[0]; }
  double coefficient(std::size_t i) const { return coeffs_[i]; }
  double coefficient(const MultiIndex& beta) const;
  /// partial^beta f(x0) = beta! c_beta
  double derivative(const MultiIndex& beta) const;
  double derivative(std::size_t i) const { return coeffs_[i] * layout_->factorial(i); }
  /// True when every non-constant coefficient is exactly zero.
  bool is_constant() const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(double s);
  Jet& operator+=(double s) {
    coeffs_[0] += s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator*(const Jet& a, const Jet& b);
  Jet operator-() const { return *this * -1.0; }

 private:
  std::shared_ptr<const JetLayout> layout_;
  std::vector<double> coeffs_;
};

Jet exp(const Jet& a);
/// Throws SingularityError at a zero constant term unless the jet is constant.
Jet sqrt(const Jet& a);
/// Throws SingularityError at a zero constant term.
Jet reciprocal(const Jet& a);
Jet square(const Jet& a);

}  // namespace densan
