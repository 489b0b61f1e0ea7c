#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace densan {

/// Multiindex alpha = (a_1, ..., a_d) of nonnegative exponents.
///
/// The dimension is part of the value: spatial indices have d = 3, indices
/// over M clusters have d = 3M. Binary operations check dimensions and throw
/// DimensionMismatch when they differ.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t dimension);
  MultiIndex(std::initializer_list<int> entries);
  explicit MultiIndex(std::vector<int> entries);

  static MultiIndex unit(std::size_t dimension, std::size_t axis);

  std::size_t dimension() const noexcept { return entries_.size(); }
  std::span<const int> entries() const noexcept { return entries_; }
  int operator[](std::size_t i) const { return entries_.at(i); }

  void set(std::size_t i, int value);
  void increment(std::size_t i, int by = 1);

  int order() const noexcept;
  bool is_zero() const noexcept { return order() == 0; }

  /// Entries [offset, offset + count) as a new multiindex.
  MultiIndex slice(std::size_t offset, std::size_t count) const;

  MultiIndex operator+(const MultiIndex& other) const;
  /// Componentwise difference; requires other <= *this.
  MultiIndex operator-(const MultiIndex& other) const;

  bool operator==(const MultiIndex&) const = default;
  /// Lexicographic order on (dimension, entries); used for map keys only.
  std::strong_ordering operator<=>(const MultiIndex& other) const;

  std::string to_string() const;

 private:
  std::vector<int> entries_;
};

std::ostream& operator<<(std::ostream& os, const MultiIndex& alpha);

inline int order(const MultiIndex& alpha) { return alpha.order(); }

/// Componentwise alpha <= beta.
bool leq(const MultiIndex& alpha, const MultiIndex& beta);

/// Scalar binomial coefficient with overflow checking.
std::uint64_t binomial(int n, int k);

/// binom(alpha, beta) = prod_j binom(a_j, b_j); requires beta <= alpha.
std::uint64_t multi_binomial(const MultiIndex& alpha, const MultiIndex& beta);

/// alpha! = prod_j a_j!
std::uint64_t multi_factorial(const MultiIndex& alpha);

struct LeibnizTerm {
  MultiIndex beta;
  std::uint64_t coefficient;
};

/// All beta <= alpha with coefficient binom(alpha, beta), in mixed-radix order
/// (first entry varies fastest). Length is prod_j (a_j + 1).
std::vector<LeibnizTerm> leibniz_expansion(const MultiIndex& alpha);

/// Sum of binom(alpha, beta) over beta <= alpha with |beta| = b.
/// Returns 0 for b > |alpha|.
std::uint64_t fixed_order_count(const MultiIndex& alpha, int b);

/// Every multiindex of the given dimension with |alpha| <= max_order, sorted by
/// total order and then lexicographically (descending leading entry).
std::vector<MultiIndex> multiindices_up_to(std::size_t dimension, int max_order);

/// Every multiindex of the given dimension with |alpha| == order.
std::vector<MultiIndex> multiindices_of_order(std::size_t dimension, int order);

}  // namespace densan
