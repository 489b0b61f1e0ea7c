#include "densan/multiindex.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "densan/errors.hpp"

namespace densan {

namespace {

void check_same_dimension(const MultiIndex& a, const MultiIndex& b) {
  if (a.dimension() != b.dimension()) {
    throw DimensionMismatch("multiindex dimensions differ: " + std::to_string(a.dimension()) +
                            " vs " + std::to_string(b.dimension()));
  }
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw UnsupportedError("integer overflow in multiindex coefficient");
  }
  return out;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw UnsupportedError("integer overflow in multiindex coefficient");
  }
  return out;
}

void enumerate_of_order(std::size_t dim, std::size_t pos, int remaining, std::vector<int>& cur,
                        std::vector<MultiIndex>& out) {
  if (pos + 1 == dim) {
    cur[pos] = remaining;
    out.emplace_back(cur);
    return;
  }
  for (int a = remaining; a >= 0; --a) {
    cur[pos] = a;
    enumerate_of_order(dim, pos + 1, remaining - a, cur, out);
  }
}

}  // namespace

MultiIndex::MultiIndex(std::size_t dimension) : entries_(dimension, 0) {
  if (dimension == 0) throw std::invalid_argument("multiindex dimension must be positive");
}

MultiIndex::MultiIndex(std::initializer_list<int> entries) : MultiIndex(std::vector<int>(entries)) {}

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw std::invalid_argument("multiindex dimension must be positive");
  for (int a : entries_) {
    if (a < 0) throw std::invalid_argument("multiindex entries must be nonnegative");
  }
}

MultiIndex MultiIndex::unit(std::size_t dimension, std::size_t axis) {
  MultiIndex e(dimension);
  e.set(axis, 1);
  return e;
}

void MultiIndex::set(std::size_t i, int value) {
  if (value < 0) throw std::invalid_argument("multiindex entries must be nonnegative");
  entries_.at(i) = value;
}

void MultiIndex::increment(std::size_t i, int by) { set(i, entries_.at(i) + by); }

int MultiIndex::order() const noexcept {
  return std::accumulate(entries_.begin(), entries_.end(), 0);
}

MultiIndex MultiIndex::slice(std::size_t offset, std::size_t count) const {
  if (offset + count > entries_.size()) throw std::out_of_range("multiindex slice");
  return MultiIndex(std::vector<int>(entries_.begin() + static_cast<std::ptrdiff_t>(offset),
                                     entries_.begin() + static_cast<std::ptrdiff_t>(offset + count)));
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  check_same_dimension(*this, other);
  MultiIndex out = *this;
  for (std::size_t i = 0; i < entries_.size(); ++i) out.entries_[i] += other.entries_[i];
  return out;
}

MultiIndex MultiIndex::operator-(const MultiIndex& other) const {
  if (!leq(other, *this)) throw std::invalid_argument("multiindex difference requires other <= this");
  MultiIndex out = *this;
  for (std::size_t i = 0; i < entries_.size(); ++i) out.entries_[i] -= other.entries_[i];
  return out;
}

std::strong_ordering MultiIndex::operator<=>(const MultiIndex& other) const {
  if (auto c = entries_.size() <=> other.entries_.size(); c != 0) return c;
  return std::lexicographical_compare_three_way(entries_.begin(), entries_.end(),
                                                other.entries_.begin(), other.entries_.end());
}

std::string MultiIndex::to_string() const {
  std::ostringstream os;
  os << *this;
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const MultiIndex& alpha) {
  os << '(';
  for (std::size_t i = 0; i < alpha.dimension(); ++i) {
    if (i) os << ',';
    os << alpha[i];
  }
  return os << ')';
}

bool leq(const MultiIndex& alpha, const MultiIndex& beta) {
  check_same_dimension(alpha, beta);
  for (std::size_t i = 0; i < alpha.dimension(); ++i) {
    if (alpha[i] > beta[i]) return false;
  }
  return true;
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  // Multiplicative formula; each partial product is itself a binomial, so the
  // division is exact. Widen to 128 bits for the intermediate product.
  unsigned __int128 acc = 1;
  for (int i = 1; i <= k; ++i) {
    acc = acc * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (acc > std::numeric_limits<std::uint64_t>::max()) {
      throw UnsupportedError("binomial coefficient overflows 64 bits");
    }
  }
  return static_cast<std::uint64_t>(acc);
}

std::uint64_t multi_binomial(const MultiIndex& alpha, const MultiIndex& beta) {
  if (!leq(beta, alpha)) throw std::invalid_argument("multi_binomial requires beta <= alpha");
  std::uint64_t out = 1;
  for (std::size_t i = 0; i < alpha.dimension(); ++i) out = checked_mul(out, binomial(alpha[i], beta[i]));
  return out;
}

std::uint64_t multi_factorial(const MultiIndex& alpha) {
  std::uint64_t out = 1;
  for (int a : alpha.entries()) {
    for (int k = 2; k <= a; ++k) out = checked_mul(out, static_cast<std::uint64_t>(k));
  }
  return out;
}

std::vector<LeibnizTerm> leibniz_expansion(const MultiIndex& alpha) {
  const std::size_t d = alpha.dimension();
  std::size_t count = 1;
  for (int a : alpha.entries()) count *= static_cast<std::size_t>(a + 1);
  std::vector<LeibnizTerm> out;
  out.reserve(count);
  std::vector<int> cur(d, 0);
  for (std::size_t n = 0; n < count; ++n) {
    MultiIndex beta(cur);
    out.push_back({beta, multi_binomial(alpha, beta)});
    for (std::size_t i = 0; i < d; ++i) {
      if (++cur[i] <= alpha[i]) break;
      cur[i] = 0;
    }
  }
  return out;
}

std::uint64_t fixed_order_count(const MultiIndex& alpha, int b) {
  if (b < 0 || b > alpha.order()) return 0;
  std::uint64_t sum = 0;
  for (const auto& term : leibniz_expansion(alpha)) {
    if (term.beta.order() == b) sum = checked_add(sum, term.coefficient);
  }
  return sum;
}

std::vector<MultiIndex> multiindices_of_order(std::size_t dimension, int order) {
  if (dimension == 0) throw std::invalid_argument("multiindex dimension must be positive");
  std::vector<MultiIndex> out;
  if (order < 0) return out;
  std::vector<int> cur(dimension, 0);
  enumerate_of_order(dimension, 0, order, cur, out);
  return out;
}

std::vector<MultiIndex> multiindices_up_to(std::size_t dimension, int max_order) {
  std::vector<MultiIndex> out;
  for (int k = 0; k <= max_order; ++k) {
    auto level = multiindices_of_order(dimension, k);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

}  // namespace densan
