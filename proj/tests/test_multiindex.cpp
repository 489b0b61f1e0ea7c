#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "densan/errors.hpp"
#include "densan/multiindex.hpp"

using namespace densan;

namespace {

// Pascal triangle, built without the library's binomial.
std::vector<std::vector<std::uint64_t>> pascal(int n) {
  std::vector<std::vector<std::uint64_t>> t(static_cast<std::size_t>(n + 1));
  for (int i = 0; i <= n; ++i) {
    t[i].assign(static_cast<std::size_t>(i + 1), 1);
    for (int k = 1; k < i; ++k) t[i][k] = t[i - 1][k - 1] + t[i - 1][k];
  }
  return t;
}

}  // namespace

TEST_CASE("binomial and factorial basics") {
  CHECK(binomial(0, 0) == 1);
  CHECK(binomial(5, 2) == 10);
  CHECK(binomial(3, 5) == 0);
  CHECK(multi_factorial(MultiIndex{2, 3, 0}) == 12);
  CHECK(multi_binomial(MultiIndex{3, 2}, MultiIndex{1, 1}) == 6);
  CHECK_THROWS_AS(binomial(200, 100), UnsupportedError);
}

TEST_CASE("multiindex arithmetic and validation") {
  MultiIndex a{1, 2, 0}, b{0, 1, 0};
  CHECK(a.order() == 3);
  CHECK((a + b) == MultiIndex{1, 3, 0});
  CHECK((a - b) == MultiIndex{1, 1, 0});
  CHECK(leq(b, a));
  CHECK_FALSE(leq(a, b));
  CHECK(a.slice(1, 2) == MultiIndex{2, 0});
  CHECK(MultiIndex::unit(3, 1) == MultiIndex{0, 1, 0});
  CHECK_THROWS_AS(a + MultiIndex({1, 1}), DimensionMismatch);
  CHECK_THROWS(MultiIndex(std::vector<int>{1, -1}));
  CHECK(a.to_string() == "(1,2,0)");
}

TEST_CASE("leibniz expansion has prod(a_j + 1) terms with binomial weights") {
  const auto tri = pascal(12);
  for (const MultiIndex& alpha : multiindices_up_to(3, 5)) {
    const auto terms = leibniz_expansion(alpha);
    std::size_t expected = 1;
    for (int a : alpha.entries()) expected *= static_cast<std::size_t>(a + 1);
    CHECK(terms.size() == expected);
    std::uint64_t total = 0;
    for (const auto& t : terms) {
      std::uint64_t w = 1;
      for (std::size_t j = 0; j < alpha.dimension(); ++j) w *= tri[alpha[j]][t.beta[j]];
      CHECK(t.coefficient == w);
      CHECK(leq(t.beta, alpha));
      total += t.coefficient;
    }
    // sum_beta binom(alpha, beta) = 2^|alpha|
    CHECK(total == (std::uint64_t{1} << alpha.order()));
  }
}

TEST_CASE("fixed-order counts obey Vandermonde's identity") {
  const auto tri = pascal(16);
  for (std::size_t d = 1; d <= 4; ++d) {
    for (const MultiIndex& alpha : multiindices_up_to(d, 6)) {
      for (int b = 0; b <= alpha.order() + 1; ++b) {
        const std::uint64_t want = b <= alpha.order() ? tri[alpha.order()][b] : 0;
        CHECK(fixed_order_count(alpha, b) == want);
      }
    }
  }
}

TEST_CASE("multiindex enumeration") {
  const auto tri = pascal(20);
  for (std::size_t d = 1; d <= 5; ++d) {
    for (int k = 0; k <= 6; ++k) {
      CHECK(multiindices_up_to(d, k).size() == tri[d + k][k]);
      const auto exact = multiindices_of_order(d, k);
      CHECK(exact.size() == tri[d + k - 1][k]);
      for (const auto& a : exact) CHECK(a.order() == k);
    }
  }
  const auto all = multiindices_up_to(2, 3);
  for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].order() <= all[i].order());
}

TEST_CASE("leibniz rule reproduces derivatives of a product of exponentials") {
  // f = exp(a.x), g = exp(b.x): partial^alpha (fg) = (a+b)^alpha fg.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)};
    for (const MultiIndex& alpha : multiindices_up_to(3, 4)) {
      double sum = 0.0, want = 1.0;
      for (const auto& t : leibniz_expansion(alpha)) {
        double fa = 1.0, gb = 1.0;
        for (std::size_t j = 0; j < 3; ++j) {
          fa *= std::pow(a[j], t.beta[j]);
          gb *= std::pow(b[j], alpha[j] - t.beta[j]);
        }
        sum += static_cast<double>(t.coefficient) * fa * gb;
      }
      for (std::size_t j = 0; j < 3; ++j) want *= std::pow(a[j] + b[j], alpha[j]);
      CHECK(sum == doctest::Approx(want).epsilon(1e-12));
    }
  }
}
