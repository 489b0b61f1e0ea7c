#include "densan/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <tuple>

#include "densan/errors.hpp"

namespace densan {

namespace {

void enumerate(std::size_t pos, int remaining, const std::vector<int>& caps, std::vector<int>& cur,
               std::vector<MultiIndex>& out) {
  if (pos == cur.size()) {
    out.emplace_back(cur);
    return;
  }
  const int top = std::min(remaining, caps[pos]);
  for (int a = 0; a <= top; ++a) {
    cur[pos] = a;
    enumerate(pos + 1, remaining - a, caps, cur, out);
  }
  cur[pos] = 0;
}

void check_same_layout(const Jet& a, const Jet& b) {
  if (&a.layout() != &b.layout()) throw DimensionMismatch("jets have different layouts");
}

}  // namespace

std::shared_ptr<const JetLayout> JetLayout::get(std::size_t variables, int max_order,
                                                std::vector<int> caps) {
  using Key = std::tuple<std::size_t, int, std::vector<int>>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const JetLayout>> cache;
  Key key{variables, max_order, caps};
  std::lock_guard lock(mutex);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto layout = std::make_shared<const JetLayout>(variables, max_order, std::move(caps));
  cache.emplace(std::move(key), layout);
  return layout;
}

JetLayout::JetLayout(std::size_t variables, int max_order, std::vector<int> caps)
    : variables_(variables), max_order_(max_order), caps_(std::move(caps)) {
  if (variables == 0) throw std::invalid_argument("jet needs at least one variable");
  if (max_order < 0) throw std::invalid_argument("jet order must be nonnegative");
  if (caps_.empty()) caps_.assign(variables, max_order);
  if (caps_.size() != variables) throw DimensionMismatch("jet caps length differs from variables");
  for (int& c : caps_) c = std::clamp(c, 0, max_order);

  std::vector<int> cur(variables, 0);
  enumerate(0, max_order, caps_, cur, terms_);
  std::stable_sort(terms_.begin(), terms_.end(),
                   [](const MultiIndex& a, const MultiIndex& b) { return a.order() < b.order(); });

  const std::size_t n = terms_.size();
  std::vector<std::pair<std::uint64_t, std::uint32_t>> keyed(n);
  for (std::size_t i = 0; i < n; ++i) keyed[i] = {key(terms_[i]), static_cast<std::uint32_t>(i)};
  std::sort(keyed.begin(), keyed.end());
  keys_.resize(n);
  key_pos_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    keys_[i] = keyed[i].first;
    key_pos_[i] = keyed[i].second;
  }

  factorials_.resize(n);
  pivots_.resize(n);
  pair_offsets_.assign(1, 0);
  for (std::size_t g = 0; g < n; ++g) {
    const MultiIndex& gamma = terms_[g];
    double fact = 1.0;
    for (std::size_t v = 0; v < variables; ++v) fact *= std::tgamma(gamma[v] + 1.0);
    factorials_[g] = fact;
    int pivot = -1;
    for (std::size_t v = 0; v < variables; ++v) {
      if (gamma[v] > 0) {
        pivot = static_cast<int>(v);
        break;
      }
    }
    pivots_[g] = pivot;
    std::vector<Pair> local;
    for (const auto& lt : leibniz_expansion(gamma)) {
      const auto l = index_of(lt.beta);
      const auto r = index_of(gamma - lt.beta);
      local.push_back({static_cast<std::uint32_t>(l), static_cast<std::uint32_t>(r),
                       pivot >= 0 ? lt.beta[static_cast<std::size_t>(pivot)] : 0});
    }
    std::sort(local.begin(), local.end(), [](const Pair& a, const Pair& b) { return a.left < b.left; });
    pairs_.insert(pairs_.end(), local.begin(), local.end());
    pair_offsets_.push_back(pairs_.size());
  }
}

std::uint64_t JetLayout::key(const MultiIndex& beta) const {
  if (beta.dimension() != variables_) throw DimensionMismatch("multiindex does not match jet variables");
  std::uint64_t k = 0;
  for (std::size_t v = 0; v < variables_; ++v) {
    k = k * static_cast<std::uint64_t>(max_order_ + 1) + static_cast<std::uint64_t>(beta[v]);
  }
  return k;
}

std::optional<std::size_t> JetLayout::find(const MultiIndex& beta) const {
  if (beta.order() > max_order_) return std::nullopt;
  for (std::size_t v = 0; v < variables_; ++v) {
    if (beta[v] > caps_[v]) return std::nullopt;
  }
  const auto k = key(beta);
  auto it = std::lower_bound(keys_.begin(), keys_.end(), k);
  if (it == keys_.end() || *it != k) return std::nullopt;
  return key_pos_[static_cast<std::size_t>(it - keys_.begin())];
}

std::size_t JetLayout::index_of(const MultiIndex& beta) const {
  auto i = find(beta);
  if (!i) throw std::out_of_range("multiindex " + beta.to_string() + " not in jet layout");
  return *i;
}

std::span<const JetLayout::Pair> JetLayout::pairs(std::size_t gamma) const {
  return {pairs_.data() + pair_offsets_[gamma], pair_offsets_[gamma + 1] - pair_offsets_[gamma]};
}

Jet::Jet(std::shared_ptr<const JetLayout> layout, double constant)
    : layout_(std::move(layout)), coeffs_(layout_->size(), 0.0) {
  coeffs_[0] = constant;
}

Jet Jet::variable(std::shared_ptr<const JetLayout> layout, std::size_t var, double value) {
  Jet j(layout, value);
  auto e = MultiIndex::unit(layout->variables(), var);
  if (auto i = layout->find(e)) j.coeffs_[*i] = 1.0;
  return j;
}

double Jet::coefficient(const MultiIndex& beta) const { return coeffs_[layout_->index_of(beta)]; }

double Jet::derivative(const MultiIndex& beta) const { return derivative(layout_->index_of(beta)); }

bool Jet::is_constant() const {
  return std::all_of(coeffs_.begin() + 1, coeffs_.end(), [](double c) { return c == 0.0; });
}

Jet& Jet::operator+=(const Jet& o) {
  check_same_layout(*this, o);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  check_same_layout(*this, o);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  check_same_layout(a, b);
  const auto& L = a.layout();
  Jet out(a.layout_ptr());
  auto ca = a.coefficients();
  auto cb = b.coefficients();
  auto co = out.coefficients();
  for (std::size_t g = 0; g < L.size(); ++g) {
    double s = 0.0;
    for (const auto& p : L.pairs(g)) s += ca[p.left] * cb[p.right];
    co[g] = s;
  }
  return out;
}

Jet square(const Jet& a) { return a * a; }

Jet exp(const Jet& a) {
  const auto& L = a.layout();
  Jet out(a.layout_ptr());
  auto ca = a.coefficients();
  auto co = out.coefficients();
  co[0] = std::exp(ca[0]);
  // d/dt_p e^a = e^a d/dt_p a, read off coefficientwise along the pivot variable.
  for (std::size_t g = 1; g < L.size(); ++g) {
    double s = 0.0;
    for (const auto& p : L.pairs(g)) {
      if (p.pivot_weight > 0) s += p.pivot_weight * ca[p.left] * co[p.right];
    }
    co[g] = s / L.term(g)[static_cast<std::size_t>(L.pivot(g))];
  }
  return out;
}

Jet sqrt(const Jet& a) {
  const auto& L = a.layout();
  if (a.value() < 0.0) throw DomainError("sqrt of negative jet");
  if (a.value() == 0.0) {
    if (!a.is_constant()) throw SingularityError("sqrt jet at a zero of its argument");
    return Jet(a.layout_ptr(), 0.0);
  }
  Jet out(a.layout_ptr());
  auto ca = a.coefficients();
  auto co = out.coefficients();
  co[0] = std::sqrt(ca[0]);
  const double inv2c0 = 0.5 / co[0];
  for (std::size_t g = 1; g < L.size(); ++g) {
    double s = ca[g];
    for (const auto& p : L.pairs(g)) {
      if (p.left != 0 && p.left != g) s -= co[p.left] * co[p.right];
    }
    co[g] = s * inv2c0;
  }
  return out;
}

Jet reciprocal(const Jet& a) {
  const auto& L = a.layout();
  if (a.value() == 0.0) throw SingularityError("reciprocal of jet with zero constant term");
  Jet out(a.layout_ptr());
  auto ca = a.coefficients();
  auto co = out.coefficients();
  co[0] = 1.0 / ca[0];
  for (std::size_t g = 1; g < L.size(); ++g) {
    double s = 0.0;
    for (const auto& p : L.pairs(g)) {
      if (p.left != 0) s += ca[p.left] * co[p.right];
    }
    co[g] = -s * co[0];
  }
  return out;
}

}  // namespace densan
