#include "densan/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "densan/errors.hpp"

namespace densan {

namespace {

constexpr double kPi = std::numbers::pi;

using FreeIntegrand = std::function<void(std::span<const Vec3>, std::span<double>)>;

struct FreeIntegral {
  std::vector<double> values;
  std::vector<double> errors;
  std::size_t nodes = 0;
  int level = 0;
  bool converged = true;
};

double min_decay(const WavefunctionModel& model) {
  double b = model.decay_rate(1);
  for (int j = 2; j <= model.n_electrons(); ++j) b = std::min(b, model.decay_rate(j));
  return b;
}

// Per-output tolerance: relative to the output itself, floored by a fraction
// of the largest output in the same group (outputs that vanish by symmetry).
std::vector<double> tolerances(const std::vector<double>& values, const std::vector<int>& groups, double rel_tol,
                               double abs_tol) {
  std::map<int, double> scale;
  for (std::size_t i = 0; i < values.size(); ++i) scale[groups[i]] = std::max(scale[groups[i]], std::abs(values[i]));
  std::vector<double> tol(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    tol[i] = std::max(rel_tol * std::max(std::abs(values[i]), 1e-3 * scale[groups[i]]), abs_tol);
  }
  return tol;
}

// Integral over the positions of n_free electrons. One free electron uses the
// multi-center rule (refined, or at opts.fixed_level); two use shifted Sobol points.
FreeIntegral integrate_free(std::size_t n_free, const std::vector<Vec3>& centers,
                            const std::vector<std::vector<double>>& breaks, std::size_t n_out, const FreeIntegrand& f,
                            const DensityOptions& opts, double decay, std::vector<int> groups = {},
                            bool estimate_fixed_error = true) {
  FreeIntegral r;
  if (groups.empty()) groups.assign(n_out, 0);
  if (n_free == 0) {
    r.values.assign(n_out, 0.0);
    r.errors.assign(n_out, 0.0);
    f({}, r.values);
    r.nodes = 1;
    return r;
  }
  if (n_free == 1) {
    const double L = opts.quadrature.length_scale;
    auto at_level = [&](int level, std::size_t* nodes) {
      return integrate_multicenter_at_level(centers, breaks, n_out, [&](const Vec3& y, std::span<double> out) {
        f(std::span<const Vec3>(&y, 1), out);
      }, level, L, nodes);
    };
    if (opts.fixed_level) {
      const int level = *opts.fixed_level;
      r.values = at_level(level, &r.nodes);
      r.level = level;
      r.errors.assign(n_out, 0.0);
      r.converged = false;
      if (estimate_fixed_error && level > 0) {
        const auto coarse = at_level(level - 1, nullptr);
        for (std::size_t o = 0; o < n_out; ++o) r.errors[o] = std::abs(r.values[o] - coarse[o]);
      }
      return r;
    }
    std::vector<double> prev;
    for (int level = 0; level <= opts.quadrature.max_level; ++level) {
      auto cur = at_level(level, &r.nodes);
      r.level = level;
      r.converged = false;
      if (!prev.empty()) {
        r.errors.assign(n_out, 0.0);
        const auto tol = tolerances(cur, groups, opts.quadrature.rel_tol, opts.quadrature.abs_tol);
        bool ok = true;
        for (std::size_t o = 0; o < n_out; ++o) {
          r.errors[o] = std::abs(cur[o] - prev[o]);
          ok = ok && r.errors[o] <= tol[o];
        }
        r.values = cur;
        if (ok && level >= opts.quadrature.min_level) {
          r.converged = true;
          return r;
        }
      }
      r.values = cur;
      prev = std::move(cur);
    }
    return r;
  }
  if (n_free == 2) {
    const auto q = qmc_integrate(2, decay, n_out, f, opts.qmc_points, opts.qmc_randomizations, opts.seed);
    r.values = q.values;
    r.errors = q.errors;
    r.nodes = q.nodes;
    return r;
  }
  throw UnsupportedError("densities are implemented for N <= 3");
}

DensityResult single_result(const FreeIntegral& r, std::size_t i = 0) {
  DensityResult d;
  d.value = r.values[i];
  d.error = r.errors.empty() ? 0.0 : r.errors[i];
  d.n_nodes = r.nodes;
  d.level = r.level;
  d.converged = r.converged;
  return d;
}

// Configuration with fixed slots filled in and the remaining slots taken from `free`.
Configuration assemble(std::size_t n, const std::vector<std::pair<std::size_t, Vec3>>& fixed,
                       std::span<const Vec3> free) {
  Configuration c(n);
  std::vector<bool> taken(n, false);
  for (const auto& [slot, pos] : fixed) {
    c[slot] = pos;
    taken[slot] = true;
  }
  std::size_t k = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!taken[j]) c[j] = free[k++];
  }
  return c;
}

std::vector<Vec3> singular_centers(std::initializer_list<Vec3> points) {
  std::vector<Vec3> c{{0, 0, 0}};
  c.insert(c.end(), points.begin(), points.end());
  return c;
}

// Marginal-type integral sum over slot assignments of `psi(a) psi(b)` style integrands.
DensityResult integrate_slots(const WavefunctionModel& model, std::size_t n_fixed, const std::vector<Vec3>& centers,
                              const std::function<double(std::span<const Vec3>)>& integrand,
                              const DensityOptions& opts) {
  const std::size_t n = static_cast<std::size_t>(model.n_electrons());
  if (n < n_fixed) throw UnsupportedError("not enough electrons for this density");
  const auto r = integrate_free(n - n_fixed, centers, {}, 1, [&](std::span<const Vec3> free, std::span<double> out) {
    out[0] = integrand(free);
  }, opts, min_decay(model));
  return single_result(r);
}

DensityResult sum_results(const std::vector<DensityResult>& parts) {
  DensityResult d;
  d.n_nodes = 0;
  d.n_terms = parts.size();
  double e2 = 0.0;
  for (const auto& p : parts) {
    d.value += p.value;
    e2 += p.error * p.error;
    d.n_nodes += p.n_nodes;
    d.level = std::max(d.level, p.level);
    d.converged = d.converged && p.converged;
  }
  d.error = std::sqrt(e2);
  return d;
}

// Evaluates D_l |psi|^2 * phi_l for a fixed list of leaves at one configuration.
class LeafEvaluator {
 public:
  LeafEvaluator(const WavefunctionModel& model, const std::vector<IntegralTerm>& leaves, double eps)
      : model_(model), cut_(eps, model.n_electrons()) {
    std::map<std::vector<std::pair<ClusterSet, int>>, std::size_t> group_of;
    std::map<PhiTerm, std::size_t> phi_of;
    std::vector<std::vector<std::pair<ClusterSet, int>>> leaf_vars;
    std::vector<std::vector<int>> leaf_orders;
    for (const IntegralTerm& leaf : leaves) {
      std::vector<std::pair<ClusterSet, int>> vars;
      std::vector<int> orders;
      for (const auto& part : leaf.inner.parts()) {
        for (int axis = 0; axis < 3; ++axis) {
          const int k = part.alpha[static_cast<std::size_t>(axis)];
          if (k == 0) continue;
          vars.emplace_back(part.cluster, axis);
          orders.push_back(k);
        }
      }
      leaf_vars.push_back(vars);
      leaf_orders.push_back(orders);
      auto [git, gnew] = group_of.try_emplace(vars, groups_.size());
      if (gnew) {
        Group g;
        for (const auto& [P, axis] : vars) g.dirs.push_back(cluster_direction(P, axis));
        g.caps.assign(vars.size(), 0);
        groups_.push_back(std::move(g));
      }
      Group& g = groups_[git->second];
      for (std::size_t i = 0; i < orders.size(); ++i) g.caps[i] = std::max(g.caps[i], orders[i]);
      g.max_order = std::max(g.max_order, leaf.inner.order());
      auto [pit, pnew] = phi_of.try_emplace(leaf.phi, phis_.size());
      if (pnew) phis_.push_back(leaf.phi);
      Leaf l;
      l.group = git->second;
      l.phi = pit->second;
      l.target = MultiIndex(orders.empty() ? std::vector<int>{0} : orders);
      leaves_.push_back(std::move(l));
      g.leaves.push_back(leaves_.size() - 1);
    }
    if (model.kind() != WavefunctionModel::Kind::user_callable) merge_groups(leaves, leaf_vars, leaf_orders);
    for (Group& g : groups_) {
      if (g.dirs.empty()) continue;
      g.layout = JetLayout::get(g.dirs.size(), g.max_order, g.caps);
    }
    for (Leaf& l : leaves_) {
      const Group& g = groups_[l.group];
      if (g.dirs.empty()) continue;
      // Leibniz rule for D(psi * psi)
      for (const auto& t : leibniz_expansion(l.target)) {
        l.leibniz.push_back({static_cast<std::uint32_t>(g.layout->index_of(t.beta)),
                             static_cast<std::uint32_t>(g.layout->index_of(l.target - t.beta)),
                             static_cast<double>(t.coefficient)});
      }
    }
  }

  std::size_t size() const { return leaves_.size(); }

  void evaluate(const Configuration& x, std::span<double> out) const {
    std::vector<double> phi_values(phis_.size());
    for (std::size_t p = 0; p < phis_.size(); ++p) phi_values[p] = phi_term_value(phis_[p], x, cut_);
    for (const Group& g : groups_) {
      bool needed = false;
      for (std::size_t l : g.leaves) needed = needed || phi_values[leaves_[l].phi] != 0.0;
      if (!needed) {
        for (std::size_t l : g.leaves) out[l] = 0.0;
        continue;
      }
      if (g.dirs.empty()) {
        const double psi = model_.value(x);
        for (std::size_t l : g.leaves) out[l] = psi * psi * phi_values[leaves_[l].phi];
        continue;
      }
      const auto d = model_.directional_derivatives(x, g.dirs, g.layout);
      for (std::size_t l : g.leaves) {
        const double phi = phi_values[leaves_[l].phi];
        if (phi == 0.0) {
          out[l] = 0.0;
          continue;
        }
        double s = 0.0;
        for (const auto& t : leaves_[l].leibniz) s += t.coefficient * d[t.left] * d[t.right];
        out[l] = s * phi;
      }
    }
  }

 private:
  // Exact jets are cheaper as one jet in every (cluster, axis) variable than as
  // one small jet per variable set.
  void merge_groups(const std::vector<IntegralTerm>& leaves,
                    const std::vector<std::vector<std::pair<ClusterSet, int>>>& leaf_vars,
                    const std::vector<std::vector<int>>& leaf_orders) {
    std::vector<std::pair<ClusterSet, int>> all;
    for (const auto& vars : leaf_vars) {
      for (const auto& v : vars) {
        if (std::find(all.begin(), all.end(), v) == all.end()) all.push_back(v);
      }
    }
    if (all.empty()) return;
    std::sort(all.begin(), all.end());
    Group merged;
    for (const auto& [P, axis] : all) merged.dirs.push_back(cluster_direction(P, axis));
    merged.caps.assign(all.size(), 0);
    Group plain;
    for (std::size_t l = 0; l < leaves_.size(); ++l) {
      if (leaf_vars[l].empty()) {
        leaves_[l].group = 1;
        plain.leaves.push_back(l);
        continue;
      }
      std::vector<int> target(all.size(), 0);
      for (std::size_t i = 0; i < leaf_vars[l].size(); ++i) {
        const auto pos = static_cast<std::size_t>(std::find(all.begin(), all.end(), leaf_vars[l][i]) - all.begin());
        target[pos] = leaf_orders[l][i];
        merged.caps[pos] = std::max(merged.caps[pos], leaf_orders[l][i]);
      }
      merged.max_order = std::max(merged.max_order, leaves[l].inner.order());
      leaves_[l].group = 0;
      leaves_[l].target = MultiIndex(target);
      merged.leaves.push_back(l);
    }
    groups_.clear();
    groups_.push_back(std::move(merged));
    groups_.push_back(std::move(plain));
  }

  struct LeibnizPair {
    std::uint32_t left, right;
    double coefficient;
  };
  struct Leaf {
    std::size_t group = 0;
    std::size_t phi = 0;
    MultiIndex target;
    std::vector<LeibnizPair> leibniz;
  };
  struct Group {
    std::vector<std::vector<double>> dirs;
    std::vector<int> caps;
    int max_order = 0;
    std::shared_ptr<const JetLayout> layout;
    std::vector<std::size_t> leaves;
  };
  const WavefunctionModel& model_;
  CutoffPair cut_;
  std::vector<Group> groups_;
  std::vector<PhiTerm> phis_;
  std::vector<Leaf> leaves_;
};

struct LeafSet {
  std::vector<IntegralTerm> leaves;  // unit coefficient, unique (inner, phi)
  std::vector<std::vector<std::pair<std::size_t, double>>> combos;  // per alpha: (leaf, coefficient)
};

LeafSet collect_leaves(int n_electrons, const std::vector<MultiIndex>& alphas) {
  LeafSet set;
  std::map<std::pair<ClusterMultiIndex, PhiTerm>, std::size_t> index;
  for (const MultiIndex& alpha : alphas) {
    const Expansion e = expand_all(n_electrons, alpha);
    std::vector<std::pair<std::size_t, double>> combo;
    for (int id : e.leaves) {
      const IntegralTerm& t = e.terms[static_cast<std::size_t>(id)];
      auto [it, fresh] = index.try_emplace({t.inner, t.phi}, set.leaves.size());
      if (fresh) {
        IntegralTerm leaf = t;
        leaf.coefficient = 1.0;
        set.leaves.push_back(std::move(leaf));
      }
      combo.emplace_back(it->second, t.coefficient);
    }
    set.combos.push_back(std::move(combo));
  }
  return set;
}

std::vector<DensityResult> evaluate_alphas(const WavefunctionModel& model, const Vec3& x, double eps,
                                           const std::vector<MultiIndex>& alphas, const DensityOptions& opts) {
  if (!(eps > 0.0)) throw ConfigError("epsilon", "epsilon must be positive");
  if (!(norm(x) > eps)) throw DomainError("derivatives of rho require |x| > epsilon");
  const int N = model.n_electrons();
  if (N > 3) throw UnsupportedError("densities are implemented for N <= 3");
  const LeafSet set = collect_leaves(N, alphas);
  const LeafEvaluator ev(model, set.leaves, eps);
  const CutoffPair cut(eps, N);
  std::vector<int> groups;
  for (const MultiIndex& a : alphas) groups.push_back(a.order());
  const auto r = integrate_free(
      static_cast<std::size_t>(N - 1), singular_centers({x}), {{}, {cut.inner_radius(), cut.outer_radius()}},
      alphas.size(),
      [&](std::span<const Vec3> free, std::span<double> out) {
        std::vector<double> tmp(ev.size());
        ev.evaluate(assemble(static_cast<std::size_t>(N), {{0, x}}, free), tmp);
        for (std::size_t a = 0; a < alphas.size(); ++a) {
          double s = 0.0;
          for (const auto& [leaf, coef] : set.combos[a]) s += coef * tmp[leaf];
          out[a] = s;
        }
      },
      opts, min_decay(model), groups);
  std::vector<DensityResult> out;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    DensityResult d = single_result(r, a);
    d.n_terms = set.combos[a].size();
    out.push_back(d);
  }
  return out;
}

std::string describe_factor(int j, int k, FactorKind kind) {
  std::ostringstream os;
  os << to_string(kind) << "(x" << j << "-x" << k << ")";
  return os.str();
}

}  // namespace

DensityResult rho(const WavefunctionModel& model, const Vec3& x, const DensityOptions& opts) {
  return slot_marginal(model, 1, x, opts);
}

DensityResult rho_at_level(const WavefunctionModel& model, const Vec3& x, int level, const DensityOptions& opts) {
  DensityOptions o = opts;
  o.fixed_level = level;
  const std::size_t n = static_cast<std::size_t>(model.n_electrons());
  const auto r = integrate_free(n - 1, singular_centers({x}), {}, 1,
                                [&](std::span<const Vec3> free, std::span<double> out) {
                                  const double psi = model.value(assemble(n, {{0, x}}, free));
                                  out[0] = psi * psi;
                                },
                                o, min_decay(model), {}, false);
  return single_result(r);
}

DensityResult slot_marginal(const WavefunctionModel& model, int slot, const Vec3& x, const DensityOptions& opts) {
  const std::size_t n = static_cast<std::size_t>(model.n_electrons());
  if (slot < 1 || static_cast<std::size_t>(slot) > n) throw std::out_of_range("slot out of range");
  const std::size_t s = static_cast<std::size_t>(slot - 1);
  return integrate_slots(model, 1, singular_centers({x}), [&](std::span<const Vec3> free) {
    const double psi = model.value(assemble(n, {{s, x}}, free));
    return psi * psi;
  }, opts);
}

DensityResult rho_hat(const WavefunctionModel& model, const Vec3& x, const DensityOptions& opts) {
  std::vector<DensityResult> parts;
  for (int j = 1; j <= model.n_electrons(); ++j) parts.push_back(slot_marginal(model, j, x, opts));
  return sum_results(parts);
}

DensityResult gamma1(const WavefunctionModel& model, const Vec3& x, const Vec3& xp, const DensityOptions& opts) {
  const std::size_t n = static_cast<std::size_t>(model.n_electrons());
  std::vector<DensityResult> parts;
  for (std::size_t j = 0; j < n; ++j) {
    parts.push_back(integrate_slots(model, 1, singular_centers({x, xp}), [&](std::span<const Vec3> free) {
      return model.value(assemble(n, {{j, x}}, free)) * model.value(assemble(n, {{j, xp}}, free));
    }, opts));
  }
  return sum_results(parts);
}

DensityResult rho2(const WavefunctionModel& model, const Vec3& x, const Vec3& xp, const DensityOptions& opts) {
  const std::size_t n = static_cast<std::size_t>(model.n_electrons());
  if (n < 2) throw UnsupportedError("the pair density needs at least two electrons");
  std::vector<DensityResult> parts;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      if (j == k) continue;
      parts.push_back(integrate_slots(model, 2, singular_centers({x, xp}), [&](std::span<const Vec3> free) {
        const double psi = model.value(assemble(n, {{j, x}, {k, xp}}, free));
        return psi * psi;
      }, opts));
    }
  }
  return sum_results(parts);
}

DensityResult rho_I(const WavefunctionModel& model, const PhiTerm& term, const Vec3& x, const CutoffPair& cut,
                    const DensityOptions& opts) {
  const std::size_t n = static_cast<std::size_t>(model.n_electrons());
  if (term.n_electrons() != model.n_electrons() || cut.n_electrons() != model.n_electrons()) {
    throw DimensionMismatch("term, cutoff and model disagree on the number of electrons");
  }
  const auto r = integrate_free(n - 1, singular_centers({x}), {{}, {cut.inner_radius(), cut.outer_radius()}}, 1,
                                [&](std::span<const Vec3> free, std::span<double> out) {
                                  const Configuration c = assemble(n, {{0, x}}, free);
                                  const double phi = phi_term_value(term, c, cut);
                                  if (phi == 0.0) {
                                    out[0] = 0.0;
                                    return;
                                  }
                                  const double psi = model.value(c);
                                  out[0] = psi * psi * phi;
                                },
                                opts, min_decay(model));
  return single_result(r);
}

IntegralTerm root_term(const PhiTerm& phi, const MultiIndex& alpha) {
  if (alpha.dimension() != 3) throw DimensionMismatch("density derivatives take a 3-dimensional multiindex");
  IntegralTerm t;
  t.phi = phi;
  t.outer = alpha;
  t.cluster = cluster_of_term(phi);
  t.step = "root";
  return t;
}

std::vector<IntegralTerm> expand_derivative(const IntegralTerm& term, int axis) {
  if (axis < 0 || axis > 2) throw std::out_of_range("axis must be 0, 1 or 2");
  if (term.outer[static_cast<std::size_t>(axis)] == 0) throw std::invalid_argument("no outer derivative on this axis");
  const ClusterSet& P = term.cluster;
  if (!P.contains(1)) throw StructuralError("P(phi) must contain electron 1");
  const int N = term.phi.n_electrons();
  const MultiIndex step = MultiIndex::unit(3, static_cast<std::size_t>(axis));
  std::vector<IntegralTerm> children;

  IntegralTerm inner = term;
  inner.inner.add(P, step);
  inner.outer = term.outer - step;
  inner.coefficient = term.coefficient * std::sqrt(static_cast<double>(P.size()));
  inner.parent = term.id;
  inner.id = -1;
  inner.step = "d/dx_" + std::to_string(axis + 1) + " -> sqrt|P| d_{x_P}, P=" + P.to_string();
  children.push_back(std::move(inner));

  for (int j = 1; j <= N; ++j) {
    for (int k = j + 1; k <= N; ++k) {
      const bool jin = P.contains(j), kin = P.contains(k);
      if (jin == kin) continue;
      const FactorKind f = term.phi.factor(j, k);
      if (f != FactorKind::chi2) throw StructuralError("a non-chi2 factor links P(phi) to its complement");
      IntegralTerm hit = term;
      hit.phi = term.phi.with_factor(j, k, dchi2_kind(axis));
      hit.cluster = cluster_of_term(hit.phi);
      if (hit.cluster.size() <= P.size()) throw StructuralError("differentiating chi2 must enlarge P(phi)");
      hit.outer = term.outer - step;
      // chi2(x_j - x_k) moves with x_j; the member of P may be either endpoint.
      hit.coefficient = jin ? term.coefficient : -term.coefficient;
      hit.parent = term.id;
      hit.id = -1;
      hit.step = "d/dx_" + std::to_string(axis + 1) + " hits " + describe_factor(j, k, FactorKind::chi2) + ", P " +
                 P.to_string() + " -> " + hit.cluster.to_string();
      children.push_back(std::move(hit));
    }
  }
  return children;
}

Expansion expand_all(int n_electrons, const MultiIndex& alpha) {
  if (alpha.dimension() != 3) throw DimensionMismatch("density derivatives take a 3-dimensional multiindex");
  Expansion e;
  std::vector<int> frontier;
  for (const PhiTerm& phi : all_partition_terms(n_electrons)) {
    IntegralTerm t = root_term(phi, alpha);
    t.id = static_cast<int>(e.terms.size());
    e.terms.push_back(t);
    frontier.push_back(t.id);
  }
  for (int level = 0; level < alpha.order(); ++level) {
    std::vector<int> next;
    std::map<std::tuple<ClusterMultiIndex, PhiTerm, MultiIndex>, int> seen;
    for (int id : frontier) {
      const IntegralTerm parent = e.terms[static_cast<std::size_t>(id)];
      int axis = 0;
      while (parent.outer[static_cast<std::size_t>(axis)] == 0) ++axis;
      for (IntegralTerm& child : expand_derivative(parent, axis)) {
        auto key = std::make_tuple(child.inner, child.phi, child.outer);
        auto it = seen.find(key);
        if (it != seen.end()) {
          e.terms[static_cast<std::size_t>(it->second)].coefficient += child.coefficient;
          ++e.merges;
          continue;
        }
        child.id = static_cast<int>(e.terms.size());
        seen.emplace(std::move(key), child.id);
        next.push_back(child.id);
        e.terms.push_back(std::move(child));
      }
    }
    frontier = std::move(next);
  }
  e.leaves = frontier;
  return e;
}

DensityResult rho_deriv(const WavefunctionModel& model, const MultiIndex& alpha, const Vec3& x, double eps,
                        const DensityOptions& opts, Expansion* trace) {
  if (alpha.dimension() != 3) throw DimensionMismatch("density derivatives take a 3-dimensional multiindex");
  if (trace) *trace = expand_all(model.n_electrons(), alpha);
  return evaluate_alphas(model, x, eps, {alpha}, opts).front();
}

std::vector<DerivativeEntry> rho_deriv_table(const WavefunctionModel& model, const Vec3& x, double eps, int alpha_max,
                                             const DensityOptions& opts) {
  const auto alphas = multiindices_up_to(3, alpha_max);
  const auto results = evaluate_alphas(model, x, eps, alphas, opts);
  std::vector<DerivativeEntry> out;
  for (std::size_t i = 0; i < alphas.size(); ++i) out.push_back({alphas[i], results[i]});
  return out;
}

std::vector<double> rho_slice_coefficients(const WavefunctionModel& model, const Vec3& x, const Vec3& direction,
                                           int max_order, double eps, const DensityOptions& opts) {
  const double len = norm(direction);
  if (!(len > 0.0)) throw std::invalid_argument("slice direction must be nonzero");
  const Vec3 v = (1.0 / len) * direction;
  int axis = -1;
  for (int d = 0; d < 3; ++d) {
    if (std::abs(v[static_cast<std::size_t>(d)]) == 1.0) axis = d;
  }
  Vec3 base = x;
  double sign = 1.0;
  if (axis < 0) {
    if (model.kind() == WavefunctionModel::Kind::user_callable) {
      throw UnsupportedError("oblique slices need a rotation-invariant model");
    }
    // Built-in models depend on distances only: rotate v onto e_2.
    Vec3 a = std::abs(v[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 0, 1};
    a = a - dot(a, v) * v;
    a = (1.0 / norm(a)) * a;
    const Vec3 c{v[1] * a[2] - v[2] * a[1], v[2] * a[0] - v[0] * a[2], v[0] * a[1] - v[1] * a[0]};
    base = {dot(a, x), dot(v, x), dot(c, x)};
    axis = 1;
  } else {
    sign = v[static_cast<std::size_t>(axis)];
  }
  std::vector<MultiIndex> alphas;
  for (int k = 0; k <= max_order; ++k) {
    MultiIndex a(3);
    a.set(static_cast<std::size_t>(axis), k);
    alphas.push_back(a);
  }
  const auto res = evaluate_alphas(model, base, eps, alphas, opts);
  std::vector<double> c;
  double fact = 1.0;
  for (int k = 0; k <= max_order; ++k) {
    if (k > 0) fact *= k;
    c.push_back(res[static_cast<std::size_t>(k)].value * std::pow(sign, k) / fact);
  }
  return c;
}

FiniteDifferenceOracle::FiniteDifferenceOracle(const WavefunctionModel& model, const Vec3& x, int level,
                                               const DensityOptions& opts)
    : model_(model), x_(x), level_(level), opts_(opts) {}

double FiniteDifferenceOracle::value_at(int step_index, const std::array<int, 3>& offset) {
  static constexpr double kSteps[] = {1e-2, 5e-3, 2.5e-3};
  const auto key = std::make_tuple(step_index, offset[0], offset[1], offset[2]);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  // Index 3 is the middle step one quadrature level lower.
  const double h = kSteps[step_index == 3 ? 1 : step_index];
  const int level = step_index == 3 ? level_ - 1 : level_;
  const Vec3 p{x_[0] + h * offset[0], x_[1] + h * offset[1], x_[2] + h * offset[2]};
  const double v = rho_at_level(model_, p, level, opts_).value;
  cache_.emplace(key, v);
  return v;
}

FiniteDifferenceResult FiniteDifferenceOracle::derivative(const MultiIndex& alpha) {
  if (alpha.dimension() != 3) throw DimensionMismatch("density derivatives take a 3-dimensional multiindex");
  // Second-order accurate central stencils (offset, weight) per derivative order.
  static const std::vector<std::vector<std::pair<int, double>>> kStencil = {
      {{0, 1.0}},
      {{-1, -0.5}, {1, 0.5}},
      {{-1, 1.0}, {0, -2.0}, {1, 1.0}},
      {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}},
      {{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}}};
  static constexpr double kSteps[] = {1e-2, 5e-3, 2.5e-3};
  for (int d = 0; d < 3; ++d) {
    if (alpha[static_cast<std::size_t>(d)] > 4) throw UnsupportedError("difference oracle supports order <= 4 per axis");
  }
  const auto& s0 = kStencil[static_cast<std::size_t>(alpha[0])];
  const auto& s1 = kStencil[static_cast<std::size_t>(alpha[1])];
  const auto& s2 = kStencil[static_cast<std::size_t>(alpha[2])];
  FiniteDifferenceResult res;
  double max_abs = 0.0, weight_sum = 0.0;
  double coarse = 0.0;
  for (int h = 0; h < 4; ++h) {
    if (h == 3 && level_ == 0) break;
    double sum = 0.0;
    weight_sum = 0.0;
    for (const auto& [o0, w0] : s0) {
      for (const auto& [o1, w1] : s1) {
        for (const auto& [o2, w2] : s2) {
          const double v = value_at(h, {o0, o1, o2});
          max_abs = std::max(max_abs, std::abs(v));
          sum += w0 * w1 * w2 * v;
          weight_sum += std::abs(w0 * w1 * w2);
        }
      }
    }
    if (h == 3) {
      coarse = sum / std::pow(kSteps[1], alpha.order());
    } else {
      res.raw.push_back(sum / std::pow(kSteps[h], alpha.order()));
    }
  }
  const double r1 = (4.0 * res.raw[1] - res.raw[0]) / 3.0;
  const double r2 = (4.0 * res.raw[2] - res.raw[1]) / 3.0;
  res.value = (16.0 * r2 - r1) / 15.0;
  const double roundoff = 64.0 * 2.2e-16 * max_abs * weight_sum / std::pow(kSteps[2], alpha.order());
  const double level_bias = level_ > 0 ? std::abs(res.raw[1] - coarse) : 0.0;
  res.error = std::abs(res.value - r2) + roundoff + level_bias;
  return res;
}

double rho_tilde(const WavefunctionModel& model, double r, const DensityOptions& opts) {
  if (!(r >= 0.0)) throw std::invalid_argument("radius must be nonnegative");
  // Built-in models depend on |x_j| and |x_j - x_k| only: one direction suffices.
  if (model.kind() != WavefunctionModel::Kind::user_callable) {
    return 4.0 * std::numbers::pi * rho(model, Vec3{0.0, 0.0, r}, opts).value;
  }
  const SphereRule rule = lebedev26();
  double s = 0.0;
  for (std::size_t i = 0; i < rule.directions.size(); ++i) {
    s += rule.weights[i] * rho(model, r * rule.directions[i], opts).value;
  }
  return s;
}

RadialDerivative radial_derivs_at_zero(const WavefunctionModel& model, int k, const DensityOptions& opts, double h0,
                                       int halvings) {
  if (k < 0 || k > 2) throw UnsupportedError("radial derivatives at 0 are provided for k <= 2");
  if (halvings < 2) throw std::invalid_argument("at least two step sizes are required");
  std::map<double, double> cache;
  auto f = [&](double r) {
    auto it = cache.find(r);
    if (it != cache.end()) return it->second;
    const double v = rho_tilde(model, r, opts);
    cache.emplace(r, v);
    return v;
  };
  RadialDerivative out;
  if (k == 0) {
    out.value = f(0.0);
    out.estimates = {out.value};
    out.steps = {0.0};
    out.stable = true;
    return out;
  }
  double h = h0;
  for (int i = 0; i < halvings; ++i, h *= 0.5) {
    double d = 0.0;
    if (k == 1) {
      d = (-3.0 * f(0.0) + 4.0 * f(h) - f(2.0 * h)) / (2.0 * h);
    } else {
      d = (2.0 * f(0.0) - 5.0 * f(h) + 4.0 * f(2.0 * h) - f(3.0 * h)) / (h * h);
    }
    out.steps.push_back(h);
    out.estimates.push_back(d);
  }
  const std::size_t n = out.estimates.size();
  // Both stencils have leading error O(h^2): extrapolate the last pair.
  out.value = (4.0 * out.estimates[n - 1] - out.estimates[n - 2]) / 3.0;
  const double a = out.estimates[n - 1], b = out.estimates[n - 2];
  out.stable = std::abs(a - b) <= 0.05 * std::max(std::abs(a), std::abs(b));
  return out;
}

double cusp_ratio(const WavefunctionModel& model, const DensityOptions& opts) {
  const double f0 = radial_derivs_at_zero(model, 0, opts).value;
  const double f1 = radial_derivs_at_zero(model, 1, opts).value;
  return f1 / f0;
}

NaiveVarianceReport naive_variance_ratio(const WavefunctionModel& model, const MultiIndex& alpha, const Vec3& x,
                                         double eps, std::size_t n_samples, std::uint64_t seed) {
  if (model.n_electrons() != 2) throw UnsupportedError("the variance comparison is implemented for N = 2");
  if (alpha.dimension() != 3) throw DimensionMismatch("density derivatives take a 3-dimensional multiindex");
  if (!(norm(x) > eps)) throw DomainError("derivatives of rho require |x| > epsilon");
  const LeafSet set = collect_leaves(2, {alpha});
  const LeafEvaluator ev(model, set.leaves, eps);
  // Naive: partial_x^alpha |psi(x, y)|^2 with x moving alone.
  std::vector<std::vector<double>> dirs;
  std::vector<int> caps;
  for (int d = 0; d < 3; ++d) {
    if (alpha[static_cast<std::size_t>(d)] == 0) continue;
    std::vector<double> v(6, 0.0);
    v[static_cast<std::size_t>(d)] = 1.0;
    dirs.push_back(v);
    caps.push_back(alpha[static_cast<std::size_t>(d)]);
  }
  std::vector<int> target_entries;
  for (int d = 0; d < 3; ++d) {
    if (alpha[static_cast<std::size_t>(d)] > 0) target_entries.push_back(alpha[static_cast<std::size_t>(d)]);
  }
  const auto layout = dirs.empty() ? nullptr : JetLayout::get(dirs.size(), alpha.order(), caps);
  const ExponentialSampler q(model.decay_rate(2));
  std::mt19937_64 rng(seed);
  double n1 = 0, n2 = 0, d1 = 0, d2 = 0;
  std::vector<double> tmp(ev.size());
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Vec3 y = q.sample(rng);
    const double w = 1.0 / q.density(y);
    const Configuration c{x, y};
    double naive = 0.0;
    if (!layout) {
      const double psi = model.value(c);
      naive = psi * psi;
    } else {
      try {
        const Jet j = model.jet(c, dirs, layout);
        naive = square(j).derivative(MultiIndex(target_entries));
      } catch (const SingularityError&) {
        naive = 0.0;
      }
    }
    naive *= w;
    ev.evaluate(c, tmp);
    double dec = 0.0;
    for (const auto& [leaf, coef] : set.combos[0]) dec += coef * tmp[leaf];
    dec *= w;
    n1 += naive;
    n2 += naive * naive;
    d1 += dec;
    d2 += dec * dec;
  }
  const double n = static_cast<double>(n_samples);
  NaiveVarianceReport rep;
  rep.alpha = alpha;
  rep.naive_variance = std::max(0.0, n2 / n - (n1 / n) * (n1 / n));
  rep.decomposed_variance = std::max(0.0, d2 / n - (d1 / n) * (d1 / n));
  rep.ratio = rep.decomposed_variance > 0.0 ? rep.naive_variance / rep.decomposed_variance : 0.0;
  return rep;
}

}  // namespace densan
