#include "densan/suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "densan/analyticity.hpp"
#include "densan/density.hpp"
#include "densan/errors.hpp"

namespace densan {

namespace {

using ojson = nlohmann::ordered_json;

std::uint64_t seed_for(const RunConfig& cfg, std::uint64_t salt) {
  return cfg.seed ^ (0x9e3779b97f4a7c15ULL * (salt + 1));
}

ojson vec_json(const Vec3& v) { return ojson::array({v[0], v[1], v[2]}); }

std::string point_label(std::size_t i) { return "point" + std::to_string(i); }

int max_density_order(int n_electrons) { return n_electrons == 1 ? kMaxAlpha : (n_electrons == 2 ? 4 : 3); }

/// Runs `body` into a fresh check; exceptions fail the check and name the error.
void add_check(SuiteResult& out, const std::string& suite, const std::string& name,
               const std::function<void(Check&)>& body) {
  Check c;
  c.suite = suite;
  c.name = name;
  try {
    body(c);
  } catch (const std::exception& e) {
    c.pass = false;
    c.note = std::string("error: ") + e.what();
  }
  out.checks.push_back(std::move(c));
}

DensityOptions density_options(const RunConfig& cfg) {
  DensityOptions o;
  o.seed = seed_for(cfg, 11);
  o.qmc_points = cfg.samples.qmc_points;
  return o;
}

// Slot-1 marginal of a normalized product of hydrogenic orbitals.
double product_closed_form(const WavefunctionModel& m, const Vec3& x) {
  const double a = m.exponents().front();
  return a * a * a / std::numbers::pi * std::exp(-2.0 * a * norm(x));
}

double nuclear_charge_at_origin(const PotentialSpec& spec) {
  for (const auto& n : spec.nuclei) {
    if (norm(n.position) == 0.0) return n.charge;
  }
  return 0.0;
}

// ---------------------------------------------------------------- density

void density_suite(const RunConfig& cfg, SuiteResult& out) {
  const auto model = cfg.model.build();
  const auto opts = density_options(cfg);
  const int N = model.n_electrons();
  const bool product = model.kind() == WavefunctionModel::Kind::hydrogenic_product;
  for (std::size_t i = 0; i < cfg.points.size(); ++i) {
    const Vec3 x = cfg.points[i];
    DensityResult r;
    add_check(out, "density", "rho@" + point_label(i), [&](Check& c) {
      r = rho(model, x, opts);
      c.values["point"] = vec_json(x);
      c.values["value"] = r.value;
      c.values["error"] = r.error;
      c.values["level"] = r.level;
      c.values["nodes"] = r.n_nodes;
      c.values["converged"] = r.converged;
      c.rows.push_back({"rho", point_label(i), r.value, r.error});
      c.pass = r.converged && std::isfinite(r.value) && r.value >= 0.0;
    });
    if (product) {
      add_check(out, "density", "rho_closed_form@" + point_label(i), [&](Check& c) {
        const double exact = product_closed_form(model, x);
        const double rel = std::abs(r.value - exact) / exact;
        const double tol = std::max(1e-8, 4.0 * r.error / exact);
        c.values["exact"] = exact;
        c.values["value"] = r.value;
        c.values["relative_error"] = rel;
        c.values["tolerance"] = tol;
        c.rows.push_back({"rho_exact", point_label(i), exact, 0.0});
        c.pass = rel <= tol;
      });
    }
    if (N >= 2 && model.exchange_symmetric()) {
      add_check(out, "density", "rho_hat_symmetry@" + point_label(i), [&](Check& c) {
        const auto h = rho_hat(model, x, opts);
        const double target = N * r.value;
        const double rel = std::abs(h.value - target) / target;
        const double tol = std::max(1e-8, 4.0 * (h.error + N * r.error) / target);
        c.values["rho_hat"] = h.value;
        c.values["n_times_rho"] = target;
        c.values["relative_difference"] = rel;
        c.values["tolerance"] = tol;
        c.pass = rel <= tol;
      });
    }
  }
  if (N >= 2) {
    add_check(out, "density", "gamma1_diagonal", [&](Check& c) {
      const Vec3 x = cfg.points.front();
      const auto g = gamma1(model, x, x, opts);
      const auto r = rho_hat(model, x, opts);
      const double rel = std::abs(g.value - r.value) / r.value;
      const double tol = std::max(1e-8, 4.0 * (g.error + r.error) / r.value);
      c.values["gamma1"] = g.value;
      c.values["rho_hat"] = r.value;
      c.values["relative_difference"] = rel;
      c.pass = rel <= tol;
    });
  }
}

// ---------------------------------------------------------------- derivs

ojson term_json(const IntegralTerm& t, long long global_id, long long parent_global, const std::string& alpha) {
  ojson j;
  j["id"] = global_id;
  j["alpha"] = alpha;
  j["parent"] = parent_global >= 0 ? ojson(parent_global) : ojson(nullptr);
  j["step"] = t.step;
  j["P"] = t.cluster.to_string();
  j["P_size"] = t.cluster.size();
  j["phi"] = t.phi.to_string();
  j["inner"] = t.inner.to_string();
  j["outer"] = t.outer.to_string();
  j["coefficient"] = t.coefficient;
  j["leaf"] = t.is_leaf();
  return j;
}

void derivs_suite(const RunConfig& cfg, const SuiteOptions& sopts, SuiteResult& out) {
  const auto model = cfg.model.build();
  const int N = model.n_electrons();
  const int amax = std::min(cfg.alpha_max, max_density_order(N));
  const int amax_structure = std::min(amax, 3);

  add_check(out, "derivs", "expansion_structure", [&](Check& c) {
    std::size_t n_terms = 0, n_leaves = 0, n_hits = 0, merges = 0;
    bool ok = true;
    for (const MultiIndex& alpha : multiindices_up_to(3, amax_structure)) {
      if (alpha.is_zero()) continue;
      const Expansion e = expand_all(N, alpha);
      n_terms += e.terms.size();
      n_leaves += e.leaves.size();
      merges += e.merges;
      for (const IntegralTerm& t : e.terms) {
        if (t.parent < 0) continue;
        const IntegralTerm& p = e.terms[static_cast<std::size_t>(t.parent)];
        if (t.phi != p.phi) {
          ++n_hits;
          ok = ok && t.cluster.size() > p.cluster.size();
        } else {
          ok = ok && t.cluster == p.cluster;
        }
      }
      for (int id : e.leaves) ok = ok && e.terms[static_cast<std::size_t>(id)].is_leaf();
    }
    c.values["alpha_max"] = amax_structure;
    c.values["terms"] = n_terms;
    c.values["leaves"] = n_leaves;
    c.values["chi2_hits"] = n_hits;
    c.values["merges"] = merges;
    c.pass = ok;
  });

  DensityOptions dopt = density_options(cfg);
  if (N == 2) {
    // Two quadrature levels bound the cost; the level difference is the error bar.
    dopt.quadrature.rel_tol = 1e-6;
    dopt.quadrature.max_level = 2;
  }
  std::map<std::string, DensityResult> first_point;
  for (std::size_t i = 0; i < cfg.points.size(); ++i) {
    const Vec3 x = cfg.points[i];
    add_check(out, "derivs", "rho_deriv@" + point_label(i), [&](Check& c) {
      const auto table = rho_deriv_table(model, x, cfg.epsilon, amax, dopt);
      c.values["point"] = vec_json(x);
      c.values["epsilon"] = cfg.epsilon;
      c.values["alpha_max"] = amax;
      bool finite = true;
      for (const auto& e : table) {
        finite = finite && std::isfinite(e.result.value) && std::isfinite(e.result.error);
        c.rows.push_back({"d^alpha rho", point_label(i) + " " + e.alpha.to_string(), e.result.value, e.result.error});
        if (i == 0) first_point[e.alpha.to_string()] = e.result;
      }
      if (N >= 3) {
        c.note = "no difference oracle for quasi-Monte Carlo densities";
        c.pass = finite;
        return;
      }
      const int fd_max = std::min(amax, N == 1 ? 4 : 3);
      FiniteDifferenceOracle fd(model, x, 2, density_options(cfg));
      double worst = 0.0;
      std::string worst_alpha;
      for (const auto& e : table) {
        if (e.alpha.order() > fd_max) continue;
        const auto f = fd.derivative(e.alpha);
        const double bar = f.error + e.result.error;
        const double diff = std::abs(f.value - e.result.value);
        const double z = bar > 0.0 ? diff / bar : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        if (z >= worst) {
          worst = z;
          worst_alpha = e.alpha.to_string();
        }
        c.rows.push_back({"fd d^alpha rho", point_label(i) + " " + e.alpha.to_string(), f.value, f.error});
      }
      c.values["fd_alpha_max"] = fd_max;
      c.values["fd_evaluations"] = fd.evaluations();
      c.values["worst_z"] = worst;
      c.values["worst_alpha"] = worst_alpha;
      c.pass = finite && worst <= 3.0;
    });
  }

  if (sopts.trace_terms) {
    ojson doc;
    doc["schema_version"] = kReportSchemaVersion;
    doc["n_electrons"] = N;
    doc["point"] = vec_json(cfg.points.front());
    doc["epsilon"] = cfg.epsilon;
    ojson terms = ojson::array();
    long long next = 0;
    for (const MultiIndex& alpha : multiindices_up_to(3, amax_structure)) {
      if (alpha.is_zero()) continue;
      const Expansion e = expand_all(N, alpha);
      const long long base = next;
      std::vector<bool> merged_leaf(e.terms.size(), false);
      for (int id : e.leaves) merged_leaf[static_cast<std::size_t>(id)] = true;
      for (const IntegralTerm& t : e.terms) {
        ojson j = term_json(t, base + t.id, t.parent >= 0 ? base + t.parent : -1, alpha.to_string());
        if (merged_leaf[static_cast<std::size_t>(t.id)]) {
          ojson q;
          auto it = first_point.find(alpha.to_string());
          if (it != first_point.end()) {
            q["level"] = it->second.level;
            q["nodes"] = it->second.n_nodes;
            q["alpha_value"] = it->second.value;
            q["alpha_error"] = it->second.error;
          }
          q["inner_radius"] = CutoffPair(cfg.epsilon, N).inner_radius();
          q["outer_radius"] = CutoffPair(cfg.epsilon, N).outer_radius();
          j["quadrature"] = q;
        }
        terms.push_back(j);
      }
      next = base + static_cast<long long>(e.terms.size());
    }
    doc["terms"] = terms;
    out.terms = doc;
  }
}

// ---------------------------------------------------------------- clusters

void clusters_suite(const RunConfig& cfg, SuiteResult& out) {
  const auto model = cfg.model.build();
  const int N = model.n_electrons();

  add_check(out, "clusters", "partition_of_unity", [&](Check& c) {
    const CutoffPair cut(cfg.epsilon, N);
    const auto terms = all_partition_terms(N);
    std::mt19937_64 rng(seed_for(cfg, 21));
    std::normal_distribution<double> gauss(0.0, cut.outer_radius());
    double worst = 0.0;
    Configuration x(static_cast<std::size_t>(N));
    for (std::size_t s = 0; s < cfg.samples.partition; ++s) {
      for (int j = 0; j < N; ++j) x[static_cast<std::size_t>(j)] = {gauss(rng), gauss(rng), gauss(rng)};
      double sum = 0.0;
      for (const auto& t : terms) sum += phi_term_value(t, x, cut);
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    c.values["configurations"] = cfg.samples.partition;
    c.values["terms"] = terms.size();
    c.values["max_deviation"] = worst;
    c.pass = worst < 1e-12;
  });

  const auto Ps = cfg.cluster_sets();
  const int amax = Ps.size() == 1 ? 6 : 4;
  ClusterGrowthReport rep;
  bool ok = false;
  std::string error;
  try {
    rep = verify_cluster_growth(model, Ps, cfg.epsilon, amax, ClusterNorm::l1_density, cfg.samples.cluster,
                                seed_for(cfg, 22));
    ok = true;
  } catch (const std::exception& e) {
    error = e.what();
  }
  auto fill = [&](Check& c, const GrowthFit& fit, const GrowthFit& lower, const std::string& q) {
    if (!ok) throw std::runtime_error(error);
    c.values["C"] = fit.C;
    c.values["L"] = fit.L;
    c.values["L_lower"] = lower.L;
    c.values["alpha_max"] = fit.alpha_max;
    for (const auto& e : fit.entries) c.rows.push_back({q, e.alpha.to_string(), e.magnitude, e.sigma});
  };
  add_check(out, "clusters", "cluster_growth_l2", [&](Check& c) {
    fill(c, rep.l2_fit, rep.l2_lower, "l2 norm d^alpha psi");
    const bool stable = std::abs(rep.l2_fit.L - rep.l2_lower.L) <= 0.25 * rep.l2_lower.L;
    c.values["stable"] = stable;
    c.pass = rep.finite && stable && rep.l2_fit.dominates();
  });
  add_check(out, "clusters", "cluster_growth_l1", [&](Check& c) {
    fill(c, rep.l1_fit, rep.l1_lower, "l1 norm d^alpha |psi|^2");
    c.values["stable"] = rep.stable;
    c.values["C1_over_C_squared"] = rep.l1_fit.C / (rep.l2_fit.C * rep.l2_fit.C);
    c.values["L1_over_L"] = rep.l1_fit.L / rep.l2_fit.L;
    c.values["leibniz_consistent"] = rep.leibniz_consistent;
    c.pass = rep.passed;
  });
}

// ---------------------------------------------------------------- potential-bounds

Configuration sample_in_region(const std::vector<ClusterSet>& Ps, int N, double eps, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.5);
  Configuration x(static_cast<std::size_t>(N));
  for (int attempt = 0; attempt < 100000; ++attempt) {
    for (int j = 0; j < N; ++j) x[static_cast<std::size_t>(j)] = {gauss(rng), gauss(rng), gauss(rng)};
    bool ok = in_U_Pvec(x, Ps, eps);
    for (int j = 1; j <= N && ok; ++j) {
      ok = norm(x.electron(j)) > 1e-3;
      for (int k = j + 1; k <= N && ok; ++k) ok = norm(x.electron(j) - x.electron(k)) > 1e-3;
    }
    if (ok) return x;
  }
  throw std::runtime_error("could not sample the cluster region");
}

void potential_suite(const RunConfig& cfg, SuiteResult& out) {
  const PotentialSpec& spec = cfg.potential;
  const int N = spec.n_electrons;
  const auto Ps = cfg.cluster_sets();
  const int amax = std::clamp(cfg.alpha_max, 1, Ps.size() == 1 ? 6 : 4);

  PotentialGrowthReport growth;
  add_check(out, "potential-bounds", "potential_growth", [&](Check& c) {
    growth = potential_growth_check(spec, Ps, cfg.epsilon, amax, cfg.samples.potential, seed_for(cfg, 31));
    c.values["fitted_LV"] = growth.fitted_LV;
    c.values["samples_used"] = growth.samples_used;
    c.values["alpha_max"] = amax;
    for (const auto& e : growth.entries) c.rows.push_back({"sup d^alpha V", e.alpha.to_string(), e.sup_estimate, 0.0});
    c.pass = growth.all_pass && std::isfinite(growth.fitted_LV);
  });
  add_check(out, "potential-bounds", "potential_growth_stability", [&](Check& c) {
    const auto twice =
        potential_growth_check(spec, Ps, cfg.epsilon, amax, 2 * cfg.samples.potential, seed_for(cfg, 32));
    const double change = std::abs(twice.fitted_LV - growth.fitted_LV) / growth.fitted_LV;
    c.values["fitted_LV"] = growth.fitted_LV;
    c.values["fitted_LV_doubled_samples"] = twice.fitted_LV;
    c.values["relative_change"] = change;
    c.pass = change < 0.10;
  });
  add_check(out, "potential-bounds", "offset_regions", [&](Check& c) {
    const auto rows = offset_region_check(spec, Ps, cfg.epsilon, 0.1, growth.fitted_LV, std::min(amax, 4),
                                          cfg.samples.potential / 4 + 1, seed_for(cfg, 33));
    bool ok = !rows.empty();
    for (const auto& r : rows) {
      ok = ok && r.pass;
      c.rows.push_back({"offset lhs", "j=" + std::to_string(r.j) + " k=" + std::to_string(r.order), r.lhs, 0.0});
      c.rows.push_back({"offset rhs", "j=" + std::to_string(r.j) + " k=" + std::to_string(r.order), r.rhs, 0.0});
    }
    c.values["eta"] = 0.1;
    c.values["rows"] = rows.size();
    c.pass = ok;
  });

  add_check(out, "potential-bounds", "cluster_derivative_vanishing", [&](Check& c) {
    std::mt19937_64 rng(seed_for(cfg, 34));
    std::size_t zero_terms = 0, nonzero_violations = 0, points = 0;
    for (const ClusterSet& P : Ps) {
      for (int s = 0; s < 100; ++s) {
        const Configuration x = sample_in_region({P}, N, cfg.epsilon, rng);
        ++points;
        for (const MultiIndex& a : multiindices_up_to(3, std::min(amax, 4))) {
          if (a.is_zero()) continue;
          ClusterMultiIndex alpha;
          alpha.add(P, a);
          for (const auto& d : cluster_derivative_terms(spec, alpha, x)) {
            if (d.relation == PotentialTermDerivative::Relation::moving) continue;
            ++zero_terms;
            if (d.value != 0.0) ++nonzero_violations;
          }
        }
      }
    }
    c.values["points"] = points;
    c.values["vanishing_terms_checked"] = zero_terms;
    c.values["violations"] = nonzero_violations;
    c.pass = nonzero_violations == 0;
  });

  add_check(out, "potential-bounds", "cluster_derivative_fd", [&](Check& c) {
    std::mt19937_64 rng(seed_for(cfg, 35));
    double worst = 0.0;
    std::size_t points = 0;
    for (const ClusterSet& P : Ps) {
      for (int s = 0; s < 200; ++s) {
        const Configuration x = sample_in_region({P}, N, cfg.epsilon, rng);
        ++points;
        for (int axis = 0; axis < 3; ++axis) {
          const auto v = cluster_direction(P, axis);
          MultiIndex a(3);
          a.set(static_cast<std::size_t>(axis), 1);
          ClusterMultiIndex alpha;
          alpha.add(P, a);
          const double exact = cluster_derivative_of_V(spec, alpha, x);
          const double h = 1e-4;
          const double f1 = potential_value(spec, x.shifted(v, h)), f_1 = potential_value(spec, x.shifted(v, -h));
          const double f2 = potential_value(spec, x.shifted(v, 2 * h)), f_2 = potential_value(spec, x.shifted(v, -2 * h));
          const double fd = (8.0 * (f1 - f_1) - (f2 - f_2)) / (12.0 * h);
          worst = std::max(worst, std::abs(fd - exact) / std::max(1.0, std::abs(exact)));
        }
      }
    }
    c.values["points"] = points;
    c.values["max_relative_difference"] = worst;
    c.pass = worst < 1e-6;
  });

  add_check(out, "potential-bounds", "hardy_ratio", [&](Check& c) {
    const auto family = hardy_test_family(N, 2, seed_for(cfg, 36));
    bool ok = true;
    double worst = 0.0;
    for (std::size_t f = 0; f < family.size(); ++f) {
      for (double lambda : {0.5, 1.0, 2.0}) {
        const auto r = hardy_check(spec, family[f].scaled(lambda), cfg.samples.monte_carlo / 4 + 1,
                                   seed_for(cfg, 37 + f));
        ok = ok && r.finite && std::isfinite(r.ratio);
        worst = std::max(worst, r.ratio);
        char idx[64];
        std::snprintf(idx, sizeof idx, "u%zu lambda=%.1f", f, lambda);
        c.rows.push_back({"hardy ratio", idx, r.ratio, r.ratio_stderr});
      }
    }
    c.values["functions"] = family.size();
    c.values["max_ratio"] = worst;
    c.pass = ok;
  });

  add_check(out, "potential-bounds", "hardy_kernel", [&](Check& c) {
    std::mt19937_64 rng(seed_for(cfg, 38));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = 0.0;
    for (int g = 0; g < 20; ++g) {
      std::vector<OrbitalTerm> orbital;
      for (int t = 0; t < 2; ++t) {
        OrbitalTerm o;
        o.kind = OrbitalTerm::Kind::gaussian;
        o.center = {unif(rng) - 0.5, unif(rng) - 0.5, unif(rng) - 0.5};
        o.rate = 0.3 + 2.0 * unif(rng);
        o.weight = 2.0 * unif(rng) - 1.0;
        orbital.push_back(o);
      }
      const auto k = hardy_kernel_integrals(orbital);
      worst = std::max(worst, k.weighted / (4.0 * k.gradient));
    }
    c.values["gaussians"] = 20;
    c.values["max_weighted_over_4_gradient"] = worst;
    c.pass = worst <= 1.0;
  });
}

// ---------------------------------------------------------------- growth

void growth_suite(const RunConfig& cfg, SuiteResult& out) {
  const auto model = cfg.model.build();
  const int N = model.n_electrons();
  const int amax = std::clamp(cfg.alpha_max, 2, max_density_order(N));
  DensityGrowthOptions gopt;
  gopt.density = density_options(cfg);
  if (N == 2) {
    gopt.density.quadrature.rel_tol = 1e-6;
    gopt.density.quadrature.max_level = 2;
  }
  gopt.seed = seed_for(cfg, 41);
  if (N >= 3) gopt.radius_lines = 0;
  for (std::size_t i = 0; i < cfg.points.size(); ++i) {
    const Vec3 x = cfg.points[i];
    add_check(out, "growth", "density_growth@" + point_label(i), [&](Check& c) {
      const auto rep = verify_density_growth(model, x, cfg.epsilon, amax, gopt);
      c.values["point"] = vec_json(x);
      c.values["C"] = rep.fit.C;
      c.values["L"] = rep.fit.L;
      c.values["alpha_max"] = rep.fit.alpha_max;
      c.values["L_lower"] = rep.lower_fit.L;
      c.values["L_relative_change"] = rep.L_change;
      c.values["stable"] = rep.stable;
      ojson radii = ojson::array();
      for (const auto& r : rep.radii) {
        radii.push_back({{"direction", r.direction}, {"radius", r.radius}, {"band", {r.band_low, r.band_high}},
                         {"root_test", r.root_test}, {"recurrence", r.recurrence}, {"used_order", r.used_order}});
      }
      c.values["radius_estimates"] = radii;
      c.values["radius_floor"] = rep.radius_floor;
      c.pass = rep.passed;

      PlotSeries measured{"max |d^alpha rho| + 2 sigma", {}, {}, true, "#1f77b4"};
      PlotSeries bound{"C L^k (k+1)^k", {}, {}, false, "#d62728"};
      std::vector<double> best(static_cast<std::size_t>(amax + 1), 0.0);
      for (const auto& e : rep.fit.entries) {
        auto& b = best[static_cast<std::size_t>(e.alpha.order())];
        b = std::max(b, e.magnitude + 2.0 * e.sigma);
        c.rows.push_back({"|d^alpha rho|", point_label(i) + " " + e.alpha.to_string(), e.magnitude, e.sigma});
      }
      for (int k = 0; k <= amax; ++k) {
        measured.x.push_back(k);
        measured.y.push_back(best[static_cast<std::size_t>(k)]);
        bound.x.push_back(k);
        bound.y.push_back(rep.fit.bound(k));
      }
      out.plots.push_back({"growth_" + point_label(i) + ".svg",
                           Plot{"Derivative growth at point " + std::to_string(i), "|alpha|", "magnitude", true,
                                {measured, bound}}});
    });
  }
}

// ---------------------------------------------------------------- cusp

void cusp_suite(const RunConfig& cfg, SuiteResult& out) {
  const auto model = cfg.model.build();
  const int N = model.n_electrons();
  const DensityOptions adaptive = density_options(cfg);
  DensityOptions opts = adaptive;
  // A fixed level keeps rho_tilde smooth in r for the difference quotients.
  if (N >= 2) opts.fixed_level = 2;
  const double Z = nuclear_charge_at_origin(cfg.potential);

  add_check(out, "cusp", "cusp_ratio", [&](Check& c) {
    const double ratio = cusp_ratio(model, adaptive);
    c.values["cusp_ratio"] = ratio;
    c.values["expected"] = -Z;
    c.values["difference"] = std::abs(ratio + Z);
    c.pass = Z > 0.0 && std::abs(ratio + Z) < 1e-4;
    if (Z == 0.0) c.note = "no nucleus at the origin";
  });
  for (int k : {1, 2}) {
    add_check(out, "cusp", "radial_derivative_k" + std::to_string(k), [&](Check& c) {
      const auto d = radial_derivs_at_zero(model, k, opts);
      c.values["value"] = d.value;
      c.values["estimates"] = d.estimates;
      c.values["steps"] = d.steps;
      c.values["stable"] = d.stable;
      for (std::size_t s = 0; s < d.estimates.size(); ++s) {
        c.rows.push_back({"rho_tilde d" + std::to_string(k), "h=" + std::to_string(d.steps[s]), d.estimates[s], 0.0});
      }
      c.pass = d.stable;
    });
  }
  add_check(out, "cusp", "rho_tilde_profile", [&](Check& c) {
    PlotSeries s{"rho_tilde(r)", {}, {}, false, "#2ca02c"};
    bool ok = true;
    for (int i = 0; i <= 8; ++i) {
      const double r = 0.25 * i;
      const double v = rho_tilde(model, r, opts) / (4.0 * std::numbers::pi);
      ok = ok && std::isfinite(v) && v > 0.0;
      s.x.push_back(r);
      s.y.push_back(v);
      c.rows.push_back({"rho_tilde/4pi", "r=" + std::to_string(r), v, 0.0});
    }
    // The spherical average of a decaying density decreases away from the nucleus.
    for (std::size_t i = 1; i < s.y.size(); ++i) ok = ok && s.y[i] < s.y[i - 1];
    c.pass = ok;
    out.plots.push_back({"rho_tilde.svg", Plot{"Spherically averaged density", "r", "rho_tilde / 4 pi", true, {s}}});
  });
}

// ---------------------------------------------------------------- support

void support_suite(const RunConfig& cfg, SuiteResult& out) {
  const int N = cfg.model.n_electrons();
  const double eps = cfg.epsilon;
  add_check(out, "support", "support_condition", [&](Check& c) {
    std::size_t violations = 0, accepted = 0, terms = 0;
    std::uint64_t salt = 51;
    for (const PhiTerm& t : support_term_family(N)) {
      const auto r = support_condition_check(t, eps, cfg.samples.support, seed_for(cfg, salt++));
      violations += r.violations;
      accepted += r.accepted;
      ++terms;
      c.rows.push_back({"support violations", t.to_string(), static_cast<double>(r.violations),
                        static_cast<double>(r.accepted)});
    }
    c.values["terms"] = terms;
    c.values["accepted_samples"] = accepted;
    c.values["violations"] = violations;
    c.pass = violations == 0 && accepted > 0;
  });
  if (N >= 2) {
    add_check(out, "support", "support_negative_control", [&](Check& c) {
      // chi1 links electrons 1 and 2, so P = {1,2}; claiming {1} must be caught.
      const PhiTerm t = PhiTerm(N).with_factor(1, 2, FactorKind::chi1);
      const auto r = support_condition_check(t, eps, cfg.samples.support, seed_for(cfg, 59), ClusterSet({1}, N));
      c.values["term"] = t.to_string();
      c.values["true_cluster"] = cluster_of_term(t).to_string();
      c.values["claimed"] = r.cluster_tested.to_string();
      c.values["violations"] = r.violations;
      c.pass = r.violations >= 1;
    });
  }
}

}  // namespace

bool SuiteResult::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

SuiteResult run_suite(const RunConfig& cfg, const std::string& suite, const SuiteOptions& opts) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end()) throw ConfigError("suite", "unknown suite " + suite);
  SuiteResult out;
  {
    const auto model = cfg.model.build();
    try {
      const auto r = eigen_residual(model, cfg.potential, 0.1, cfg.samples.monte_carlo, seed_for(cfg, 1));
      out.residual = {{"residual", r.residual}, {"stderr", r.stderr_estimate}, {"samples", r.samples},
                      {"energy", model.nominal_energy()}};
    } catch (const std::exception& e) {
      out.residual = {{"error", e.what()}};
    }
  }
  const bool all = suite == "all";
  if (all || suite == "density") density_suite(cfg, out);
  if (all || suite == "derivs") derivs_suite(cfg, opts, out);
  if (all || suite == "clusters") clusters_suite(cfg, out);
  if (all || suite == "potential-bounds") potential_suite(cfg, out);
  if (all || suite == "growth") growth_suite(cfg, out);
  if (all || suite == "cusp") cusp_suite(cfg, out);
  if (all || suite == "support") support_suite(cfg, out);
  return out;
}

ojson report_json(const RunConfig& cfg, const std::string& suite, const SuiteResult& result) {
  ojson r;
  r["schema_version"] = kReportSchemaVersion;
  r["tool"] = "densan";
  r["suite"] = suite;
  r["config"] = config_to_json(cfg);
  r["model_residual"] = result.residual;
  ojson checks = ojson::array();
  std::size_t passed = 0;
  for (const Check& c : result.checks) {
    ojson j;
    j["suite"] = c.suite;
    j["name"] = c.name;
    j["pass"] = c.pass;
    j["values"] = c.values;
    if (!c.note.empty()) j["note"] = c.note;
    checks.push_back(j);
    if (c.pass) ++passed;
  }
  r["checks"] = checks;
  r["summary"] = {{"checks", result.checks.size()}, {"passed", passed}, {"failed", result.checks.size() - passed}};
  ojson failing = ojson::array();
  for (const Check& c : result.checks) {
    if (!c.pass) failing.push_back(c.suite + "/" + c.name);
  }
  r["failing"] = failing;
  r["all_pass"] = result.all_pass();
  return r;
}

std::string tables_csv(const SuiteResult& result) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  };
  std::ostringstream os;
  os << "suite,check,quantity,index,value,error\n";
  char buf[64];
  for (const Check& c : result.checks) {
    for (const CsvRow& r : c.rows) {
      os << quote(c.suite) << ',' << quote(c.name) << ',' << quote(r.quantity) << ',' << quote(r.index) << ',';
      std::snprintf(buf, sizeof buf, "%.17g", r.value);
      os << buf << ',';
      std::snprintf(buf, sizeof buf, "%.17g", r.error);
      os << buf << '\n';
    }
  }
  return os.str();
}

void write_outputs(const std::filesystem::path& dir, const RunConfig& cfg, const std::string& suite,
                   const SuiteResult& result) {
  std::filesystem::create_directories(dir / "plots");
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << text;
  };
  write(dir / "report.json", report_json(cfg, suite, result).dump(2) + "\n");
  write(dir / "tables.csv", tables_csv(result));
  for (const auto& p : result.plots) write(dir / "plots" / p.name, render_svg(p.plot));
  if (!result.terms.is_null()) write(dir / "terms.json", result.terms.dump(2) + "\n");
}

std::string explain_term(const nlohmann::json& terms, long long id) {
  if (!terms.contains("terms") || !terms["terms"].is_array()) throw std::invalid_argument("not a terms document");
  std::map<long long, const nlohmann::json*> by_id;
  for (const auto& t : terms["terms"]) by_id[t["id"].get<long long>()] = &t;
  auto it = by_id.find(id);
  if (it == by_id.end()) throw std::out_of_range("unknown term id " + std::to_string(id));
  std::vector<const nlohmann::json*> chain;
  for (const nlohmann::json* t = it->second; t;) {
    chain.push_back(t);
    const auto& parent = (*t)["parent"];
    if (parent.is_null()) break;
    auto p = by_id.find(parent.get<long long>());
    t = p == by_id.end() ? nullptr : p->second;
  }
  std::reverse(chain.begin(), chain.end());
  std::ostringstream os;
  os << "term " << id << " of d^" << (*it->second)["alpha"].get<std::string>() << " rho\n";
  std::size_t prev_size = 0;
  for (const nlohmann::json* t : chain) {
    const auto& j = *t;
    const std::string P = j["P"].get<std::string>();
    const std::size_t size = j["P_size"].get<std::size_t>();
    os << "  [" << j["id"].get<long long>() << "] ";
    if (j["parent"].is_null()) {
      os << "rho_I, P=" << P << ", outer=" << j["outer"].get<std::string>() << "\n";
    } else {
      os << j["step"].get<std::string>() << "\n";
      os << "      P " << (size > prev_size ? "grew " : "kept ") << "-> " << P << ", outer=" << j["outer"].get<std::string>()
         << "\n";
    }
    os << "      phi=" << j["phi"].get<std::string>() << ", inner=" << j["inner"].get<std::string>()
       << ", coefficient=" << j["coefficient"].get<double>() << "\n";
    if (j.contains("quadrature")) {
      const auto& q = j["quadrature"];
      os << "      leaf, outer=0; quadrature";
      if (q.contains("level")) os << " level " << q["level"].get<int>() << ", " << q["nodes"].get<std::size_t>() << " nodes";
      os << ", cutoff radii " << q["inner_radius"].get<double>() << " / " << q["outer_radius"].get<double>() << "\n";
    } else if (j["leaf"].get<bool>()) {
      os << "      leaf (merged into an equal term)\n";
    }
    prev_size = size;
  }
  return os.str();
}

}  // namespace densan
