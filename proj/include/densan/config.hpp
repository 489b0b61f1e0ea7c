#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "densan/clusters.hpp"
#include "densan/geometry.hpp"
#include "densan/potentials.hpp"
#include "densan/wavefunctions.hpp"

namespace densan {

inline constexpr int kReportSchemaVersion = 1;
/// Highest derivative order a run may request.
inline constexpr int kMaxAlpha = 8;

struct ModelSpec {
  std::string kind = "hydrogenic_product";  // or "correlated_pair"
  std::vector<double> exponents{0.5};
  double a = 0.5;
  double lambda = 0.5;
  std::optional<double> energy;

  WavefunctionModel build() const;
  int n_electrons() const;
};

struct SampleBudgets {
  std::size_t monte_carlo = 100000;   // residuals, norms
  std::size_t support = 100000;       // per term family
  std::size_t potential = 20000;      // potential sup sampling
  std::size_t cluster = 1 << 15;      // cluster norm tables
  std::size_t qmc_points = 1 << 14;   // N = 3 densities
  std::size_t partition = 10000;      // partition of unity configurations
};

struct RunConfig {
  ModelSpec model;
  PotentialSpec potential;
  double epsilon = 0.5;
  std::vector<Vec3> points{{1.0, 0.0, 0.0}};
  int alpha_max = 3;
  std::uint64_t seed = 0;
  SampleBudgets samples;
  std::vector<std::vector<int>> clusters{{1}};
  std::string output_dir = "densan-out";
  std::string suite = "all";

  std::vector<ClusterSet> cluster_sets() const;
};

const std::vector<std::string>& suite_names();

/// Parses and validates a config document. Throws ConfigError naming the
/// offending field path. `seed_override` replaces (or supplies) "seed".
RunConfig parse_config(const nlohmann::json& doc, std::optional<std::uint64_t> seed_override = std::nullopt);
RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override = std::nullopt);

/// Canonical JSON form (all defaults filled in).
nlohmann::ordered_json config_to_json(const RunConfig& cfg);

}  // namespace densan
