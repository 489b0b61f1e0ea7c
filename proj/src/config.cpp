#include "densan/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "densan/errors.hpp"

namespace densan {

namespace {

using json = nlohmann::json;

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw ConfigError(path.empty() ? key : path + "." + key, "unknown field");
    }
  }
}

const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  return j;
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

double get_positive(const json& j, const std::string& path) {
  const double v = get_number(j, path);
  if (!(v > 0.0)) throw ConfigError(path, "must be > 0");
  return v;
}

std::uint64_t get_unsigned(const json& j, const std::string& path) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
    throw ConfigError(path, "expected a nonnegative integer");
  }
  return j.get<std::uint64_t>();
}

std::size_t get_count(const json& j, const std::string& path) {
  const auto v = get_unsigned(j, path);
  if (v == 0) throw ConfigError(path, "must be >= 1");
  return static_cast<std::size_t>(v);
}

Vec3 get_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(path, "expected three numbers");
  return {get_number(j[0], path + "[0]"), get_number(j[1], path + "[1]"), get_number(j[2], path + "[2]")};
}

Interaction parse_interaction(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"kind", "screening"});
  const std::string kind = j.value("kind", std::string("coulomb"));
  if (kind == "coulomb") return Interaction::coulomb();
  if (kind == "yukawa") {
    if (!j.contains("screening")) throw ConfigError(path + ".screening", "required for yukawa");
    return Interaction::yukawa(get_positive(j["screening"], path + ".screening"));
  }
  throw ConfigError(path + ".kind", "expected \"coulomb\" or \"yukawa\"");
}

json interaction_json(const Interaction& w) {
  json j{{"kind", w.kind == Interaction::Kind::coulomb ? "coulomb" : "yukawa"}};
  if (w.kind == Interaction::Kind::yukawa) j["screening"] = w.screening;
  return j;
}

ModelSpec parse_model(const json& j) {
  require_object(j, "model");
  ModelSpec m;
  if (!j.contains("kind")) throw ConfigError("model.kind", "required");
  if (!j["kind"].is_string()) throw ConfigError("model.kind", "expected a string");
  m.kind = j["kind"].get<std::string>();
  if (m.kind == "hydrogenic_product") {
    reject_unknown(j, "model", {"kind", "exponents", "E"});
    if (!j.contains("exponents")) throw ConfigError("model.exponents", "required");
    const json& e = j["exponents"];
    if (!e.is_array() || e.empty()) throw ConfigError("model.exponents", "expected a nonempty array");
    if (e.size() > 3) throw ConfigError("model.exponents", "at most three electrons are supported");
    m.exponents.clear();
    for (std::size_t i = 0; i < e.size(); ++i) {
      m.exponents.push_back(get_positive(e[i], "model.exponents[" + std::to_string(i) + "]"));
    }
  } else if (m.kind == "correlated_pair") {
    reject_unknown(j, "model", {"kind", "a", "lambda", "E"});
    if (j.contains("a")) m.a = get_positive(j["a"], "model.a");
    if (j.contains("lambda")) m.lambda = get_number(j["lambda"], "model.lambda");
  } else {
    throw ConfigError("model.kind", "expected \"hydrogenic_product\" or \"correlated_pair\"");
  }
  if (j.contains("E")) m.energy = get_number(j["E"], "model.E");
  return m;
}

PotentialSpec parse_potential(const json& j, const ModelSpec& model) {
  require_object(j, "potential");
  reject_unknown(j, "potential",
                 {"kind", "Z", "N", "nuclei", "electron_interaction", "include_repulsion", "energy_shift"});
  const int n = model.n_electrons();
  if (j.contains("N") && get_unsigned(j["N"], "potential.N") != static_cast<std::uint64_t>(n)) {
    throw ConfigError("potential.N", "must equal the number of electrons of the model");
  }
  const std::string kind = j.value("kind", std::string(j.contains("nuclei") ? "molecule" : "coulomb_atom"));
  if (kind != "coulomb_atom" && kind != "molecule") {
    throw ConfigError("potential.kind", "expected \"coulomb_atom\" or \"molecule\"");
  }
  PotentialSpec spec;
  if (kind == "coulomb_atom" && j.contains("nuclei")) throw ConfigError("potential.nuclei", "not allowed for coulomb_atom");
  if (kind == "molecule" && j.contains("Z")) throw ConfigError("potential.Z", "not allowed for molecule");
  if (kind == "coulomb_atom") {
    if (!j.contains("Z")) throw ConfigError("potential.Z", "required");
    spec = PotentialSpec::coulomb_atom(get_positive(j["Z"], "potential.Z"), n);
  } else {
    if (!j.contains("nuclei")) throw ConfigError("potential.nuclei", "required");
    const json& nu = j["nuclei"];
    if (!nu.is_array() || nu.empty()) throw ConfigError("potential.nuclei", "expected a nonempty array");
    spec.n_electrons = n;
    for (std::size_t i = 0; i < nu.size(); ++i) {
      const std::string path = "potential.nuclei[" + std::to_string(i) + "]";
      require_object(nu[i], path);
      reject_unknown(nu[i], path, {"position", "charge", "interaction"});
      Nucleus nuc;
      if (nu[i].contains("position")) nuc.position = get_vec3(nu[i]["position"], path + ".position");
      if (!nu[i].contains("charge")) throw ConfigError(path + ".charge", "required");
      nuc.charge = get_positive(nu[i]["charge"], path + ".charge");
      if (nu[i].contains("interaction")) nuc.interaction = parse_interaction(nu[i]["interaction"], path + ".interaction");
      spec.nuclei.push_back(nuc);
    }
  }
  if (j.contains("electron_interaction")) {
    spec.electron_interaction = parse_interaction(j["electron_interaction"], "potential.electron_interaction");
  }
  if (j.contains("include_repulsion")) {
    if (!j["include_repulsion"].is_boolean()) throw ConfigError("potential.include_repulsion", "expected a boolean");
    spec.include_repulsion = j["include_repulsion"].get<bool>();
  }
  if (j.contains("energy_shift")) spec.energy_shift = get_number(j["energy_shift"], "potential.energy_shift");
  try {
    spec.validate();
  } catch (const std::exception& e) {
    throw ConfigError("potential", e.what());
  }
  return spec;
}

PotentialSpec default_potential(const ModelSpec& m) {
  // e^{-a r} solves -Delta - 2a/r, so the matching atom has Z = 2a.
  const double a = m.kind == "correlated_pair" ? m.a : m.exponents.front();
  return PotentialSpec::coulomb_atom(2.0 * a, m.n_electrons());
}

}  // namespace

WavefunctionModel ModelSpec::build() const {
  if (kind == "correlated_pair") return WavefunctionModel::correlated_pair(a, lambda, energy.value_or(-0.5));
  return WavefunctionModel::hydrogenic_product(exponents, energy);
}

int ModelSpec::n_electrons() const {
  return kind == "correlated_pair" ? 2 : static_cast<int>(exponents.size());
}

std::vector<ClusterSet> RunConfig::cluster_sets() const {
  std::vector<ClusterSet> out;
  for (const auto& c : clusters) out.emplace_back(c, model.n_electrons());
  return out;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"density", "derivs", "clusters", "potential-bounds",
                                              "growth",  "cusp",   "support",  "all"};
  return names;
}

RunConfig parse_config(const json& doc, std::optional<std::uint64_t> seed_override) {
  require_object(doc, "(root)");
  reject_unknown(doc, "", {"schema_version", "model", "potential", "epsilon", "points", "alpha_max", "seed",
                           "samples", "clusters", "output_dir", "suite"});
  RunConfig cfg;
  if (doc.contains("schema_version")) {
    if (get_unsigned(doc["schema_version"], "schema_version") != static_cast<std::uint64_t>(kReportSchemaVersion)) {
      throw ConfigError("schema_version", "unsupported version");
    }
  }
  if (!doc.contains("model")) throw ConfigError("model", "required");
  cfg.model = parse_model(doc["model"]);
  const int n = cfg.model.n_electrons();
  cfg.potential = doc.contains("potential") ? parse_potential(doc["potential"], cfg.model)
                                            : default_potential(cfg.model);

  if (doc.contains("epsilon")) cfg.epsilon = get_number(doc["epsilon"], "epsilon");
  if (!(cfg.epsilon > 0.0)) throw ConfigError("epsilon", "must be > 0");

  if (doc.contains("points")) {
    const json& p = doc["points"];
    if (!p.is_array() || p.empty()) throw ConfigError("points", "expected a nonempty array");
    cfg.points.clear();
    for (std::size_t i = 0; i < p.size(); ++i) cfg.points.push_back(get_vec3(p[i], "points[" + std::to_string(i) + "]"));
  }
  for (std::size_t i = 0; i < cfg.points.size(); ++i) {
    if (!(norm(cfg.points[i]) > cfg.epsilon)) {
      throw ConfigError("points[" + std::to_string(i) + "]", "must satisfy |x| > epsilon");
    }
  }

  if (doc.contains("alpha_max")) {
    const auto a = get_unsigned(doc["alpha_max"], "alpha_max");
    if (a > static_cast<std::uint64_t>(kMaxAlpha)) {
      throw ConfigError("alpha_max", "must be <= " + std::to_string(kMaxAlpha));
    }
    cfg.alpha_max = static_cast<int>(a);
  }

  if (seed_override) {
    cfg.seed = *seed_override;
  } else if (doc.contains("seed")) {
    cfg.seed = get_unsigned(doc["seed"], "seed");
  } else {
    throw ConfigError("seed", "required (seeds are never taken from the clock)");
  }

  if (doc.contains("samples")) {
    const json& s = require_object(doc["samples"], "samples");
    reject_unknown(s, "samples", {"monte_carlo", "support", "potential", "cluster", "qmc_points", "partition"});
    auto read = [&](const char* key, std::size_t& dst) {
      if (s.contains(key)) dst = get_count(s[key], std::string("samples.") + key);
    };
    read("monte_carlo", cfg.samples.monte_carlo);
    read("support", cfg.samples.support);
    read("potential", cfg.samples.potential);
    read("cluster", cfg.samples.cluster);
    read("qmc_points", cfg.samples.qmc_points);
    read("partition", cfg.samples.partition);
  }

  if (doc.contains("clusters")) {
    const json& c = doc["clusters"];
    if (!c.is_array() || c.empty()) throw ConfigError("clusters", "expected a nonempty array of electron lists");
    cfg.clusters.clear();
    for (std::size_t i = 0; i < c.size(); ++i) {
      const std::string path = "clusters[" + std::to_string(i) + "]";
      if (!c[i].is_array() || c[i].empty()) throw ConfigError(path, "expected a nonempty array");
      std::set<int> members;
      for (std::size_t k = 0; k < c[i].size(); ++k) {
        const auto e = get_unsigned(c[i][k], path + "[" + std::to_string(k) + "]");
        if (e < 1 || e > static_cast<std::uint64_t>(n)) {
          throw ConfigError(path + "[" + std::to_string(k) + "]", "electron index out of range");
        }
        if (!members.insert(static_cast<int>(e)).second) throw ConfigError(path, "repeated electron");
      }
      cfg.clusters.emplace_back(members.begin(), members.end());
    }
  }

  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) throw ConfigError("output_dir", "expected a string");
    cfg.output_dir = doc["output_dir"].get<std::string>();
  }
  if (doc.contains("suite")) {
    if (!doc["suite"].is_string()) throw ConfigError("suite", "expected a string");
    cfg.suite = doc["suite"].get<std::string>();
  }
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), cfg.suite) == names.end()) throw ConfigError("suite", "unknown suite");
  return cfg;
}

RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("(file)", "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("(file)", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc, seed_override);
}

nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  nlohmann::ordered_json m;
  m["kind"] = cfg.model.kind;
  if (cfg.model.kind == "correlated_pair") {
    m["a"] = cfg.model.a;
    m["lambda"] = cfg.model.lambda;
  } else {
    m["exponents"] = cfg.model.exponents;
  }
  if (cfg.model.energy) m["E"] = *cfg.model.energy;
  j["model"] = m;
  nlohmann::ordered_json p;
  p["kind"] = "molecule";
  nlohmann::ordered_json nuclei = nlohmann::ordered_json::array();
  for (const auto& nuc : cfg.potential.nuclei) {
    nuclei.push_back({{"position", nuc.position}, {"charge", nuc.charge}, {"interaction", interaction_json(nuc.interaction)}});
  }
  p["nuclei"] = nuclei;
  p["electron_interaction"] = interaction_json(cfg.potential.electron_interaction);
  p["include_repulsion"] = cfg.potential.include_repulsion;
  p["energy_shift"] = cfg.potential.energy_shift;
  j["potential"] = p;
  j["epsilon"] = cfg.epsilon;
  j["points"] = cfg.points;
  j["alpha_max"] = cfg.alpha_max;
  j["seed"] = cfg.seed;
  j["samples"] = {{"monte_carlo", cfg.samples.monte_carlo}, {"support", cfg.samples.support},
                  {"potential", cfg.samples.potential},     {"cluster", cfg.samples.cluster},
                  {"qmc_points", cfg.samples.qmc_points},   {"partition", cfg.samples.partition}};
  j["clusters"] = cfg.clusters;
  j["output_dir"] = cfg.output_dir;
  j["suite"] = cfg.suite;
  return j;
}

}  // namespace densan
