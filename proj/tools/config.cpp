#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "poisfock/dsl.hpp"

namespace poisfock::cli {

namespace {

using json = nlohmann::json;

const std::vector<std::string> kKnownKeys = {"intensity", "functionals", "functional", "n_max",   "k",
                                             "tail_epsilon", "quadrature_nodes", "seed", "n_samples",
                                             "marked", "outputs", "verify"};

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(field, "expected a finite number");
  return v;
}

long long integer(const json& j, const std::string& field, long long lo, long long hi) {
  if (!j.is_number_integer()) throw ConfigError(field, "expected an integer");
  const long long v = j.get<long long>();
  if (v < lo || v > hi) throw ConfigError(field, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

FunctionalSpec parse_spec(const json& j, const std::string& field, std::size_t sites) {
  FunctionalSpec spec;
  if (j.is_string()) {
    spec.expr = j.get<std::string>();
    return spec;
  }
  if (!j.is_object()) throw ConfigError(field, "expected a DSL string or an object with \"expr\"");
  if (!j.contains("expr") || !j["expr"].is_string()) throw ConfigError(field + ".expr", "missing DSL expression");
  spec.expr = j["expr"].get<std::string>();
  if (j.contains("envelope")) {
    const json& e = j["envelope"];
    const std::string ef = field + ".envelope";
    if (!e.is_object() || !e.contains("c") || !e.contains("p")) throw ConfigError(ef, "expected {\"c\": ..., \"p\": ...}");
    const double c = number(e["c"], ef + ".c");
    const double p = number(e["p"], ef + ".p");
    if (c < 0.0) throw ConfigError(ef + ".c", "must be nonnegative");
    if (p < 0.0) throw ConfigError(ef + ".p", "must be nonnegative");
    spec.envelope = Envelope{c, p};
  }
  if (j.contains("monotone")) {
    const json& m = j["monotone"];
    const std::string mf = field + ".monotone.increasing";
    if (!m.is_object() || !m.contains("increasing") || !m["increasing"].is_array()) {
      throw ConfigError(mf, "expected a list of 1-based sites");
    }
    MonotoneSites ms{std::vector<bool>(sites, false)};
    for (std::size_t i = 0; i < m["increasing"].size(); ++i) {
      const auto site = integer(m["increasing"][i], mf + "[" + std::to_string(i) + "]", 1,
                                static_cast<long long>(sites));
      ms.increasing[static_cast<std::size_t>(site - 1)] = true;
    }
    spec.monotone = ms;
  }
  return spec;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("$", "expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end()) {
      throw ConfigError(key, "unknown field");
    }
  }
  ExperimentConfig c;

  if (!j.contains("intensity")) throw ConfigError("intensity", "missing");
  const json& in = j["intensity"];
  if (!in.is_array() || in.empty() || in.size() > 8) throw ConfigError("intensity", "expected 1 to 8 positive reals");
  for (std::size_t i = 0; i < in.size(); ++i) {
    const std::string f = "intensity[" + std::to_string(i) + "]";
    const double v = number(in[i], f);
    if (!(v > 0.0) || v > 1e3) throw ConfigError(f, "must lie in (0, 1000]");
    c.intensity.push_back(v);
  }
  const std::size_t sites = c.intensity.size();

  if (!j.contains("functionals") || !j["functionals"].is_object() || j["functionals"].empty()) {
    throw ConfigError("functionals", "expected a non-empty map of named DSL functionals");
  }
  for (const auto& [name, value] : j["functionals"].items()) {
    const std::string field = "functionals." + name;
    FunctionalSpec spec = parse_spec(value, field, sites);
    try {
      (void)dsl::parse(spec.expr, sites);
    } catch (const ParseError& e) {
      throw ConfigError(field + ".expr", e.what());
    }
    c.functionals.emplace(name, std::move(spec));
  }

  if (j.contains("functional")) {
    if (!j["functional"].is_string()) throw ConfigError("functional", "expected a functional name");
    c.functional = j["functional"].get<std::string>();
  } else if (c.functionals.size() == 1) {
    c.functional = c.functionals.begin()->first;
  } else {
    throw ConfigError("functional", "missing; several functionals are defined");
  }
  if (!c.functionals.contains(c.functional)) {
    throw ConfigError("functional", "no functional named \"" + c.functional + "\"");
  }

  if (j.contains("n_max")) c.n_max = static_cast<int>(integer(j["n_max"], "n_max", 1, 12));
  if (j.contains("k")) c.k = static_cast<int>(integer(j["k"], "k", 1, 6));
  if (j.contains("tail_epsilon")) {
    c.tail_epsilon = number(j["tail_epsilon"], "tail_epsilon");
    if (!(c.tail_epsilon > 0.0 && c.tail_epsilon <= 1e-3)) throw ConfigError("tail_epsilon", "must lie in (0, 1e-3]");
  }
  if (j.contains("quadrature_nodes")) {
    c.quadrature_nodes = static_cast<int>(integer(j["quadrature_nodes"], "quadrature_nodes", 1, 256));
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("seed", "expected a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("n_samples")) c.n_samples = static_cast<std::size_t>(integer(j["n_samples"], "n_samples", 1, 100000000));
  if (j.contains("marked")) {
    if (!j["marked"].is_boolean()) throw ConfigError("marked", "expected true or false");
    c.marked = j["marked"].get<bool>();
  }
  if (j.contains("outputs")) {
    if (!j["outputs"].is_string()) throw ConfigError("outputs", "expected a directory path");
    c.outputs = j["outputs"].get<std::string>();
  }
  if (j.contains("verify")) {
    const json& v = j["verify"];
    if (!v.is_object()) throw ConfigError("verify", "expected an object");
    if (v.contains("z_threshold")) {
      c.verify.z_threshold = number(v["z_threshold"], "verify.z_threshold");
      if (c.verify.z_threshold < 0.0) throw ConfigError("verify.z_threshold", "must be nonnegative");
    }
    if (v.contains("exact_tolerance")) {
      c.verify.exact_tolerance = number(v["exact_tolerance"], "verify.exact_tolerance");
      if (c.verify.exact_tolerance < 0.0) throw ConfigError("verify.exact_tolerance", "must be nonnegative");
    }
    if (v.contains("quadrature_tolerance")) {
      c.verify.quadrature_tolerance = number(v["quadrature_tolerance"], "verify.quadrature_tolerance");
      if (c.verify.quadrature_tolerance < 0.0) throw ConfigError("verify.quadrature_tolerance", "must be nonnegative");
    }
  }
  return c;
}

TruncationPolicy ExperimentConfig::policy() const {
  TruncationPolicy p;
  p.tail_epsilon = tail_epsilon;
  return p;
}

Functional ExperimentConfig::build(const std::string& name) const {
  const auto it = functionals.find(name);
  if (it == functionals.end()) throw ConfigError("functional", "no functional named \"" + name + "\"");
  const FunctionalSpec& spec = it->second;
  Functional f = parse_functional(spec.expr, intensity.size());
  if (spec.envelope) f = f.with_envelope(spec.envelope);
  if (spec.monotone) f = f.with_monotone_sites(spec.monotone);
  return f.with_label(name);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("$", std::string("invalid JSON: ") + e.what());
  }
  return ExperimentConfig::from_json(j);
}

}  // namespace poisfock::cli
