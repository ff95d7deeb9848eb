#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "poisfock/charlier.hpp"
#include "poisfock/errors.hpp"
#include "poisfock/functional.hpp"
#include "poisfock/intensity.hpp"

namespace poisfock::cli {

/// A configuration problem; `field` is the JSON path of the offending entry.
class ConfigError : public Error {
public:
  ConfigError(std::string field, const std::string& message)
      : Error("config error at " + field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

struct FunctionalSpec {
  std::string expr;
  std::optional<Envelope> envelope;
  std::optional<MonotoneSites> monotone;
};

struct VerifySettings {
  double z_threshold = 4.0;
  double exact_tolerance = 1e-8;
  double quadrature_tolerance = 1e-6;
};

struct ExperimentConfig {
  std::vector<double> intensity;
  std::map<std::string, FunctionalSpec> functionals;
  std::string functional;
  int n_max = 3;
  int k = 3;
  double tail_epsilon = 1e-16;
  int quadrature_nodes = 16;
  std::uint64_t seed = 20240601;
  std::size_t n_samples = 100000;
  bool marked = false;
  std::filesystem::path outputs = "out";
  VerifySettings verify;

  static ExperimentConfig from_json(const nlohmann::json& j);

  FiniteIntensity lambda() const { return FiniteIntensity(intensity); }
  TruncationPolicy policy() const;
  /// The functional named `name`, parsed over the configured sites with its declarations attached.
  Functional build(const std::string& name) const;
  /// The selected functional.
  Functional selected() const { return build(functional); }
};

/// Reads and validates a config file. Throws ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace poisfock::cli
