#include "commands.hpp"

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>

#include "poisfock/bounds.hpp"
#include "poisfock/chaos.hpp"
#include "poisfock/dsl.hpp"
#include "poisfock/io.hpp"
#include "poisfock/lattice.hpp"
#include "poisfock/mc.hpp"
#include "poisfock/ordered_cov.hpp"
#include "poisfock/wiener_ito.hpp"

namespace poisfock::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

bool VerifyReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const SuiteEntry& e) { return e.pass; });
}

ojson VerifyReport::to_json(const ExperimentConfig& config, const std::string& generated_at) const {
  ojson j;
  j["generated_at"] = generated_at;
  j["seed"] = config.seed;
  j["n_samples"] = config.n_samples;
  j["intensity"] = config.intensity;
  j["functional"] = config.functional;
  j["z_threshold"] = config.verify.z_threshold;
  j["exact_tolerance"] = config.verify.exact_tolerance;
  j["note"] =
      "mc entries pass when |z| <= z_threshold; at z_threshold 4 each has a false-alarm probability of about "
      "6.3e-5, under 0.2% for the whole suite";
  auto list = ojson::array();
  std::size_t failed = 0;
  for (const auto& e : entries) {
    ojson row;
    row["identity"] = e.identity;
    row["method"] = e.method;
    row["discrepancy"] = e.discrepancy;
    row["tolerance"] = e.tolerance;
    row["pass"] = e.pass;
    row["detail"] = e.detail;
    list.push_back(std::move(row));
    if (!e.pass) ++failed;
  }
  j["entries"] = std::move(list);
  j["passed"] = entries.size() - failed;
  j["failed"] = failed;
  j["all_pass"] = failed == 0;
  return j;
}

namespace {

int total_count(std::span<const int> n) {
  int s = 0;
  for (int v : n) s += v;
  return s;
}

std::vector<int> clamp_caps(std::vector<int> caps, int limit) {
  for (int& c : caps) c = std::min(c, limit);
  return caps;
}

// Deterministic per-factor weights for the isometry integrands.
SumProductFunction isometry_integrand(std::size_t k, int order, int shift) {
  SumProductTerm smooth;
  SumProductTerm spike;
  smooth.coefficient = 1.0;
  spike.coefficient = -0.5;
  for (int j = 0; j < order; ++j) {
    std::vector<double> a(k), b(k, 0.0);
    for (std::size_t y = 0; y < k; ++y) {
      a[y] = 1.0 + 0.5 * static_cast<double>((y + j + shift) % 3) - 0.25 * static_cast<double>(y % 2);
    }
    b[static_cast<std::size_t>(j + shift) % k] = 1.0;
    smooth.factors.push_back(std::move(a));
    spike.factors.push_back(std::move(b));
  }
  return SumProductFunction(k, order, {smooth, spike});
}

class Suite {
public:
  explicit Suite(const ExperimentConfig& c) : c_(c), lambda_(c.lambda()), policy_(c.policy()) {}

  VerifyReport run() {
    mecke();
    laplace();
    isometry();
    charlier_identity();
    sample_variance();
    chaos_identities();
    brackets();
    derivative();
    skorohod();
    duality();
    covariance();
    fkg();
    return std::move(report_);
  }

private:
  std::uint64_t next_seed() { return c_.seed + 0x9e3779b97f4a7c15ULL * ++stream_; }

  void mc(std::string name, double z, ojson detail) {
    SuiteEntry e{std::move(name), "mc", std::abs(z), c_.verify.z_threshold, std::abs(z) <= c_.verify.z_threshold,
                 std::move(detail)};
    report_.entries.push_back(std::move(e));
  }

  void exact(std::string name, double discrepancy, double tolerance, ojson detail = ojson::object()) {
    SuiteEntry e{std::move(name), "exact", discrepancy, tolerance, discrepancy <= tolerance, std::move(detail)};
    report_.entries.push_back(std::move(e));
  }

  double tol(double scale, double bounds = 0.0) const {
    return c_.verify.exact_tolerance * std::max(1.0, std::abs(scale)) + bounds;
  }

  static ojson identity_detail(const IdentityCheck& r) {
    return ojson{{"lhs", r.lhs.mean}, {"lhs_se", r.lhs.std_error}, {"rhs", r.rhs.mean}, {"rhs_se", r.rhs.std_error},
                 {"paired_se", r.difference.std_error}, {"z", r.z}};
  }

  void mecke() {
    const std::size_t k = lambda_.sites();
    const SiteFunctional h(
        k, [](std::span<const int> n, std::size_t y) { return total_count(n) * (1.0 + static_cast<double>(y)); },
        "(1+y) mu(Y)");
    const auto r1 = mecke_check(h, lambda_, next_seed(), c_.n_samples);
    mc("mecke", r1.z, identity_detail(r1));

    const TupleFunctional h2 = [](std::span<const int> n, std::span<const std::size_t> y) {
      return 1.0 + n[y[0]] + (y[0] == y[1] ? 0.5 : 0.0);
    };
    const auto r2 = mecke_multivariate_check(h2, 2, lambda_, next_seed(), c_.n_samples);
    mc("mecke_multivariate_m2", r2.z, identity_detail(r2));

    const TupleFunctional h3 = [](std::span<const int>, std::span<const std::size_t>) { return 1.0; };
    const auto r3 = mecke_multivariate_check(h3, 3, lambda_, next_seed(), c_.n_samples);
    ojson d3 = identity_detail(r3);
    d3["exact"] = std::pow(lambda_.total(), 3);
    mc("mecke_multivariate_m3", r3.z, std::move(d3));
  }

  void laplace() {
    const std::vector<double> v(lambda_.sites(), 1.0);
    const auto r = laplace_check(v, lambda_, next_seed(), c_.n_samples);
    mc("laplace", r.z, ojson{{"estimate", r.mc.mean}, {"std_error", r.mc.std_error}, {"exact", r.exact}});
  }

  void isometry() {
    const std::size_t k = lambda_.sites();
    for (int m = 1; m <= 3; ++m) {
      for (int n = 1; n <= 3; ++n) {
        const auto g = isometry_integrand(k, m, 0);
        const auto h = isometry_integrand(k, n, 1);
        const auto r = isometry_check(g, h, lambda_, next_seed(), c_.n_samples);
        mc(fmt::format("isometry_m{}_n{}", m, n), r.z,
           ojson{{"estimate", r.estimate.mean}, {"std_error", r.estimate.std_error}, {"exact", r.exact}});
      }
    }
  }

  void charlier_identity() {
    const std::size_t k = lambda_.sites();
    std::vector<std::vector<std::size_t>> blocks{{0}};
    if (k > 1) {
      blocks.emplace_back();
      for (std::size_t y = 1; y < k; ++y) blocks.back().push_back(y);
    }
    std::vector<std::vector<int>> profiles;
    for (int a = 1; a <= 4; ++a) profiles.push_back(k > 1 ? std::vector<int>{a, 0} : std::vector<int>{a});
    if (k > 1) {
      for (int a = 0; a <= 4; ++a) {
        for (int b = 1; a + b <= 4; ++b) profiles.push_back({a, b});
      }
    }
    const SampleBatch batch = sample_poisson(lambda_, next_seed(), 10000);
    double worst = 0.0;
    double worst_scale = 1.0;
    for (const auto& prof : profiles) {
      const auto g = SumProductFunction::block_tensor(k, blocks, prof);
      std::vector<double> block_mass(blocks.size(), 0.0);
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (std::size_t y : blocks[b]) block_mass[b] += lambda_[y];
      }
      for (const Draw& d : batch.draws) {
        const double pathwise = wiener_ito_pathwise(g, d.path, lambda_);
        double closed = 1.0;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
          int count = 0;
          for (std::size_t y : blocks[b]) count += d.path.counts()[y];
          closed *= scaled_charlier(prof[b], block_mass[b], count);
        }
        const double scale = std::max(1.0, std::abs(closed));
        if (std::abs(pathwise - closed) / scale > worst / worst_scale) {
          worst = std::abs(pathwise - closed);
          worst_scale = scale;
        }
      }
    }
    exact("charlier_identity", worst / worst_scale, c_.verify.exact_tolerance,
          ojson{{"paths", batch.draws.size()}, {"profiles", profiles.size()}});
  }

  void sample_variance() {
    const Functional f = c_.selected();
    const auto mean = truncated_expectation(lambda_, f, policy_);
    const auto var = direct_variance(f, lambda_, policy_);
    const SampleBatch batch = sample_poisson(lambda_, next_seed(), c_.n_samples);
    const auto values = evaluate(batch, [&](const Draw& d) {
      const double x = f(d.path.counts().view()) - mean.value;
      return x * x;
    });
    const McEstimate e = estimate(values);
    mc("sample_variance", z_score(e.mean, e.std_error, var.value),
       ojson{{"estimate", e.mean}, {"std_error", e.std_error}, {"exact", var.value}});
  }

  void chaos_identities() {
    const Functional f = c_.selected();
    const ChaosCoefficients coeffs = chaos_coefficients(f, lambda_, c_.n_max, policy_);
    const bool truncated = top_order_active(coeffs);
    const FockCovariance fock = fock_covariance(coeffs, coeffs, lambda_);
    // With a finite expansion the Fock sum equals the variance; otherwise it is a lower bound.
    const double gap = truncated ? std::max(0.0, -coeffs.residual) : std::abs(coeffs.residual);
    exact("fock_isometry", gap, tol(coeffs.variance, coeffs.residual_tolerance),
          ojson{{"fock_sum", fock.total}, {"variance", coeffs.variance}, {"truncated", truncated}});

    double worst = 0.0;
    double bound = 0.0;
    for (const auto& t : coeffs.terms) {
      const auto r = coefficient_by_orthogonality(f, lambda_, t.index, policy_);
      const double d = std::abs(r.value - t.value) / std::max(1.0, std::abs(t.value));
      if (d > worst) {
        worst = d;
        bound = (r.error_bound + t.error) / std::max(1.0, std::abs(t.value));
      }
    }
    exact("coefficients_by_orthogonality", worst, c_.verify.exact_tolerance + bound,
          ojson{{"indices", coeffs.terms.size()}});

    if (!truncated) {
      double rec = 0.0;
      Box(clamp_caps(policy_.caps_for(lambda_), 8)).for_each([&](std::span<const int> n) {
        const double v = f(n);
        rec = std::max(rec, std::abs(reconstruct(coeffs, lambda_, n) - v) / std::max(1.0, std::abs(v)));
      });
      exact("reconstruction", rec, c_.verify.exact_tolerance, ojson{{"n_max", c_.n_max}});
    }
  }

  void brackets() {
    const Functional f = c_.selected();
    for (int order = 1; order <= c_.k; ++order) {
      for (const auto& [name, b] : {std::pair{"alternating", alternating_bracket(f, lambda_, order, policy_)},
                                    std::pair{"truncated", truncated_bounds(f, lambda_, order, policy_)}}) {
        const double violation = std::max({0.0, b.lower - b.variance, b.variance - b.upper});
        exact(fmt::format("bracket_{}_k{}", name, order), violation, b.tolerance + tol(b.variance) - tol(0.0),
              ojson{{"lower", b.lower}, {"variance", b.variance}, {"upper", b.upper}});
      }
    }
  }

  void derivative() {
    const std::size_t k = lambda_.sites();
    std::vector<std::size_t> all(k);
    for (std::size_t y = 0; y < k; ++y) all[y] = y;
    const auto caps = clamp_caps(policy_.caps_for(lambda_), 6);
    double worst = 0.0;
    for (int degree = 1; degree <= 3; ++degree) {
      const Functional f = catalog::count_power(k, all, degree);
      const ChaosCoefficients coeffs = chaos_coefficients(f, lambda_, degree + 1, policy_);
      Box(caps).for_each([&](std::span<const int> n) {
        const PathConfiguration mu(Counts(std::vector<int>(n.begin(), n.end())));
        for (std::size_t y = 0; y < k; ++y) {
          const double direct = difference(f, y)(n);
          const double chaos = derivative_operator(coeffs, lambda_, mu, y).value;
          worst = std::max(worst, std::abs(chaos - direct) / std::max(1.0, std::abs(direct)));
        }
      });
    }
    exact("derivative_D_equals_Dprime", worst, c_.verify.exact_tolerance, ojson{{"degrees", 3}});
  }

  std::vector<SiteFunctional> skorohod_integrands() const {
    const std::size_t k = lambda_.sites();
    SiteFunctional h1(
        k, [](std::span<const int> n, std::size_t y) { return y == 0 ? static_cast<double>(n[0]) : 0.0; },
        "1_B(y) mu(B)");
    SiteFunctional h2(
        k, [](std::span<const int> n, std::size_t y) { return (1.0 + static_cast<double>(y)) * total_count(n); },
        "(1+y) mu(Y)");
    return {h1.with_envelope(Envelope{1.0, 1.0}), h2.with_envelope(Envelope{static_cast<double>(k), 1.0})};
  }

  void skorohod() {
    const auto caps = clamp_caps(policy_.caps_for(lambda_), 6);
    double worst = 0.0;
    bool truncated = false;
    for (const auto& h : skorohod_integrands()) {
      const SkorohodKernel kernel = skorohod_kernel(h, lambda_, 2, policy_);
      truncated = truncated || kernel.truncated;
      Box(caps).for_each([&](std::span<const int> n) {
        const PathConfiguration mu(Counts(std::vector<int>(n.begin(), n.end())));
        const double a = skorohod_chaos(kernel, lambda_, mu).value;
        const double b = skorohod_pathwise(h, mu, lambda_);
        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
      });
    }
    exact("skorohod_delta_equals_deltaprime", worst, c_.verify.exact_tolerance, ojson{{"truncated", truncated}});
  }

  void duality() {
    const Functional f = c_.selected();
    const SiteFunctional h = skorohod_integrands().front();
    const DualityCheck r = duality_check(f, h, lambda_, 2, policy_);
    const double d = std::max(std::abs(r.lhs.value - r.rhs_chaos.value), std::abs(r.lhs.value - r.rhs_pathwise.value));
    const double bound = r.lhs.error_bound + std::max(r.rhs_chaos.error_bound, r.rhs_pathwise.error_bound);
    exact("duality", d, tol(r.lhs.value, bound),
          ojson{{"lhs", r.lhs.value}, {"rhs_chaos", r.rhs_chaos.value}, {"rhs_pathwise", r.rhs_pathwise.value},
                {"truncated", r.truncated}});
  }

  void covariance() {
    const Functional f = c_.selected();
    const auto kernel = TimeMarkedKernel::gauss_legendre(c_.quadrature_nodes, policy_);
    std::vector<std::size_t> all(lambda_.sites());
    for (std::size_t y = 0; y < all.size(); ++y) all[y] = y;
    const Functional linear = catalog::linear_count(lambda_.sites(), all);
    for (const auto& [name, g] : {std::pair{"covariance_identity_self", f}, std::pair{"covariance_identity_linear", linear}}) {
      const CovarianceIdentity id = covariance_identity(f, g, lambda_, kernel);
      const ExpectationResult direct = direct_covariance(f, g, lambda_, policy_);
      const double d = std::abs(id.value - direct.value);
      exact(name, d,
            c_.verify.quadrature_tolerance * std::max(1.0, std::abs(direct.value)) + direct.error_bound +
                id.error_estimate,
            ojson{{"identity", id.value}, {"direct", direct.value}, {"nodes", kernel.nodes.size()}});
    }
  }

  void fkg() {
    std::vector<Functional> monotone;
    for (const auto& [name, spec] : c_.functionals) {
      if (spec.monotone) monotone.push_back(c_.build(name));
    }
    std::vector<std::size_t> all(lambda_.sites());
    for (std::size_t y = 0; y < all.size(); ++y) all[y] = y;
    monotone.push_back(catalog::linear_count(lambda_.sites(), all));
    monotone.push_back(catalog::threshold_indicator(lambda_.sites(), all, 2));

    for (std::size_t a = 0; a < monotone.size(); ++a) {
      for (std::size_t b = a; b < monotone.size(); ++b) {
        if (*monotone[a].monotone_sites() != *monotone[b].monotone_sites()) continue;
        const std::string name = fmt::format("fkg[{}|{}]", monotone[a].label(), monotone[b].label());
        try {
          const FkgResult r = fkg_check(monotone[a], monotone[b], lambda_, policy_);
          exact(name, std::max(0.0, -r.covariance), 1e-10 + r.error_bound, ojson{{"covariance", r.covariance}});
        } catch (const MonotonicityViolation& e) {
          exact(name, 1.0, 0.0, ojson{{"violation", e.what()}});
        }
      }
    }

    // a declared-increasing functional that is not monotone must be rejected with a witness
    Functional bump = parse_functional("ind(n1 == 1)", lambda_.sites())
                          .with_monotone_sites(MonotoneSites{std::vector<bool>(lambda_.sites(), true)});
    bool rejected = false;
    ojson detail;
    try {
      (void)fkg_check(bump, bump, lambda_, policy_);
    } catch (const MonotonicityViolation& e) {
      rejected = true;
      detail["witness"] = e.witness();
      detail["site"] = e.site() + 1;
    }
    exact("fkg_rejects_nonmonotone", rejected ? 0.0 : 1.0, 0.0, std::move(detail));
  }

  const ExperimentConfig& c_;
  FiniteIntensity lambda_;
  TruncationPolicy policy_;
  VerifyReport report_;
  std::uint64_t stream_ = 0;
};

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw Error("cannot write " + (dir / name).string());
  return out;
}

}  // namespace

VerifyReport run_verify_suite(const ExperimentConfig& config) { return Suite(config).run(); }

int cmd_coeffs(const ExperimentConfig& config, const fs::path& out_dir, bool quiet, std::ostream& log) {
  const Functional f = config.selected();
  const ChaosCoefficients coeffs = chaos_coefficients(f, config.lambda(), config.n_max, config.policy());
  ojson j;
  j["functional"] = config.functional;
  j["expr"] = config.functionals.at(config.functional).expr;
  j["intensity"] = config.intensity;
  j["coefficients"] = to_json(coeffs);
  {
    auto out = open_output(out_dir, "coeffs.json");
    out << j.dump(2) << '\n';
  }
  {
    auto out = open_output(out_dir, "coeffs.csv");
    write_coefficients_csv(coeffs, out);
  }
  if (!quiet) {
    log << fmt::format("{}: mean {} variance {} residual {} ({} coefficients)\n", config.functional,
                       format_real(coeffs.mean), format_real(coeffs.variance), format_real(coeffs.residual),
                       coeffs.terms.size());
  }
  return kOk;
}

int cmd_variance(const ExperimentConfig& config, const fs::path& out_dir, bool quiet, std::ostream& log) {
  const Functional f = config.selected();
  const FiniteIntensity lambda = config.lambda();
  std::vector<BracketRow> rows;
  for (int order = 1; order <= config.k; ++order) {
    rows.push_back({"alternating", alternating_bracket(f, lambda, order, config.policy())});
  }
  for (int order = 1; order <= config.k; ++order) {
    rows.push_back({"truncated", truncated_bounds(f, lambda, order, config.policy())});
  }
  auto out = open_output(out_dir, "brackets.csv");
  write_brackets_csv(rows, out);
  if (!quiet) log << fmt::format("{}: variance {}\n", config.functional, format_real(rows.front().bracket.variance));
  return kOk;
}

int cmd_verify(const ExperimentConfig& config, const fs::path& out_dir, bool quiet, std::ostream& log) {
  const VerifyReport report = run_verify_suite(config);
  const auto now = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
  const std::string stamp = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
  {
    auto out = open_output(out_dir, "verify.json");
    out << report.to_json(config, stamp).dump(2) << '\n';
  }
  if (!quiet) {
    for (const auto& e : report.entries) {
      log << fmt::format("{:<4} {:<40} {:<5} {:.3e} <= {:.3e}\n", e.pass ? "ok" : "FAIL", e.identity, e.method,
                         e.discrepancy, e.tolerance);
    }
  }
  return report.all_pass() ? kOk : kVerificationFailure;
}

int cmd_sample(const ExperimentConfig& config, const fs::path& out_dir, bool quiet, std::ostream& log) {
  const SampleBatch batch = sample_poisson(config.lambda(), config.seed, config.n_samples, config.marked);
  auto out = open_output(out_dir, "samples.jsonl");
  write_jsonl(batch, out);
  if (!quiet) log << fmt::format("wrote {} configurations\n", batch.draws.size());
  return kOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Chaos expansions and variance bounds for Poisson functionals on a finite space", "poisfock"};
  app.fallthrough();
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool quiet = false;
  app.add_option("--config", config_path, "Experiment config (JSON)")->required();
  auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides \"outputs\")");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides \"seed\")");
  app.add_flag("--quiet", quiet, "Suppress the summary on stdout");
  auto* coeffs = app.add_subcommand("coeffs", "Write chaos coefficients to coeffs.json and coeffs.csv");
  auto* variance = app.add_subcommand("variance", "Write variance brackets to brackets.csv");
  auto* verify = app.add_subcommand("verify", "Run the identity suite and write verify.json");
  auto* sample = app.add_subcommand("sample", "Write sampled configurations to samples.jsonl");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kConfigError;
  }

  try {
    ExperimentConfig config = load_config(config_path);
    if (*seed_opt) config.seed = seed;
    const fs::path dir = *out_opt ? fs::path(out_dir) : config.outputs;
    if (coeffs->parsed()) return cmd_coeffs(config, dir, quiet, out);
    if (variance->parsed()) return cmd_variance(config, dir, quiet, out);
    if (verify->parsed()) {
      const int code = cmd_verify(config, dir, quiet, out);
      if (code != kOk) err << "verification failed; see " << (dir / "verify.json").string() << '\n';
      return code;
    }
    if (sample->parsed()) return cmd_sample(config, dir, quiet, out);
    return kConfigError;
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace poisfock::cli
