#include "poisfock/io.hpp"

#include <fmt/format.h>

#include <ostream>

namespace poisfock {

std::string format_real(double x) { return fmt::format("{:.17g}", x); }

nlohmann::ordered_json to_json(const ChaosCoefficients& coeffs) {
  nlohmann::ordered_json j;
  j["sites"] = coeffs.sites;
  j["n_max"] = coeffs.n_max;
  j["mean"] = coeffs.mean;
  j["mean_error"] = coeffs.mean_error;
  auto terms = nlohmann::ordered_json::array();
  for (const auto& t : coeffs.terms) {
    nlohmann::ordered_json row;
    row["index"] = t.index.values();
    row["order"] = t.index.order();
    row["value"] = t.value;
    row["error"] = t.error;
    terms.push_back(std::move(row));
  }
  j["terms"] = std::move(terms);
  j["variance"] = coeffs.variance;
  j["variance_error"] = coeffs.variance_error;
  j["residual"] = coeffs.residual;
  j["residual_tolerance"] = coeffs.residual_tolerance;
  j["heuristic"] = coeffs.heuristic;
  return j;
}

void write_coefficients_csv(const ChaosCoefficients& coeffs, std::ostream& out) {
  out << "order";
  for (std::size_t i = 0; i < coeffs.sites; ++i) out << ",m" << i + 1;
  out << ",value,error\n";
  out << 0;
  for (std::size_t i = 0; i < coeffs.sites; ++i) out << ",0";
  out << ',' << format_real(coeffs.mean) << ',' << format_real(coeffs.mean_error) << '\n';
  for (const auto& t : coeffs.terms) {
    out << t.index.order();
    for (int m : t.index.view()) out << ',' << m;
    out << ',' << format_real(t.value) << ',' << format_real(t.error) << '\n';
  }
}

void write_brackets_csv(const std::vector<BracketRow>& rows, std::ostream& out) {
  out << "method,k,lower,variance,upper,tolerance,lower_tight,upper_tight\n";
  for (const auto& r : rows) {
    const auto& b = r.bracket;
    out << fmt::format("{},{},{},{},{},{},{},{}\n", r.method, b.order, format_real(b.lower), format_real(b.variance),
                       format_real(b.upper), format_real(b.tolerance), b.lower_tight ? "true" : "false",
                       b.upper_tight ? "true" : "false");
  }
}

}  // namespace poisfock
