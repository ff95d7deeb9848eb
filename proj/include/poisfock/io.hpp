#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "poisfock/bounds.hpp"
#include "poisfock/chaos.hpp"

namespace poisfock {

/// Reals are written with 17 significant digits so that they round-trip.
std::string format_real(double x);

/// {"n_max", "mean", "mean_error", "terms": [{"index", "order", "value", "error"}], "variance", ...}
nlohmann::ordered_json to_json(const ChaosCoefficients& coeffs);

/// order,m1..mk,value,error; the first row is the mean (order 0), then graded-lex order.
void write_coefficients_csv(const ChaosCoefficients& coeffs, std::ostream& out);

struct BracketRow {
  std::string method;
  VarianceBracket bracket;
};

/// method,k,lower,variance,upper,tolerance,lower_tight,upper_tight
void write_brackets_csv(const std::vector<BracketRow>& rows, std::ostream& out);

}  // namespace poisfock
