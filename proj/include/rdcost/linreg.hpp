#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdcost/features.hpp"
#include "rdcost/matrix.hpp"

namespace rdcost {

/// Least-squares fit with an intercept. Coefficients are per standardized
/// design column; dropped (collinear) columns carry a zero coefficient.
struct OlsModel {
  std::vector<std::string> column_names;
  std::vector<double> coefficients;
  double intercept = 0.0;
  std::vector<std::string> dropped_columns;
  double rss = 0.0;
  std::size_t rank = 0;
  FeatureSpec spec;
  Scaler scaler;

  double predict(std::span<const double> x) const;
  std::vector<double> predict(const Matrix& X) const;
  std::vector<double> predict(const Matrix& X, std::span<const std::size_t> rows) const;
};

/// Pivots below this fraction of the largest pivot mark a column as
/// collinear with those already retained.
inline constexpr double kCollinearityThreshold = 1e-10;

/// Fits on the listed rows via column-pivoted Householder QR of the centered
/// system (the intercept is recovered from the means).
OlsModel fit_ols(const Matrix& X, std::span<const double> y, std::span<const std::size_t> rows,
                 std::vector<std::string> column_names = {});

OlsModel fit_ols(const DesignMatrix& design, std::span<const std::size_t> rows);

void write_coefficients_csv(const OlsModel& model, std::ostream& out);

nlohmann::json ols_to_json(const OlsModel& m);
OlsModel ols_from_json(const nlohmann::json& j);

}  // namespace rdcost
