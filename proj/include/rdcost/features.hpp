#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdcost/matrix.hpp"
#include "rdcost/net_demand.hpp"
#include "rdcost/splits.hpp"

namespace rdcost {

enum class PriceColumn : std::uint8_t { DaPrice, GasPrice };

std::string_view price_column_name(PriceColumn p);

/// Which panel columns enter the regressor matrix and how.
struct FeatureSpec {
  PriceColumn price = PriceColumn::DaPrice;
  bool include_zonal_nd = true;
  bool include_zonal_ndfc = true;
  int lags_system_nd = 0;
  int leads_system_ndfc = 0;
  /// Applies to continuous columns only; indicators always enter linearly.
  int poly_degree = 1;
  bool workday = true;
  bool winter = true;

  /// Price, 7 zonal net demands, 7 zonal forecasts and both indicators.
  static FeatureSpec preferred() { return {}; }
  /// Preferred plus 24 lags of system net demand and 24 leads of its forecast.
  static FeatureSpec dynamic() {
    FeatureSpec s;
    s.lags_system_nd = 24;
    s.leads_system_ndfc = 24;
    return s;
  }
  /// Dynamic model with the gas price in place of the day-ahead price.
  static FeatureSpec counterfactual() {
    FeatureSpec s = dynamic();
    s.price = PriceColumn::GasPrice;
    return s;
  }

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

/// Per-column standardization fitted on training rows only. Columns with
/// zero training variance keep std = 1 and are flagged.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> std;
  std::vector<bool> constant;

  std::size_t size() const { return mean.size(); }
  void transform(Matrix& X) const;
  void inverse_transform(Matrix& X) const;
  double transform(std::size_t col, double v) const { return (v - mean[col]) / std[col]; }

  friend bool operator==(const Scaler&, const Scaler&) = default;
};

Scaler fit_scaler(const Matrix& X, std::span<const std::size_t> training_rows);

/// Exponent multiset of a monomial, as sorted column indices.
using Monomial = std::vector<std::size_t>;

/// All monomials of total degree 1..degree over `ncols` variables, graded
/// then lexicographic. The first `ncols` entries are the variables themselves.
std::vector<Monomial> polynomial_terms(std::size_t ncols, int degree);

std::vector<std::string> polynomial_names(std::span<const std::string> names, int degree);

/// Full multivariate expansion without the constant. degree must be 2 or 3.
Matrix expand_polynomial(const Matrix& continuous, int degree);

struct DroppedRow {
  Hour hour = 0;
  std::string reason;
};

struct LagLeadColumns {
  Matrix values;  // one row per kept panel row
  std::vector<std::string> names;
  std::vector<std::size_t> kept_rows;  // panel row indices
  std::vector<DroppedRow> dropped;
};

/// L^1..L^lags of nd_system and L^-1..L^-leads of nd_fc_system, built on
/// the full chronological panel. Rows without a complete window are dropped.
LagLeadColumns add_lags_leads(const NetDemandPanel& panel, int lags, int leads);

struct DesignMatrix {
  std::vector<Hour> hours;
  std::vector<Date> dates;
  std::vector<Fold> folds;
  Matrix X;  // standardized
  std::vector<double> y;  // EUR, not standardized
  std::vector<std::string> column_names;
  Scaler scaler;
  FeatureSpec spec;
  std::vector<DroppedRow> dropped;

  std::size_t rows() const { return X.rows(); }
  std::size_t cols() const { return X.cols(); }
  std::vector<std::size_t> rows_in(std::initializer_list<Fold> folds) const;
};

/// Builds the regressor matrix for `spec`. The scaler is fitted on the
/// plan's training rows unless `fixed_scaler` is supplied (used when a
/// trained model is applied to a modified panel).
DesignMatrix build_design(const NetDemandPanel& panel, const FeatureSpec& spec, const SplitPlan& split,
                          const Scaler* fixed_scaler = nullptr);

/// Column names the spec produces, in order.
std::vector<std::string> design_column_names(const FeatureSpec& spec);

void write_design_csv(const DesignMatrix& design, std::ostream& out);

nlohmann::json feature_spec_to_json(const FeatureSpec& spec);
FeatureSpec feature_spec_from_json(const nlohmann::json& j);
nlohmann::json scaler_to_json(const Scaler& s);
Scaler scaler_from_json(const nlohmann::json& j);

}  // namespace rdcost
