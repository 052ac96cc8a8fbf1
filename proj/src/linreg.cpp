#include "rdcost/linreg.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include <Eigen/Dense>

#include "rdcost/csv.hpp"
#include "rdcost/error.hpp"

namespace rdcost {
namespace {

constexpr const char* kModelFormat = "rdcost.ols/1";

}  // namespace

double OlsModel::predict(std::span<const double> x) const {
  if (x.size() != coefficients.size()) throw ShapeError("feature row width does not match the fitted columns");
  double s = intercept;
  for (std::size_t c = 0; c < x.size(); ++c) s += coefficients[c] * x[c];
  return s;
}

std::vector<double> OlsModel::predict(const Matrix& X, std::span<const std::size_t> rows) const {
  if (X.cols() != coefficients.size()) throw ShapeError("design width does not match the fitted columns");
  std::vector<double> out(rows.size());
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = predict(X.row(rows[static_cast<std::size_t>(i)]));
  return out;
}

std::vector<double> OlsModel::predict(const Matrix& X) const {
  std::vector<std::size_t> rows(X.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return predict(X, rows);
}

OlsModel fit_ols(const Matrix& X, std::span<const double> y, std::span<const std::size_t> rows,
                 std::vector<std::string> column_names) {
  const std::size_t n = rows.size();
  const std::size_t d = X.cols();
  if (y.size() != X.rows()) throw ShapeError("target length does not match the design");
  if (!column_names.empty() && column_names.size() != d) throw ShapeError("column names do not match the design");
  if (n <= d) {
    throw RangeError("OLS needs more rows (" + std::to_string(n) + ") than columns (" + std::to_string(d) + ")");
  }
  if (column_names.empty()) {
    for (std::size_t c = 0; c < d; ++c) column_names.push_back("x" + std::to_string(c));
  }

  Eigen::VectorXd xbar = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  double ybar = 0.0;
  for (std::size_t r : rows) {
    const auto row = X.row(r);
    for (std::size_t c = 0; c < d; ++c) xbar[static_cast<Eigen::Index>(c)] += row[c];
    ybar += y[r];
  }
  xbar /= static_cast<double>(n);
  ybar /= static_cast<double>(n);

  Eigen::MatrixXd A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Eigen::VectorXd b(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = X.row(rows[i]);
    for (std::size_t c = 0; c < d; ++c) {
      A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[c] - xbar[static_cast<Eigen::Index>(c)];
    }
    b[static_cast<Eigen::Index>(i)] = y[rows[i]] - ybar;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A.rows(), A.cols());
  qr.setThreshold(kCollinearityThreshold);
  qr.compute(A);
  const auto rank = static_cast<std::size_t>(qr.rank());

  OlsModel m;
  m.column_names = std::move(column_names);
  m.coefficients.assign(d, 0.0);
  m.rank = rank;

  if (rank == d) {
    const Eigen::VectorXd beta = qr.solve(b);
    for (std::size_t c = 0; c < d; ++c) m.coefficients[c] = beta[static_cast<Eigen::Index>(c)];
  } else if (rank > 0) {
    std::vector<std::size_t> kept(rank);
    const auto& perm = qr.colsPermutation().indices();
    for (std::size_t k = 0; k < rank; ++k) kept[k] = static_cast<std::size_t>(perm[static_cast<Eigen::Index>(k)]);
    std::sort(kept.begin(), kept.end());
    Eigen::MatrixXd Ak(A.rows(), static_cast<Eigen::Index>(rank));
    for (std::size_t k = 0; k < rank; ++k) Ak.col(static_cast<Eigen::Index>(k)) = A.col(static_cast<Eigen::Index>(kept[k]));
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr2(Ak.rows(), Ak.cols());
    qr2.setThreshold(kCollinearityThreshold);
    qr2.compute(Ak);
    if (static_cast<std::size_t>(qr2.rank()) != rank) throw NumericError("design is singular after dropping collinear columns");
    const Eigen::VectorXd beta = qr2.solve(b);
    for (std::size_t k = 0; k < rank; ++k) m.coefficients[kept[k]] = beta[static_cast<Eigen::Index>(k)];
    std::vector<bool> is_kept(d, false);
    for (std::size_t k : kept) is_kept[k] = true;
    for (std::size_t c = 0; c < d; ++c) {
      if (!is_kept[c]) m.dropped_columns.push_back(m.column_names[c]);
    }
  } else {
    m.dropped_columns = m.column_names;
  }

  m.intercept = ybar;
  for (std::size_t c = 0; c < d; ++c) m.intercept -= xbar[static_cast<Eigen::Index>(c)] * m.coefficients[c];

  for (std::size_t r : rows) {
    const double e = y[r] - m.predict(X.row(r));
    m.rss += e * e;
  }
  return m;
}

OlsModel fit_ols(const DesignMatrix& design, std::span<const std::size_t> rows) {
  OlsModel m = fit_ols(design.X, design.y, rows, design.column_names);
  m.spec = design.spec;
  m.scaler = design.scaler;
  return m;
}

void write_coefficients_csv(const OlsModel& model, std::ostream& out) {
  out << "name,estimate\n";
  out << "(intercept)," << csv::format_number(model.intercept) << '\n';
  for (std::size_t c = 0; c < model.coefficients.size(); ++c) {
    out << model.column_names[c] << ',' << csv::format_number(model.coefficients[c]) << '\n';
  }
}

nlohmann::json ols_to_json(const OlsModel& m) {
  return {{"format", kModelFormat},
          {"kind", "ols"},
          {"feature_spec", feature_spec_to_json(m.spec)},
          {"columns", m.column_names},
          {"scaler", scaler_to_json(m.scaler)},
          {"intercept", m.intercept},
          {"coefficients", m.coefficients},
          {"dropped_columns", m.dropped_columns},
          {"rss", m.rss},
          {"rank", m.rank}};
}

OlsModel ols_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != kModelFormat) throw SpecError("not an rdcost OLS model document");
  OlsModel m;
  m.spec = feature_spec_from_json(j.at("feature_spec"));
  m.column_names = j.at("columns").get<std::vector<std::string>>();
  m.scaler = scaler_from_json(j.at("scaler"));
  m.intercept = j.at("intercept").get<double>();
  m.coefficients = j.at("coefficients").get<std::vector<double>>();
  m.dropped_columns = j.at("dropped_columns").get<std::vector<std::string>>();
  m.rss = j.at("rss").get<double>();
  m.rank = j.at("rank").get<std::size_t>();
  if (m.coefficients.size() != m.column_names.size()) throw ShapeError("coefficient count does not match columns");
  return m;
}

}  // namespace rdcost
