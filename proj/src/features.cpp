#include "rdcost/features.hpp"

#include <cmath>
#include <ostream>

#include "rdcost/csv.hpp"
#include "rdcost/error.hpp"
#include "rdcost/kernels.hpp"

namespace rdcost {
namespace {

std::vector<std::string> continuous_names(const FeatureSpec& spec) {
  std::vector<std::string> names{std::string(price_column_name(spec.price))};
  if (spec.include_zonal_nd) {
    for (Zone z : kZones) names.push_back("nd_" + std::string(zone_name(z)));
  }
  if (spec.include_zonal_ndfc) {
    for (Zone z : kZones) names.push_back("ndfc_" + std::string(zone_name(z)));
  }
  return names;
}

std::vector<std::string> trailing_names(const FeatureSpec& spec) {
  std::vector<std::string> names;
  if (spec.workday) names.emplace_back("workday");
  if (spec.winter) names.emplace_back("winter");
  for (int k = 1; k <= spec.lags_system_nd; ++k) names.push_back("nd_system_lag" + std::to_string(k));
  for (int k = 1; k <= spec.leads_system_ndfc; ++k) names.push_back("ndfc_system_lead" + std::to_string(k));
  return names;
}

void validate(const FeatureSpec& spec) {
  if (spec.poly_degree < 1 || spec.poly_degree > 3) throw SpecError("poly_degree must be 1, 2 or 3");
  if (spec.lags_system_nd < 0 || spec.leads_system_ndfc < 0) throw SpecError("lags and leads must be non-negative");
}

void enumerate_terms(std::size_t ncols, int degree, std::size_t start, Monomial& prefix, std::vector<Monomial>& out) {
  if (static_cast<int>(prefix.size()) == degree) {
    out.push_back(prefix);
    return;
  }
  for (std::size_t c = start; c < ncols; ++c) {
    prefix.push_back(c);
    enumerate_terms(ncols, degree, c, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

std::string_view price_column_name(PriceColumn p) { return p == PriceColumn::GasPrice ? "gas_price" : "da_price"; }

void Scaler::transform(Matrix& X) const {
  if (X.cols() != size()) throw ShapeError("scaler width does not match matrix");
  kernels::parallel::standardize(X, mean, std);
}

void Scaler::inverse_transform(Matrix& X) const {
  if (X.cols() != size()) throw ShapeError("scaler width does not match matrix");
  for (std::size_t r = 0; r < X.rows(); ++r) {
    auto row = X.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = row[c] * std[c] + mean[c];
  }
}

Scaler fit_scaler(const Matrix& X, std::span<const std::size_t> training_rows) {
  if (training_rows.empty()) throw RangeError("scaler needs at least one training row");
  const std::size_t d = X.cols();
  const auto n = static_cast<double>(training_rows.size());
  Scaler s;
  s.mean.assign(d, 0.0);
  s.std.assign(d, 1.0);
  s.constant.assign(d, false);
  for (std::size_t r : training_rows) {
    const auto row = X.row(r);
    for (std::size_t c = 0; c < d; ++c) s.mean[c] += row[c];
  }
  for (double& m : s.mean) m /= n;
  std::vector<double> ss(d, 0.0);
  for (std::size_t r : training_rows) {
    const auto row = X.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      const double dev = row[c] - s.mean[c];
      ss[c] += dev * dev;
    }
  }
  for (std::size_t c = 0; c < d; ++c) {
    const double sd = std::sqrt(ss[c] / n);
    if (sd <= 1e-12 * std::max(1.0, std::abs(s.mean[c]))) {
      s.constant[c] = true;
      s.std[c] = 1.0;
    } else {
      s.std[c] = sd;
    }
  }
  return s;
}

std::vector<Monomial> polynomial_terms(std::size_t ncols, int degree) {
  std::vector<Monomial> out;
  Monomial prefix;
  for (int deg = 1; deg <= degree; ++deg) enumerate_terms(ncols, deg, 0, prefix, out);
  return out;
}

std::vector<std::string> polynomial_names(std::span<const std::string> names, int degree) {
  std::vector<std::string> out;
  for (const auto& term : polynomial_terms(names.size(), degree)) {
    std::string name;
    for (std::size_t i = 0; i < term.size();) {
      std::size_t j = i;
      while (j < term.size() && term[j] == term[i]) ++j;
      if (!name.empty()) name += '*';
      name += names[term[i]];
      if (j - i > 1) name += "^" + std::to_string(j - i);
      i = j;
    }
    out.push_back(std::move(name));
  }
  return out;
}

Matrix expand_polynomial(const Matrix& continuous, int degree) {
  if (degree != 2 && degree != 3) throw SpecError("polynomial degree must be 2 or 3");
  const auto terms = polynomial_terms(continuous.cols(), degree);
  Matrix out;
  kernels::parallel::expand_monomials(continuous, terms, out);
  return out;
}

LagLeadColumns add_lags_leads(const NetDemandPanel& panel, int lags, int leads) {
  if (lags < 0 || leads < 0) throw RangeError("lags and leads must be non-negative");
  const std::size_t n = panel.size();
  const auto L = static_cast<std::size_t>(lags);
  const auto F = static_cast<std::size_t>(leads);
  if (L + F >= n && (L + F) > 0) throw RangeError("lag/lead window exceeds panel length");
  if (L + F > 0) {
    for (std::size_t i = 1; i < n; ++i) {
      if (panel.rows[i].hour != panel.rows[i - 1].hour + 1) throw RangeError("panel is not chronologically contiguous");
    }
  }
  LagLeadColumns out;
  for (std::size_t k = 1; k <= L; ++k) out.names.push_back("nd_system_lag" + std::to_string(k));
  for (std::size_t k = 1; k <= F; ++k) out.names.push_back("ndfc_system_lead" + std::to_string(k));
  for (std::size_t t = 0; t < n; ++t) {
    if (t < L) {
      out.dropped.push_back({panel.rows[t].hour, "incomplete lag window"});
    } else if (t + F >= n) {
      out.dropped.push_back({panel.rows[t].hour, "incomplete lead window"});
    } else {
      out.kept_rows.push_back(t);
    }
  }
  out.values = Matrix(out.kept_rows.size(), L + F);
  for (std::size_t i = 0; i < out.kept_rows.size(); ++i) {
    const std::size_t t = out.kept_rows[i];
    auto row = out.values.row(i);
    for (std::size_t k = 1; k <= L; ++k) row[k - 1] = panel.rows[t - k].nd_system;
    for (std::size_t k = 1; k <= F; ++k) row[L + k - 1] = panel.rows[t + k].nd_fc_system;
  }
  return out;
}

std::vector<std::size_t> DesignMatrix::rows_in(std::initializer_list<Fold> wanted) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < folds.size(); ++i) {
    for (Fold f : wanted) {
      if (folds[i] == f) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

std::vector<std::string> design_column_names(const FeatureSpec& spec) {
  validate(spec);
  const auto cont = continuous_names(spec);
  std::vector<std::string> names =
      spec.poly_degree > 1 ? polynomial_names(cont, spec.poly_degree) : cont;
  for (auto& n : trailing_names(spec)) names.push_back(std::move(n));
  return names;
}

DesignMatrix build_design(const NetDemandPanel& panel, const FeatureSpec& spec, const SplitPlan& split,
                          const Scaler* fixed_scaler) {
  validate(spec);
  const auto lagged = add_lags_leads(panel, spec.lags_system_nd, spec.leads_system_ndfc);
  const std::size_t n = lagged.kept_rows.size();
  const std::size_t k_cont = continuous_names(spec).size();
  const std::size_t k_ind = static_cast<std::size_t>(spec.workday) + static_cast<std::size_t>(spec.winter);
  const std::size_t k_lag = lagged.values.cols();

  // Raw inputs, then one monomial pass that expands the continuous block and
  // passes indicators and lag/lead columns through linearly.
  Matrix raw(n, k_cont + k_ind + k_lag);
  for (std::size_t i = 0; i < n; ++i) {
    const PanelRow& p = panel.rows[lagged.kept_rows[i]];
    auto row = raw.row(i);
    std::size_t c = 0;
    row[c++] = spec.price == PriceColumn::GasPrice ? p.gas_price : p.da_price;
    if (spec.include_zonal_nd) {
      for (double v : p.nd) row[c++] = v;
    }
    if (spec.include_zonal_ndfc) {
      for (double v : p.nd_fc) row[c++] = v;
    }
    if (spec.workday) row[c++] = p.flags.workday ? 1.0 : 0.0;
    if (spec.winter) row[c++] = p.flags.winter ? 1.0 : 0.0;
    const auto lag_row = lagged.values.row(i);
    for (double v : lag_row) row[c++] = v;
  }
  std::vector<Monomial> terms =
      spec.poly_degree > 1 ? polynomial_terms(k_cont, spec.poly_degree) : polynomial_terms(k_cont, 1);
  for (std::size_t c = k_cont; c < raw.cols(); ++c) terms.push_back({c});

  DesignMatrix d;
  d.spec = spec;
  d.column_names = design_column_names(spec);
  d.dropped = lagged.dropped;
  kernels::parallel::expand_monomials(raw, terms, d.X);
  if (d.X.cols() != d.column_names.size()) throw ShapeError("design width does not match column names");

  d.hours.resize(n);
  d.dates.resize(n);
  d.folds.resize(n);
  d.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const PanelRow& p = panel.rows[lagged.kept_rows[i]];
    d.hours[i] = p.hour;
    d.dates[i] = p.date;
    d.folds[i] = split.fold_of(p.date);
    d.y[i] = p.redispatch_cost;
  }

  if (fixed_scaler) {
    if (fixed_scaler->size() != d.X.cols()) throw ShapeError("supplied scaler does not match the design width");
    d.scaler = *fixed_scaler;
  } else {
    const auto train = d.rows_in({Fold::Train});
    d.scaler = fit_scaler(d.X, train);
  }
  d.scaler.transform(d.X);
  return d;
}

void write_design_csv(const DesignMatrix& design, std::ostream& out) {
  out << "timestamp,fold";
  for (const auto& n : design.column_names) out << ',' << n;
  out << ",y\n";
  for (std::size_t i = 0; i < design.rows(); ++i) {
    out << format_timestamp(design.hours[i]) << ',' << fold_name(design.folds[i]);
    for (double v : design.X.row(i)) out << ',' << csv::format_number(v);
    out << ',' << csv::format_number(design.y[i]) << '\n';
  }
}

nlohmann::json feature_spec_to_json(const FeatureSpec& spec) {
  return {{"price_column", price_column_name(spec.price)},
          {"include_zonal_nd", spec.include_zonal_nd},
          {"include_zonal_ndfc", spec.include_zonal_ndfc},
          {"lags_system_nd", spec.lags_system_nd},
          {"leads_system_ndfc", spec.leads_system_ndfc},
          {"poly_degree", spec.poly_degree},
          {"workday", spec.workday},
          {"winter", spec.winter}};
}

FeatureSpec feature_spec_from_json(const nlohmann::json& j) {
  FeatureSpec s;
  const auto price = j.value("price_column", std::string("da_price"));
  if (price == "da_price") {
    s.price = PriceColumn::DaPrice;
  } else if (price == "gas_price") {
    s.price = PriceColumn::GasPrice;
  } else {
    throw SpecError("unknown price column '" + price + "'");
  }
  s.include_zonal_nd = j.value("include_zonal_nd", true);
  s.include_zonal_ndfc = j.value("include_zonal_ndfc", true);
  s.lags_system_nd = j.value("lags_system_nd", 0);
  s.leads_system_ndfc = j.value("leads_system_ndfc", 0);
  s.poly_degree = j.value("poly_degree", 1);
  s.workday = j.value("workday", true);
  s.winter = j.value("winter", true);
  validate(s);
  return s;
}

nlohmann::json scaler_to_json(const Scaler& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"constant", s.constant}};
}

Scaler scaler_from_json(const nlohmann::json& j) {
  Scaler s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.std = j.at("std").get<std::vector<double>>();
  s.constant = j.at("constant").get<std::vector<bool>>();
  if (s.std.size() != s.mean.size() || s.constant.size() != s.mean.size()) throw ShapeError("inconsistent scaler");
  return s;
}

}  // namespace rdcost
