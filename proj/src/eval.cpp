#include "rdcost/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

#include "rdcost/csv.hpp"

namespace rdcost {
namespace {

double normal_two_sided_tail(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

nlohmann::json wilcoxon_json(const std::optional<WilcoxonResult>& w) {
  if (!w) return {{"degenerate", true}};
  return {{"degenerate", false},
          {"W", w->w},
          {"z", w->z},
          {"p", w->p},
          {"n", w->n},
          {"mode", w->mode == WilcoxonMode::Exact ? "exact" : "asymptotic"}};
}

}  // namespace

double rmse(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) throw ShapeError("rmse inputs differ in length");
  if (actual.empty()) throw RangeError("rmse of an empty sequence");
  double ss = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double r = actual[i] - predicted[i];
    ss += r * r;
  }
  return std::sqrt(ss / static_cast<double>(actual.size()));
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    const WilcoxonOptions& options) {
  if (a.size() != b.size()) throw ShapeError("wilcoxon inputs differ in length");
  std::vector<double> d;
  d.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    if (diff != 0.0) d.push_back(diff);
  }
  const std::size_t n = d.size();
  if (n == 0) throw DegenerateInputError("all paired differences are zero");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return std::abs(d[i]) < std::abs(d[j]); });

  // Doubled average ranks keep tied ranks integral: positions i..j (1-based)
  // share rank (i+j)/2.
  std::vector<std::int64_t> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    const auto r2 = static_cast<std::int64_t>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = r2;
    const auto t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  std::int64_t w2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] > 0.0) w2 += rank2[i];
  }

  WilcoxonResult res;
  res.n = n;
  res.mode = options.mode;
  res.w = static_cast<double>(w2) / 2.0;
  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  res.z = var > 0.0 ? (res.w - mean) / std::sqrt(var) : 0.0;

  if (options.mode == WilcoxonMode::Exact) {
    if (n > 20) throw RangeError("exact Wilcoxon mode is limited to n <= 20");
    // Number of sign assignments reaching each doubled rank sum.
    const std::int64_t max2 = std::accumulate(rank2.begin(), rank2.end(), std::int64_t{0});
    std::vector<double> count(static_cast<std::size_t>(max2) + 1, 0.0);
    count[0] = 1.0;
    for (std::int64_t r : rank2) {
      for (std::int64_t s = max2; s >= r; --s) count[static_cast<std::size_t>(s)] += count[static_cast<std::size_t>(s - r)];
    }
    const double total = std::ldexp(1.0, static_cast<int>(n));
    double le = 0.0;
    double ge = 0.0;
    for (std::int64_t s = 0; s <= max2; ++s) {
      if (s <= w2) le += count[static_cast<std::size_t>(s)];
      if (s >= w2) ge += count[static_cast<std::size_t>(s)];
    }
    res.p = std::min(1.0, 2.0 * std::min(le, ge) / total);
  } else {
    if (!(var > 0.0)) throw DegenerateInputError("zero null variance");
    const double dev = std::abs(res.w - mean) - (options.continuity_correction ? 0.5 : 0.0);
    res.p = std::min(1.0, normal_two_sided_tail(std::max(dev, 0.0) / std::sqrt(var)));
  }
  return res;
}

double empirical_quantile(std::span<const double> xs, double q) {
  if (xs.empty()) throw RangeError("quantile of an empty sequence");
  if (!(q >= 0.0 && q <= 1.0)) throw RangeError("quantile level must lie in [0, 1]");
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  const double pos = static_cast<double>(s.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return s[lo] + frac * (s[hi] - s[lo]);
}

BandSeries prediction_band(std::span<const double> errors_pre_lockdown, std::span<const double> point_predictions) {
  BandSeries out;
  out.band.upper_offset = std::abs(empirical_quantile(errors_pre_lockdown, 0.025));
  out.band.lower_offset = empirical_quantile(errors_pre_lockdown, 0.975);
  out.lower.reserve(point_predictions.size());
  out.upper.reserve(point_predictions.size());
  for (double y : point_predictions) {
    out.lower.push_back(y - out.band.lower_offset);
    out.upper.push_back(y + out.band.upper_offset);
  }
  return out;
}

const WindowSummary& EvaluationReport::window(std::string_view name) const {
  for (const auto& w : windows) {
    if (w.name == name) return w;
  }
  throw SpecError("no window named '" + std::string(name) + "' in report");
}

EvaluationReport summarize_windows(std::span<const Hour> hours, std::span<const Date> dates,
                                   std::span<const double> actual, std::span<const double> predicted,
                                   const std::vector<NamedWindow>& windows, const std::string& band_window) {
  const std::size_t n = hours.size();
  if (dates.size() != n || actual.size() != n || predicted.size() != n) throw ShapeError("report inputs differ in length");

  EvaluationReport rep;
  rep.band_window = band_window;
  rep.hours.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    rep.hours[i] = {.timestamp = hours[i],
                    .date = dates[i],
                    .actual = actual[i],
                    .predicted = predicted[i],
                    .error = predicted[i] - actual[i]};
  }

  auto members = [&](const DateRange& range) {
    std::vector<std::size_t> idx;
    std::set<Date> covered;
    for (std::size_t i = 0; i < n; ++i) {
      if (range.contains(dates[i])) {
        idx.push_back(i);
        covered.insert(dates[i]);
      }
    }
    if (static_cast<std::int64_t>(covered.size()) != range.days()) {
      throw DataError(DataError::Kind::Coverage, "predictions do not cover every day of window " +
                                                     format_date(range.first) + ".." + format_date(range.last));
    }
    return idx;
  };

  const NamedWindow* bw = nullptr;
  for (const auto& w : windows) {
    if (w.name == band_window) bw = &w;
  }
  if (!bw) throw SpecError("band window '" + band_window + "' is not among the report windows");
  {
    std::vector<double> errs;
    for (std::size_t i : members(bw->range)) errs.push_back(rep.hours[i].error);
    std::vector<double> preds(predicted.begin(), predicted.end());
    const BandSeries band = prediction_band(errs, preds);
    rep.band = band.band;
    for (std::size_t i = 0; i < n; ++i) {
      rep.hours[i].lower = band.lower[i];
      rep.hours[i].upper = band.upper[i];
    }
  }

  for (const auto& w : windows) {
    const auto idx = members(w.range);
    WindowSummary s;
    s.name = w.name;
    s.range = w.range;
    s.hours = idx.size();
    std::vector<double> a, p, e;
    std::size_t inside = 0;
    for (std::size_t i : idx) {
      const auto& h = rep.hours[i];
      a.push_back(h.actual);
      p.push_back(h.predicted);
      e.push_back(h.error);
      if (h.actual >= h.lower && h.actual <= h.upper) ++inside;
    }
    const double m = static_cast<double>(idx.size());
    s.mean_actual = std::accumulate(a.begin(), a.end(), 0.0) / m;
    s.mean_predicted = std::accumulate(p.begin(), p.end(), 0.0) / m;
    s.ratio_actual_over_predicted = s.mean_actual / s.mean_predicted - 1.0;
    s.mean_error = std::accumulate(e.begin(), e.end(), 0.0) / m;
    s.mean_error_pct_of_predicted = s.mean_error / s.mean_predicted;
    s.rmse = rmse(a, p);
    s.error_q025 = empirical_quantile(e, 0.025);
    s.error_q975 = empirical_quantile(e, 0.975);
    s.band_coverage = static_cast<double>(inside) / m;
    try {
      s.wilcoxon = wilcoxon_signed_rank(p, a);
    } catch (const DegenerateInputError&) {
      s.wilcoxon.reset();
    }
    rep.windows.push_back(std::move(s));
  }
  return rep;
}

nlohmann::json report_to_json(const EvaluationReport& report) {
  nlohmann::json windows = nlohmann::json::array();
  for (const auto& w : report.windows) {
    windows.push_back({{"name", w.name},
                       {"range", {format_date(w.range.first), format_date(w.range.last)}},
                       {"hours", w.hours},
                       {"mean_actual", w.mean_actual},
                       {"mean_predicted", w.mean_predicted},
                       {"ratio_actual_over_predicted", w.ratio_actual_over_predicted},
                       {"mean_error", w.mean_error},
                       {"mean_error_pct_of_predicted", w.mean_error_pct_of_predicted},
                       {"rmse", w.rmse},
                       {"error_q025", w.error_q025},
                       {"error_q975", w.error_q975},
                       {"band_coverage", w.band_coverage},
                       {"wilcoxon", wilcoxon_json(w.wilcoxon)}});
  }
  return {{"model", report.model_label},
          {"quantile_method", kQuantileMethod},
          {"error_convention", "predicted - actual"},
          {"band", {{"window", report.band_window},
                    {"lower_offset", report.band.lower_offset},
                    {"upper_offset", report.band.upper_offset}}},
          {"windows", windows}};
}

void write_hourly_csv(const EvaluationReport& report, std::ostream& out) {
  out << "timestamp,actual,predicted,error,lower,upper\n";
  for (const auto& h : report.hours) {
    out << format_timestamp(h.timestamp) << ',' << csv::format_number(h.actual) << ','
        << csv::format_number(h.predicted) << ',' << csv::format_number(h.error) << ','
        << csv::format_number(h.lower) << ',' << csv::format_number(h.upper) << '\n';
  }
}

void write_daily_csv(const EvaluationReport& report, std::ostream& out) {
  struct Day {
    double actual = 0, predicted = 0, lower = 0, upper = 0;
  };
  std::map<Date, Day> days;
  for (const auto& h : report.hours) {
    auto& d = days[h.date];
    d.actual += h.actual;
    d.predicted += h.predicted;
    d.lower += h.lower;
    d.upper += h.upper;
  }
  out << "date,actual,predicted,lower,upper\n";
  for (const auto& [date, d] : days) {
    out << format_date(date) << ',' << csv::format_number(d.actual) << ',' << csv::format_number(d.predicted) << ','
        << csv::format_number(d.lower) << ',' << csv::format_number(d.upper) << '\n';
  }
}

void write_error_histogram_csv(const EvaluationReport& report, std::size_t bins, std::ostream& out) {
  if (bins == 0 || report.hours.empty()) throw RangeError("histogram needs bins and data");
  double lo = report.hours.front().error;
  double hi = lo;
  for (const auto& h : report.hours) {
    lo = std::min(lo, h.error);
    hi = std::max(hi, h.error);
  }
  const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  out << "window,bin_lower,bin_upper,count\n";
  for (const auto& w : report.windows) {
    std::vector<std::size_t> counts(bins, 0);
    for (const auto& h : report.hours) {
      if (!w.range.contains(h.date)) continue;
      auto b = static_cast<std::size_t>((h.error - lo) / width);
      counts[std::min(b, bins - 1)]++;
    }
    for (std::size_t b = 0; b < bins; ++b) {
      out << w.name << ',' << csv::format_number(lo + width * static_cast<double>(b)) << ','
          << csv::format_number(lo + width * static_cast<double>(b + 1)) << ',' << counts[b] << '\n';
    }
  }
}

}  // namespace rdcost
