#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdcost/error.hpp"
#include "rdcost/timeutil.hpp"

namespace rdcost {

/// All paired differences are zero; the signed-rank test is undefined.
class DegenerateInputError : public RangeError {
 public:
  explicit DegenerateInputError(const std::string& what) : RangeError(what) {}
};

/// sqrt(mean((actual - predicted)^2)).
double rmse(std::span<const double> actual, std::span<const double> predicted);

enum class WilcoxonMode { Asymptotic, Exact };

struct WilcoxonOptions {
  WilcoxonMode mode = WilcoxonMode::Asymptotic;
  /// Shrinks |W - mean| by 1/2 before the normal tail is taken. Only the
  /// p-value is affected; z is always the plain standardized statistic.
  bool continuity_correction = true;
};

struct WilcoxonResult {
  double w = 0.0;  // sum of ranks of positive differences
  double z = 0.0;
  double p = 1.0;  // two-sided
  std::size_t n = 0;  // pairs left after dropping zero differences
  WilcoxonMode mode = WilcoxonMode::Asymptotic;
};

/// Signed-rank test on d = a - b. Zero differences are dropped, ties get
/// average ranks and the asymptotic variance carries the tie correction.
/// Exact mode counts all 2^n sign assignments and is limited to n <= 20.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    const WilcoxonOptions& options = {});

/// Linear interpolation between order statistics at position (n-1)q.
double empirical_quantile(std::span<const double> xs, double q);

inline constexpr const char* kQuantileMethod = "linear interpolation between order statistics, position (n-1)q";

/// Constant offsets around the point predictions: upper = yhat + |Q(0.025)|,
/// lower = yhat - Q(0.975), with Q taken over pre-lockdown errors.
struct Band {
  double lower_offset = 0.0;
  double upper_offset = 0.0;
};

struct BandSeries {
  Band band;
  std::vector<double> lower;
  std::vector<double> upper;
};

BandSeries prediction_band(std::span<const double> errors_pre_lockdown, std::span<const double> point_predictions);

struct NamedWindow {
  std::string name;
  DateRange range;
};

struct WindowSummary {
  std::string name;
  DateRange range{};
  std::size_t hours = 0;
  double mean_actual = 0.0;
  double mean_predicted = 0.0;
  /// mean(actual) / mean(predicted) - 1
  double ratio_actual_over_predicted = 0.0;
  double mean_error = 0.0;
  /// mean(error) / mean(predicted)
  double mean_error_pct_of_predicted = 0.0;
  double rmse = 0.0;
  double error_q025 = 0.0;
  double error_q975 = 0.0;
  std::optional<WilcoxonResult> wilcoxon;  // empty when degenerate
  double band_coverage = 0.0;  // share of actuals inside the band
};

struct HourlyPrediction {
  Hour timestamp = 0;
  Date date{};
  double actual = 0.0;
  double predicted = 0.0;
  double error = 0.0;  // predicted - actual; negative = underestimate
  double lower = 0.0;
  double upper = 0.0;
};

struct EvaluationReport {
  std::string model_label;
  std::vector<HourlyPrediction> hours;
  std::vector<WindowSummary> windows;
  std::string band_window;
  Band band;

  const WindowSummary& window(std::string_view name) const;
};

/// Per-window statistics for hourly predictions. The band is fitted on the
/// errors of `band_window` and applied to every hour. Throws
/// DataError(Coverage) when a window day has no prediction.
EvaluationReport summarize_windows(std::span<const Hour> hours, std::span<const Date> dates,
                                   std::span<const double> actual, std::span<const double> predicted,
                                   const std::vector<NamedWindow>& windows, const std::string& band_window);

nlohmann::json report_to_json(const EvaluationReport& report);
/// timestamp,actual,predicted,error,lower,upper
void write_hourly_csv(const EvaluationReport& report, std::ostream& out);
/// Daily sums of actual, predicted and the band bounds.
void write_daily_csv(const EvaluationReport& report, std::ostream& out);
/// Error histogram per window on shared bin edges.
void write_error_histogram_csv(const EvaluationReport& report, std::size_t bins, std::ostream& out);

}  // namespace rdcost
