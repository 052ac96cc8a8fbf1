#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rdcost/error.hpp"
#include "rdcost/eval.hpp"
#include "rdcost/rng.hpp"

using namespace rdcost;

namespace {

WilcoxonResult wilcoxon_of(const std::vector<double>& d, WilcoxonOptions o = {}) {
  const std::vector<double> zero(d.size(), 0.0);
  return wilcoxon_signed_rank(d, zero, o);
}

WilcoxonOptions exact() { return {WilcoxonMode::Exact, false}; }

// Tie-free sample: distinct magnitudes with random signs and a shift.
std::vector<double> tie_free(Rng& rng, std::size_t n, double shift) {
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = shift + rng.normal() + 1e-9 * double(i);
  return d;
}

}  // namespace

TEST(Rmse, Basics) {
  const std::vector<double> a{1, 2, 3}, p{1, 2, 5};
  EXPECT_DOUBLE_EQ(rmse(a, p), std::sqrt(4.0 / 3.0));
  EXPECT_THROW(rmse(a, std::vector<double>{1}), ShapeError);
  EXPECT_THROW(rmse(std::vector<double>{}, std::vector<double>{}), RangeError);
}

TEST(Wilcoxon, WorkedCase) {
  const std::vector<double> d{1, 2, 3, 4, 5};
  const auto ex = wilcoxon_of(d, exact());
  EXPECT_DOUBLE_EQ(ex.w, 15.0);
  EXPECT_NEAR(ex.p, 0.0625, 1e-12);
  EXPECT_NEAR(ex.z, 2.0226, 1e-3);
  const auto as = wilcoxon_of(d);
  EXPECT_NEAR(as.z, 2.0226, 1e-3);  // z carries no continuity correction
  EXPECT_EQ(as.n, 5u);
}

TEST(Wilcoxon, ExactMatchesEnumeration) {
  Rng rng(21);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 3 + rng.below(12);
    auto d = tie_free(rng, n, rng.uniform(-1.0, 1.0));
    if (t % 3 == 0) {
      // force ties and zeros
      d[0] = 0.0;
      d[1] = 2.0;
      d[2] = -2.0;
    }
    const auto ref = oracle::wilcoxon_enumerate(d);
    const auto got = wilcoxon_of(d, exact());
    EXPECT_DOUBLE_EQ(got.w, ref.w) << t;
    EXPECT_NEAR(got.p, ref.p, 1e-12) << t;
  }
}

TEST(Wilcoxon, AsymptoticCloseToExactForModerateN) {
  Rng rng(22);
  double worst = 0.0;
  for (std::size_t n = 8; n <= 12; ++n) {
    for (int t = 0; t < 40; ++t) {
      const auto d = tie_free(rng, n, rng.uniform(-0.8, 0.8));
      const double pe = oracle::wilcoxon_enumerate(d).p;
      const double pa = wilcoxon_of(d).p;
      worst = std::max(worst, std::abs(pa - pe));
    }
  }
  EXPECT_LE(worst, 0.03);
}

TEST(Wilcoxon, TieCorrectionShrinksVariance) {
  // all |d| equal: ranks are all (n+1)/2
  const std::vector<double> d{1, 1, 1, -1, 1, 1};
  const auto r = wilcoxon_of(d);
  EXPECT_DOUBLE_EQ(r.w, 5 * 3.5);
  const double var = 6 * 7 * 13 / 24.0 - (216.0 - 6.0) / 48.0;
  EXPECT_NEAR(r.z, (17.5 - 10.5) / std::sqrt(var), 1e-12);
}

TEST(Wilcoxon, ZerosDroppedAndDegenerate) {
  const auto r = wilcoxon_of({0, 0, 1, 2, -3});
  EXPECT_EQ(r.n, 3u);
  EXPECT_THROW(wilcoxon_of({0, 0, 0}), DegenerateInputError);
  EXPECT_THROW(wilcoxon_of(std::vector<double>(21, 1.0), exact()), RangeError);
  const std::vector<double> a{1, 2}, b{1};
  EXPECT_THROW(wilcoxon_signed_rank(a, b), ShapeError);
}

TEST(Wilcoxon, ContinuityCorrectionOnlyMovesP) {
  const std::vector<double> d{1.5, -0.2, 2.5, 3.1, -0.7, 4.2, 0.9, 1.1, -2.2, 3.3};
  const auto with = wilcoxon_of(d);
  const auto without = wilcoxon_of(d, {WilcoxonMode::Asymptotic, false});
  EXPECT_EQ(with.z, without.z);
  EXPECT_GT(with.p, without.p);
}

TEST(Wilcoxon, LargeSampleCalibration) {
  // under the null, p < 0.05 should happen about 5% of the time
  Rng rng(23);
  int rejections = 0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> d(60);
    for (double& v : d) v = rng.normal();
    if (wilcoxon_of(d).p < 0.05) ++rejections;
  }
  const double rate = double(rejections) / trials;
  EXPECT_NEAR(rate, 0.05, 5.0 * std::sqrt(0.05 * 0.95 / trials));
}

TEST(Quantile, LinearInterpolation) {
  const std::vector<double> xs{4, 1, 3, 2, 5};
  EXPECT_DOUBLE_EQ(empirical_quantile(xs, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(empirical_quantile(xs, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(empirical_quantile(xs, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(empirical_quantile(xs, 0.1), 1.4);  // position 0.4
  EXPECT_DOUBLE_EQ(empirical_quantile(std::vector<double>{7}, 0.3), 7.0);
  EXPECT_THROW(empirical_quantile(std::vector<double>{}, 0.5), RangeError);
  EXPECT_THROW(empirical_quantile(xs, 1.5), RangeError);
}

TEST(Band, OffsetsFromErrorQuantiles) {
  std::vector<double> errs;
  for (int i = 0; i <= 40; ++i) errs.push_back(double(i) - 20.0);  // -20..20
  const std::vector<double> yhat{100.0, 200.0};
  const BandSeries b = prediction_band(errs, yhat);
  EXPECT_DOUBLE_EQ(b.band.upper_offset, 19.0);
  EXPECT_DOUBLE_EQ(b.band.lower_offset, 19.0);
  EXPECT_DOUBLE_EQ(b.upper[1], 219.0);
  EXPECT_DOUBLE_EQ(b.lower[0], 81.0);
}

TEST(Band, CoverageOnExchangeableNoise) {
  Rng rng(24);
  std::vector<double> fit_err(5000), test_err(5000), yhat(5000, 0.0);
  for (auto& e : fit_err) e = rng.normal(0.0, 3.0);
  for (auto& e : test_err) e = rng.normal(0.0, 3.0);
  const BandSeries b = prediction_band(fit_err, yhat);
  int inside = 0;
  for (std::size_t i = 0; i < test_err.size(); ++i) {
    const double actual = yhat[i] - test_err[i];
    inside += actual >= b.lower[i] && actual <= b.upper[i];
  }
  EXPECT_NEAR(inside / 5000.0, 0.95, 0.015);
}

namespace {

struct Series {
  std::vector<Hour> hours;
  std::vector<Date> dates;
  std::vector<double> actual, predicted;
};

// Two windows of two days each; the second has a +25% level shift in actuals.
Series two_windows() {
  Series s;
  Rng rng(25);
  const Hour h0 = first_hour_of(make_date(2020, 1, 1));
  for (int i = 0; i < 96; ++i) {
    s.hours.push_back(h0 + i);
    s.dates.push_back(local_date(h0 + i));
    const double p = 1000.0 + 10.0 * (i % 24);
    s.predicted.push_back(p);
    s.actual.push_back((i < 48 ? 1.0 : 1.25) * p + rng.normal(0.0, 5.0));
  }
  return s;
}

const std::vector<NamedWindow> kWindows = {{"pre", {make_date(2020, 1, 1), make_date(2020, 1, 2)}},
                                           {"post", {make_date(2020, 1, 3), make_date(2020, 1, 4)}}};

}  // namespace

TEST(Summary, WindowsRatiosAndTests) {
  const Series s = two_windows();
  const auto rep = summarize_windows(s.hours, s.dates, s.actual, s.predicted, kWindows, "pre");
  const auto& pre = rep.window("pre");
  const auto& post = rep.window("post");
  EXPECT_EQ(pre.hours, 48u);
  EXPECT_NEAR(pre.ratio_actual_over_predicted, 0.0, 0.01);
  EXPECT_NEAR(post.ratio_actual_over_predicted, 0.25, 0.01);
  EXPECT_LT(post.wilcoxon->p, 1e-6);
  EXPECT_GT(pre.band_coverage, 0.9);
  EXPECT_LT(post.band_coverage, 0.1);
  EXPECT_LT(post.mean_error, 0.0);  // predicted - actual: underestimate
  EXPECT_NEAR(post.mean_error_pct_of_predicted, -0.25, 0.01);
  EXPECT_THROW(rep.window("missing"), SpecError);
}

TEST(Summary, Errors) {
  Series s = two_windows();
  EXPECT_THROW(summarize_windows(s.hours, s.dates, s.actual, s.predicted, kWindows, "nope"), SpecError);
  // drop one whole day of the second window
  s.hours.resize(72);
  s.dates.resize(72);
  s.actual.resize(72);
  s.predicted.resize(72);
  try {
    summarize_windows(s.hours, s.dates, s.actual, s.predicted, kWindows, "pre");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.kind(), DataError::Kind::Coverage);
  }
  s.actual.pop_back();
  EXPECT_THROW(summarize_windows(s.hours, s.dates, s.actual, s.predicted, kWindows, "pre"), ShapeError);
}

TEST(Summary, PerfectPredictionHasNoTest) {
  Series s = two_windows();
  s.actual = s.predicted;
  const auto rep = summarize_windows(s.hours, s.dates, s.actual, s.predicted, kWindows, "pre");
  EXPECT_FALSE(rep.window("pre").wilcoxon.has_value());
  EXPECT_EQ(rep.window("pre").rmse, 0.0);
  EXPECT_TRUE(report_to_json(rep)["windows"][0]["wilcoxon"].at("degenerate").get<bool>());
}

TEST(Summary, CsvOutputs) {
  const Series s = two_windows();
  const auto rep = summarize_windows(s.hours, s.dates, s.actual, s.predicted, kWindows, "pre");
  std::ostringstream hourly, daily, hist;
  write_hourly_csv(rep, hourly);
  write_daily_csv(rep, daily);
  write_error_histogram_csv(rep, 10, hist);
  auto lines = [](const std::string& t) { return std::count(t.begin(), t.end(), '\n'); };
  EXPECT_EQ(lines(hourly.str()), 97);
  EXPECT_EQ(lines(daily.str()), 5);
  EXPECT_EQ(lines(hist.str()), 21);
  // histogram counts add up to the window sizes
  std::istringstream in(hist.str());
  std::string line;
  std::getline(in, line);
  std::size_t total = 0;
  while (std::getline(in, line)) total += std::stoul(line.substr(line.rfind(',') + 1));
  EXPECT_EQ(total, 96u);
  EXPECT_THROW(write_error_histogram_csv(rep, 0, hist), RangeError);
  const auto j = report_to_json(rep);
  EXPECT_EQ(j["error_convention"], "predicted - actual");
  EXPECT_EQ(j["windows"].size(), 2u);
}
