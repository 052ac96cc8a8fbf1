#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "rdcost/csv.hpp"
#include "rdcost/error.hpp"
#include "rdcost/market_data.hpp"

using namespace rdcost;

namespace {

// Hand-built CSV pair: `hours` consecutive hours from 2020-03-06T00Z (a Friday).
struct Files {
  std::string zonal;
  std::string national;
};

std::string zonal_line(Hour h, std::size_t z, double demand) {
  std::ostringstream s;
  s << format_timestamp(h) << ',' << zone_name(kZones[z]) << ',' << demand << ',' << demand + 1 << ",10,11,20,21,5,"
    << (z == 0 ? -100 : 0) << '\n';
  return s.str();
}

Files make_files(int hours) {
  const Hour start = parse_timestamp("2020-03-06T00:00Z").value();
  Files f;
  f.zonal = std::string(kZonalHeader) + "\n";
  f.national = std::string(kNationalHeader) + "\n";
  for (int i = 0; i < hours; ++i) {
    const Hour h = start + i;
    for (std::size_t z = 0; z < kZoneCount; ++z) f.zonal += zonal_line(h, z, 1000.0 + 10.0 * i + z);
    std::ostringstream n;
    n << format_timestamp(h) << ',' << 5000 + i << ",50.5," << 20 + (i / 24) << '\n';
    f.national += n.str();
  }
  return f;
}

MarketDataset load(const Files& f, const IngestConfig& cfg = {}, const std::set<Date>& hol = {}) {
  std::istringstream z(f.zonal), n(f.national);
  return load_dataset(z, n, hol, cfg);
}

// Blanks column `col` (0-based over the full row) of every line containing `needle`.
std::string blank_field(std::string text, const std::string& needle, std::size_t col) {
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    const std::size_t line_start = text.rfind('\n', pos) + 1;
    std::size_t c = line_start;
    for (std::size_t k = 0; k < col; ++k) c = text.find(',', c) + 1;
    const std::size_t e = text.find_first_of(",\n", c);
    text.erase(c, e - c);
    pos = text.find('\n', line_start) + 1;
  }
  return text;
}

template <class F>
DataError::Kind data_error_kind(F&& f) {
  try {
    f();
  } catch (const DataError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no DataError thrown";
  return DataError::Kind::Io;
}

}  // namespace

TEST(Zones, NamesRoundTrip) {
  for (Zone z : kZones) EXPECT_EQ(parse_zone(zone_name(z)), z);
  EXPECT_FALSE(parse_zone("north").has_value());
  EXPECT_FALSE(is_demand_zone(Zone::Rossano));
  EXPECT_TRUE(is_demand_zone(Zone::Sicily));
}

TEST(Interpolate, LinearAcrossInteriorGap) {
  const double nan = std::nan("");
  const auto out = interpolate_gaps(std::vector<double>{1.0, nan, nan, 4.0, 5.0}, 2);
  EXPECT_DOUBLE_EQ(out[1], 2.0);
  EXPECT_DOUBLE_EQ(out[2], 3.0);
  EXPECT_DOUBLE_EQ(out[4], 5.0);
}

TEST(Interpolate, GapLongerThanLimitFails) {
  const double nan = std::nan("");
  const std::vector<double> s{1.0, nan, nan, nan, 4.0};
  EXPECT_EQ(data_error_kind([&] { interpolate_gaps(s, 2); }), DataError::Kind::Gap);
  EXPECT_NO_THROW(interpolate_gaps(s, 3));
}

TEST(Interpolate, BoundaryMissingFails) {
  const double nan = std::nan("");
  EXPECT_EQ(data_error_kind([&] { interpolate_gaps(std::vector<double>{nan, 1.0}, 6); }), DataError::Kind::Boundary);
  EXPECT_EQ(data_error_kind([&] { interpolate_gaps(std::vector<double>{1.0, nan}, 6); }), DataError::Kind::Boundary);
}

TEST(LoadDataset, CleanInputRoundTripsByteForByte) {
  const Files f = make_files(48);
  const MarketDataset ds = load(f);
  ASSERT_EQ(ds.size(), 48u);
  EXPECT_EQ(ds.zonal.size(), 48u * kZoneCount);
  EXPECT_EQ(ds.report.interpolated_total(), 0u);
  EXPECT_TRUE(ds.report.warnings.empty());
  EXPECT_EQ(ds.report.expected_hours, 48u);
  EXPECT_DOUBLE_EQ(ds.at(0, Zone::North).net_imports_mwh, -100.0);
  std::ostringstream z, n;
  write_dataset(ds, z, n);
  EXPECT_EQ(z.str(), f.zonal);
  EXPECT_EQ(n.str(), f.national);
}

TEST(LoadDataset, RowOrderDoesNotMatter) {
  Files f = make_files(3);
  // move the first data line to the end
  const std::size_t a = f.zonal.find('\n') + 1;
  const std::size_t b = f.zonal.find('\n', a) + 1;
  const std::string first = f.zonal.substr(a, b - a);
  f.zonal.erase(a, b - a);
  f.zonal += first;
  const MarketDataset ds = load(f);
  EXPECT_DOUBLE_EQ(ds.at(0, Zone::North).demand_mwh, 1000.0);
}

TEST(LoadDataset, FillsShortGapsAndCountsThem) {
  Files f = make_files(24);
  f.zonal = blank_field(f.zonal, "2020-03-06T05:00:00Z,North", 2);
  f.zonal = blank_field(f.zonal, "2020-03-06T06:00:00Z,North", 2);
  f.national = blank_field(f.national, "2020-03-06T10:00:00Z", 1);
  const MarketDataset ds = load(f);
  EXPECT_EQ(ds.report.interpolated_zonal_cells, 2u);
  EXPECT_EQ(ds.report.interpolated_national_cells, 1u);
  // the synthetic series is linear in the hour, so interpolation is exact
  EXPECT_DOUBLE_EQ(ds.at(5, Zone::North).demand_mwh, 1050.0);
  EXPECT_DOUBLE_EQ(ds.at(6, Zone::North).demand_mwh, 1060.0);
  EXPECT_DOUBLE_EQ(ds.national[10].redispatch_cost_eur, 5010.0);
}

TEST(LoadDataset, MissingRowsBecomeGaps) {
  Files f = make_files(24);
  const std::string line = zonal_line(parse_timestamp("2020-03-06T07:00Z").value(), 3, 1000.0 + 70 + 3);
  const auto pos = f.zonal.find(line);
  ASSERT_NE(pos, std::string::npos);
  f.zonal.erase(pos, line.size());
  const MarketDataset ds = load(f);
  EXPECT_EQ(ds.report.interpolated_zonal_cells, 8u);  // every field of the row
  EXPECT_DOUBLE_EQ(ds.at(7, Zone::South).demand_mwh, 1073.0);
}

TEST(LoadDataset, LongGapIsAnError) {
  Files f = make_files(24);
  for (int h = 3; h <= 10; ++h) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "2020-03-06T%02d:00:00Z,Sicily", h);
    f.zonal = blank_field(f.zonal, buf, 4);
  }
  EXPECT_EQ(data_error_kind([&] { load(f); }), DataError::Kind::Gap);
  IngestConfig loose;
  loose.max_gap = 8;
  EXPECT_NO_THROW(load(f, loose));
}

TEST(LoadDataset, GasIsInterpolatedPerDay) {
  Files f = make_files(72);
  for (int h = 24; h < 48; ++h) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "2020-03-07T%02d:00:00Z", h - 24);
    f.national = blank_field(f.national, buf, 3);
  }
  const MarketDataset ds = load(f);
  EXPECT_EQ(ds.report.interpolated_gas_days, 1u);
  EXPECT_DOUBLE_EQ(ds.national[30].gas_price_eur_mwh, 21.0);
}

TEST(LoadDataset, DuplicatesAreRejected) {
  Files f = make_files(2);
  f.zonal += zonal_line(parse_timestamp("2020-03-06T01:00Z").value(), 2, 1.0);
  EXPECT_EQ(data_error_kind([&] { load(f); }), DataError::Kind::Duplicate);
  Files g = make_files(2);
  g.national += "2020-03-06T00:00:00Z,1,2,3\n";
  EXPECT_EQ(data_error_kind([&] { load(g); }), DataError::Kind::Duplicate);
}

TEST(LoadDataset, ParseErrorsCarryLineNumbers) {
  Files f = make_files(2);
  f.zonal += "2020-03-06T02:00:00Z,Atlantis,1,1,1,1,1,1,1,1\n";
  try {
    load(f);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 16u);
  }
  Files g = make_files(1);
  g.zonal = "timestamp,zone\n";
  EXPECT_THROW(load(g), ParseError);
  Files h = make_files(1);
  h.national += "2020-03-06T01:00:00Z,1,2\n";
  EXPECT_THROW(load(h), ParseError);
  Files k = make_files(1);
  k.national += "2020-03-06T01:00:00Z,1,-2,3\n";
  EXPECT_THROW(load(k), ParseError);
  Files m = make_files(1);
  m.zonal += "2020-03-06T01:00:00Z,North,-1,1,1,1,1,1,1,1\n";
  EXPECT_THROW(load(m), ParseError);
  Files e = make_files(1);
  e.zonal = "";
  EXPECT_THROW(load(e), ParseError);
}

TEST(LoadDataset, NegativeCostAndImportsAreFine) {
  Files f = make_files(2);
  f.national = blank_field(f.national, "2020-03-06T01:00:00Z", 1);
  f.national.insert(f.national.find("2020-03-06T01:00:00Z,") + 21, "-250");
  const MarketDataset ds = load(f);
  EXPECT_DOUBLE_EQ(ds.national[1].redispatch_cost_eur, -250.0);
}

TEST(LoadDataset, TimezoneDeclarationShiftsTimestamps) {
  Files f = make_files(2);
  std::string local_zonal = "# timezone: +01:00\n" + std::string(kZonalHeader) + "\n";
  std::string local_nat = "# tz: +01:00\n" + std::string(kNationalHeader) + "\n";
  for (int i = 0; i < 2; ++i) {
    char ts[32];
    std::snprintf(ts, sizeof ts, "2020-03-06 %02d:00", i + 1);
    for (std::size_t z = 0; z < kZoneCount; ++z) {
      local_zonal += std::string(ts) + "," + std::string(zone_name(kZones[z])) + ",1,1,0,0,0,0,0,0\n";
    }
    local_nat += std::string(ts) + ",1,1,1\n";
  }
  std::istringstream z(local_zonal), n(local_nat);
  const MarketDataset ds = load_dataset(z, n, {}, {});
  EXPECT_EQ(ds.hours.front(), parse_timestamp("2020-03-06T00:00Z").value());
  std::istringstream bad_z("# timezone: Europe/Rome\n" + std::string(kZonalHeader) + "\n"), bad_n(f.national);
  EXPECT_THROW(load_dataset(bad_z, bad_n, {}, {}), ParseError);
}

TEST(LoadDataset, WindowAndPartialDays) {
  const Files f = make_files(30);
  const MarketDataset ds = load(f);
  EXPECT_EQ(ds.report.hours, 30u);
  EXPECT_EQ(ds.report.expected_hours, 48u);
  EXPECT_EQ(ds.report.warnings.size(), 1u);

  IngestConfig cfg;
  cfg.start = make_date(2020, 3, 6);
  cfg.end = make_date(2020, 3, 6);
  const MarketDataset day = load(f, cfg);
  EXPECT_EQ(day.size(), 24u);
  EXPECT_TRUE(day.report.warnings.empty());

  cfg.start = make_date(2020, 3, 5);  // before the data: leading cells missing
  EXPECT_EQ(data_error_kind([&] { load(f, cfg); }), DataError::Kind::Boundary);
  cfg.start = make_date(2020, 3, 7);
  cfg.end = make_date(2020, 3, 6);
  EXPECT_THROW(load(f, cfg), RangeError);
}

TEST(LoadDataset, EmptyInputs) {
  Files f;
  f.zonal = std::string(kZonalHeader) + "\n";
  f.national = std::string(kNationalHeader) + "\n";
  EXPECT_EQ(data_error_kind([&] { load(f); }), DataError::Kind::Completeness);
}

TEST(Calendar, WorkdaysWeekendsHolidaysWinter) {
  const Hour fri = parse_timestamp("2020-03-06T12:00Z").value();
  const std::vector<Hour> hs = {fri, fri + 24, fri + 48, fri + 72};
  const std::set<Date> hol = {make_date(2020, 3, 9)};
  const auto flags = annotate_calendar(hs, hol, kDefaultWinterMonths);
  EXPECT_TRUE(flags[0].workday);
  EXPECT_FALSE(flags[1].workday);
  EXPECT_FALSE(flags[2].workday);
  EXPECT_FALSE(flags[3].workday);  // Monday holiday
  EXPECT_TRUE(flags[0].winter);

  const Hour may = parse_timestamp("2020-05-04T12:00Z").value();
  const Hour dec = parse_timestamp("2019-12-02T12:00Z").value();
  const Hour oct = parse_timestamp("2019-10-01T12:00Z").value();
  const std::vector<Hour> m = {may, dec, oct};
  const auto wide = annotate_calendar(m, {}, kDefaultWinterMonths);
  const auto narrow = annotate_calendar(m, {}, kNarrowWinterMonths);
  EXPECT_FALSE(wide[0].winter);
  EXPECT_TRUE(wide[1].winter && narrow[1].winter);
  EXPECT_TRUE(wide[2].winter);
  EXPECT_FALSE(narrow[2].winter);
  EXPECT_THROW(annotate_calendar(m, {}, {}), SpecError);
}

TEST(Calendar, LocalOffsetMovesTheDayBoundary) {
  // 23:00Z Friday is already Saturday at +01:00
  const Hour h = parse_timestamp("2020-03-06T23:00Z").value();
  const std::vector<Hour> hs = {h};
  EXPECT_TRUE(annotate_calendar(hs, {}, kDefaultWinterMonths, 0)[0].workday);
  EXPECT_FALSE(annotate_calendar(hs, {}, kDefaultWinterMonths, 60)[0].workday);
}

TEST(Holidays, ParseWithComments) {
  std::istringstream in("# national\n2020-01-01\n\n2020-04-13  # Easter Monday\n");
  const auto h = parse_holidays(in);
  EXPECT_EQ(h.size(), 2u);
  EXPECT_TRUE(h.contains(make_date(2020, 4, 13)));
  std::istringstream bad("2020-13-01\n");
  EXPECT_THROW(parse_holidays(bad), ParseError);
  EXPECT_THROW(load_holidays("/nonexistent/holidays.txt"), DataError);
}
