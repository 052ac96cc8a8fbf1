#include <gtest/gtest.h>

#include "rdcost/error.hpp"
#include "rdcost/splits.hpp"

using namespace rdcost;

TEST(Split, DefaultDesignSizes) {
  const SplitPlan p = make_split(default_in_sample_range(), 0.7, 42);
  // 2017..2019 holds 1095 days; floor(0.7 * 1095) = 766
  EXPECT_EQ(p.train_days.size(), 766u);
  EXPECT_EQ(p.validation_days.size(), 1095u - 766u);
  for (Date d : p.train_days) EXPECT_FALSE(p.validation_days.contains(d));
  EXPECT_EQ(p.fold_of(make_date(2020, 1, 1)), Fold::PreLockdown);
  EXPECT_EQ(p.fold_of(make_date(2020, 3, 7)), Fold::PreLockdown);
  EXPECT_EQ(p.fold_of(make_date(2020, 3, 8)), Fold::Lockdown);
  EXPECT_EQ(p.fold_of(make_date(2020, 4, 26)), Fold::Lockdown);
  EXPECT_EQ(p.fold_of(make_date(2020, 4, 27)), Fold::Excluded);
  EXPECT_EQ(p.fold_of(make_date(2016, 12, 31)), Fold::Excluded);
}

TEST(Split, ExactRatioProducts) {
  // 0.7 * 10 is 6.999... in binary; the split must still take 7 days
  const SplitPlan p = make_split({make_date(2019, 1, 1), make_date(2019, 1, 10)}, 0.7, 1);
  EXPECT_EQ(p.train_days.size(), 7u);
}

TEST(Split, SeedDeterminesThePartition) {
  const auto a = make_split(default_in_sample_range(), 0.7, 42);
  const auto b = make_split(default_in_sample_range(), 0.7, 42);
  const auto c = make_split(default_in_sample_range(), 0.7, 43);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.train_days, c.train_days);
}

TEST(Split, RejectsBadInputs) {
  EXPECT_THROW(make_split(default_in_sample_range(), 0.0, 1), RangeError);
  EXPECT_THROW(make_split(default_in_sample_range(), 1.0, 1), RangeError);
  EXPECT_THROW(make_split({make_date(2019, 1, 2), make_date(2019, 1, 1)}, 0.5, 1), RangeError);
  EXPECT_THROW(make_split({make_date(2019, 1, 1), make_date(2020, 1, 5)}, 0.5, 1), RangeError);
}

TEST(Split, RestrictToOneYear) {
  const auto full = make_split(default_in_sample_range(), 0.7, 42);
  const auto y = restrict_in_sample(full, 2019);
  EXPECT_EQ(y.in_sample, (DateRange{make_date(2019, 1, 1), make_date(2019, 12, 31)}));
  EXPECT_EQ(y.train_days.size(), 255u);  // floor(0.7 * 365)
  EXPECT_EQ(y.fold_of(make_date(2018, 6, 1)), Fold::Excluded);
  EXPECT_EQ(y.oos_lockdown, full.oos_lockdown);
  EXPECT_THROW(restrict_in_sample(full, 2021), RangeError);
}

TEST(Split, JsonRoundTrip) {
  const auto p = make_split(default_in_sample_range(), 0.6, 9);
  EXPECT_EQ(split_from_json(split_to_json(p)), p);
  EXPECT_EQ(fold_name(Fold::PreLockdown), "pre_lockdown");
}
