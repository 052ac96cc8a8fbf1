#pragma once

#include <cstdint>
#include <set>

#include <json.hpp>

#include "rdcost/timeutil.hpp"

namespace rdcost {

enum class Fold : std::uint8_t { Train, Validation, PreLockdown, Lockdown, Excluded };

std::string_view fold_name(Fold f);

inline DateRange default_in_sample_range() { return {make_date(2017, 1, 1), make_date(2019, 12, 31)}; }
inline DateRange default_pre_lockdown_range() { return {make_date(2020, 1, 1), make_date(2020, 3, 7)}; }
inline DateRange default_lockdown_range() { return {make_date(2020, 3, 8), make_date(2020, 4, 26)}; }

/// Day-level research design: a seeded train/validation partition of the
/// in-sample days plus two out-of-sample windows that never overlap it.
struct SplitPlan {
  std::set<Date> train_days;
  std::set<Date> validation_days;
  DateRange in_sample = default_in_sample_range();
  DateRange oos_pre_lockdown = default_pre_lockdown_range();
  DateRange oos_lockdown = default_lockdown_range();
  double ratio = 0.7;
  std::uint64_t seed = 0;

  Fold fold_of(Date d) const;

  friend bool operator==(const SplitPlan&, const SplitPlan&) = default;
};

/// floor(ratio * N) days of the shuffled in-sample range go to training.
/// Every hour of a day shares its day's fold.
SplitPlan make_split(const DateRange& in_sample, double ratio, std::uint64_t seed,
                     const DateRange& pre_lockdown = default_pre_lockdown_range(),
                     const DateRange& lockdown = default_lockdown_range());

/// Re-splits using only `year` as the in-sample range, same ratio and seed.
SplitPlan restrict_in_sample(const SplitPlan& plan, int year);

nlohmann::json split_to_json(const SplitPlan& plan);
SplitPlan split_from_json(const nlohmann::json& j);

}  // namespace rdcost
