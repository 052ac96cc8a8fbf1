#include "rdcost/splits.hpp"

#include <cmath>
#include <vector>

#include "rdcost/error.hpp"
#include "rdcost/rng.hpp"

namespace rdcost {
namespace {

nlohmann::json range_json(const DateRange& r) { return {format_date(r.first), format_date(r.last)}; }

DateRange range_from(const nlohmann::json& j) {
  const auto a = parse_date(j.at(0).get<std::string>());
  const auto b = parse_date(j.at(1).get<std::string>());
  if (!a || !b) throw SpecError("malformed date range in split plan");
  return {*a, *b};
}

}  // namespace

std::string_view fold_name(Fold f) {
  switch (f) {
    case Fold::Train: return "train";
    case Fold::Validation: return "validation";
    case Fold::PreLockdown: return "pre_lockdown";
    case Fold::Lockdown: return "lockdown";
    case Fold::Excluded: break;
  }
  return "excluded";
}

Fold SplitPlan::fold_of(Date d) const {
  if (train_days.contains(d)) return Fold::Train;
  if (validation_days.contains(d)) return Fold::Validation;
  if (oos_pre_lockdown.contains(d)) return Fold::PreLockdown;
  if (oos_lockdown.contains(d)) return Fold::Lockdown;
  return Fold::Excluded;
}

SplitPlan make_split(const DateRange& in_sample, double ratio, std::uint64_t seed, const DateRange& pre_lockdown,
                     const DateRange& lockdown) {
  if (in_sample.empty()) throw RangeError("empty in-sample range");
  if (!(ratio > 0.0 && ratio < 1.0)) throw RangeError("split ratio must lie strictly between 0 and 1");
  if (pre_lockdown.intersects(in_sample) || lockdown.intersects(in_sample)) {
    throw RangeError("out-of-sample windows overlap the in-sample range");
  }
  std::vector<Date> days;
  for (Date d = in_sample.first; d <= in_sample.last; d += std::chrono::days{1}) days.push_back(d);

  // the 1e-9 guards products such as 0.7 * 10 landing a hair below an integer
  const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(days.size()) + 1e-9));

  Rng rng(seed);
  rng.shuffle(days.begin(), days.end());

  SplitPlan plan;
  plan.in_sample = in_sample;
  plan.oos_pre_lockdown = pre_lockdown;
  plan.oos_lockdown = lockdown;
  plan.ratio = ratio;
  plan.seed = seed;
  plan.train_days.insert(days.begin(), days.begin() + static_cast<std::ptrdiff_t>(n_train));
  plan.validation_days.insert(days.begin() + static_cast<std::ptrdiff_t>(n_train), days.end());
  return plan;
}

SplitPlan restrict_in_sample(const SplitPlan& plan, int year) {
  const DateRange y{make_date(year, 1, 1), make_date(year, 12, 31)};
  const DateRange clipped{std::max(y.first, plan.in_sample.first), std::min(y.last, plan.in_sample.last)};
  if (clipped.empty()) throw RangeError("year " + std::to_string(year) + " lies outside the in-sample range");
  return make_split(clipped, plan.ratio, plan.seed, plan.oos_pre_lockdown, plan.oos_lockdown);
}

nlohmann::json split_to_json(const SplitPlan& plan) {
  nlohmann::json j;
  j["seed"] = plan.seed;
  j["ratio"] = plan.ratio;
  j["rng_version"] = Rng::kVersion;
  j["in_sample"] = range_json(plan.in_sample);
  j["oos_pre_lockdown"] = range_json(plan.oos_pre_lockdown);
  j["oos_lockdown"] = range_json(plan.oos_lockdown);
  auto days = [](const std::set<Date>& s) {
    nlohmann::json a = nlohmann::json::array();
    for (Date d : s) a.push_back(format_date(d));
    return a;
  };
  j["train_days"] = days(plan.train_days);
  j["validation_days"] = days(plan.validation_days);
  return j;
}

SplitPlan split_from_json(const nlohmann::json& j) {
  SplitPlan plan;
  plan.seed = j.at("seed").get<std::uint64_t>();
  plan.ratio = j.at("ratio").get<double>();
  plan.in_sample = range_from(j.at("in_sample"));
  plan.oos_pre_lockdown = range_from(j.at("oos_pre_lockdown"));
  plan.oos_lockdown = range_from(j.at("oos_lockdown"));
  auto read_days = [](const nlohmann::json& a, std::set<Date>& out) {
    for (const auto& s : a) {
      const auto d = parse_date(s.get<std::string>());
      if (!d) throw SpecError("malformed day in split plan");
      out.insert(*d);
    }
  };
  read_days(j.at("train_days"), plan.train_days);
  read_days(j.at("validation_days"), plan.validation_days);
  return plan;
}

}  // namespace rdcost
