#pragma once

#include <iosfwd>
#include <vector>

#include "rdcost/market_data.hpp"

namespace rdcost {

/// One hour of the net-demand panel. `res` and `res_fc` carry the zonal
/// solar+wind totals (actual and forecast) that the counterfactual
/// scenarios rescale.
struct PanelRow {
  Hour hour = 0;
  Date date{};
  ZoneArray<double> nd{};
  ZoneArray<double> nd_fc{};
  ZoneArray<double> res{};
  ZoneArray<double> res_fc{};
  double nd_system = 0.0;
  double nd_fc_system = 0.0;
  double da_price = 0.0;
  double gas_price = 0.0;
  double redispatch_cost = 0.0;
  CalendarFlags flags;
};

struct NetDemandPanel {
  std::vector<PanelRow> rows;
  int utc_offset_minutes = 0;

  std::size_t size() const { return rows.size(); }

  /// Rows whose local date falls in `range`, order preserved.
  NetDemandPanel slice(const DateRange& range) const;
};

/// D - (solar + wind) - hydro - imports. Throws DataError(Completeness) if
/// any component is missing.
double zonal_net_demand(const HourlyZonalRecord& r);

/// Forecast analogue: demand and renewables replaced by their day-ahead
/// forecasts; hydro and imports enter at their firm values.
double zonal_net_demand_forecast(const HourlyZonalRecord& r);

/// Left fold over the canonical zone order. Every system total in the
/// library goes through here so sums are reproducible bit for bit.
inline double system_sum(const ZoneArray<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

/// Refreshes nd_system / nd_fc_system after zonal values change.
inline void recompute_system(PanelRow& r) {
  r.nd_system = system_sum(r.nd);
  r.nd_fc_system = system_sum(r.nd_fc);
}

NetDemandPanel build_panel(const MarketDataset& ds);

void write_panel_csv(const NetDemandPanel& panel, std::ostream& out);

}  // namespace rdcost
