#include "rdcost/net_demand.hpp"

#include <cmath>
#include <ostream>

#include "rdcost/csv.hpp"
#include "rdcost/error.hpp"

namespace rdcost {
namespace {

void require(double v, const char* what, const HourlyZonalRecord& r) {
  if (!std::isfinite(v)) {
    throw DataError(DataError::Kind::Completeness, std::string("missing ") + what + " for zone " +
                                                       std::string(zone_name(r.zone)) + " at " +
                                                       format_timestamp(r.timestamp));
  }
}

}  // namespace

double zonal_net_demand(const HourlyZonalRecord& r) {
  require(r.demand_mwh, "demand", r);
  require(r.solar_mwh, "solar", r);
  require(r.wind_mwh, "wind", r);
  require(r.hydro_ror_mwh, "hydro", r);
  require(r.net_imports_mwh, "net imports", r);
  return r.demand_mwh - (r.solar_mwh + r.wind_mwh) - r.hydro_ror_mwh - r.net_imports_mwh;
}

double zonal_net_demand_forecast(const HourlyZonalRecord& r) {
  require(r.demand_forecast_mwh, "demand forecast", r);
  require(r.solar_forecast_mwh, "solar forecast", r);
  require(r.wind_forecast_mwh, "wind forecast", r);
  require(r.hydro_ror_mwh, "hydro", r);
  require(r.net_imports_mwh, "net imports", r);
  return r.demand_forecast_mwh - (r.solar_forecast_mwh + r.wind_forecast_mwh) - r.hydro_ror_mwh - r.net_imports_mwh;
}

NetDemandPanel NetDemandPanel::slice(const DateRange& range) const {
  NetDemandPanel out;
  out.utc_offset_minutes = utc_offset_minutes;
  for (const auto& r : rows) {
    if (range.contains(r.date)) out.rows.push_back(r);
  }
  return out;
}

NetDemandPanel build_panel(const MarketDataset& ds) {
  if (ds.zonal.size() != ds.hours.size() * kZoneCount || ds.national.size() != ds.hours.size() ||
      ds.flags.size() != ds.hours.size()) {
    throw DataError(DataError::Kind::Completeness, "dataset is not a complete hourly grid");
  }
  NetDemandPanel panel;
  panel.utc_offset_minutes = ds.utc_offset_minutes;
  panel.rows.resize(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    PanelRow& row = panel.rows[i];
    row.hour = ds.hours[i];
    row.date = ds.local_dates[i];
    for (std::size_t z = 0; z < kZoneCount; ++z) {
      const auto& rec = ds.zonal[i * kZoneCount + z];
      row.nd[z] = zonal_net_demand(rec);
      row.nd_fc[z] = zonal_net_demand_forecast(rec);
      row.res[z] = rec.solar_mwh + rec.wind_mwh;
      row.res_fc[z] = rec.solar_forecast_mwh + rec.wind_forecast_mwh;
    }
    recompute_system(row);
    const auto& nat = ds.national[i];
    row.da_price = nat.da_price_eur_mwh;
    row.gas_price = nat.gas_price_eur_mwh;
    row.redispatch_cost = nat.redispatch_cost_eur;
    row.flags = ds.flags[i];
  }
  return panel;
}

void write_panel_csv(const NetDemandPanel& panel, std::ostream& out) {
  out << "timestamp";
  for (Zone z : kZones) out << ",nd_" << zone_name(z);
  for (Zone z : kZones) out << ",ndfc_" << zone_name(z);
  out << ",nd_system,ndfc_system,da_price,gas_price,redispatch_cost,workday,winter\n";
  for (const auto& r : panel.rows) {
    out << format_timestamp(r.hour);
    for (double v : r.nd) out << ',' << csv::format_number(v);
    for (double v : r.nd_fc) out << ',' << csv::format_number(v);
    out << ',' << csv::format_number(r.nd_system) << ',' << csv::format_number(r.nd_fc_system) << ','
        << csv::format_number(r.da_price) << ',' << csv::format_number(r.gas_price) << ','
        << csv::format_number(r.redispatch_cost) << ',' << (r.flags.workday ? 1 : 0) << ','
        << (r.flags.winter ? 1 : 0) << '\n';
  }
}

}  // namespace rdcost
