#pragma once

#include <string>

#include <json.hpp>

#include "symflow/acceptance.hpp"
#include "symflow/dynamics.hpp"
#include "symflow/novikov.hpp"

namespace symflow {

using json = nlohmann::json;

json to_json(const FixedPointRecord& r);
json to_json(const HomologyRanks& h);
json to_json(const PeriodVector& w);
json to_json(const FluxVector& f);
json to_json(const PeriodicSearchReport& r);
json to_json(const AtlasValidation& v);
json to_json(const ChartAtlas& atlas);  // charts, pairing tables, transitions
json to_json(const AcceptanceReport& r);
json to_json(const IndexAudit& a);

std::string orbit_csv(const OrbitTrace& t);

// sampled field grid for external plotting (value and field components)
std::string field_grid_csv(const PlanarHamiltonian& H, Rect box, int n);

PeriodVector parse_periods(int genus, const std::string& csv_list);

void write_file(const std::string& path, const std::string& content);

}  // namespace symflow
