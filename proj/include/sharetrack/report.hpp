#pragma once

#include <span>
#include <string>

#include <json.hpp>

#include "sharetrack/metrics.hpp"

namespace sharetrack {

// CSV for plotting: header row, then data rows, LF endings. Absent values
// (MISSING buckets, lags without enough overlap) are empty fields. Reals use
// the shortest representation that round-trips.
std::string to_csv(const CcfResult& ccf);
std::string to_csv(std::span<const CcdfPoint> points);
std::string to_csv(const VolumeSeries& series);
std::string to_csv(std::span<const ShareBreakdown> breakdowns);
std::string to_csv(const PowerLawFit& fit);

void to_json(nlohmann::json& j, const CcfResult& ccf);
void to_json(nlohmann::json& j, const CcdfPoint& p);
void to_json(nlohmann::json& j, const VolumeSeries& s);
void to_json(nlohmann::json& j, const PowerLawFit& fit);
void to_json(nlohmann::json& j, const ShareBreakdown& b);

}  // namespace sharetrack
