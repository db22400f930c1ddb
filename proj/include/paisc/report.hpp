#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "paisc/constraint.hpp"
#include "paisc/estimators.hpp"
#include "paisc/paving.hpp"

namespace paisc {

// {"variables": [...], "domain": [[lo,hi],...], "accuracy": a,
//  "exhausted": b, "inner": [box...], "outer": [box...]}
// with each box a list of [lo,hi] pairs in variable order.
nlohmann::json paving_to_json(const Paving& p, const Constraint& c);
Paving paving_from_json(const nlohmann::json& j);

struct ReportMeta {
  std::string method;
  std::string subject;
  std::uint64_t seed = 0;
  std::optional<double> truth;
  double wall_ms = 0.0;
};

// {"method","subject","seed","samples","mean","variance","rae"|null,
//  "wall_ms","trace":[[samples_used, running_mean],...]}
nlohmann::json report_to_json(const EstimateReport& r, const ReportMeta& meta);

// method,subject,seed,samples,mean,variance,rae
std::string report_csv_header();
std::string report_csv_row(const EstimateReport& r, const ReportMeta& meta);

}  // namespace paisc
