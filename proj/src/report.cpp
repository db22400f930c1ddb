#include "paisc/report.hpp"

#include <cstdio>

namespace paisc {

namespace {

nlohmann::json box_json(const Box& b) {
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t i = 0; i < b.dim(); ++i) j.push_back({b[i].lo(), b[i].hi()});
  return j;
}

Box box_from(const nlohmann::json& j) {
  std::vector<Interval> sides;
  for (const auto& s : j) sides.emplace_back(s.at(0).get<double>(), s.at(1).get<double>());
  return Box(std::move(sides));
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

nlohmann::json paving_to_json(const Paving& p, const Constraint& c) {
  nlohmann::json j;
  j["variables"] = std::vector<std::string>(c.vars().begin(), c.vars().end());
  j["domain"] = box_json(c.domain());
  j["accuracy"] = p.accuracy;
  j["exhausted"] = p.exhausted;
  j["inner"] = nlohmann::json::array();
  j["outer"] = nlohmann::json::array();
  for (const auto& b : p.inner) j["inner"].push_back(box_json(b));
  for (const auto& b : p.outer) j["outer"].push_back(box_json(b));
  return j;
}

Paving paving_from_json(const nlohmann::json& j) {
  Paving p;
  p.accuracy = j.at("accuracy").get<double>();
  p.exhausted = j.at("exhausted").get<bool>();
  for (const auto& b : j.at("inner")) p.inner.push_back(box_from(b));
  for (const auto& b : j.at("outer")) p.outer.push_back(box_from(b));
  return p;
}

nlohmann::json report_to_json(const EstimateReport& r, const ReportMeta& meta) {
  nlohmann::json j;
  j["method"] = meta.method;
  j["subject"] = meta.subject;
  j["seed"] = meta.seed;
  j["samples"] = r.n_samples;
  j["mean"] = r.mean;
  j["variance"] = r.variance;
  j["rae"] = meta.truth && *meta.truth != 0.0 ? nlohmann::json(rae(r.mean, *meta.truth)) : nlohmann::json();
  j["wall_ms"] = meta.wall_ms;
  j["trace"] = nlohmann::json::array();
  for (const auto& t : r.trace) j["trace"].push_back({t.samples_used, t.running_mean});
  return j;
}

std::string report_csv_header() { return "method,subject,seed,samples,mean,variance,rae\n"; }

std::string report_csv_row(const EstimateReport& r, const ReportMeta& meta) {
  std::string row = meta.method + "," + meta.subject + "," + std::to_string(meta.seed) + "," +
                    std::to_string(r.n_samples) + "," + fmt(r.mean) + "," + fmt(r.variance) + ",";
  row += meta.truth && *meta.truth != 0.0 ? fmt(rae(r.mean, *meta.truth)) : "NA";
  return row + "\n";
}

}  // namespace paisc
