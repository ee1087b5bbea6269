#pragma once

// Serialization of run outputs: metrics.csv, summary.json, detection.csv,
// and parsers for each so emitted artifacts can be re-read.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wsn/scenario.hpp"
#include "wsn/simulator.hpp"

namespace wsn {

inline constexpr int kReportFormatVersion = 1;

/// Millijoules with six decimals, exact for nanojoule amounts.
inline std::string format_mj(Nanojoules nj) {
  const bool neg = nj < 0;
  const auto abs = static_cast<std::uint64_t>(neg ? -nj : nj);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%llu.%06llu", neg ? "-" : "", static_cast<unsigned long long>(abs / 1'000'000),
                static_cast<unsigned long long>(abs % 1'000'000));
  return buf;
}

inline const char* to_string(Role r) {
  switch (r) {
    case Role::Honest: return "honest";
    case Role::Sink: return "sink";
    case Role::Attacker: return "attacker";
  }
  return "?";
}

/// Columns: time_bin_ms, scope, metric, value. Per bin: every global counter,
/// global energy, then per-mote energy.
inline std::string metrics_csv(const MetricsReport& r) {
  std::ostringstream out;
  out << "time_bin_ms,scope,metric,value\n";
  for (std::size_t b = 0; b < r.global_bins.size(); ++b) {
    const SimTime t = static_cast<SimTime>(b) * r.bin_ms;
    for (const auto& name : metric_names()) {
      const auto it = r.global_bins[b].find(name);
      out << t << ",global," << name << ',' << (it == r.global_bins[b].end() ? 0 : it->second) << '\n';
    }
    Nanojoules total = 0;
    for (const auto& m : r.mote_energy_bins) total += m[b];
    out << t << ",global,energy_spent_mj," << format_mj(total) << '\n';
    for (std::size_t m = 0; m < r.mote_energy_bins.size(); ++m)
      out << t << ",mote:" << m << ",energy_spent_mj," << format_mj(r.mote_energy_bins[m][b]) << '\n';
  }
  return out.str();
}

inline json detection_json(const DetectionReport& d) {
  json j;
  j["rounds_run"] = d.rounds_run;
  j["clean_count"] = d.clean_count;
  j["altered_count"] = d.altered_count;
  j["missing_count"] = d.missing_count;
  j["spoofing_detected"] = d.spoofing_detected;
  j["loss_advisory"] = d.loss_advisory ? "possible black hole or denial of service" : "";
  j["first_detection_ms"] = d.first_detection_ms ? json(*d.first_detection_ms) : json(nullptr);
  j["suspected_paths"] = d.suspected_paths;
  return j;
}

inline json summary_json(const MetricsReport& r) {
  json j;
  j["format_version"] = kReportFormatVersion;
  j["scenario"] = scenario_to_json(r.scenario);
  j["end_time_ms"] = r.end_time_ms;
  json totals;
  for (const auto& name : metric_names()) totals[name] = r.total(name);
  j["totals"] = totals;
  json motes = json::array();
  for (const auto& m : r.motes) {
    json e;
    e["id"] = m.id;
    e["role"] = to_string(m.role);
    if (!m.behavior.empty()) e["behavior"] = m.behavior;
    e["spent_mj"] = format_mj(m.spent);
    e["remaining_mj"] = format_mj(m.remaining);
    e["alive"] = m.alive;
    e["neighbor_table_size"] = m.neighbor_table_size;
    e["transit_packets"] = m.transit_packets;
    e["hellos_received"] = m.hellos_received;
    e["tree_parent"] = m.tree_parent ? json(*m.tree_parent) : json(nullptr);
    e["tree_hops"] = m.tree_hops;
    motes.push_back(e);
  }
  j["energy"] = {{"total_spent_mj", format_mj(r.energy_spent())}, {"motes", motes}};
  json flows = json::array();
  for (const auto& [k, f] : r.flows)
    flows.push_back({{"src", k.first}, {"dst", k.second}, {"sent", f.sent}, {"delivered", f.delivered}, {"dropped", f.dropped}});
  j["flows"] = flows;
  j["unreachable_motes"] = r.unreachable;
  j["detection"] = r.detection ? detection_json(*r.detection) : json(nullptr);
  return j;
}

/// Columns: time_ms, round, seq, path_index, outcome (path_index empty for
/// unknown sequences).
inline std::string detection_csv(const DetectionReport& d) {
  std::ostringstream out;
  out << "time_ms,round,seq,path_index,outcome\n";
  for (const auto& e : d.events) {
    out << e.time << ',' << e.round << ',' << e.seq << ',';
    if (e.path_index) out << *e.path_index;
    out << ',' << to_string(e.outcome) << '\n';
  }
  return out.str();
}

// ---- parsing --------------------------------------------------------

class ReportParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::vector<std::vector<std::string>> parse_csv(const std::string& text, std::size_t columns) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != columns) throw ReportParseError("line " + std::to_string(n) + ": expected " + std::to_string(columns) + " columns");
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw ReportParseError("missing header");
  return rows;
}

struct MetricRow {
  SimTime time_bin_ms = 0;
  std::string scope;
  std::string metric;
  double value = 0;
  std::string raw_value;
};

inline std::vector<MetricRow> parse_metrics_csv(const std::string& text) {
  auto rows = parse_csv(text, 4);
  if (rows[0] != std::vector<std::string>{"time_bin_ms", "scope", "metric", "value"})
    throw ReportParseError("unexpected metrics header");
  std::vector<MetricRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    MetricRow m;
    try {
      m.time_bin_ms = std::stoll(rows[i][0]);
      m.value = std::stod(rows[i][3]);
    } catch (const std::exception&) {
      throw ReportParseError("line " + std::to_string(i + 1) + ": bad number");
    }
    m.scope = rows[i][1];
    m.metric = rows[i][2];
    m.raw_value = rows[i][3];
    out.push_back(std::move(m));
  }
  return out;
}

inline std::vector<DetectionEvent> parse_detection_csv(const std::string& text) {
  auto rows = parse_csv(text, 5);
  if (rows[0] != std::vector<std::string>{"time_ms", "round", "seq", "path_index", "outcome"})
    throw ReportParseError("unexpected detection header");
  std::vector<DetectionEvent> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    DetectionEvent e;
    try {
      e.time = std::stoll(rows[i][0]);
      e.round = static_cast<std::uint32_t>(std::stoul(rows[i][1]));
      e.seq = static_cast<std::uint32_t>(std::stoul(rows[i][2]));
      if (!rows[i][3].empty()) e.path_index = std::stoul(rows[i][3]);
    } catch (const std::exception&) {
      throw ReportParseError("line " + std::to_string(i + 1) + ": bad number");
    }
    const auto& o = rows[i][4];
    if (o == "clean") e.outcome = ProbeOutcome::Clean;
    else if (o == "altered") e.outcome = ProbeOutcome::Altered;
    else if (o == "missing") e.outcome = ProbeOutcome::Missing;
    else if (o == "unknown_sequence") e.outcome = ProbeOutcome::UnknownSequence;
    else throw ReportParseError("line " + std::to_string(i + 1) + ": unknown outcome");
    out.push_back(e);
  }
  return out;
}

inline json parse_summary(const std::string& text) {
  try {
    auto j = json::parse(text);
    if (!j.is_object() || !j.contains("format_version")) throw ReportParseError("not a summary document");
    return j;
  } catch (const json::exception& e) {
    throw ReportParseError(e.what());
  }
}

// ---- files ----------------------------------------------------------

class ReportIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ReportIoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw ReportIoError("failed writing " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ReportIoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw ReportIoError("cannot create output directory " + dir.string());
}

/// Writes metrics.csv, summary.json and, when detection ran, detection.csv.
inline void write_run_outputs(const MetricsReport& r, const std::filesystem::path& dir) {
  ensure_dir(dir);
  write_text(dir / "metrics.csv", metrics_csv(r));
  write_text(dir / "summary.json", summary_json(r).dump(2) + "\n");
  if (r.detection) write_text(dir / "detection.csv", detection_csv(*r.detection));
}

}  // namespace wsn
