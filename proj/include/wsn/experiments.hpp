#pragma once

// Canned experiments behind the CLI: the routing attack matrix and the
// crypto energy comparison.

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "wsn/attack_matrix.hpp"
#include "wsn/report.hpp"
#include "wsn/simulator.hpp"

namespace wsn {

inline const char* yes_no(bool b) { return b ? "yes" : "no"; }

/// attack,dsr,aodv,expected_dsr,expected_aodv,match
inline std::string attack_matrix_csv(const AttackMatrix& m) {
  std::ostringstream out;
  out << "attack,dsr,aodv,expected_dsr,expected_aodv,match\n";
  for (MatrixAttack a : kMatrixAttacks) {
    const bool dsr = m.cell(a, RouteVariant::Dsr).corrupted;
    const bool aodv = m.cell(a, RouteVariant::Aodv).corrupted;
    const auto want = expected_susceptibility(a);
    out << to_string(a) << ',' << yes_no(dsr) << ',' << yes_no(aodv) << ',' << yes_no(want[0]) << ','
        << yes_no(want[1]) << ',' << yes_no(dsr == want[0] && aodv == want[1]) << '\n';
  }
  return out.str();
}

/// Human-readable table plus a diff against the expected matrix.
inline std::string attack_matrix_text(const AttackMatrix& m) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-34s %-4s %-4s\n", "attack", "DSR", "AODV");
  out << line;
  for (MatrixAttack a : kMatrixAttacks) {
    std::snprintf(line, sizeof line, "%-34s %-4s %-4s\n", to_string(a), yes_no(m.cell(a, RouteVariant::Dsr).corrupted),
                  yes_no(m.cell(a, RouteVariant::Aodv).corrupted));
    out << line;
  }
  const auto diff = m.diff_against_expected();
  if (diff.empty()) {
    out << "diff vs expected: none (all 10 cells match)\n";
  } else {
    out << "diff vs expected: " << diff.size() << " cell(s)\n";
    for (const auto& c : diff)
      out << "  " << to_string(c.attack) << " / " << to_string(c.variant) << ": got " << yes_no(c.corrupted)
          << ", expected " << yes_no(!c.corrupted) << '\n';
  }
  return out.str();
}

inline json attack_matrix_json(const AttackMatrix& m) {
  json cells = json::array();
  for (const auto& c : m.cells)
    cells.push_back({{"attack", to_string(c.attack)},
                     {"variant", to_string(c.variant)},
                     {"corrupted", c.corrupted},
                     {"expected", expected_susceptibility(c.attack)[c.variant == RouteVariant::Dsr ? 0 : 1]},
                     {"corrupted_motes", c.corrupted_motes}});
  return {{"format_version", kReportFormatVersion}, {"matches_expected", m.diff_against_expected().empty()}, {"cells", cells}};
}

// ---- energy report --------------------------------------------------

struct PresetRun {
  std::string algorithm;
  Nanojoules handshake = 0;  // key exchange across all motes
  Nanojoules total = 0;      // whole run
  std::int64_t delivered = 0;
};

struct EnergyReport {
  EnergyModel model;
  std::vector<PresetRun> presets;
  std::string cheaper_kx;  // cheaper of RSA1024 and ECC160 by key-exchange total
};

/// Ten motes in a 2x5 grid, each sending five reports to the sink after a
/// key exchange under the given preset.
inline Scenario energy_preset_scenario(const std::string& algorithm, const EnergyModel& model = {}) {
  Scenario s;
  s.name = "energy-preset-" + algorithm;
  s.seed = 1;
  s.duration_ms = 2000;
  s.topology.layout = TopologyConfig::Layout::Grid;
  s.topology.rows = 2;
  s.topology.cols = 5;
  s.topology.spacing = 10;
  s.topology.radio_range = 10;
  s.topology.sink = 0;
  s.topology.initial_energy_mj = 50000;
  s.energy = model;
  s.protocols.handshake = algorithm;
  for (MoteId m = 1; m < 10; ++m) {
    TrafficCommand t;
    t.at_ms = 100 + m;
    t.src = m;
    t.payload = to_bytes("reading-0123456789");
    t.count = 5;
    t.interval_ms = 300;
    s.traffic.push_back(t);
  }
  return s;
}

inline EnergyReport energy_report(const EnergyModel& model = {}) {
  EnergyReport r;
  r.model = model;
  for (const auto& [alg, costs] : model.asym) {
    Scenario s = energy_preset_scenario(alg, model);
    const auto rep = run(s);
    PresetRun p;
    p.algorithm = alg;
    p.handshake = 9 * (mj_to_nj(costs.kx_client_mj) + mj_to_nj(costs.kx_server_mj));
    p.total = rep.energy_spent();
    p.delivered = rep.total("packets_delivered");
    r.presets.push_back(p);
  }
  const auto& rsa = model.asym_costs("RSA1024");
  const auto& ecc = model.asym_costs("ECC160");
  r.cheaper_kx = mj_to_nj(ecc.kx_total_mj()) < mj_to_nj(rsa.kx_total_mj()) ? "ECC160" : "RSA1024";
  return r;
}

/// algorithm,sign_mj,verify_mj,kx_client_mj,kx_server_mj,kx_total_mj
inline std::string asymmetric_csv(const EnergyModel& m) {
  std::ostringstream out;
  out << "algorithm,sign_mj,verify_mj,kx_client_mj,kx_server_mj,kx_total_mj\n";
  for (const auto& [alg, c] : m.asym)
    out << alg << ',' << format_mj(mj_to_nj(c.sign_mj)) << ',' << format_mj(mj_to_nj(c.verify_mj)) << ','
        << format_mj(mj_to_nj(c.kx_client_mj)) << ',' << format_mj(mj_to_nj(c.kx_server_mj)) << ','
        << format_mj(mj_to_nj(c.kx_client_mj) + mj_to_nj(c.kx_server_mj)) << '\n';
  return out.str();
}

/// cipher,clocks,normalized,block_cost_mj,cost_relative_to_<default>
inline std::string symmetric_csv(const EnergyModel& m) {
  std::ostringstream out;
  out << "cipher,clocks,normalized,block_cost_mj,relative_cost\n";
  const double base = static_cast<double>(m.sym_block_cost(m.cipher));
  char rel[32];
  for (const auto& [name, p] : m.ciphers) {
    std::snprintf(rel, sizeof rel, "%.4f", static_cast<double>(m.sym_block_cost(name)) / base);
    char clocks[32];
    std::snprintf(clocks, sizeof clocks, "%.3f", p.clocks);
    char norm[32];
    std::snprintf(norm, sizeof norm, "%.2f", p.normalized);
    out << name << ',' << clocks << ',' << norm << ',' << format_mj(m.sym_block_cost(name)) << ',' << rel << '\n';
  }
  return out.str();
}

/// preset,handshake_mj,total_mj,delivered
inline std::string presets_csv(const EnergyReport& r) {
  std::ostringstream out;
  out << "preset,handshake_mj,total_mj,delivered\n";
  for (const auto& p : r.presets)
    out << p.algorithm << ',' << format_mj(p.handshake) << ',' << format_mj(p.total) << ',' << p.delivered << '\n';
  return out.str();
}

inline std::string energy_report_text(const EnergyReport& r) {
  std::ostringstream out;
  out << "asymmetric operations (mJ)\n" << asymmetric_csv(r.model) << '\n';
  out << "symmetric ciphers (relative to " << r.model.cipher << ")\n" << symmetric_csv(r.model) << '\n';
  out << "10-mote scenario per preset\n" << presets_csv(r) << '\n';
  out << "cheaper key exchange (RSA1024 vs ECC160): " << r.cheaper_kx << '\n';
  return out.str();
}

inline void write_attack_matrix(const AttackMatrix& m, const std::filesystem::path& dir) {
  ensure_dir(dir);
  write_text(dir / "attack_matrix.csv", attack_matrix_csv(m));
  write_text(dir / "attack_matrix.json", attack_matrix_json(m).dump(2) + "\n");
}

inline void write_energy_report(const EnergyReport& r, const std::filesystem::path& dir) {
  ensure_dir(dir);
  write_text(dir / "energy_asymmetric.csv", asymmetric_csv(r.model));
  write_text(dir / "energy_symmetric.csv", symmetric_csv(r.model));
  write_text(dir / "energy_presets.csv", presets_csv(r));
  write_text(dir / "energy_report.json",
             json{{"format_version", kReportFormatVersion}, {"cheaper_key_exchange", r.cheaper_kx}}.dump(2) + "\n");
}

}  // namespace wsn
