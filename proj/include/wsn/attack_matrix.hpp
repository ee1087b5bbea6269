#pragma once

// Route-corruption susceptibility of the two routing variants to five
// routing attacks, measured on a fixed grid.

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wsn/routing.hpp"

namespace wsn {

enum class MatrixAttack { Spoofing, SeqNoModification, HopCountModification, SourceRouteModification, Tunneling };

inline constexpr std::array<MatrixAttack, 5> kMatrixAttacks{
    MatrixAttack::Spoofing, MatrixAttack::SeqNoModification, MatrixAttack::HopCountModification,
    MatrixAttack::SourceRouteModification, MatrixAttack::Tunneling};

inline const char* to_string(MatrixAttack a) {
  switch (a) {
    case MatrixAttack::Spoofing: return "spoofing";
    case MatrixAttack::SeqNoModification: return "modification of sequence numbers";
    case MatrixAttack::HopCountModification: return "modification of hop counts";
    case MatrixAttack::SourceRouteModification: return "modification of source routes";
    case MatrixAttack::Tunneling: return "tunneling";
  }
  return "?";
}

/// Expected susceptibility: {DSR, AODV}.
inline std::array<bool, 2> expected_susceptibility(MatrixAttack a) {
  switch (a) {
    case MatrixAttack::Spoofing: return {true, true};
    case MatrixAttack::SeqNoModification: return {false, true};
    case MatrixAttack::HopCountModification: return {false, true};
    case MatrixAttack::SourceRouteModification: return {true, false};
    case MatrixAttack::Tunneling: return {true, true};
  }
  return {false, false};
}

struct MatrixCell {
  MatrixAttack attack = MatrixAttack::Spoofing;
  RouteVariant variant = RouteVariant::Aodv;
  bool corrupted = false;
  std::vector<MoteId> corrupted_motes;  // honest origins whose installed route met the criterion
};

struct AttackMatrix {
  std::vector<MatrixCell> cells;  // attack-major, DSR before AODV

  [[nodiscard]] const MatrixCell& cell(MatrixAttack a, RouteVariant v) const {
    for (const auto& c : cells)
      if (c.attack == a && c.variant == v) return c;
    throw std::out_of_range("no such matrix cell");
  }

  /// Cells differing from the expected matrix.
  [[nodiscard]] std::vector<MatrixCell> diff_against_expected() const {
    std::vector<MatrixCell> out;
    for (const auto& c : cells) {
      const bool want = expected_susceptibility(c.attack)[c.variant == RouteVariant::Dsr ? 0 : 1];
      if (c.corrupted != want) out.push_back(c);
    }
    return out;
  }
};

struct MatrixSetup {
  int grid_side = 5;
  double spacing = 10;
  MoteId sink = 0;
  MoteId attacker = 12;                       // grid center
  std::pair<MoteId, MoteId> wormhole{6, 18};  // one end near the sink, one far
};

inline Network matrix_grid(const MatrixSetup& setup = {}) {
  TopologyConfig cfg;
  cfg.layout = TopologyConfig::Layout::Grid;
  cfg.rows = cfg.cols = setup.grid_side;
  cfg.spacing = setup.spacing;
  cfg.radio_range = setup.spacing;
  cfg.sink = setup.sink;
  return build_topology(cfg);
}

inline std::map<MoteId, AttackerBehavior> matrix_attackers(MatrixAttack a, const MatrixSetup& setup = {}) {
  switch (a) {
    case MatrixAttack::Spoofing: return {{setup.attacker, Spoof{}}};
    case MatrixAttack::SeqNoModification: return {{setup.attacker, FieldModify{RouteField::SeqNo}}};
    case MatrixAttack::HopCountModification: return {{setup.attacker, FieldModify{RouteField::HopCount}}};
    case MatrixAttack::SourceRouteModification: return {{setup.attacker, FieldModify{RouteField::SourceRoute}}};
    case MatrixAttack::Tunneling: {
      const auto [a_end, b_end] = setup.wormhole;
      return {{a_end, Wormhole{b_end}}, {b_end, Wormhole{a_end}}};
    }
  }
  return {};
}

/// Every honest mote discovers a route to the sink on fresh tables; the cell
/// is "yes" when any installed route meets the corruption criterion.
inline MatrixCell run_matrix_cell(MatrixAttack attack, RouteVariant variant, bool attacks_enabled = true,
                                  const MatrixSetup& setup = {}) {
  const Network net = matrix_grid(setup);
  const auto behaviors = attacks_enabled ? matrix_attackers(attack, setup) : std::map<MoteId, AttackerBehavior>{};
  std::set<MoteId> bad;
  for (const auto& [id, b] : behaviors) bad.insert(id);

  MatrixCell cell{attack, variant, false, {}};
  DiscoveryConfig cfg;
  cfg.variant = variant;
  std::uint32_t request_id = 1;
  for (MoteId origin = 0; origin < net.size(); ++origin) {
    if (origin == setup.sink || bad.contains(origin)) continue;
    AttackerSet attackers(net, behaviors);
    std::vector<RouteTable> tables(net.size());
    DiscoveryEngine engine(net, attackers, tables, cfg);
    const auto result = engine.discover(origin, setup.sink, 0, request_id++);
    if (result.route && route_corrupted(net, *result.route, origin, bad)) cell.corrupted_motes.push_back(origin);
  }
  cell.corrupted = !cell.corrupted_motes.empty();
  return cell;
}

inline AttackMatrix run_attack_matrix(bool attacks_enabled = true, const MatrixSetup& setup = {}) {
  AttackMatrix m;
  for (MatrixAttack a : kMatrixAttacks)
    for (RouteVariant v : {RouteVariant::Dsr, RouteVariant::Aodv}) m.cells.push_back(run_matrix_cell(a, v, attacks_enabled, setup));
  return m;
}

}  // namespace wsn
