#pragma once

// Motes, unit-disk connectivity, and hop-distance utilities.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "wsn/energy.hpp"
#include "wsn/mutesla.hpp"
#include "wsn/rng.hpp"
#include "wsn/snep.hpp"
#include "wsn/wire.hpp"

namespace wsn {

struct Position {
  double x = 0;
  double y = 0;
  friend bool operator==(const Position&, const Position&) = default;
};

inline double distance(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

enum class Role { Honest, Sink, Attacker };

struct Mote {
  MoteId id = 0;
  Position position;
  double radio_range = 10;
  Battery battery;
  SimTime clock_offset = 0;
  Role role = Role::Honest;

  [[nodiscard]] bool alive() const { return !battery.dead(); }
};

class TopologyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct MotePlacement {
  Position position;
  std::optional<double> radio_range;
};

struct TopologyConfig {
  enum class Layout { Explicit, Grid, Random };
  Layout layout = Layout::Grid;
  std::vector<MotePlacement> positions;  // Explicit
  int rows = 0, cols = 0;                // Grid
  double spacing = 10;
  int count = 0;                         // Random
  double width = 100, height = 100;
  std::uint64_t placement_seed = 1;
  std::vector<MotePlacement> extra;      // appended after the layout motes
  double radio_range = 10;
  MoteId sink = 0;
  double initial_energy_mj = 5000;
};

inline constexpr int kUnreachable = -1;

class Network {
 public:
  Network() = default;
  explicit Network(std::vector<Mote> motes, MoteId sink) : motes_(std::move(motes)), sink_(sink) { relink(); }

  [[nodiscard]] std::size_t size() const { return motes_.size(); }
  [[nodiscard]] MoteId sink() const { return sink_; }
  [[nodiscard]] bool contains(MoteId id) const { return id < motes_.size(); }
  [[nodiscard]] const Mote& mote(MoteId id) const { return motes_.at(id); }
  Mote& mote(MoteId id) { return motes_.at(id); }
  [[nodiscard]] const std::vector<Mote>& motes() const { return motes_; }
  std::vector<Mote>& motes() { return motes_; }
  [[nodiscard]] const std::vector<MoteId>& neighbors(MoteId id) const { return adjacency_.at(id); }

  [[nodiscard]] bool linked(MoteId a, MoteId b) const {
    const auto& n = adjacency_.at(a);
    return std::binary_search(n.begin(), n.end(), b);
  }

  /// Motes within `range` of `from` regardless of their own radio range
  /// (models a high-power transmitter).
  [[nodiscard]] std::vector<MoteId> within(MoteId from, double range) const {
    std::vector<MoteId> out;
    for (const auto& m : motes_)
      if (m.id != from && distance(m.position, motes_[from].position) <= range) out.push_back(m.id);
    return out;
  }

  /// BFS hop distance from `from` over radio links, skipping `excluded` motes.
  [[nodiscard]] std::vector<int> hop_distances(MoteId from, const std::set<MoteId>& excluded = {}) const {
    std::vector<int> dist(motes_.size(), kUnreachable);
    if (excluded.contains(from)) return dist;
    std::deque<MoteId> queue{from};
    dist[from] = 0;
    while (!queue.empty()) {
      const MoteId u = queue.front();
      queue.pop_front();
      for (MoteId v : adjacency_[u]) {
        if (dist[v] != kUnreachable || excluded.contains(v)) continue;
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
    return dist;
  }

 private:
  void relink() {
    adjacency_.assign(motes_.size(), {});
    for (std::size_t a = 0; a < motes_.size(); ++a) {
      for (std::size_t b = a + 1; b < motes_.size(); ++b) {
        const double reach = std::min(motes_[a].radio_range, motes_[b].radio_range);
        if (distance(motes_[a].position, motes_[b].position) <= reach + 1e-9) {
          adjacency_[a].push_back(static_cast<MoteId>(b));
          adjacency_[b].push_back(static_cast<MoteId>(a));
        }
      }
    }
    for (auto& n : adjacency_) std::sort(n.begin(), n.end());
  }

  std::vector<Mote> motes_;
  std::vector<std::vector<MoteId>> adjacency_;
  MoteId sink_ = 0;
};

/// Places motes per the layout; ids are assigned densely in placement order
/// (grid: row-major).
inline Network build_topology(const TopologyConfig& cfg) {
  if (cfg.radio_range < 0) throw TopologyError("radio_range must be non-negative");
  if (cfg.initial_energy_mj < 0) throw TopologyError("initial_energy_mj must be non-negative");
  std::vector<MotePlacement> placements;
  switch (cfg.layout) {
    case TopologyConfig::Layout::Explicit:
      placements = cfg.positions;
      break;
    case TopologyConfig::Layout::Grid:
      if (cfg.rows < 0 || cfg.cols < 0) throw TopologyError("grid dimensions must be non-negative");
      if (cfg.spacing <= 0) throw TopologyError("grid spacing must be positive");
      for (int r = 0; r < cfg.rows; ++r)
        for (int c = 0; c < cfg.cols; ++c) placements.push_back({{c * cfg.spacing, r * cfg.spacing}, std::nullopt});
      break;
    case TopologyConfig::Layout::Random: {
      if (cfg.count < 0 || cfg.width <= 0 || cfg.height <= 0) throw TopologyError("invalid random layout");
      Rng rng = Rng::stream(cfg.placement_seed, 0x706c616365);
      for (int i = 0; i < cfg.count; ++i) {
        const double x = rng.uniform01() * cfg.width;
        const double y = rng.uniform01() * cfg.height;
        placements.push_back({{x, y}, std::nullopt});
      }
      break;
    }
  }
  placements.insert(placements.end(), cfg.extra.begin(), cfg.extra.end());
  if (placements.empty()) throw TopologyError("topology has zero motes");
  if (placements.size() >= kBroadcastId) throw TopologyError("too many motes");
  if (cfg.sink >= placements.size()) throw TopologyError("sink id does not name a mote");

  std::vector<Mote> motes;
  motes.reserve(placements.size());
  for (std::size_t i = 0; i < placements.size(); ++i) {
    Mote m;
    m.id = static_cast<MoteId>(i);
    m.position = placements[i].position;
    m.radio_range = placements[i].radio_range.value_or(cfg.radio_range);
    if (m.radio_range < 0) throw TopologyError("negative radio range for mote " + std::to_string(i));
    m.battery.remaining = mj_to_nj(cfg.initial_energy_mj);
    m.role = i == cfg.sink ? Role::Sink : Role::Honest;
    motes.push_back(m);
  }
  return Network(std::move(motes), cfg.sink);
}

/// Next hop toward the sink and hop distance, per mote. Unreachable motes
/// have no next hop.
struct TreeRoutes {
  std::vector<std::optional<MoteId>> next_hop;
  std::vector<int> hops;

  [[nodiscard]] std::vector<MoteId> unreachable() const {
    std::vector<MoteId> out;
    for (std::size_t i = 0; i < hops.size(); ++i)
      if (hops[i] == kUnreachable) out.push_back(static_cast<MoteId>(i));
    return out;
  }

  /// Mote sequence from `from` to the sink following next hops (bounded).
  [[nodiscard]] std::vector<MoteId> path_to_root(MoteId from) const {
    std::vector<MoteId> path{from};
    for (std::size_t guard = 0; guard < next_hop.size() + 1; ++guard) {
      const auto& nh = next_hop[path.back()];
      if (!nh || *nh == path.back()) break;
      path.push_back(*nh);
    }
    return path;
  }
};

/// Breadth-first hop tree rooted at the sink; ties go to the lowest-id
/// neighbor.
inline TreeRoutes beacon_tree_route(const Network& net, MoteId sink) {
  TreeRoutes t;
  t.hops = net.hop_distances(sink);
  t.next_hop.assign(net.size(), std::nullopt);
  for (MoteId v = 0; v < net.size(); ++v) {
    if (t.hops[v] == kUnreachable) continue;
    if (v == sink) {
      t.next_hop[v] = sink;
      continue;
    }
    for (MoteId u : net.neighbors(v)) {  // sorted ascending
      if (t.hops[u] == t.hops[v] - 1) {
        t.next_hop[v] = u;
        break;
      }
    }
  }
  return t;
}

/// Tree formed when some motes advertise a forged hop count. Liars keep
/// their honest next hop; every other mote picks the neighbor minimizing
/// advertised + 1, lowest id on ties.
inline TreeRoutes beacon_tree_route(const Network& net, MoteId sink, const std::map<MoteId, int>& advertised) {
  const TreeRoutes honest = beacon_tree_route(net, sink);
  constexpr int kInf = std::numeric_limits<int>::max() / 4;
  std::vector<int> dist(net.size(), kInf);
  dist[sink] = 0;
  auto adv = [&](MoteId u) {
    const auto it = advertised.find(u);
    if (it != advertised.end() && u != sink) return honest.hops[u] == kUnreachable ? kInf : it->second;
    return dist[u];
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (MoteId v = 0; v < net.size(); ++v) {
      if (v == sink) continue;
      if (advertised.contains(v)) {
        const int h = honest.hops[v] == kUnreachable ? kInf : honest.hops[v];
        if (dist[v] != h) dist[v] = h, changed = true;
        continue;
      }
      int best = kInf;
      for (MoteId u : net.neighbors(v))
        if (adv(u) < kInf) best = std::min(best, adv(u) + 1);
      if (best < dist[v]) dist[v] = best, changed = true;
    }
  }
  TreeRoutes t;
  t.hops.assign(net.size(), kUnreachable);
  t.next_hop.assign(net.size(), std::nullopt);
  for (MoteId v = 0; v < net.size(); ++v) {
    if (dist[v] >= kInf) continue;
    t.hops[v] = dist[v];
    if (v == sink) {
      t.next_hop[v] = sink;
    } else if (advertised.contains(v)) {
      t.next_hop[v] = honest.next_hop[v];
    } else {
      for (MoteId u : net.neighbors(v)) {
        if (adv(u) < kInf && adv(u) + 1 == dist[v]) {
          t.next_hop[v] = u;
          break;
        }
      }
    }
  }
  return t;
}

}  // namespace wsn
