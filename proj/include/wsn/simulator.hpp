#pragma once

// Deterministic discrete-event simulation of one scenario. Events run in
// (time, insertion sequence) order on a single thread; every random draw
// comes from streams derived from the scenario seed.

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "wsn/adversary.hpp"
#include "wsn/detection.hpp"
#include "wsn/energy.hpp"
#include "wsn/mutesla.hpp"
#include "wsn/routing.hpp"
#include "wsn/scenario.hpp"
#include "wsn/snep.hpp"
#include "wsn/topology.hpp"

namespace wsn {

/// Global counters, always emitted in this order.
inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{
      "packets_sent",          "packets_delivered",      "packets_dropped",        "altered_accepted",
      "altered_rejected",      "duplicates_rejected",    "mac_failures",           "send_errors",
      "transmissions",         "retransmissions",        "hop_failures",           "acks_sent",
      "ttl_expired",           "route_discoveries",      "route_failures",         "route_errors",
      "control_packets",       "beacons_sent",           "attack_drops",           "attack_modifications",
      "tunnel_transfers",      "hello_packets_sent",     "hello_packets_received", "sybil_announcements",
      "broadcasts_sent",       "broadcasts_buffered",    "broadcasts_discarded",   "broadcasts_authenticated",
      "broadcast_forgeries_accepted", "broadcast_mac_failures", "disclosures_sent", "bad_disclosures",
      "probes_sent",           "probes_clean",           "probes_altered",         "probes_missing",
  };
  return names;
}

struct FlowStats {
  std::int64_t sent = 0;
  std::int64_t delivered = 0;
  std::int64_t dropped = 0;
};

struct MoteSummary {
  MoteId id = 0;
  Role role = Role::Honest;
  std::string behavior;  // attackers only
  Nanojoules initial = 0;
  Nanojoules spent = 0;
  Nanojoules remaining = 0;
  bool alive = true;
  std::size_t neighbor_table_size = 0;
  std::int64_t transit_packets = 0;  // distinct data packets relayed (not originated or consumed)
  std::int64_t hellos_received = 0;
  std::optional<MoteId> tree_parent;
  int tree_hops = kUnreachable;
};

struct MetricsReport {
  Scenario scenario;
  SimTime end_time_ms = 0;
  SimTime bin_ms = 100;
  std::vector<std::map<std::string, std::int64_t>> global_bins;
  std::vector<std::vector<Nanojoules>> mote_energy_bins;  // [mote][bin]
  std::map<std::string, std::int64_t> totals;
  std::vector<MoteSummary> motes;
  std::map<std::pair<MoteId, MoteId>, FlowStats> flows;
  std::vector<MoteId> unreachable;
  std::optional<DetectionReport> detection;

  [[nodiscard]] std::int64_t total(const std::string& name) const {
    const auto it = totals.find(name);
    return it == totals.end() ? 0 : it->second;
  }
  [[nodiscard]] Nanojoules energy_spent() const {
    Nanojoules s = 0;
    for (const auto& m : motes) s += m.spent;
    return s;
  }
};

class Simulator {
 public:
  explicit Simulator(Scenario scenario) : sc_(std::move(scenario)) {
    validate(sc_);
    net_ = build_topology(sc_.topology);
    const std::size_t n = net_.size();
    for (const auto& a : sc_.attackers) {
      net_.mote(a.id).role = Role::Attacker;
      behaviors_[a.id] = a.behavior;
    }
    attackers_ = AttackerSet(net_, behaviors_);
    for (const auto& [id, b] : behaviors_) attacker_rng_.emplace(id, Rng::stream(sc_.seed, 0xA77AC000ull + id));

    Rng clock_rng = Rng::stream(sc_.seed, 0xC10C);
    const SimTime eps = sc_.protocols.mutesla.max_clock_error_ms;
    for (auto& m : net_.motes()) m.clock_offset = m.id == net_.sink() ? 0 : clock_rng.uniform_int(-eps, eps);

    initial_.resize(n);
    for (MoteId i = 0; i < n; ++i) initial_[i] = net_.mote(i).battery.remaining;
    bins_ = static_cast<std::size_t>(std::max<SimTime>(1, (sc_.duration_ms + sc_.metrics_bin_ms - 1) / sc_.metrics_bin_ms));
    global_bins_.assign(bins_, {});
    for (auto& b : global_bins_)
      for (const auto& name : metric_names()) b[name] = 0;
    energy_bins_.assign(n, std::vector<Nanojoules>(bins_, 0));
    neighbor_tables_.assign(n, {});
    transit_.assign(n, {});
    hellos_.assign(n, 0);
    seen_flood_.assign(n, {});
    seen_data_.assign(n, {});
    hop_.assign(n, kInf);
    parent_.assign(n, std::nullopt);
    beacon_pending_.assign(n, false);
    beacon_locked_.assign(n, false);
    tables_.assign(n, {});
  }

  MetricsReport run() {
    schedule_setup();
    while (!queue_.empty()) {
      Event ev = queue_.top();
      if (ev.time > sc_.duration_ms) break;
      queue_.pop();
      now_ = ev.time;
      ev.fn();
    }
    now_ = sc_.duration_ms;
    settle_idle(sc_.duration_ms);
    if (monitor_) monitor_->expire(sc_.duration_ms);
    return build_report();
  }

  [[nodiscard]] const Network& network() const { return net_; }

 private:
  static constexpr int kInf = std::numeric_limits<int>::max() / 4;

  struct Event {
    SimTime time;
    std::uint64_t seq;
    std::function<void()> fn;
    bool operator<(const Event& o) const { return time != o.time ? time > o.time : seq > o.seq; }
  };

  // Simulator-side annotations that travel with a packet; never on the wire.
  struct Envelope {
    WirePacket pkt;
    std::uint64_t id = 0;
    bool altered = false;
    MoteId origin = 0;
    MoteId hop_to = kBroadcastId;  // link-layer addressee
    bool tunneled = false;
  };

  struct PendingHop {
    MoteId from;
    Envelope env;
    int attempts;
    bool acked;
  };

  // ---- event plumbing -------------------------------------------------

  void at(SimTime t, std::function<void()> fn) { queue_.push(Event{t, seq_++, std::move(fn)}); }

  [[nodiscard]] std::size_t bin_of(SimTime t) const {
    return std::min<std::size_t>(bins_ - 1, static_cast<std::size_t>(std::max<SimTime>(0, t) / sc_.metrics_bin_ms));
  }

  void bump(const std::string& name, std::int64_t delta = 1) { global_bins_[bin_of(now_)][name] += delta; }

  [[nodiscard]] bool alive(MoteId id) const { return net_.contains(id) && net_.mote(id).alive(); }

  void charge(MoteId id, Nanojoules cost) {
    const Nanojoules taken = net_.mote(id).battery.draw(cost);
    energy_bins_[id][bin_of(now_)] += taken;
  }

  void charge_op(MoteId id, CryptoOpKind kind, int times = 1) {
    for (int i = 0; i < times; ++i) charge(id, crypto_cost(sc_.energy, CryptoOp{kind, {}}));
  }

  [[nodiscard]] const AttackerBehavior* behavior(MoteId id) const { return attackers_.behavior(id); }

  // ---- setup ----------------------------------------------------------

  [[nodiscard]] bool needs_beacon_tree() const {
    if (sc_.protocols.routing != RoutingMode::Tree) return false;
    const bool unicast = std::any_of(sc_.traffic.begin(), sc_.traffic.end(),
                                     [](const TrafficCommand& t) { return t.type == TrafficCommand::Type::Unicast; });
    const bool routing_attacker = std::any_of(behaviors_.begin(), behaviors_.end(), [](const auto& kv) {
      return std::holds_alternative<Sinkhole>(kv.second) || std::holds_alternative<Wormhole>(kv.second) ||
             std::holds_alternative<Sybil>(kv.second) || std::holds_alternative<FieldModify>(kv.second);
    });
    return unicast || routing_attacker;
  }

  void schedule_setup() {
    for (SimTime b = 1; b <= static_cast<SimTime>(bins_); ++b) {
      const SimTime t = std::min(b * sc_.metrics_bin_ms, sc_.duration_ms);
      if (t < sc_.duration_ms) at(t, [this, t] { settle_idle(t); });
    }

    if (sc_.protocols.handshake) {
      at(0, [this] {
        const std::string& alg = *sc_.protocols.handshake;
        for (const auto& m : net_.motes()) {
          if (m.id == net_.sink() || !alive(m.id) || !alive(net_.sink())) continue;
          charge(m.id, crypto_cost(sc_.energy, CryptoOp{CryptoOpKind::KxClient, alg}));
          charge(net_.sink(), crypto_cost(sc_.energy, CryptoOp{CryptoOpKind::KxServer, alg}));
        }
      });
    }

    if (needs_beacon_tree()) {
      at(0, [this] {
        hop_[net_.sink()] = 0;
        parent_[net_.sink()] = net_.sink();
        send_beacon(net_.sink());
      });
    }

    for (const auto& t : sc_.traffic) {
      for (int i = 0; i < t.count; ++i) {
        const SimTime when = t.at_ms + static_cast<SimTime>(i) * t.interval_ms;
        if (t.type == TrafficCommand::Type::Broadcast) at(when, [this, t] { mutesla_broadcast(t.payload); });
        else at(when, [this, t] { originate(t); });
      }
    }

    const bool broadcasts = std::any_of(sc_.traffic.begin(), sc_.traffic.end(),
                                        [](const TrafficCommand& t) { return t.type == TrafficCommand::Type::Broadcast; });
    if (sc_.protocols.mutesla.enabled) {
      const Key seed = crypto::derive_key(sc_.seed, "mutesla-chain");
      chain_ = KeyChain::generate(seed, sc_.protocols.mutesla.chain);
      for (const auto& m : net_.motes())
        if (m.id != net_.sink() && !behavior(m.id))
          receivers_.emplace(m.id, MuteslaReceiver(chain_->commitment(), chain_->params(), sc_.protocols.mutesla.max_clock_error_ms));
      if (broadcasts) {
        const auto& p = chain_->params();
        for (std::uint32_t i = 1; i <= p.length; ++i) {
          const SimTime t = p.disclosure_time(i);
          if (t > sc_.duration_ms) break;
          at(t, [this] { mutesla_disclose(); });
        }
      }
    }

    if (sc_.detection.enabled) {
      ProbePlan plan;
      plan.period_ms = sc_.detection.period_ms;
      plan.payload_template = sc_.detection.payload_template;
      plan.slack_ms = sc_.detection.slack_ms;
      plan.hop_latency_ms = sc_.protocols.hop_latency_ms;
      plan.probe_key = crypto::derive_key(sc_.seed, "probe-key", net_.sink());
      plan.paths = sc_.detection.paths.empty() ? auto_probe_paths(beacon_tree_route(net_, net_.sink()), net_.sink())
                                               : sc_.detection.paths;
      std::erase_if(plan.paths, [&](const ProbePath& p) { return plan.probe_wire_size(p.size()) > WirePacket::kMaxPayload; });
      monitor_.emplace(plan);
      for (const auto& inj : schedule_probes(plan, sc_.duration_ms)) {
        at(inj.time, [this, inj] { inject_probe(inj); });
        at(inj.time + plan.timeout_for(inj.path_index), [this] { monitor_->expire(now_); });
      }
    }

    for (const auto& [id, b] : behaviors_) {
      if (const auto* h = std::get_if<HelloFlood>(&b)) {
        for (SimTime t = 0; t < sc_.duration_ms; t += h->period_ms) at(t, [this, id = id, h = *h] { hello_tick(id, h); });
      }
    }
  }

  void settle_idle(SimTime upto) {
    const SimTime span = upto - idle_until_;
    if (span <= 0) return;
    const SimTime saved = now_;
    now_ = upto - 1;  // attribute the drain to the bin it accrued in
    const Nanojoules cost = sc_.energy.idle_cost(span);
    for (const auto& m : net_.motes())
      if (m.alive()) charge(m.id, cost);
    now_ = saved;
    idle_until_ = upto;
  }

  // ---- radio ----------------------------------------------------------

  [[nodiscard]] bool link_drops(MoteId from, MoteId to) {
    for (std::size_t i = 0; i < sc_.link_loss.size(); ++i) {
      const auto& l = sc_.link_loss[i];
      if (l.from != from || l.to != to) continue;
      if (!l.drop_first) return true;
      int& used = loss_used_[i];
      if (used < *l.drop_first) {
        ++used;
        return true;
      }
    }
    return false;
  }

  /// One radio transmission. Broadcasts reach every neighbor; unicasts reach
  /// the addressee and any attacker answering for that id. Returns false if
  /// the sender was already dead.
  bool transmit(MoteId from, const Envelope& env, const std::function<void(MoteId, Envelope)>& on_arrival) {
    if (!alive(from)) return false;
    charge(from, sc_.energy.tx_cost(env.pkt.on_air_bits()));
    bump("transmissions");
    for (MoteId r : net_.neighbors(from)) {
      const bool addressed =
          env.hop_to == kBroadcastId || env.hop_to == r || attackers_.answers_for(r, env.hop_to);
      // Scripted loss targets the unicast retry path; floods and beacons are untouched.
      if (!addressed || (env.hop_to != kBroadcastId && link_drops(from, r))) continue;
      Envelope copy = env;
      copy.tunneled = false;
      at(now_ + sc_.protocols.hop_latency_ms, [this, r, copy, on_arrival] {
        if (!alive(r)) return;
        charge(r, sc_.energy.rx_cost(copy.pkt.on_air_bits()));
        on_arrival(r, copy);
      });
    }
    return true;
  }

  /// Out-of-band wormhole hop: no radio energy at either end.
  void tunnel(MoteId from, const Envelope& env, const std::function<void(MoteId, Envelope)>& on_exit) {
    const auto* w = attackers_.as<Wormhole>(from);
    if (!w || !alive(w->peer)) return;
    bump("tunnel_transfers");
    Envelope copy = env;
    copy.tunneled = true;
    const MoteId peer = w->peer;
    at(now_ + w->tunnel_latency_ms, [this, peer, copy, on_exit] {
      if (alive(peer)) on_exit(peer, copy);
    });
  }

  void note_neighbor(MoteId r, MoteId heard) {
    if (heard != r) neighbor_tables_[r].insert(heard);
  }

  // ---- beacon tree ----------------------------------------------------

  [[nodiscard]] int advertised_hop(MoteId id) const {
    if (const auto* s = attackers_.as<Sinkhole>(id)) return s->advertised_hop_count;
    if (const auto* f = attackers_.as<FieldModify>(id); f && f->target == RouteField::HopCount) return 0;
    return hop_[id];
  }

  void send_beacon(MoteId from) {
    beacon_pending_[from] = false;
    if (behavior(from) && (attackers_.as<Sinkhole>(from) || attackers_.as<FieldModify>(from))) beacon_locked_[from] = true;
    const int hop = std::min(advertised_hop(from), 255);
    std::vector<MoteId> ids{from};
    if (attackers_.as<Sybil>(from)) {
      const auto& extra = attackers_.identities(from);
      ids.insert(ids.end(), extra.begin(), extra.end());
    }
    for (MoteId as : ids) {
      Envelope env;
      env.pkt.src = as;
      env.pkt.dst = kBroadcastId;
      env.pkt.kind = PacketKind::Beacon;
      env.pkt.hop_ttl = 1;
      env.pkt.payload = Beacon{net_.sink(), static_cast<std::uint8_t>(hop), 1}.encode();
      env.origin = from;
      if (transmit(from, env, [this](MoteId r, Envelope e) { on_beacon(r, e); })) {
        bump("beacons_sent");
        if (as != from) bump("sybil_announcements");
      }
    }
  }

  void on_beacon(MoteId r, const Envelope& env) {
    note_neighbor(r, env.pkt.src);
    const auto beacon = Beacon::decode(env.pkt.payload);
    if (!beacon || r == net_.sink()) return;
    if (const auto* w = attackers_.as<Wormhole>(r); w && !env.tunneled) {
      tunnel(r, env, [this](MoteId exit, Envelope e) { on_beacon(exit, e); });
    }
    if (beacon_locked_[r]) return;
    const int cand = beacon->hop_count + 1;
    const MoteId via = env.pkt.src;
    const bool better = cand < hop_[r] || (cand == hop_[r] && parent_[r] && via < *parent_[r]);
    if (!better) return;
    hop_[r] = cand;
    parent_[r] = via;
    if (!beacon_pending_[r]) {
      beacon_pending_[r] = true;
      at(now_ + 1, [this, r] { send_beacon(r); });
    }
  }

  // ---- unicast data ---------------------------------------------------

  SnepChannel& channel(MoteId local, MoteId peer) {
    const auto key = std::make_pair(local, peer);
    auto it = channels_.find(key);
    if (it == channels_.end()) {
      const Key master = crypto::derive_key(sc_.seed, "pairwise", std::min(local, peer), std::max(local, peer));
      it = channels_.emplace(key, SnepChannel::from_master(local, peer, master, sc_.protocols.protection)).first;
    }
    return it->second;
  }

  [[nodiscard]] static int blocks(std::size_t bytes) { return static_cast<int>(std::max<std::size_t>(1, (bytes + 15) / 16)); }

  void charge_protect(MoteId id, std::size_t body) {
    switch (sc_.protocols.protection) {
      case ProtectionMode::AuthEnc:
        charge_op(id, CryptoOpKind::SymBlock, blocks(body));
        charge_op(id, CryptoOpKind::Mac);
        break;
      case ProtectionMode::AuthOnly: charge_op(id, CryptoOpKind::Mac); break;
      case ProtectionMode::None: break;
    }
  }

  void settle(std::uint64_t id, bool delivered) {
    const auto it = fates_.find(id);
    if (it == fates_.end() || it->second.settled) return;
    it->second.settled = true;
    auto& flow = flows_[{it->second.src, it->second.dst}];
    if (delivered) {
      ++flow.delivered;
      bump("packets_delivered");
    } else {
      ++flow.dropped;
      bump("packets_dropped");
    }
  }

  void originate(const TrafficCommand& t) {
    const MoteId src = t.src;
    const MoteId dst = t.dst.value_or(net_.sink());
    if (!alive(src)) return;
    const std::uint64_t id = next_packet_id_++;
    fates_[id] = {src, dst, false};
    ++flows_[{src, dst}].sent;
    bump("packets_sent");
    if (src == dst) {
      settle(id, true);
      return;
    }

    SecuredPayload secured;
    try {
      secured = channel(src, dst).send(t.payload);
    } catch (const SnepError&) {
      bump("send_errors");
      settle(id, false);
      return;
    }
    charge_protect(src, t.payload.size());

    Envelope env;
    env.id = id;
    env.origin = src;
    env.pkt.src = src;
    env.pkt.dst = dst;
    env.pkt.kind = PacketKind::Data;
    env.pkt.reliability = t.reliability;
    env.pkt.hop_ttl = sc_.protocols.ttl;
    Bytes body = secured.to_wire();

    std::optional<MoteId> next;
    switch (sc_.protocols.routing) {
      case RoutingMode::Tree:
        if (dst == net_.sink()) next = parent_[src];
        break;
      case RoutingMode::Aodv:
        if (const auto* e = ensure_route(src, dst)) next = e->next_hop;
        break;
      case RoutingMode::Dsr:
        if (const auto* e = ensure_route(src, dst)) {
          Bytes framed;
          framed.push_back(static_cast<std::uint8_t>(e->source_route.size()));
          for (MoteId m : e->source_route) {
            framed.push_back(static_cast<std::uint8_t>(m >> 8));
            framed.push_back(static_cast<std::uint8_t>(m));
          }
          framed.insert(framed.end(), body.begin(), body.end());
          body = std::move(framed);
          if (e->source_route.size() > 1) next = e->source_route[1];
        }
        break;
    }
    if (body.size() > WirePacket::kMaxPayload) {
      bump("send_errors");
      settle(id, false);
      return;
    }
    env.pkt.payload = std::move(body);
    if (!next) {
      bump("route_failures");
      settle(id, false);
      return;
    }
    seen_data_[src].insert(id);
    send_hop(src, env, *next);
  }

  const RouteEntry* ensure_route(MoteId src, MoteId dst) {
    if (const auto* e = tables_[src].find(dst, now_)) return e;
    DiscoveryConfig cfg;
    cfg.variant = sc_.protocols.routing == RoutingMode::Aodv ? RouteVariant::Aodv : RouteVariant::Dsr;
    cfg.hop_latency_ms = sc_.protocols.hop_latency_ms;
    cfg.ttl = sc_.protocols.ttl;
    RadioHooks hooks;
    hooks.alive = [this](MoteId m) { return alive(m); };
    hooks.charge = [this](MoteId m, std::int64_t bits, RadioDirection dir) {
      charge(m, dir == RadioDirection::Tx ? sc_.energy.tx_cost(bits) : sc_.energy.rx_cost(bits));
    };
    DiscoveryEngine engine(net_, attackers_, tables_, cfg, hooks);
    bump("route_discoveries");
    const auto result = engine.discover(src, dst, now_, next_request_id_++);
    bump("control_packets", result.control_packets);
    bump("transmissions", result.control_packets);
    return result.route ? tables_[src].find(dst, now_) : nullptr;
  }

  /// Sends one hop, with per-hop acknowledgement and retries for reliable
  /// packets. Wormhole ends route through their tunnel when the next hop is
  /// only in range of the far end.
  void send_hop(MoteId from, Envelope env, MoteId next) {
    if (env.pkt.hop_ttl == 0) {
      bump("ttl_expired");
      settle(env.id, false);
      return;
    }
    --env.pkt.hop_ttl;
    env.hop_to = next;
    if (const auto* w = attackers_.as<Wormhole>(from);
        w && next != from && !net_.linked(from, next) && (next == w->peer || net_.linked(w->peer, next))) {
      ++env.pkt.hop_ttl;
      tunnel(from, env, [this, next](MoteId exit, Envelope e) {
        if (exit == next) on_data(exit, e);
        else send_hop(exit, e, next);
      });
      return;
    }
    if (env.pkt.reliability == Reliability::Unreliable) {
      transmit(from, env, [this](MoteId r, Envelope e) { on_data(r, e); });
      return;
    }
    const std::uint64_t hop_id = next_hop_id_++;
    pending_.emplace(hop_id, PendingHop{from, env, 0, false});
    attempt_hop(hop_id);
  }

  void attempt_hop(std::uint64_t hop_id) {
    auto& h = pending_.at(hop_id);
    if (h.attempts > 0) bump("retransmissions");
    ++h.attempts;
    const MoteId from = h.from;
    transmit(from, h.env, [this, hop_id, from](MoteId r, Envelope e) {
      // Acknowledge, then process; duplicates are acknowledged but not reprocessed.
      Envelope ack;
      ack.pkt.src = r;
      ack.pkt.dst = from;
      ack.pkt.kind = e.pkt.kind;
      ack.pkt.ack = true;
      ack.pkt.hop_ttl = 1;
      ack.hop_to = from;
      bump("acks_sent");
      transmit(r, ack, [this, hop_id](MoteId, Envelope) {
        const auto it = pending_.find(hop_id);
        if (it != pending_.end()) it->second.acked = true;
      });
      on_data(r, e);
    });
    at(now_ + sc_.protocols.ack_timeout_ms, [this, hop_id] {
      auto it = pending_.find(hop_id);
      if (it == pending_.end()) return;
      if (it->second.acked) {
        pending_.erase(it);
        return;
      }
      if (it->second.attempts <= sc_.protocols.retries && alive(it->second.from)) {
        attempt_hop(hop_id);
        return;
      }
      bump("hop_failures");
      settle(it->second.env.id, false);
      pending_.erase(it);
    });
  }

  /// Next hop for a data packet held at `at`; nullopt when there is none.
  std::optional<MoteId> next_for(MoteId at, Envelope& env) {
    const MoteId dst = env.pkt.dst;
    if (behavior(at) && sc_.protocols.routing != RoutingMode::Dsr) {
      // Attackers relay along their real shortest path (tree: their parent).
      if (sc_.protocols.routing == RoutingMode::Tree) return parent_[at];
      const auto path = shortest_path(net_, at, dst);
      if (path.size() < 2) return std::nullopt;
      return path[1];
    }
    switch (sc_.protocols.routing) {
      case RoutingMode::Tree: return parent_[at];
      case RoutingMode::Aodv: {
        const auto* e = tables_[at].find(dst, now_);
        if (!e) return std::nullopt;
        return e->next_hop;
      }
      case RoutingMode::Dsr: {
        const auto& p = env.pkt.payload;
        if (p.empty()) return std::nullopt;
        const std::size_t n = p[0];
        if (p.size() < 1 + 2 * n) return std::nullopt;
        for (std::size_t i = 0; i + 1 < n; ++i) {
          const MoteId here = static_cast<MoteId>((p[1 + 2 * i] << 8) | p[2 + 2 * i]);
          if (here == at || attackers_.answers_for(at, here)) {
            return static_cast<MoteId>((p[1 + 2 * (i + 1)] << 8) | p[2 + 2 * (i + 1)]);
          }
        }
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  [[nodiscard]] Bytes secured_part(const Envelope& env) const {
    if (sc_.protocols.routing != RoutingMode::Dsr) return env.pkt.payload;
    const auto& p = env.pkt.payload;
    if (p.empty()) return {};
    const std::size_t skip = 1 + 2 * static_cast<std::size_t>(p[0]);
    if (p.size() < skip) return {};
    return Bytes(p.begin() + static_cast<std::ptrdiff_t>(skip), p.end());
  }

  void deliver_local(MoteId r, const Envelope& env) {
    const auto wire = secured_part(env);
    const auto secured = SecuredPayload::from_wire(wire, sc_.protocols.protection);
    charge_protect(r, secured ? secured->body.size() : 0);
    if (!secured) {
      bump("mac_failures");
      if (env.altered) bump("altered_rejected");
      settle(env.id, false);
      return;
    }
    try {
      (void)channel(r, env.pkt.src).receive(*secured);
      if (env.altered) bump("altered_accepted");
      settle(env.id, true);
    } catch (const SnepError& e) {
      if (e.code() == SnepErrc::StaleCounter) {
        bump("duplicates_rejected");
      } else {
        bump("mac_failures");
        if (env.altered) bump("altered_rejected");
        settle(env.id, false);
      }
    }
  }

  void on_data(MoteId r, Envelope env) {
    if (env.pkt.kind == PacketKind::Probe) {
      on_probe(r, std::move(env));
      return;
    }
    if (env.pkt.dst == kBroadcastId) return;
    if (r == env.pkt.dst && !behavior(r)) {
      deliver_local(r, env);
      return;
    }
    if (!seen_data_[r].insert(env.id).second) return;  // looped or duplicated copy
    transit_[r].insert(env.id);

    if (const auto* b = behavior(r)) {
      if (std::holds_alternative<Wormhole>(*b)) {
        // The far end takes over when it is closer; otherwise relay normally.
        const MoteId peer = std::get<Wormhole>(*b).peer;
        if (!env.tunneled && (env.hop_to == peer || closer_than(peer, r, env))) {
          tunnel(r, env, [this](MoteId exit, Envelope e) {
            transit_[exit].insert(e.id);
            relay(exit, std::move(e));
          });
          return;
        }
      } else {
        BehaviorContext ctx{r, &attacker_rng_.at(r), 0};
        const Action a = apply_behavior(*b, env.pkt, ctx);
        if (std::holds_alternative<action::Drop>(a)) {
          bump("attack_drops");
          settle(env.id, false);
          return;
        }
        if (const auto* m = std::get_if<action::Modify>(&a)) {
          if (m->packet.payload != env.pkt.payload) {
            env.altered = true;
            bump("attack_modifications");
          }
          env.pkt = m->packet;
        }
      }
    }
    relay(r, std::move(env));
  }

  [[nodiscard]] bool reachable(MoteId from, MoteId id) const {
    const auto& n = net_.neighbors(from);
    return std::any_of(n.begin(), n.end(), [&](MoteId m) { return alive(m) && (m == id || attackers_.answers_for(m, id)); });
  }

  [[nodiscard]] bool closer_than(MoteId a, MoteId b, const Envelope& env) const {
    if (sc_.protocols.routing == RoutingMode::Tree) return hop_[a] < hop_[b];
    if (sc_.protocols.routing == RoutingMode::Dsr) return false;
    const auto d = net_.hop_distances(env.pkt.dst);
    return d[a] != kUnreachable && (d[b] == kUnreachable || d[a] < d[b]);
  }

  void relay(MoteId r, Envelope env) {
    if (r == env.pkt.dst && !behavior(r)) {
      deliver_local(r, env);
      return;
    }
    seen_data_[r].insert(env.id);
    const auto next = next_for(r, env);
    if (!next || *next == r) {
      bump(sc_.protocols.routing == RoutingMode::Tree ? "route_failures" : "route_errors");
      settle(env.id, false);
      return;
    }
    if (sc_.protocols.routing == RoutingMode::Dsr && !behavior(r) && !reachable(r, *next)) {
      route_error(r, env, *next);
      return;
    }
    send_hop(r, std::move(env), *next);
  }

  /// Strict source routing hit a broken hop: report back to the origin,
  /// which forgets the route.
  void route_error(MoteId at, const Envelope& env, MoteId broken_to) {
    bump("route_errors");
    settle(env.id, false);
    RouteErrorMsg msg;
    msg.origin = env.origin;
    msg.target = env.pkt.dst;
    msg.broken_from = at;
    msg.broken_to = broken_to;
    Envelope err;
    err.pkt.src = at;
    err.pkt.dst = env.origin;
    err.pkt.kind = PacketKind::RouteCtl;
    err.pkt.payload = encode_route_message(msg);
    const auto back = shortest_path(net_, at, env.origin);
    SimTime t = now_;
    for (std::size_t i = 0; i + 1 < back.size(); ++i) {
      if (!alive(back[i])) return;
      charge(back[i], sc_.energy.tx_cost(err.pkt.on_air_bits()));
      charge(back[i + 1], sc_.energy.rx_cost(err.pkt.on_air_bits()));
      bump("control_packets");
      bump("transmissions");
      t += sc_.protocols.hop_latency_ms;
    }
    const MoteId origin = env.origin;
    const MoteId target = env.pkt.dst;
    at_time(t, [this, origin, target] { tables_[origin].erase(target); });
  }

  void at_time(SimTime t, std::function<void()> fn) { at(t, std::move(fn)); }

  // ---- authenticated broadcast ----------------------------------------

  void flood(MoteId from, Envelope env) {
    seen_flood_[from].insert(env.id);
    transmit(from, env, [this](MoteId r, Envelope e) { on_flood(r, std::move(e)); });
  }

  void on_flood(MoteId r, Envelope env) {
    if (!seen_flood_[r].insert(env.id).second) return;
    if (const auto* b = behavior(r)) {
      if (!std::holds_alternative<Wormhole>(*b)) {
        BehaviorContext ctx{r, &attacker_rng_.at(r), 0};
        const Action a = apply_behavior(*b, env.pkt, ctx);
        if (std::holds_alternative<action::Drop>(a)) {
          bump("attack_drops");
          return;
        }
        if (const auto* m = std::get_if<action::Modify>(&a)) {
          if (m->packet.payload != env.pkt.payload) {
            env.altered = true;
            bump("attack_modifications");
          }
          env.pkt = m->packet;
        }
      }
    } else if (auto it = receivers_.find(r); it != receivers_.end()) {
      const SimTime local = now_ + net_.mote(r).clock_offset;
      if (env.pkt.kind == PacketKind::KeyDisclosure) {
        if (const auto d = KeyDisclosure::from_wire(env.pkt.payload)) {
          try {
            const auto before = it->second.mac_failures();
            const auto released = it->second.on_disclosure(d->key, d->interval_index);
            for (const auto& msg : released) {
              bump("broadcasts_authenticated");
              if (!genuine_broadcasts_.contains({d->interval_index, msg})) bump("broadcast_forgeries_accepted");
            }
            bump("broadcast_mac_failures", static_cast<std::int64_t>(it->second.mac_failures() - before));
          } catch (const MuteslaError&) {
            bump("bad_disclosures");
          }
        }
      } else if (const auto p = BroadcastPacket::from_wire(env.pkt.payload)) {
        charge_op(r, CryptoOpKind::Mac);
        const auto outcome = it->second.receive(*p, local);
        bump(outcome.buffered ? "broadcasts_buffered" : "broadcasts_discarded");
      }
    }
    if (env.pkt.hop_ttl <= 1) return;
    --env.pkt.hop_ttl;
    flood(r, std::move(env));
  }

  void mutesla_broadcast(const Bytes& message) {
    if (!chain_ || !alive(net_.sink())) return;
    BroadcastPacket p;
    try {
      p = chain_->broadcast(message, now_ + net_.mote(net_.sink()).clock_offset);
    } catch (const MuteslaError&) {
      bump("send_errors");
      return;
    }
    genuine_broadcasts_.insert({p.interval_index, p.message});
    charge_op(net_.sink(), CryptoOpKind::Mac);
    Envelope env;
    env.id = next_packet_id_++;
    env.origin = net_.sink();
    env.pkt.src = net_.sink();
    env.pkt.dst = kBroadcastId;
    env.pkt.kind = PacketKind::Data;
    env.pkt.hop_ttl = sc_.protocols.ttl;
    env.pkt.payload = p.to_wire();
    bump("broadcasts_sent");
    flood(net_.sink(), std::move(env));
  }

  void mutesla_disclose() {
    if (!chain_ || !alive(net_.sink())) return;
    const auto d = chain_->disclose(now_ + net_.mote(net_.sink()).clock_offset);
    if (!d) return;
    Envelope env;
    env.id = next_packet_id_++;
    env.origin = net_.sink();
    env.pkt.src = net_.sink();
    env.pkt.dst = kBroadcastId;
    env.pkt.kind = PacketKind::KeyDisclosure;
    env.pkt.hop_ttl = sc_.protocols.ttl;
    env.pkt.payload = d->to_wire();
    bump("disclosures_sent");
    flood(net_.sink(), std::move(env));
  }

  // ---- probes ---------------------------------------------------------

  void inject_probe(const ProbeInjection& inj) {
    if (!alive(net_.sink())) return;
    Probe probe = monitor_->issue(inj);
    charge_op(net_.sink(), CryptoOpKind::Mac);
    bump("probes_sent");
    Envelope env;
    env.id = next_packet_id_++;
    env.origin = net_.sink();
    env.pkt.src = net_.sink();
    env.pkt.dst = net_.sink();
    env.pkt.kind = PacketKind::Probe;
    env.pkt.reliability = Reliability::Unreliable;
    env.pkt.hop_ttl = sc_.protocols.ttl;
    probe.hop_index = 1;
    env.pkt.payload = probe.encode();
    probe_hop(net_.sink(), std::move(env), probe.path[1]);
  }

  void probe_hop(MoteId from, Envelope env, MoteId next) {
    env.hop_to = next;
    if (const auto* w = attackers_.as<Wormhole>(from); w && !net_.linked(from, next) && net_.linked(w->peer, next)) {
      tunnel(from, env, [this, next](MoteId exit, Envelope e) { probe_hop(exit, std::move(e), next); });
      return;
    }
    transmit(from, env, [this](MoteId r, Envelope e) { on_data(r, std::move(e)); });
  }

  void on_probe(MoteId r, Envelope env) {
    auto probe = Probe::decode(env.pkt.payload);
    if (!probe || probe->hop_index >= probe->path.size()) return;
    const MoteId expected = probe->path[probe->hop_index];
    if (expected != r && !attackers_.answers_for(r, expected)) return;

    if (r == net_.sink() && static_cast<std::size_t>(probe->hop_index) + 1 == probe->path.size()) {
      charge_op(r, CryptoOpKind::Mac);
      const auto outcome = monitor_->on_return(*probe, now_);
      bump(outcome == ProbeOutcome::Clean ? "probes_clean" : "probes_altered");
      return;
    }
    transit_[r].insert(env.id);
    const auto* b = behavior(r);
    // A spoofer alters each probe once; a second identical flip on the way back would undo the first.
    if (b && std::holds_alternative<Spoof>(*b) && !spoofed_probes_[r].insert(env.id).second) b = nullptr;
    if (b && !std::holds_alternative<Wormhole>(*b)) {
      BehaviorContext ctx{r, &attacker_rng_.at(r), 0};
      const Action a = apply_behavior(*b, env.pkt, ctx);
      if (std::holds_alternative<action::Drop>(a)) {
        bump("attack_drops");
        return;
      }
      if (const auto* m = std::get_if<action::Modify>(&a)) {
        if (m->packet.payload != env.pkt.payload) bump("attack_modifications");
        env.pkt = m->packet;
        probe = Probe::decode(env.pkt.payload);
        if (!probe) return;
      }
    }
    if (env.pkt.hop_ttl == 0) {
      bump("ttl_expired");
      return;
    }
    --env.pkt.hop_ttl;
    // Advance the hop index in place so that payload alterations survive.
    const MoteId next = probe->path[probe->hop_index + 1];
    env.pkt.payload[4] = static_cast<std::uint8_t>(probe->hop_index + 1);
    probe_hop(r, std::move(env), next);
  }

  // ---- hello flood ----------------------------------------------------

  void hello_tick(MoteId attacker, const HelloFlood& h) {
    if (!alive(attacker)) return;
    const auto hellos = hello_flood(h, net_, attacker, now_);
    if (hellos.empty()) return;
    charge(attacker, sc_.energy.tx_cost(hellos.front().on_air_bits()));  // one high-power broadcast
    bump("hello_packets_sent");
    bump("transmissions");
    for (const auto& pkt : hellos) {
      const MoteId r = pkt.dst;
      at(now_ + sc_.protocols.hop_latency_ms, [this, r, pkt] {
        if (!alive(r)) return;
        charge(r, sc_.energy.rx_cost(pkt.on_air_bits()));
        charge(r, sc_.energy.instructions_cost(static_cast<double>(sc_.energy.hello_processing_instr)));
        note_neighbor(r, pkt.src);
        ++hellos_[r];
        bump("hello_packets_received");
      });
    }
  }

  // ---- report ---------------------------------------------------------

  MetricsReport build_report() {
    MetricsReport rep;
    rep.scenario = sc_;
    rep.end_time_ms = sc_.duration_ms;
    rep.bin_ms = sc_.metrics_bin_ms;
    rep.global_bins = global_bins_;
    rep.mote_energy_bins = energy_bins_;
    for (const auto& name : metric_names()) rep.totals[name] = 0;
    for (const auto& b : global_bins_)
      for (const auto& [k, v] : b) rep.totals[k] += v;
    for (const auto& m : net_.motes()) {
      MoteSummary s;
      s.id = m.id;
      s.role = m.role;
      if (const auto* b = behavior(m.id)) s.behavior = behavior_name(*b);
      s.initial = initial_[m.id];
      s.spent = m.battery.spent;
      s.remaining = m.battery.remaining;
      s.alive = m.alive();
      s.neighbor_table_size = neighbor_tables_[m.id].size();
      s.transit_packets = static_cast<std::int64_t>(transit_[m.id].size());
      s.hellos_received = hellos_[m.id];
      s.tree_parent = parent_[m.id];
      s.tree_hops = hop_[m.id] >= kInf ? kUnreachable : hop_[m.id];
      rep.motes.push_back(s);
    }
    rep.flows = flows_;
    if (needs_beacon_tree())
      for (const auto& s : rep.motes)
        if (s.tree_hops == kUnreachable) rep.unreachable.push_back(s.id);
    if (monitor_) rep.detection = monitor_->report();
    return rep;
  }

  Scenario sc_;
  Network net_;
  std::map<MoteId, AttackerBehavior> behaviors_;
  AttackerSet attackers_;
  std::map<MoteId, Rng> attacker_rng_;
  std::vector<Nanojoules> initial_;

  std::priority_queue<Event> queue_;
  std::uint64_t seq_ = 0;
  SimTime now_ = 0;
  SimTime idle_until_ = 0;

  std::size_t bins_ = 1;
  std::vector<std::map<std::string, std::int64_t>> global_bins_;
  std::vector<std::vector<Nanojoules>> energy_bins_;

  std::vector<std::set<MoteId>> neighbor_tables_;
  std::vector<std::set<std::uint64_t>> transit_;
  std::vector<std::int64_t> hellos_;
  std::map<MoteId, std::set<std::uint64_t>> spoofed_probes_;
  std::vector<std::set<std::uint64_t>> seen_flood_;
  std::vector<std::set<std::uint64_t>> seen_data_;
  std::map<std::size_t, int> loss_used_;

  std::vector<int> hop_;
  std::vector<std::optional<MoteId>> parent_;
  std::vector<bool> beacon_pending_;
  std::vector<bool> beacon_locked_;

  std::vector<RouteTable> tables_;
  std::uint32_t next_request_id_ = 1;

  std::map<std::pair<MoteId, MoteId>, SnepChannel> channels_;
  struct Fate {
    MoteId src, dst;
    bool settled;
  };
  std::map<std::uint64_t, Fate> fates_;
  std::map<std::pair<MoteId, MoteId>, FlowStats> flows_;
  std::uint64_t next_packet_id_ = 1;
  std::uint64_t next_hop_id_ = 1;
  std::map<std::uint64_t, PendingHop> pending_;

  std::optional<KeyChain> chain_;
  std::map<MoteId, MuteslaReceiver> receivers_;
  std::set<std::pair<std::uint32_t, Bytes>> genuine_broadcasts_;

  std::optional<DetectionMonitor> monitor_;
};

inline MetricsReport run(const Scenario& scenario) { return Simulator(scenario).run(); }

}  // namespace wsn
