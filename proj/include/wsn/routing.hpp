#pragma once

// Minimal on-demand routing cores (AODV-like and DSR-like) and a
// deterministic flood engine that runs one route discovery over a network,
// honoring attacker behaviors at malicious motes.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <vector>

#include "wsn/adversary.hpp"
#include "wsn/control.hpp"
#include "wsn/topology.hpp"

namespace wsn {

struct RouteEntry {
  MoteId destination = 0;
  MoteId next_hop = 0;               // aodv
  std::vector<MoteId> source_route;  // dsr: origin..destination as advertised
  std::uint32_t dest_seq_no = 0;     // aodv
  int hop_count = 0;                 // as advertised
  SimTime expires_at = 0;
  // Simulator instrumentation, never on the wire: the motes a packet would
  // physically cross following this route, starting at the route owner.
  std::vector<MoteId> physical_path;
};

/// One entry per destination.
class RouteTable {
 public:
  [[nodiscard]] const RouteEntry* find(MoteId dst, SimTime now) const {
    const auto it = entries_.find(dst);
    if (it == entries_.end() || it->second.expires_at <= now) return nullptr;
    return &it->second;
  }
  [[nodiscard]] const RouteEntry* find(MoteId dst) const {
    const auto it = entries_.find(dst);
    return it == entries_.end() ? nullptr : &it->second;
  }
  void erase(MoteId dst) { entries_.erase(dst); }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] const std::map<MoteId, RouteEntry>& entries() const { return entries_; }
  std::map<MoteId, RouteEntry>& entries() { return entries_; }

 private:
  std::map<MoteId, RouteEntry> entries_;
};

/// Route replacement rule. AODV: strictly fresher sequence number, or equal
/// sequence number with strictly fewer hops. DSR: strictly shorter source
/// route; ties keep the route received first. Expired entries count as absent.
inline bool install_route(RouteTable& table, const RouteEntry& candidate, RouteVariant variant, SimTime now = 0) {
  auto& entries = table.entries();
  const auto it = entries.find(candidate.destination);
  bool accept = it == entries.end() || it->second.expires_at <= now;
  if (!accept) {
    const RouteEntry& cur = it->second;
    if (variant == RouteVariant::Aodv) {
      accept = candidate.dest_seq_no > cur.dest_seq_no ||
               (candidate.dest_seq_no == cur.dest_seq_no && candidate.hop_count < cur.hop_count);
    } else {
      accept = candidate.source_route.size() < cur.source_route.size();
    }
  }
  if (accept) entries[candidate.destination] = candidate;
  return accept;
}

/// Shortest radio path from `from` to `to`; at each step the lowest-id
/// neighbor one hop closer is taken. Empty when unreachable.
inline std::vector<MoteId> shortest_path(const Network& net, MoteId from, MoteId to,
                                         const std::set<MoteId>& excluded = {}) {
  const auto dist = net.hop_distances(to, excluded);
  if (dist[from] == kUnreachable) return {};
  std::vector<MoteId> path{from};
  while (path.back() != to) {
    for (MoteId n : net.neighbors(path.back())) {
      if (dist[n] == dist[path.back()] - 1) {
        path.push_back(n);
        break;
      }
    }
  }
  return path;
}

/// Sum of radio hop distances between consecutive motes of a path. Adjacent
/// motes cost 1; a non-radio jump (tunnel, forged adjacency) costs the real
/// hop distance it skips.
inline int radio_cost(const Network& net, const std::vector<MoteId>& path) {
  int cost = 0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (path[i] == path[i - 1]) continue;
    if (net.linked(path[i - 1], path[i])) {
      ++cost;
      continue;
    }
    const int d = net.hop_distances(path[i - 1])[path[i]];
    if (d == kUnreachable) return std::numeric_limits<int>::max() / 4;
    cost += d;
  }
  return cost;
}

/// Route-corruption criterion: the route physically crosses an attacker and
/// either is longer than the shortest attacker-free route, or advertises a
/// length that differs from its true radio length.
inline bool route_corrupted(const Network& net, const RouteEntry& entry, MoteId owner,
                            const std::set<MoteId>& attackers) {
  const bool crosses = std::any_of(entry.physical_path.begin(), entry.physical_path.end(),
                                   [&](MoteId m) { return attackers.contains(m); });
  if (!crosses || attackers.contains(owner)) return false;
  const int honest = net.hop_distances(entry.destination, attackers)[owner];
  const int actual = radio_cost(net, entry.physical_path);
  if (honest != kUnreachable && actual > honest) return true;
  return entry.hop_count != actual;
}

/// Attacker placement resolved against a network: behavior per physical
/// mote plus the identities each attacker answers for.
class AttackerSet {
 public:
  AttackerSet() = default;
  AttackerSet(const Network& net, std::map<MoteId, AttackerBehavior> behaviors) : behaviors_(std::move(behaviors)) {
    for (const auto& [id, b] : behaviors_) {
      if (const auto* s = std::get_if<Sybil>(&b)) {
        identities_[id] = sybil_identities(*s, id, net.size());
        for (MoteId alias : identities_[id]) answers_for_[id].insert(alias);
      } else if (const auto* w = std::get_if<Wormhole>(&b)) {
        answers_for_[id].insert(w->peer);  // traffic for the far end enters the tunnel here
      }
    }
  }

  [[nodiscard]] bool empty() const { return behaviors_.empty(); }
  [[nodiscard]] const AttackerBehavior* behavior(MoteId id) const {
    const auto it = behaviors_.find(id);
    return it == behaviors_.end() ? nullptr : &it->second;
  }
  [[nodiscard]] const std::map<MoteId, AttackerBehavior>& behaviors() const { return behaviors_; }
  [[nodiscard]] std::set<MoteId> physical_ids() const {
    std::set<MoteId> out;
    for (const auto& [id, b] : behaviors_) out.insert(id);
    return out;
  }
  [[nodiscard]] const std::vector<MoteId>& identities(MoteId attacker) const {
    static const std::vector<MoteId> none;
    const auto it = identities_.find(attacker);
    return it == identities_.end() ? none : it->second;
  }
  [[nodiscard]] bool answers_for(MoteId attacker, MoteId id) const {
    const auto it = answers_for_.find(attacker);
    return it != answers_for_.end() && it->second.contains(id);
  }
  void impersonate(MoteId attacker, MoteId id) { answers_for_[attacker].insert(id); }

  template <class T>
  [[nodiscard]] const T* as(MoteId id) const {
    const auto* b = behavior(id);
    return b ? std::get_if<T>(b) : nullptr;
  }

 private:
  std::map<MoteId, AttackerBehavior> behaviors_;
  std::map<MoteId, std::vector<MoteId>> identities_;
  std::map<MoteId, std::set<MoteId>> answers_for_;
};

struct DiscoveryConfig {
  RouteVariant variant = RouteVariant::Aodv;
  SimTime hop_latency_ms = 2;
  SimTime timeout_ms = 1000;
  SimTime lifetime_ms = 5000;
  std::uint8_t ttl = 32;
};

struct DiscoveryResult {
  std::optional<RouteEntry> route;  // installed at the origin
  std::vector<RouteEntry> replies;  // every reply that reached the origin, in arrival order
  int control_packets = 0;
  SimTime finished_at = 0;

  [[nodiscard]] bool unreachable() const { return !route.has_value(); }
};

/// Hooks through which the flood reports radio activity to a simulator.
struct RadioHooks {
  std::function<bool(MoteId)> alive;                          // default: battery not empty
  std::function<void(MoteId, std::int64_t, RadioDirection)> charge;  // default: none
};

/// Runs a single route discovery as its own time-ordered flood.
class DiscoveryEngine {
 public:
  DiscoveryEngine(const Network& net, AttackerSet& attackers, std::vector<RouteTable>& tables,
                  DiscoveryConfig cfg, RadioHooks hooks = {})
      : net_(net), attackers_(attackers), tables_(tables), cfg_(cfg), hooks_(std::move(hooks)) {
    if (tables_.size() < net_.size()) tables_.resize(net_.size());
  }

  /// Own sequence number a mote advertises as a destination.
  void set_dest_seq(MoteId id, std::uint32_t seq) { dest_seq_[id] = seq; }

  DiscoveryResult discover(MoteId origin, MoteId target, SimTime start, std::uint32_t request_id) {
    origin_ = origin;
    target_ = target;
    request_id_ = request_id;
    deadline_ = start + cfg_.timeout_ms;
    seen_.clear();
    reverse_.clear();
    target_replied_ = false;
    result_ = {};
    queue_ = {};

    if (!alive(origin)) return result_;
    RouteRequest req;
    req.variant = cfg_.variant;
    req.origin = origin;
    req.target = target;
    req.request_id = request_id;
    if (const auto* known = tables_[origin].find(target)) req.dest_seq_no = known->dest_seq_no;
    if (cfg_.variant == RouteVariant::Dsr) req.route_record = {origin};
    seen_.insert(origin);
    emit(origin, origin, kBroadcastId, req, Frame{{origin}, {}, {}}, start);

    while (!queue_.empty()) {
      Event ev = queue_.top();
      queue_.pop();
      if (ev.time > deadline_) break;
      now_ = ev.time;
      result_.finished_at = ev.time;
      if (ev.tunnel_exit) {
        on_tunnel_exit(ev.at, ev.packet, ev.frame);
      } else {
        on_receive(ev.at, ev.packet, ev.frame);
      }
    }
    if (const auto* e = tables_[origin].find(target)) result_.route = *e;
    return result_;
  }

 private:
  struct Frame {
    std::vector<MoteId> trace;        // physical motes crossed so far
    std::vector<MoteId> onward;       // replies: physical continuation beyond the replier
    std::vector<MoteId> route_truth;  // dsr replies: physical path the advertised route stands for
  };

  struct Event {
    SimTime time;
    std::uint64_t seq;
    MoteId at;
    bool tunnel_exit;
    WirePacket packet;
    Frame frame;
    bool operator<(const Event& o) const { return time != o.time ? time > o.time : seq > o.seq; }
  };

  [[nodiscard]] bool alive(MoteId id) const { return hooks_.alive ? hooks_.alive(id) : net_.mote(id).alive(); }

  void charge(MoteId id, std::int64_t bits, RadioDirection dir) {
    if (hooks_.charge) hooks_.charge(id, bits, dir);
  }

  std::uint32_t dest_seq(MoteId id) const {
    const auto it = dest_seq_.find(id);
    return it == dest_seq_.end() ? 1 : it->second;
  }

  [[nodiscard]] std::vector<MoteId> onward_path(MoteId from) const {
    auto p = shortest_path(net_, from, target_);
    if (!p.empty()) p.erase(p.begin());
    return p;
  }

  [[nodiscard]] bool is_physical_attacker(MoteId id) const { return attackers_.behavior(id) != nullptr; }

  void emit(MoteId physical, MoteId claimed_src, MoteId dst, const RouteMessage& msg, Frame frame, SimTime t) {
    if (!alive(physical)) return;
    WirePacket p;
    p.src = claimed_src;
    p.dst = dst;
    p.kind = PacketKind::RouteCtl;
    p.hop_ttl = cfg_.ttl;
    p.payload = encode_route_message(msg);
    transmit(physical, p, std::move(frame), t);
  }

  void transmit(MoteId physical, const WirePacket& p, Frame frame, SimTime t) {
    charge(physical, p.on_air_bits(), RadioDirection::Tx);
    ++result_.control_packets;
    for (MoteId r : net_.neighbors(physical)) {
      if (!alive(r)) continue;
      const bool addressed = p.dst == kBroadcastId || p.dst == r || attackers_.answers_for(r, p.dst);
      if (!addressed) continue;
      Frame f = frame;
      f.trace.push_back(r);
      queue_.push(Event{t + cfg_.hop_latency_ms, seq_++, r, false, p, std::move(f)});
    }
  }

  /// Unicast hop from `self` toward `next`; wormhole ends relay through
  /// their peer when `next` is only in range of the far end.
  void send_toward(MoteId self, MoteId claimed_src, MoteId next, const RouteMessage& msg, Frame frame) {
    if (const auto* w = attackers_.as<Wormhole>(self); w && !net_.linked(self, next) && net_.linked(w->peer, next)) {
      WirePacket p;
      p.src = claimed_src;
      p.dst = next;
      p.kind = PacketKind::RouteCtl;
      p.hop_ttl = cfg_.ttl;
      p.payload = encode_route_message(msg);
      frame.trace.push_back(w->peer);
      tunnel_forward_.insert(w->peer);
      queue_.push(Event{now_ + w->tunnel_latency_ms, seq_++, w->peer, true, p, std::move(frame)});
      return;
    }
    emit(self, claimed_src, next, msg, std::move(frame), now_);
  }

  void on_receive(MoteId r, const WirePacket& p, const Frame& frame) {
    charge(r, p.on_air_bits(), RadioDirection::Rx);
    auto decoded = decode_route_message(p.payload);
    if (!decoded) return;
    WirePacket packet = p;
    if (const auto* b = attackers_.behavior(r); b && std::holds_alternative<RouteReply>(*decoded)) {
      // Transiting replies are rewritten before being relayed.
      BehaviorContext ctx{r, nullptr, dest_seq(target_)};
      if (!std::holds_alternative<Wormhole>(*b)) {
        Action a = apply_behavior(*b, packet, ctx);
        if (auto* m = std::get_if<action::Modify>(&a)) {
          packet = m->packet;
          decoded = decode_route_message(packet.payload);
          if (!decoded) return;
        }
      }
    }
    if (auto* req = std::get_if<RouteRequest>(&*decoded)) {
      on_request(r, packet, *req, frame);
    } else if (auto* rep = std::get_if<RouteReply>(&*decoded)) {
      on_reply(r, packet, *rep, frame);
    }
  }

  void on_tunnel_exit(MoteId exit, const WirePacket& p, const Frame& frame) {
    auto decoded = decode_route_message(p.payload);
    if (!decoded) return;
    if (tunnel_forward_.contains(exit) && p.dst != kBroadcastId) {
      // Unicast relayed through the tunnel: transmit it as-is from this end.
      tunnel_forward_.erase(exit);
      transmit(exit, p, frame, now_);
      return;
    }
    if (auto* req = std::get_if<RouteRequest>(&*decoded)) {
      reverse_[exit] = p.src;
      forward_request(exit, exit, *req, frame);
    }
  }

  void forward_request(MoteId self, MoteId as_id, RouteRequest req, const Frame& frame) {
    if (cfg_.variant == RouteVariant::Aodv) {
      if (req.hop_count + 1 >= cfg_.ttl) return;
      ++req.hop_count;
    } else {
      if (std::find(req.route_record.begin(), req.route_record.end(), as_id) != req.route_record.end()) return;
      if (req.route_record.size() + 1 >= cfg_.ttl || req.route_record.size() >= 26) return;
      req.route_record.push_back(as_id);
    }
    emit(self, as_id, kBroadcastId, req, frame, now_);
  }

  void reply_to_request(MoteId self, MoteId claimed_src, const RouteRequest& req, const Frame& frame,
                        std::uint32_t seq, int advertised_hops, std::vector<MoteId> claimed_tail) {
    RouteReply rep;
    rep.variant = cfg_.variant;
    rep.origin = req.origin;
    rep.target = req.target;
    rep.request_id = req.request_id;
    Frame f;
    f.trace = {self};
    f.onward = self == req.target ? std::vector<MoteId>{} : onward_path(self);
    if (cfg_.variant == RouteVariant::Aodv) {
      rep.dest_seq_no = seq;
      rep.hop_count = static_cast<std::uint8_t>(std::clamp(advertised_hops, 0, 255));
    } else {
      rep.route_record = req.route_record;
      rep.route_record.insert(rep.route_record.end(), claimed_tail.begin(), claimed_tail.end());
      f.route_truth = frame.trace;
      f.route_truth.insert(f.route_truth.end(), f.onward.begin(), f.onward.end());
    }
    const auto rev = reverse_.find(self);
    if (rev == reverse_.end()) return;
    send_toward(self, claimed_src, rev->second, rep, std::move(f));
  }

  void on_request(MoteId r, const WirePacket& p, const RouteRequest& req, const Frame& frame) {
    if (req.request_id != request_id_ || req.origin != origin_) return;
    const bool dsr = cfg_.variant == RouteVariant::Dsr;

    // DSR targets answer every copy so the origin can pick the shortest.
    if (dsr && r == req.target && !is_physical_attacker(r)) {
      if (std::find(req.route_record.begin(), req.route_record.end(), r) != req.route_record.end()) return;
      reverse_[r] = p.src;
      reply_to_request(r, r, req, frame, 0, 0, {r});
      return;
    }

    const auto* wh = attackers_.as<Wormhole>(r);
    if (seen_.contains(r) || (wh && seen_.contains(wh->peer))) return;
    seen_.insert(r);
    reverse_[r] = p.src;

    if (wh) {
      seen_.insert(wh->peer);
      Frame f = frame;
      f.trace.push_back(wh->peer);
      queue_.push(Event{now_ + wh->tunnel_latency_ms, seq_++, wh->peer, true, p, std::move(f)});
      return;
    }

    if (r == req.target) {
      if (!target_replied_) {
        target_replied_ = true;
        reply_to_request(r, r, req, frame, dest_seq(r), 0, {r});
      }
      return;
    }

    if (const auto* b = attackers_.behavior(r)) {
      attacker_request(r, *b, req, frame);
      return;
    }
    forward_request(r, r, req, frame);
  }

  void attacker_request(MoteId r, const AttackerBehavior& b, const RouteRequest& req, const Frame& frame) {
    const bool dsr = cfg_.variant == RouteVariant::Dsr;
    const auto honest_hops = [&] {
      const int d = net_.hop_distances(req.target)[r];
      return d == kUnreachable ? 255 : d;
    };
    if (std::holds_alternative<Spoof>(b)) {
      // Masquerade as the target itself.
      attackers_.impersonate(r, req.target);
      reply_to_request(r, req.target, req, frame, dest_seq(req.target), 0, {req.target});
      forward_request(r, r, req, frame);
    } else if (const auto* fm = std::get_if<FieldModify>(&b)) {
      if (!dsr && fm->target == RouteField::SeqNo) {
        reply_to_request(r, r, req, frame, dest_seq(req.target) + static_cast<std::uint32_t>(fm->seq_bump),
                         honest_hops(), {});
      } else if (!dsr && fm->target == RouteField::HopCount) {
        reply_to_request(r, r, req, frame, dest_seq(req.target), 0, {});
      } else if (dsr && fm->target == RouteField::SourceRoute) {
        RouteRequest cut = req;
        cut.route_record = {req.origin};  // forwarded as [origin, self]
        forward_request(r, r, cut, frame);
        return;
      }
      forward_request(r, r, req, frame);
    } else if (const auto* sk = std::get_if<Sinkhole>(&b)) {
      if (dsr) {
        reply_to_request(r, r, req, frame, 0, 0, {r, req.target});
      } else {
        reply_to_request(r, r, req, frame, dest_seq(req.target) + static_cast<std::uint32_t>(sk->advertised_seq_bump),
                         sk->advertised_hop_count, {});
      }
      forward_request(r, r, req, frame);
    } else if (std::holds_alternative<Sybil>(b)) {
      for (MoteId id : attackers_.identities(r)) forward_request(r, id, req, frame);
    } else {
      forward_request(r, r, req, frame);
    }
  }

  void on_reply(MoteId r, const WirePacket& p, RouteReply rep, const Frame& frame) {
    if (rep.request_id != request_id_ || rep.origin != origin_) return;
    RouteEntry entry;
    entry.destination = rep.target;
    entry.expires_at = now_ + cfg_.lifetime_ms;

    if (cfg_.variant == RouteVariant::Aodv) {
      entry.next_hop = p.src;
      entry.hop_count = rep.hop_count + 1;
      entry.dest_seq_no = rep.dest_seq_no;
      entry.physical_path.assign(frame.trace.rbegin(), frame.trace.rend());
      entry.physical_path.insert(entry.physical_path.end(), frame.onward.begin(), frame.onward.end());
      if (!is_physical_attacker(r)) install_route(tables_[r], entry, RouteVariant::Aodv, now_);
      if (r == rep.origin) {
        result_.replies.push_back(entry);
        return;
      }
      ++rep.hop_count;
    } else {
      if (r == rep.origin) {
        entry.source_route = rep.route_record;
        entry.next_hop = rep.route_record.size() > 1 ? rep.route_record[1] : r;
        entry.hop_count = static_cast<int>(rep.route_record.size()) - 1;
        entry.physical_path = frame.route_truth;
        install_route(tables_[r], entry, RouteVariant::Dsr, now_);
        result_.replies.push_back(entry);
        return;
      }
    }
    const auto rev = reverse_.find(r);
    if (rev == reverse_.end()) return;
    const MoteId as_id = p.dst;  // answer under the identity the reply was addressed to
    send_toward(r, as_id, rev->second, rep, frame);
  }

  const Network& net_;
  AttackerSet& attackers_;
  std::vector<RouteTable>& tables_;
  DiscoveryConfig cfg_;
  RadioHooks hooks_;
  std::map<MoteId, std::uint32_t> dest_seq_;

  MoteId origin_ = 0;
  MoteId target_ = 0;
  std::uint32_t request_id_ = 0;
  SimTime deadline_ = 0;
  SimTime now_ = 0;
  std::uint64_t seq_ = 0;
  bool target_replied_ = false;
  std::set<MoteId> seen_;
  std::set<MoteId> tunnel_forward_;
  std::map<MoteId, MoteId> reverse_;
  std::priority_queue<Event> queue_;
  DiscoveryResult result_;
};

/// Convenience wrappers running one discovery on fresh tables.
inline DiscoveryResult aodv_discover(const Network& net, MoteId src, MoteId dst, AttackerSet attackers = {},
                                     DiscoveryConfig cfg = {}) {
  cfg.variant = RouteVariant::Aodv;
  std::vector<RouteTable> tables(net.size());
  DiscoveryEngine engine(net, attackers, tables, cfg);
  return engine.discover(src, dst, 0, 1);
}

inline DiscoveryResult dsr_discover(const Network& net, MoteId src, MoteId dst, AttackerSet attackers = {},
                                    DiscoveryConfig cfg = {}) {
  cfg.variant = RouteVariant::Dsr;
  std::vector<RouteTable> tables(net.size());
  DiscoveryEngine engine(net, attackers, tables, cfg);
  return engine.discover(src, dst, 0, 1);
}

/// Walks a DSR source route and reports the first hop that cannot be
/// crossed (dead or out-of-range next mote).
struct ForwardCheck {
  bool ok = true;
  MoteId broken_from = 0;
  MoteId broken_to = 0;
};

inline ForwardCheck dsr_forward_check(const Network& net, const std::vector<MoteId>& route) {
  for (std::size_t i = 1; i < route.size(); ++i) {
    const MoteId a = route[i - 1], b = route[i];
    if (!net.contains(a) || !net.contains(b) || !net.mote(b).alive() || !net.linked(a, b)) return {false, a, b};
  }
  return {};
}

}  // namespace wsn
