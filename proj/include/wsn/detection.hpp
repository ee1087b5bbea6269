#pragma once

// Probe-based spoofing detection. The sink sends integrity-tagged check
// packets around round-trip paths and later checks whether any came back
// altered. Probe tags use a key only the sink holds.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "wsn/crypto.hpp"
#include "wsn/mutesla.hpp"
#include "wsn/topology.hpp"
#include "wsn/wire.hpp"

namespace wsn {

using ProbePath = std::vector<MoteId>;

struct ProbePlan {
  std::vector<ProbePath> paths;  // each starts and ends at the sink
  SimTime period_ms = 250;
  Bytes payload_template = to_bytes("wsnprobe");
  Key probe_key;
  SimTime slack_ms = 200;
  SimTime hop_latency_ms = 2;

  /// Throws std::invalid_argument naming the offending field.
  void validate(MoteId sink) const {
    if (period_ms <= 0) throw std::invalid_argument("period_ms must be positive");
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const auto& p = paths[i];
      if (p.size() < 2 || p.front() != sink || p.back() != sink)
        throw std::invalid_argument("paths[" + std::to_string(i) + "] must start and end at the sink");
      if (probe_wire_size(p.size()) > WirePacket::kMaxPayload)
        throw std::invalid_argument("paths[" + std::to_string(i) + "] too long for one probe payload");
    }
  }

  [[nodiscard]] std::size_t probe_wire_size(std::size_t path_len) const {
    return 4 + 1 + 1 + 2 * path_len + Tag::kSize + payload_template.size();
  }

  [[nodiscard]] SimTime timeout_for(std::size_t path_index) const {
    const auto hops = static_cast<SimTime>(paths.at(path_index).size() - 1);
    return 2 * hops * hop_latency_ms + slack_ms;
  }
};

struct ProbeInjection {
  SimTime time = 0;
  std::uint32_t round = 0;
  std::size_t path_index = 0;
  std::uint32_t seq = 0;
};

/// One injection per path per period; at least one round even when the run
/// is shorter than a period.
inline std::vector<ProbeInjection> schedule_probes(const ProbePlan& plan, SimTime duration_ms) {
  std::vector<ProbeInjection> out;
  if (plan.paths.empty()) return out;
  const SimTime rounds = std::max<SimTime>(1, (duration_ms + plan.period_ms - 1) / plan.period_ms);
  std::uint32_t seq = 1;
  for (SimTime r = 0; r < rounds; ++r)
    for (std::size_t p = 0; p < plan.paths.size(); ++p)
      out.push_back({r * plan.period_ms, static_cast<std::uint32_t>(r), p, seq++});
  return out;
}

/// On-air probe: seq(4) hop_idx(1) n(1) path(2n) tag(8) payload. The
/// payload goes last so that tail alterations land in the checked bytes.
struct Probe {
  std::uint32_t seq = 0;
  std::uint8_t hop_index = 0;
  ProbePath path;
  Tag tag;
  Bytes payload;

  static Tag compute_tag(const Key& key, std::uint32_t seq, ByteView payload) {
    Bytes input;
    detail::put_be32(input, seq);
    input.insert(input.end(), payload.begin(), payload.end());
    return crypto::mac(key, input);
  }

  static Probe issue(const ProbePlan& plan, std::size_t path_index, std::uint32_t seq) {
    Probe p;
    p.seq = seq;
    p.path = plan.paths.at(path_index);
    p.payload = plan.payload_template;
    p.tag = compute_tag(plan.probe_key, seq, p.payload);
    return p;
  }

  [[nodiscard]] Bytes encode() const {
    ByteWriter w;
    w.u32(seq);
    w.u8(hop_index);
    w.u8(static_cast<std::uint8_t>(path.size()));
    for (MoteId m : path) w.u16(m);
    w.bytes(tag.bytes);
    w.bytes(payload);
    return w.take();
  }

  static std::optional<Probe> decode(ByteView wire) {
    ByteReader r(wire);
    Probe p;
    std::uint8_t n = 0;
    if (!r.u32(p.seq) || !r.u8(p.hop_index) || !r.u8(n)) return std::nullopt;
    for (int i = 0; i < n; ++i) {
      MoteId m = 0;
      if (!r.u16(m)) return std::nullopt;
      p.path.push_back(m);
    }
    Bytes tag;
    if (!r.bytes(Tag::kSize, tag)) return std::nullopt;
    std::copy(tag.begin(), tag.end(), p.tag.bytes.begin());
    r.bytes(r.remaining(), p.payload);
    return p;
  }
};

enum class ProbeOutcome { Clean, Altered, Missing, UnknownSequence };

inline const char* to_string(ProbeOutcome o) {
  switch (o) {
    case ProbeOutcome::Clean: return "clean";
    case ProbeOutcome::Altered: return "altered";
    case ProbeOutcome::Missing: return "missing";
    case ProbeOutcome::UnknownSequence: return "unknown_sequence";
  }
  return "?";
}

/// Clean iff the payload still equals the template and the tag verifies.
inline ProbeOutcome verify_probe(const ProbePlan& plan, const std::set<std::uint32_t>& issued, const Probe& returned) {
  if (!issued.contains(returned.seq)) return ProbeOutcome::UnknownSequence;
  if (returned.payload != plan.payload_template) return ProbeOutcome::Altered;
  const Tag expect = Probe::compute_tag(plan.probe_key, returned.seq, returned.payload);
  return crypto::tags_equal(expect, returned.tag) ? ProbeOutcome::Clean : ProbeOutcome::Altered;
}

struct DetectionEvent {
  SimTime time = 0;
  std::uint32_t round = 0;
  std::uint32_t seq = 0;
  std::optional<std::size_t> path_index;  // absent for unknown sequences
  ProbeOutcome outcome = ProbeOutcome::Clean;
};

struct DetectionReport {
  std::uint32_t rounds_run = 0;
  std::uint64_t clean_count = 0;
  std::uint64_t altered_count = 0;  // includes unknown sequences
  std::uint64_t missing_count = 0;
  bool spoofing_detected = false;
  bool loss_advisory = false;  // possible black hole / denial of service
  std::optional<SimTime> first_detection_ms;
  std::vector<std::size_t> suspected_paths;
  std::vector<DetectionEvent> events;
};

/// Sink-side bookkeeping: issued probes, returns, and deadlines.
class DetectionMonitor {
 public:
  explicit DetectionMonitor(ProbePlan plan) : plan_(std::move(plan)) {}

  [[nodiscard]] const ProbePlan& plan() const { return plan_; }

  Probe issue(const ProbeInjection& inj) {
    issued_.insert(inj.seq);
    pending_[inj.seq] = {inj.path_index, inj.round, inj.time + plan_.timeout_for(inj.path_index)};
    rounds_ = std::max(rounds_, inj.round + 1);
    return Probe::issue(plan_, inj.path_index, inj.seq);
  }

  [[nodiscard]] std::optional<SimTime> deadline(std::uint32_t seq) const {
    const auto it = pending_.find(seq);
    return it == pending_.end() ? std::nullopt : std::optional<SimTime>(it->second.deadline);
  }

  ProbeOutcome on_return(const Probe& p, SimTime now) {
    const ProbeOutcome o = verify_probe(plan_, issued_, p);
    const auto it = pending_.find(p.seq);
    if (o == ProbeOutcome::UnknownSequence || it == pending_.end()) {
      // Unissued or already settled: evidence of injection or duplication.
      record({now, 0, p.seq, std::nullopt, o == ProbeOutcome::Clean ? ProbeOutcome::UnknownSequence : o});
      return o == ProbeOutcome::Clean ? ProbeOutcome::UnknownSequence : o;
    }
    record({now, it->second.round, p.seq, it->second.path_index, o});
    pending_.erase(it);
    return o;
  }

  /// Settles every probe whose deadline has passed as missing.
  void expire(SimTime now) {
    for (auto it = pending_.begin(); it != pending_.end();) {
      if (it->second.deadline <= now) {
        record({it->second.deadline, it->second.round, it->first, it->second.path_index, ProbeOutcome::Missing});
        it = pending_.erase(it);
      } else {
        ++it;
      }
    }
  }

  [[nodiscard]] DetectionReport report() const {
    DetectionReport r = report_;
    r.rounds_run = rounds_;
    r.suspected_paths.assign(suspected_.begin(), suspected_.end());
    return r;
  }

 private:
  struct Pending {
    std::size_t path_index;
    std::uint32_t round;
    SimTime deadline;
  };

  void record(const DetectionEvent& e) {
    report_.events.push_back(e);
    switch (e.outcome) {
      case ProbeOutcome::Clean: ++report_.clean_count; break;
      case ProbeOutcome::Missing:
        ++report_.missing_count;
        report_.loss_advisory = true;
        break;
      case ProbeOutcome::Altered:
      case ProbeOutcome::UnknownSequence:
        ++report_.altered_count;
        if (!report_.spoofing_detected) report_.first_detection_ms = e.time;
        report_.spoofing_detected = true;
        break;
    }
    if (e.outcome != ProbeOutcome::Clean && e.path_index) suspected_.insert(*e.path_index);
  }

  ProbePlan plan_;
  std::set<std::uint32_t> issued_;
  std::map<std::uint32_t, Pending> pending_;
  std::set<std::size_t> suspected_;
  std::uint32_t rounds_ = 0;
  DetectionReport report_;
};

/// Aggregates a window of outcomes without a running monitor.
inline DetectionReport evaluate(const std::vector<DetectionEvent>& window, std::uint32_t rounds_run) {
  DetectionReport r;
  r.rounds_run = rounds_run;
  std::set<std::size_t> suspected;
  for (const auto& e : window) {
    r.events.push_back(e);
    if (e.outcome == ProbeOutcome::Clean) {
      ++r.clean_count;
      continue;
    }
    if (e.outcome == ProbeOutcome::Missing) {
      ++r.missing_count;
      r.loss_advisory = true;
    } else {
      ++r.altered_count;
      if (!r.spoofing_detected) r.first_detection_ms = e.time;
      r.spoofing_detected = true;
    }
    if (e.path_index) suspected.insert(*e.path_index);
  }
  r.suspected_paths.assign(suspected.begin(), suspected.end());
  return r;
}

/// Default probe paths: one round trip per leaf of the sink tree, deepest
/// leaves first, kept only while it covers a not-yet-covered tree edge.
inline std::vector<ProbePath> auto_probe_paths(const TreeRoutes& tree, MoteId sink) {
  std::vector<bool> has_child(tree.next_hop.size(), false);
  for (MoteId v = 0; v < tree.next_hop.size(); ++v)
    if (v != sink && tree.next_hop[v]) has_child[*tree.next_hop[v]] = true;
  std::vector<MoteId> leaves;
  for (MoteId v = 0; v < tree.next_hop.size(); ++v)
    if (v != sink && tree.hops[v] != kUnreachable && !has_child[v]) leaves.push_back(v);
  std::stable_sort(leaves.begin(), leaves.end(), [&](MoteId a, MoteId b) { return tree.hops[a] > tree.hops[b]; });

  std::set<std::pair<MoteId, MoteId>> covered;
  std::vector<ProbePath> out;
  for (MoteId leaf : leaves) {
    const auto up = tree.path_to_root(leaf);
    if (up.back() != sink) continue;
    bool fresh = false;
    for (std::size_t i = 1; i < up.size(); ++i) fresh |= covered.insert({up[i - 1], up[i]}).second;
    if (!fresh) continue;
    ProbePath p(up.rbegin(), up.rend());         // sink .. leaf
    p.insert(p.end(), up.begin() + 1, up.end());  // .. back to sink
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace wsn
