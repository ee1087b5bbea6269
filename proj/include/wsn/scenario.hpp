#pragma once

// Scenario description, JSON loading/validation, and the defaults echo.

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wsn/adversary.hpp"
#include "wsn/control.hpp"
#include "wsn/detection.hpp"
#include "wsn/energy.hpp"
#include "wsn/mutesla.hpp"
#include "wsn/snep.hpp"
#include "wsn/topology.hpp"

namespace wsn {

using json = nlohmann::ordered_json;

enum class RoutingMode { Tree, Aodv, Dsr };

inline const char* to_string(RoutingMode m) {
  switch (m) {
    case RoutingMode::Tree: return "tree";
    case RoutingMode::Aodv: return "aodv";
    case RoutingMode::Dsr: return "dsr";
  }
  return "?";
}

struct MuteslaConfig {
  bool enabled = false;
  ChainParams chain;
  SimTime max_clock_error_ms = 50;
};

struct ProtocolConfig {
  ProtectionMode protection = ProtectionMode::AuthEnc;
  RoutingMode routing = RoutingMode::Tree;
  SimTime hop_latency_ms = 2;
  int retries = 3;
  SimTime ack_timeout_ms = 100;
  std::uint8_t ttl = 32;
  std::optional<std::string> handshake;  // asymmetric preset run once per mote at start
  MuteslaConfig mutesla;
};

struct TrafficCommand {
  enum class Type { Unicast, Broadcast };
  Type type = Type::Unicast;
  SimTime at_ms = 0;
  MoteId src = 0;
  std::optional<MoteId> dst;  // defaults to the sink
  Reliability reliability = Reliability::Unreliable;
  Bytes payload;
  int count = 1;
  SimTime interval_ms = 0;
};

struct AttackerSpec {
  MoteId id = 0;
  AttackerBehavior behavior;
};

struct DetectionConfig {
  bool enabled = false;
  SimTime period_ms = 250;
  std::vector<ProbePath> paths;  // empty: derived from the sink tree
  Bytes payload_template = to_bytes("wsnprobe");
  SimTime slack_ms = 200;
};

struct LinkLoss {
  MoteId from = 0;
  MoteId to = 0;
  std::optional<int> drop_first;  // absent: every attempt is lost
};

struct Scenario {
  std::string name = "unnamed";
  std::uint64_t seed = 1;
  SimTime duration_ms = 1000;
  SimTime metrics_bin_ms = 100;
  TopologyConfig topology;
  EnergyModel energy;
  ProtocolConfig protocols;
  std::vector<TrafficCommand> traffic;
  std::vector<AttackerSpec> attackers;
  DetectionConfig detection;
  std::vector<LinkLoss> link_loss;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line) : std::runtime_error(what), line_(line) {}
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Invariant violation; `field()` is a JSON path such as `attackers[0].p`.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& why)
      : std::invalid_argument(field + ": " + why), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Unreadable scenario file.
class ScenarioIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  [[nodiscard]] bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  [[nodiscard]] std::string at(const char* key) const { return path_.empty() ? key : path_ + "." + key; }
  [[nodiscard]] const json& raw(const char* key) const { return j_.at(key); }

  template <class T>
  T get(const char* key, T fallback) const {
    if (!has(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ValidationError(at(key), "wrong type");
    }
  }

  [[nodiscard]] double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_number()) throw ValidationError(at(key), "expected a number");
    return j_.at(key).get<double>();
  }

  [[nodiscard]] std::int64_t integer(const char* key, std::int64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) throw ValidationError(at(key), "expected an integer");
    return v.get<std::int64_t>();
  }

  [[nodiscard]] std::string string(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_string()) throw ValidationError(at(key), "expected a string");
    return j_.at(key).get<std::string>();
  }

  [[nodiscard]] bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_boolean()) throw ValidationError(at(key), "expected true or false");
    return j_.at(key).get<bool>();
  }

  [[nodiscard]] Reader object(const char* key) const {
    static const json empty = json::object();
    if (!has(key)) return Reader(empty, at(key));
    if (!j_.at(key).is_object()) throw ValidationError(at(key), "expected an object");
    return Reader(j_.at(key), at(key));
  }

  [[nodiscard]] std::vector<Reader> array(const char* key) const {
    std::vector<Reader> out;
    if (!has(key)) return out;
    const auto& a = j_.at(key);
    if (!a.is_array()) throw ValidationError(at(key), "expected an array");
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string p = at(key) + "[" + std::to_string(i) + "]";
      if (!a[i].is_object()) throw ValidationError(p, "expected an object");
      out.emplace_back(a[i], p);
    }
    return out;
  }

  [[nodiscard]] const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
};

inline MoteId mote_id(const Reader& r, const char* key, std::int64_t fallback = -1) {
  const auto v = r.integer(key, fallback);
  if (v < 0 || v >= kBroadcastId) throw ValidationError(r.at(key), "expected a mote id");
  return static_cast<MoteId>(v);
}

inline std::vector<MoteId> id_list(const json& a, const std::string& path) {
  if (!a.is_array()) throw ValidationError(path, "expected an array of mote ids");
  std::vector<MoteId> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number_integer() || a[i].get<std::int64_t>() < 0 || a[i].get<std::int64_t>() >= kBroadcastId)
      throw ValidationError(path + "[" + std::to_string(i) + "]", "expected a mote id");
    out.push_back(a[i].get<MoteId>());
  }
  return out;
}

inline Bytes hex_decode(const std::string& hex, const std::string& path) {
  if (hex.size() % 2 != 0) throw ValidationError(path, "odd-length hex string");
  Bytes out;
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    try {
      out.push_back(static_cast<std::uint8_t>(std::stoul(hex.substr(i, 2), nullptr, 16)));
    } catch (const std::exception&) {
      throw ValidationError(path, "invalid hex digit");
    }
  }
  return out;
}

inline std::string hex_encode(ByteView b) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  for (auto v : b) {
    s.push_back(digits[v >> 4]);
    s.push_back(digits[v & 15]);
  }
  return s;
}

inline Reliability reliability_from(const Reader& r) {
  const std::string s = r.string("reliability", "unreliable");
  if (s == "reliable") return Reliability::Reliable;
  if (s == "unreliable") return Reliability::Unreliable;
  throw ValidationError(r.at("reliability"), "expected reliable or unreliable");
}

inline AttackerBehavior behavior_from(const Reader& r) {
  const std::string kind = r.string("behavior", "");
  if (kind == "spoof") {
    Spoof s;
    if (r.has("replacement_hex")) {
      s.policy = Spoof::Policy::Replace;
      s.replacement = hex_decode(r.string("replacement_hex", ""), r.at("replacement_hex"));
    }
    s.flip_bits = static_cast<int>(r.integer("flip_bits", 1));
    if (s.flip_bits < 1 || s.flip_bits > 8) throw ValidationError(r.at("flip_bits"), "must lie in [1, 8]");
    return s;
  }
  if (kind == "selective_forward" || kind == "black_hole") {
    const double p = r.number("p", kind == "black_hole" ? 1.0 : 0.0);
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(r.at("p"), "probability must lie in [0, 1]");
    return SelectiveForward{p};
  }
  if (kind == "sinkhole") {
    Sinkhole s;
    s.advertised_hop_count = static_cast<int>(r.integer("advertised_hop_count", 0));
    s.advertised_seq_bump = static_cast<int>(r.integer("advertised_seq_bump", 100));
    if (s.advertised_hop_count < 0 || s.advertised_hop_count > 255)
      throw ValidationError(r.at("advertised_hop_count"), "must lie in [0, 255]");
    return s;
  }
  if (kind == "wormhole") {
    Wormhole w;
    w.peer = mote_id(r, "peer");
    w.tunnel_latency_ms = r.integer("tunnel_latency_ms", 1);
    if (w.tunnel_latency_ms < 0) throw ValidationError(r.at("tunnel_latency_ms"), "must be non-negative");
    return w;
  }
  if (kind == "sybil") {
    Sybil s;
    s.identity_count = static_cast<int>(r.integer("k", 2));
    if (s.identity_count < 2) throw ValidationError(r.at("k"), "InvalidCount: need at least 2 identities");
    if (r.has("victim_ids")) s.victim_ids = id_list(r.raw("victim_ids"), r.at("victim_ids"));
    return s;
  }
  if (kind == "hello_flood") {
    HelloFlood h;
    h.boosted_range = r.number("boosted_range", 0);
    h.period_ms = r.integer("period_ms", 50);
    if (h.boosted_range < 0) throw ValidationError(r.at("boosted_range"), "must be non-negative");
    if (h.period_ms <= 0) throw ValidationError(r.at("period_ms"), "must be positive");
    return h;
  }
  if (kind == "field_modify") {
    FieldModify f;
    const std::string t = r.string("target", "SeqNo");
    if (t == "SeqNo") f.target = RouteField::SeqNo;
    else if (t == "HopCount") f.target = RouteField::HopCount;
    else if (t == "SourceRoute") f.target = RouteField::SourceRoute;
    else throw ValidationError(r.at("target"), "expected SeqNo, HopCount or SourceRoute");
    f.seq_bump = static_cast<int>(r.integer("seq_bump", 100));
    return f;
  }
  throw ValidationError(r.at("behavior"), "unknown attacker behavior '" + kind + "'");
}

inline std::vector<MotePlacement> placements_from(const Reader& parent, const char* key) {
  std::vector<MotePlacement> out;
  for (const auto& p : parent.array(key)) {
    MotePlacement m;
    m.position = {p.number("x", 0), p.number("y", 0)};
    if (p.has("range")) m.radio_range = p.number("range", 0);
    out.push_back(m);
  }
  return out;
}

inline std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

}  // namespace detail

/// Checks cross-field invariants. Called by the loaders; also usable on
/// programmatically built scenarios.
inline void validate(const Scenario& s) {
  Network net;
  try {
    net = build_topology(s.topology);
  } catch (const TopologyError& e) {
    throw ValidationError("topology", e.what());
  }
  try {
    s.energy.validate();
  } catch (const EnergyError& e) {
    throw ValidationError("energy_model", e.what());
  }
  if (s.duration_ms < 0) throw ValidationError("duration_ms", "must be non-negative");
  if (s.metrics_bin_ms <= 0) throw ValidationError("metrics_bin_ms", "must be positive");
  const auto& p = s.protocols;
  if (p.hop_latency_ms <= 0) throw ValidationError("protocols.hop_latency_ms", "must be positive");
  if (p.retries < 0) throw ValidationError("protocols.retries", "must be non-negative");
  if (p.ack_timeout_ms <= 0) throw ValidationError("protocols.ack_timeout_ms", "must be positive");
  if (p.ttl == 0) throw ValidationError("protocols.ttl", "must be positive");
  if (p.handshake && !s.energy.asym.contains(*p.handshake))
    throw ValidationError("protocols.handshake", "UnknownAlgorithm " + *p.handshake);
  if (p.mutesla.chain.length == 0) throw ValidationError("protocols.mutesla.chain_length", "must be >= 1");
  if (p.mutesla.chain.interval_len <= 0) throw ValidationError("protocols.mutesla.interval_ms", "must be positive");
  if (p.mutesla.chain.disclosure_delay == 0) throw ValidationError("protocols.mutesla.disclosure_delay", "must be >= 1");
  if (p.mutesla.max_clock_error_ms < 0) throw ValidationError("protocols.mutesla.max_clock_error_ms", "must be non-negative");

  for (std::size_t i = 0; i < s.traffic.size(); ++i) {
    const auto& t = s.traffic[i];
    const std::string at = "traffic[" + std::to_string(i) + "]";
    if (t.at_ms < 0) throw ValidationError(at + ".at_ms", "must be non-negative");
    if (t.count < 1) throw ValidationError(at + ".count", "must be >= 1");
    if (t.interval_ms < 0) throw ValidationError(at + ".interval_ms", "must be non-negative");
    if (t.type == TrafficCommand::Type::Broadcast) {
      if (!p.mutesla.enabled) throw ValidationError(at + ".type", "broadcast traffic needs protocols.mutesla.enabled");
      if (t.payload.size() + 4 + Tag::kSize > WirePacket::kMaxPayload)
        throw ValidationError(at + ".payload", "broadcast payload too large");
      continue;
    }
    if (!net.contains(t.src)) throw ValidationError(at + ".src", "no such mote");
    if (t.dst && !net.contains(*t.dst)) throw ValidationError(at + ".dst", "no such mote");
    if (t.dst && *t.dst != net.sink() && p.routing == RoutingMode::Tree)
      throw ValidationError(at + ".dst", "tree routing only carries traffic to the sink");
    if (t.payload.size() + security_overhead(p.protection) > WirePacket::kMaxPayload)
      throw ValidationError(at + ".payload", "payload exceeds 64 bytes once secured");
  }

  std::map<MoteId, std::size_t> attacker_index;
  for (std::size_t i = 0; i < s.attackers.size(); ++i) {
    const auto& a = s.attackers[i];
    const std::string at = "attackers[" + std::to_string(i) + "]";
    if (!net.contains(a.id)) throw ValidationError(at + ".id", "no such mote");
    if (a.id == net.sink()) throw ValidationError(at + ".id", "the sink cannot be an attacker");
    if (!attacker_index.emplace(a.id, i).second) throw ValidationError(at + ".id", "mote already has a behavior");
    if (const auto* sf = std::get_if<SelectiveForward>(&a.behavior); sf && !(sf->drop_prob >= 0 && sf->drop_prob <= 1))
      throw ValidationError(at + ".p", "probability must lie in [0, 1]");
  }
  for (std::size_t i = 0; i < s.attackers.size(); ++i) {
    const auto* w = std::get_if<Wormhole>(&s.attackers[i].behavior);
    if (!w) continue;
    const std::string at = "attackers[" + std::to_string(i) + "].peer";
    if (w->peer == s.attackers[i].id) throw ValidationError(at, "a wormhole cannot peer with itself");
    const auto it = attacker_index.find(w->peer);
    const Wormhole* back = it == attacker_index.end() ? nullptr : std::get_if<Wormhole>(&s.attackers[it->second].behavior);
    if (!back || back->peer != s.attackers[i].id) throw ValidationError(at, "wormhole peers must name each other");
  }

  const auto& d = s.detection;
  if (d.enabled) {
    if (d.period_ms <= 0) throw ValidationError("detection.period_ms", "must be positive");
    if (d.slack_ms < 0) throw ValidationError("detection.slack_ms", "must be non-negative");
    ProbePlan plan;
    plan.paths = d.paths;
    plan.payload_template = d.payload_template;
    for (std::size_t i = 0; i < d.paths.size(); ++i)
      for (std::size_t j = 0; j < d.paths[i].size(); ++j)
        if (!net.contains(d.paths[i][j]))
          throw ValidationError("detection.paths[" + std::to_string(i) + "][" + std::to_string(j) + "]", "no such mote");
    try {
      plan.validate(net.sink());
    } catch (const std::invalid_argument& e) {
      throw ValidationError("detection", e.what());
    }
  }
  for (std::size_t i = 0; i < s.link_loss.size(); ++i) {
    const auto& l = s.link_loss[i];
    const std::string at = "link_loss[" + std::to_string(i) + "]";
    if (!net.contains(l.from)) throw ValidationError(at + ".from", "no such mote");
    if (!net.contains(l.to)) throw ValidationError(at + ".to", "no such mote");
    if (l.drop_first && *l.drop_first < 0) throw ValidationError(at + ".drop_first", "must be non-negative");
  }
}

/// Builds a Scenario from a parsed document, filling defaults.
inline Scenario scenario_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("$", "scenario must be a JSON object");
  detail::Reader root(doc, "");
  Scenario s;
  s.name = root.string("name", s.name);
  const auto seed = root.integer("seed", 1);
  if (seed < 0) throw ValidationError("seed", "must be non-negative");
  s.seed = static_cast<std::uint64_t>(seed);
  s.duration_ms = root.integer("duration_ms", s.duration_ms);
  s.metrics_bin_ms = root.integer("metrics_bin_ms", s.metrics_bin_ms);

  {
    const auto t = root.object("topology");
    auto& c = s.topology;
    const std::string layout = t.string("layout", t.has("positions") ? "explicit" : "grid");
    if (layout == "grid") c.layout = TopologyConfig::Layout::Grid;
    else if (layout == "explicit") c.layout = TopologyConfig::Layout::Explicit;
    else if (layout == "random") c.layout = TopologyConfig::Layout::Random;
    else throw ValidationError(t.at("layout"), "expected grid, explicit or random");
    c.rows = static_cast<int>(t.integer("rows", 3));
    c.cols = static_cast<int>(t.integer("cols", 3));
    c.spacing = t.number("spacing", c.spacing);
    c.count = static_cast<int>(t.integer("count", 0));
    c.width = t.number("width", c.width);
    c.height = t.number("height", c.height);
    c.placement_seed = static_cast<std::uint64_t>(t.integer("placement_seed", static_cast<std::int64_t>(s.seed)));
    c.positions = detail::placements_from(t, "positions");
    c.extra = detail::placements_from(t, "extra");
    c.radio_range = t.number("radio_range", c.radio_range);
    if (!t.has("sink")) throw ValidationError(t.at("sink"), "exactly one sink is required");
    c.sink = detail::mote_id(t, "sink");
    c.initial_energy_mj = t.number("initial_energy_mj", c.initial_energy_mj);
  }
  {
    const auto e = root.object("energy_model");
    auto& m = s.energy;
    m.instructions_per_bit = static_cast<int>(e.integer("instructions_per_bit", m.instructions_per_bit));
    m.energy_per_instruction_mj = e.number("energy_per_instruction_mj", m.energy_per_instruction_mj);
    m.rx_factor = e.number("rx_factor", m.rx_factor);
    m.cipher = e.string("cipher", m.cipher);
    m.base_cipher_instr = e.integer("base_cipher_instr", m.base_cipher_instr);
    m.hello_processing_instr = e.integer("hello_processing_instr", m.hello_processing_instr);
    m.idle_mj_per_s = e.number("idle_mj_per_s", m.idle_mj_per_s);
    if (e.has("cipher_normalized")) {
      const auto c = e.object("cipher_normalized");
      for (auto& [name, prof] : m.ciphers) prof.normalized = c.number(name.c_str(), prof.normalized);
    }
  }
  {
    const auto p = root.object("protocols");
    auto& c = s.protocols;
    const std::string mode = p.string("protection_mode", to_string(c.protection));
    const auto pm = protection_mode_from_string(mode);
    if (!pm) throw ValidationError(p.at("protection_mode"), "expected AuthEnc, AuthOnly or None");
    c.protection = *pm;
    const std::string routing = p.string("routing", "tree");
    if (routing == "tree") c.routing = RoutingMode::Tree;
    else if (routing == "aodv") c.routing = RoutingMode::Aodv;
    else if (routing == "dsr") c.routing = RoutingMode::Dsr;
    else throw ValidationError(p.at("routing"), "expected tree, aodv or dsr");
    c.hop_latency_ms = p.integer("hop_latency_ms", c.hop_latency_ms);
    c.retries = static_cast<int>(p.integer("retries", c.retries));
    c.ack_timeout_ms = p.integer("ack_timeout_ms", c.ack_timeout_ms);
    const auto ttl = p.integer("ttl", c.ttl);
    if (ttl < 1 || ttl > 255) throw ValidationError(p.at("ttl"), "must lie in [1, 255]");
    c.ttl = static_cast<std::uint8_t>(ttl);
    if (p.has("handshake")) c.handshake = p.string("handshake", "");
    const auto m = p.object("mutesla");
    c.mutesla.enabled = m.boolean("enabled", false);
    const auto len = m.integer("chain_length", 200);
    if (len < 1 || len > 100000) throw ValidationError(m.at("chain_length"), "must lie in [1, 100000]");
    c.mutesla.chain.length = static_cast<std::uint32_t>(len);
    c.mutesla.chain.interval_len = m.integer("interval_ms", 500);
    const auto delay = m.integer("disclosure_delay", 2);
    if (delay < 1) throw ValidationError(m.at("disclosure_delay"), "must be >= 1");
    c.mutesla.chain.disclosure_delay = static_cast<std::uint32_t>(delay);
    c.mutesla.chain.start_time = m.integer("start_ms", 0);
    c.mutesla.max_clock_error_ms = m.integer("max_clock_error_ms", 50);
  }
  for (const auto& t : root.array("traffic")) {
    TrafficCommand c;
    const std::string type = t.string("type", "unicast");
    if (type == "unicast") c.type = TrafficCommand::Type::Unicast;
    else if (type == "broadcast") c.type = TrafficCommand::Type::Broadcast;
    else throw ValidationError(t.at("type"), "expected unicast or broadcast");
    c.at_ms = t.integer("at_ms", 0);
    c.src = c.type == TrafficCommand::Type::Broadcast ? s.topology.sink : detail::mote_id(t, "src");
    if (t.has("dst")) c.dst = detail::mote_id(t, "dst");
    c.reliability = detail::reliability_from(t);
    if (t.has("payload_hex")) c.payload = detail::hex_decode(t.string("payload_hex", ""), t.at("payload_hex"));
    else if (t.has("payload")) c.payload = to_bytes(t.string("payload", ""));
    else {
      const auto n = t.integer("payload_bytes", 20);
      if (n < 0 || n > 64) throw ValidationError(t.at("payload_bytes"), "must lie in [0, 64]");
      for (std::int64_t i = 0; i < n; ++i) c.payload.push_back(static_cast<std::uint8_t>('a' + i % 26));
    }
    c.count = static_cast<int>(t.integer("count", 1));
    c.interval_ms = t.integer("interval_ms", 0);
    s.traffic.push_back(std::move(c));
  }
  for (const auto& a : root.array("attackers")) {
    AttackerSpec spec;
    spec.id = detail::mote_id(a, "id");
    spec.behavior = detail::behavior_from(a);
    s.attackers.push_back(std::move(spec));
  }
  {
    const auto d = root.object("detection");
    auto& c = s.detection;
    c.enabled = d.boolean("enabled", false);
    c.period_ms = d.integer("period_ms", c.period_ms);
    c.slack_ms = d.integer("slack_ms", c.slack_ms);
    if (d.has("payload_template")) c.payload_template = to_bytes(d.string("payload_template", ""));
    if (d.has("paths")) {
      const auto& arr = d.raw("paths");
      if (!arr.is_array()) throw ValidationError(d.at("paths"), "expected an array of paths");
      for (std::size_t i = 0; i < arr.size(); ++i)
        c.paths.push_back(detail::id_list(arr[i], d.at("paths") + "[" + std::to_string(i) + "]"));
    }
  }
  for (const auto& l : root.array("link_loss")) {
    LinkLoss loss;
    loss.from = detail::mote_id(l, "from");
    loss.to = detail::mote_id(l, "to");
    if (l.has("drop_first")) loss.drop_first = static_cast<int>(l.integer("drop_first", 0));
    s.link_loss.push_back(loss);
  }
  validate(s);
  return s;
}

inline Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t line = detail::line_of(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError("line " + std::to_string(line) + ": " + e.what(), line);
  }
  return scenario_from_json(doc);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioIoError("cannot read scenario file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

inline json behavior_to_json(const AttackerBehavior& b) {
  json j;
  j["behavior"] = behavior_name(b);
  std::visit(
      [&](const auto& v) {
        using B = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<B, Spoof>) {
          j["policy"] = v.policy == Spoof::Policy::FlipBits ? "flip_bits" : "replace";
          j["flip_bits"] = v.flip_bits;
          if (v.policy == Spoof::Policy::Replace) j["replacement_hex"] = detail::hex_encode(v.replacement);
        } else if constexpr (std::is_same_v<B, SelectiveForward>) {
          j["p"] = v.drop_prob;
        } else if constexpr (std::is_same_v<B, Sinkhole>) {
          j["advertised_hop_count"] = v.advertised_hop_count;
          j["advertised_seq_bump"] = v.advertised_seq_bump;
        } else if constexpr (std::is_same_v<B, Wormhole>) {
          j["peer"] = v.peer;
          j["tunnel_latency_ms"] = v.tunnel_latency_ms;
        } else if constexpr (std::is_same_v<B, Sybil>) {
          j["k"] = v.identity_count;
          j["victim_ids"] = v.victim_ids;
        } else if constexpr (std::is_same_v<B, HelloFlood>) {
          j["boosted_range"] = v.boosted_range;
          j["period_ms"] = v.period_ms;
        } else if constexpr (std::is_same_v<B, FieldModify>) {
          j["target"] = to_string(v.target);
          j["seq_bump"] = v.seq_bump;
        }
      },
      b);
  return j;
}

/// Fully defaulted scenario, in the input format; reloading it yields the
/// same scenario.
inline json scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["seed"] = s.seed;
  j["duration_ms"] = s.duration_ms;
  j["metrics_bin_ms"] = s.metrics_bin_ms;
  {
    const auto& c = s.topology;
    json t;
    switch (c.layout) {
      case TopologyConfig::Layout::Grid:
        t["layout"] = "grid";
        t["rows"] = c.rows;
        t["cols"] = c.cols;
        t["spacing"] = c.spacing;
        break;
      case TopologyConfig::Layout::Explicit: t["layout"] = "explicit"; break;
      case TopologyConfig::Layout::Random:
        t["layout"] = "random";
        t["count"] = c.count;
        t["width"] = c.width;
        t["height"] = c.height;
        t["placement_seed"] = c.placement_seed;
        break;
    }
    const auto places = [](const std::vector<MotePlacement>& v) {
      json a = json::array();
      for (const auto& p : v) {
        json m{{"x", p.position.x}, {"y", p.position.y}};
        if (p.radio_range) m["range"] = *p.radio_range;
        a.push_back(m);
      }
      return a;
    };
    if (c.layout == TopologyConfig::Layout::Explicit) t["positions"] = places(c.positions);
    if (!c.extra.empty()) t["extra"] = places(c.extra);
    t["radio_range"] = c.radio_range;
    t["sink"] = c.sink;
    t["initial_energy_mj"] = c.initial_energy_mj;
    j["topology"] = t;
  }
  {
    const auto& m = s.energy;
    json e;
    e["instructions_per_bit"] = m.instructions_per_bit;
    e["energy_per_instruction_mj"] = m.energy_per_instruction_mj;
    e["rx_factor"] = m.rx_factor;
    e["cipher"] = m.cipher;
    e["base_cipher_instr"] = m.base_cipher_instr;
    e["hello_processing_instr"] = m.hello_processing_instr;
    e["idle_mj_per_s"] = m.idle_mj_per_s;
    json norm;
    for (const auto& [name, prof] : m.ciphers) norm[name] = prof.normalized;
    e["cipher_normalized"] = norm;
    j["energy_model"] = e;
  }
  {
    const auto& c = s.protocols;
    json p;
    p["protection_mode"] = to_string(c.protection);
    p["routing"] = to_string(c.routing);
    p["hop_latency_ms"] = c.hop_latency_ms;
    p["retries"] = c.retries;
    p["ack_timeout_ms"] = c.ack_timeout_ms;
    p["ttl"] = c.ttl;
    if (c.handshake) p["handshake"] = *c.handshake;
    p["mutesla"] = {{"enabled", c.mutesla.enabled},
                    {"chain_length", c.mutesla.chain.length},
                    {"interval_ms", c.mutesla.chain.interval_len},
                    {"disclosure_delay", c.mutesla.chain.disclosure_delay},
                    {"start_ms", c.mutesla.chain.start_time},
                    {"max_clock_error_ms", c.mutesla.max_clock_error_ms}};
    j["protocols"] = p;
  }
  json traffic = json::array();
  for (const auto& t : s.traffic) {
    json c;
    c["type"] = t.type == TrafficCommand::Type::Unicast ? "unicast" : "broadcast";
    c["at_ms"] = t.at_ms;
    c["src"] = t.src;
    if (t.dst) c["dst"] = *t.dst;
    c["reliability"] = t.reliability == Reliability::Reliable ? "reliable" : "unreliable";
    c["payload_hex"] = detail::hex_encode(t.payload);
    c["count"] = t.count;
    c["interval_ms"] = t.interval_ms;
    traffic.push_back(c);
  }
  j["traffic"] = traffic;
  json attackers = json::array();
  for (const auto& a : s.attackers) {
    json b = behavior_to_json(a.behavior);
    json entry{{"id", a.id}};
    entry.update(b);
    attackers.push_back(entry);
  }
  j["attackers"] = attackers;
  {
    const auto& d = s.detection;
    json paths = json::array();
    for (const auto& p : d.paths) paths.push_back(p);
    j["detection"] = {{"enabled", d.enabled},
                      {"period_ms", d.period_ms},
                      {"slack_ms", d.slack_ms},
                      {"payload_template", std::string(d.payload_template.begin(), d.payload_template.end())},
                      {"paths", paths}};
  }
  json loss = json::array();
  for (const auto& l : s.link_loss) {
    json e{{"from", l.from}, {"to", l.to}};
    if (l.drop_first) e["drop_first"] = *l.drop_first;
    loss.push_back(e);
  }
  j["link_loss"] = loss;
  return j;
}

}  // namespace wsn
