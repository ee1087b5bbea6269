#include <gtest/gtest.h>

#include "wsn/detection.hpp"
#include "wsn/simulator.hpp"

using namespace wsn;

namespace {

ProbePlan plan_of(std::vector<ProbePath> paths) {
  ProbePlan p;
  p.paths = std::move(paths);
  p.probe_key = crypto::derive_key(1, "probe");
  return p;
}

Scenario line_scenario(int n) {
  Scenario s;
  s.topology.layout = TopologyConfig::Layout::Explicit;
  for (int i = 0; i < n; ++i) s.topology.positions.push_back({{10.0 * i, 0}, std::nullopt});
  s.detection.enabled = true;
  s.detection.paths = {{0, 1, 2, 3, 4, 3, 2, 1, 0}};
  s.duration_ms = 1000;
  return s;
}

}  // namespace

TEST(Schedule, RoundsTimesPaths) {
  auto plan = plan_of({{0, 1, 0}, {0, 2, 0}});
  const auto inj = schedule_probes(plan, 1000);
  ASSERT_EQ(inj.size(), 8u);
  for (std::size_t i = 0; i < inj.size(); ++i) EXPECT_EQ(inj[i].seq, i + 1);
  EXPECT_EQ(inj[7].time, 750);
  EXPECT_EQ(inj[7].round, 3u);
  EXPECT_EQ(schedule_probes(plan, 100).size(), 2u);
  EXPECT_TRUE(schedule_probes(plan_of({}), 1000).empty());
}

TEST(Plan, Validation) {
  EXPECT_NO_THROW(plan_of({{0, 1, 0}}).validate(0));
  EXPECT_THROW(plan_of({{1, 0}}).validate(0), std::invalid_argument);
  EXPECT_THROW(plan_of({{0}}).validate(0), std::invalid_argument);
  EXPECT_THROW(plan_of({ProbePath(30, 0)}).validate(0), std::invalid_argument);
  auto p = plan_of({{0, 1, 0}});
  p.period_ms = 0;
  EXPECT_THROW(p.validate(0), std::invalid_argument);
  EXPECT_EQ(plan_of({{0, 1, 2, 1, 0}}).timeout_for(0), 2 * 4 * 2 + 200);
}

TEST(Probe, WireRoundTrip) {
  const auto plan = plan_of({{0, 1, 2, 1, 0}});
  auto p = Probe::issue(plan, 0, 42);
  p.hop_index = 3;
  const auto w = p.encode();
  EXPECT_EQ(w.size(), plan.probe_wire_size(5));
  const auto back = Probe::decode(w);
  ASSERT_TRUE(back);
  EXPECT_EQ(back->seq, 42u);
  EXPECT_EQ(back->hop_index, 3);
  EXPECT_EQ(back->path, p.path);
  EXPECT_EQ(back->tag, p.tag);
  EXPECT_EQ(back->payload, plan.payload_template);
}

TEST(Verify, Outcomes) {
  const auto plan = plan_of({{0, 1, 0}});
  const auto p = Probe::issue(plan, 0, 1);
  EXPECT_EQ(verify_probe(plan, {1}, p), ProbeOutcome::Clean);
  EXPECT_EQ(verify_probe(plan, {2}, p), ProbeOutcome::UnknownSequence);
  auto altered = p;
  altered.payload.back() ^= 1;
  EXPECT_EQ(verify_probe(plan, {1}, altered), ProbeOutcome::Altered);
  auto retagged = p;
  retagged.tag.bytes[0] ^= 1;
  EXPECT_EQ(verify_probe(plan, {1}, retagged), ProbeOutcome::Altered);
}

TEST(Monitor, CleanMissingDuplicate) {
  DetectionMonitor mon(plan_of({{0, 1, 0}, {0, 2, 0}}));
  const auto inj = schedule_probes(mon.plan(), 250);
  const auto p1 = mon.issue(inj[0]);
  mon.issue(inj[1]);
  EXPECT_EQ(mon.deadline(1), 2 * 2 * 2 + 200);
  EXPECT_EQ(mon.on_return(p1, 10), ProbeOutcome::Clean);
  EXPECT_EQ(mon.on_return(p1, 11), ProbeOutcome::UnknownSequence);
  mon.expire(500);
  const auto r = mon.report();
  EXPECT_EQ(r.rounds_run, 1u);
  EXPECT_EQ(r.clean_count, 1u);
  EXPECT_EQ(r.missing_count, 1u);
  EXPECT_EQ(r.altered_count, 1u);
  EXPECT_TRUE(r.loss_advisory);
  EXPECT_TRUE(r.spoofing_detected);
  EXPECT_EQ(r.suspected_paths, std::vector<std::size_t>{1});
}

TEST(Evaluate, Aggregation) {
  const std::vector<DetectionEvent> ok{{0, 0, 1, 0, ProbeOutcome::Clean}, {250, 1, 2, 0, ProbeOutcome::Clean}};
  const auto clean = evaluate(ok, 2);
  EXPECT_FALSE(clean.spoofing_detected);
  EXPECT_FALSE(clean.loss_advisory);
  EXPECT_TRUE(clean.suspected_paths.empty());

  auto mixed = ok;
  mixed.push_back({300, 1, 3, 1, ProbeOutcome::Missing});
  mixed.push_back({400, 1, 4, 2, ProbeOutcome::Altered});
  const auto r = evaluate(mixed, 2);
  EXPECT_TRUE(r.spoofing_detected);
  EXPECT_TRUE(r.loss_advisory);
  EXPECT_EQ(r.first_detection_ms, 400);
  EXPECT_EQ(r.suspected_paths, (std::vector<std::size_t>{1, 2}));
}

TEST(AutoPaths, CoverEveryTreeEdge) {
  TopologyConfig c;
  c.rows = c.cols = 4;
  const auto net = build_topology(c);
  const auto tree = beacon_tree_route(net, 0);
  const auto paths = auto_probe_paths(tree, 0);
  ASSERT_FALSE(paths.empty());
  std::set<std::pair<MoteId, MoteId>> covered;
  for (const auto& p : paths) {
    EXPECT_EQ(p.front(), 0u);
    EXPECT_EQ(p.back(), 0u);
    for (std::size_t i = 1; i < p.size(); ++i) {
      EXPECT_TRUE(net.linked(p[i - 1], p[i]));
      covered.insert({std::min(p[i - 1], p[i]), std::max(p[i - 1], p[i])});
    }
  }
  for (MoteId v = 1; v < net.size(); ++v)
    EXPECT_TRUE(covered.contains({std::min(v, *tree.next_hop[v]), std::max(v, *tree.next_hop[v])})) << "edge of " << v;
}

TEST(DetectionSim, SpoofOnPathDetected) {
  auto s = line_scenario(5);
  s.attackers.push_back({2, Spoof{}});
  const auto r = run(s);
  ASSERT_TRUE(r.detection);
  EXPECT_TRUE(r.detection->spoofing_detected);
  EXPECT_EQ(r.detection->suspected_paths, std::vector<std::size_t>{0});
  EXPECT_EQ(r.detection->rounds_run, 4u);
  EXPECT_GT(r.total("probes_altered"), 0);
}

TEST(DetectionSim, BlackHoleRaisesLossAdvisoryOnly) {
  auto s = line_scenario(5);
  s.attackers.push_back({2, SelectiveForward{1.0}});
  const auto r = run(s);
  ASSERT_TRUE(r.detection);
  EXPECT_FALSE(r.detection->spoofing_detected);
  EXPECT_TRUE(r.detection->loss_advisory);
  EXPECT_EQ(r.detection->missing_count, 4u);
}

TEST(DetectionSim, OffPathSpoofNotDetected) {
  auto s = line_scenario(3);
  s.topology.positions.push_back({{10, 10}, std::nullopt});
  s.detection.paths = {{0, 1, 2, 1, 0}};
  s.attackers.push_back({3, Spoof{}});
  const auto r = run(s);
  ASSERT_TRUE(r.detection);
  EXPECT_FALSE(r.detection->spoofing_detected);
  EXPECT_EQ(r.detection->clean_count, 4u);
}

TEST(DetectionSim, NoFalsePositivesOverThousandRounds) {
  Scenario s;
  s.topology.rows = s.topology.cols = 3;
  // The default battery lasts about 720 probe rounds at the sink.
  s.topology.initial_energy_mj = 50000;
  s.detection.enabled = true;
  s.duration_ms = 250 * 1000;
  s.metrics_bin_ms = 10000;
  const auto r = run(s);
  ASSERT_TRUE(r.detection);
  EXPECT_EQ(r.detection->rounds_run, 1000u);
  EXPECT_EQ(r.detection->altered_count, 0u);
  EXPECT_FALSE(r.detection->spoofing_detected);
  EXPECT_GT(r.detection->clean_count, 0u);
}
