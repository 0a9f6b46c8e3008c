#include <gtest/gtest.h>

#include <algorithm>

#include "flowobs/errors.hpp"
#include "flowobs/flow.hpp"
#include "flowobs/spec_io.hpp"
#include "oracles.hpp"

using namespace flowobs;
using flowobs::testing::ev;

namespace {

const Flow& cpu_write() {
  static const SystemSpec spec = flowobs::testing::cpu_write_system();
  return spec.flows.front();
}

Marking mark(std::initializer_list<const char*> ids) {
  Marking m;
  for (const char* id : ids) m.marked.emplace(id);
  return m;
}

std::vector<TransitionId> tids(std::initializer_list<const char*> ids) {
  std::vector<TransitionId> out;
  for (const char* id : ids) out.emplace_back(id);
  return out;
}

FlowPath path(std::initializer_list<const char*> ids) { return FlowPath{tids(ids)}; }

bool shortlex_less(const FlowPath& a, const FlowPath& b) {
  if (a.transitions.size() != b.transitions.size()) {
    return a.transitions.size() < b.transitions.size();
  }
  return a.transitions < b.transitions;
}

// Builds a flow from compact transition specs: {id, pre, post, label}.
struct T {
  const char* id;
  std::vector<const char*> pre;
  std::vector<const char*> post;
  const char* label;
};

Flow make_flow(std::vector<const char*> places, std::vector<T> ts,
               std::vector<const char*> initial, std::vector<const char*> end) {
  std::vector<PlaceId> ps;
  for (const char* p : places) ps.emplace_back(p);
  std::vector<Transition> out;
  for (const auto& t : ts) {
    Transition x;
    x.id = TransitionId(t.id);
    for (const char* p : t.pre) x.preset.emplace(p);
    for (const char* p : t.post) x.postset.emplace(p);
    x.event = ev(t.label);
    out.push_back(std::move(x));
  }
  std::set<PlaceId> i, e;
  for (const char* p : initial) i.emplace(p);
  for (const char* p : end) e.emplace(p);
  return Flow(FlowId("f"), ps, out, i, e);
}

TEST(EnabledTransitions, InitialMarkingEnablesRequest) {
  EXPECT_EQ(enabled_transitions(cpu_write(), mark({"p1"})), tids({"t1"}));
}

TEST(EnabledTransitions, ChoicePlaceEnablesBothBranches) {
  EXPECT_EQ(enabled_transitions(cpu_write(), mark({"p2"})), tids({"t2", "t10"}));
}

TEST(EnabledTransitions, EmptyMarkingEnablesNothing) {
  EXPECT_TRUE(enabled_transitions(cpu_write(), Marking{}).empty());
}

TEST(Fire, MovesTokenForward) {
  EXPECT_EQ(fire(cpu_write(), mark({"p1"}), TransitionId("t1")), mark({"p2"}));
}

TEST(Fire, ShortcutToEnd) {
  EXPECT_EQ(fire(cpu_write(), mark({"p2"}), TransitionId("t10")), mark({"p9"}));
}

TEST(Fire, DisabledTransitionThrows) {
  EXPECT_THROW(fire(cpu_write(), mark({"p2"}), TransitionId("t3")), NotEnabled);
}

TEST(Fire, UnknownTransitionThrows) {
  EXPECT_THROW(fire(cpu_write(), mark({"p2"}), TransitionId("t99")), NotEnabled);
}

TEST(Fire, ForkProducesTwoTokens) {
  const Flow f = make_flow({"a", "b", "c", "d"},
                           {{"t1", {"a"}, {"b", "c"}, "X:Y:go"},
                            {"t2", {"b", "c"}, {"d"}, "Y:X:done"}},
                           {"a"}, {"d"});
  const Marking m = fire(f, mark({"a"}), TransitionId("t1"));
  EXPECT_EQ(m, mark({"b", "c"}));
  EXPECT_EQ(fire(f, m, TransitionId("t2")), mark({"d"}));
}

TEST(StartEvents, CpuWriteRequest) {
  EXPECT_EQ(start_events(cpu_write()), std::set<Event>{ev("CPU_X:Cache_X:wr_req")});
}

TEST(StartEvents, TwoInitialTransitionsGiveBothLabels) {
  const Flow f = make_flow({"a", "b"},
                           {{"t1", {"a"}, {"b"}, "X:Y:one"}, {"t2", {"a"}, {"b"}, "X:Y:two"}},
                           {"a"}, {"b"});
  EXPECT_EQ(start_events(f), (std::set<Event>{ev("X:Y:one"), ev("X:Y:two")}));
}

TEST(StartEvents, PrototypeCpu0Read) {
  const auto spec = load_prototype();
  EXPECT_EQ(start_events(spec.flow(FlowId("cpu0_rd"))),
            std::set<Event>{ev("CPU0:Cache0:rd_req")});
}

TEST(EndEvents, SharedResponseLabel) {
  EXPECT_EQ(end_events(cpu_write()), std::set<Event>{ev("Cache_X:CPU_X:wr_resp")});
}

TEST(EndEvents, SingleTransitionFlowStartsAndEnds) {
  const Flow f = make_flow({"a", "b"}, {{"t1", {"a"}, {"b"}, "X:Y:only"}}, {"a"}, {"b"});
  EXPECT_EQ(end_events(f), std::set<Event>{ev("X:Y:only")});
  EXPECT_EQ(start_events(f), end_events(f));
}

TEST(EndEvents, PrototypePmuWake) {
  const auto spec = load_prototype();
  EXPECT_EQ(end_events(spec.flow(FlowId("pmu_wake_cpu0"))),
            std::set<Event>{ev("CPU0:PMU:wake_ack")});
}

TEST(EnumeratePaths, CpuWriteHasThreePaths) {
  const std::vector<FlowPath> expected{path({"t1", "t10"}), path({"t1", "t2", "t3", "t9"}),
                                       path({"t1", "t2", "t3", "t4", "t5", "t6", "t7", "t8"})};
  EXPECT_EQ(enumerate_paths(cpu_write()), expected);
}

TEST(EnumeratePaths, LinearFlowHasOnePath) {
  const Flow f = flowobs::testing::linear_flow(
      "lin", {ev("A:B:x"), ev("B:C:y"), ev("C:A:z"), ev("A:B:w")});
  const auto paths = enumerate_paths(f);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths.front(), path({"t1", "t2", "t3", "t4"}));
}

TEST(EnumeratePaths, PrototypeCoherentWriteMatchesTokenGame) {
  const auto spec = load_prototype();
  for (const char* id : {"cpu0_wr", "cpu1_wr", "gfx_rd"}) {
    const Flow& f = spec.flow(FlowId(id));
    std::set<std::vector<std::string>> got;
    for (const auto& p : enumerate_paths(f)) {
      std::vector<std::string> s;
      for (const auto& t : p.transitions) s.push_back(t.str());
      got.insert(s);
    }
    EXPECT_EQ(got, flowobs::testing::token_game_paths(f)) << id;
  }
}

TEST(EnumeratePaths, BoundExceededThrows) {
  EXPECT_THROW(enumerate_paths(cpu_write(), 2), PathExplosion);
  EXPECT_EQ(enumerate_paths(cpu_write(), 3).size(), 3u);
}

TEST(EnumeratePaths, InterleavingsAreDistinctPaths) {
  const Flow f = make_flow({"a", "b", "c", "b2", "c2", "d"},
                           {{"t1", {"a"}, {"b", "c"}, "X:Y:fork"},
                            {"t2", {"b"}, {"b2"}, "Y:Z:left"},
                            {"t3", {"c"}, {"c2"}, "Y:W:right"},
                            {"t4", {"b2", "c2"}, {"d"}, "Z:X:join"}},
                           {"a"}, {"d"});
  EXPECT_EQ(enumerate_paths(f),
            (std::vector<FlowPath>{path({"t1", "t2", "t3", "t4"}),
                                   path({"t1", "t3", "t2", "t4"})}));
}

TEST(EnumeratePaths, OrderIsByLengthThenIds) {
  const auto paths = enumerate_paths(cpu_write());
  EXPECT_TRUE(std::is_sorted(paths.begin(), paths.end(), shortlex_less));
}

TEST(Validate, CpuWriteIsClean) {
  const auto report = validate(cpu_write());
  EXPECT_TRUE(report.ok()) << (report.findings.empty() ? "" : report.findings[0].message);
}

TEST(Validate, DeadTransition) {
  // t2 needs a place nothing ever marks.
  const Flow f = make_flow({"a", "b", "x", "c"},
                           {{"t1", {"a"}, {"c"}, "X:Y:go"}, {"t2", {"x"}, {"b"}, "Y:X:never"}},
                           {"a"}, {"c"});
  const auto report = validate(f);
  EXPECT_TRUE(report.has(FindingKind::kDeadTransition));
  const bool named = std::any_of(report.findings.begin(), report.findings.end(),
                                 [](const Finding& x) {
                                   return x.message.find("dead transition") != std::string::npos;
                                 });
  EXPECT_TRUE(named);
}

TEST(Validate, CyclicStructure) {
  const Flow f = make_flow({"p", "q", "z"},
                           {{"t", {"p"}, {"q"}, "X:Y:a"},
                            {"u", {"q"}, {"p"}, "Y:X:b"},
                            {"v", {"q"}, {"z"}, "Y:X:c"}},
                           {"p"}, {"z"});
  const auto report = validate(f);
  ASSERT_TRUE(report.has(FindingKind::kCyclicStructure));
  EXPECT_NE(report.findings.front().message.find("cyclic structure"), std::string::npos);
}

TEST(Validate, StructuralDefects) {
  EXPECT_TRUE(validate(make_flow({"a", "b"}, {{"t1", {"a"}, {"b"}, "X:Y:g"}}, {}, {"b"}))
                  .has(FindingKind::kEmptyInitialMarking));
  EXPECT_TRUE(validate(make_flow({"a", "b"}, {{"t1", {"a"}, {"b"}, "X:Y:g"}}, {"a"}, {}))
                  .has(FindingKind::kEmptyEndMarking));
  EXPECT_TRUE(validate(make_flow({"a", "b"}, {{"t1", {"a"}, {"b"}, "X:Y:g"}}, {"a"}, {"a"}))
                  .has(FindingKind::kOverlappingMarkings));
  EXPECT_TRUE(validate(make_flow({"a", "b"}, {{"t1", {"a"}, {"zz"}, "X:Y:g"}}, {"a"}, {"b"}))
                  .has(FindingKind::kUnknownPlace));
  EXPECT_TRUE(validate(make_flow({"a", "b"}, {{"t1", {}, {"b"}, "X:Y:g"}}, {"a"}, {"b"}))
                  .has(FindingKind::kEmptyPreset));
  EXPECT_TRUE(validate(make_flow({"a", "b"}, {{"t1", {"a"}, {}, "X:Y:g"}}, {"a"}, {"b"}))
                  .has(FindingKind::kEmptyPostset));
  EXPECT_TRUE(
      validate(make_flow({"a", "b"}, {{"t1", {"a"}, {"a", "b"}, "X:Y:g"}}, {"a"}, {"b"}))
          .has(FindingKind::kSelfLoop));
  EXPECT_TRUE(validate(make_flow({"a", "b"}, {{"t1", {"a"}, {"b"}, "X:X:g"}}, {"a"}, {"b"}))
                  .has(FindingKind::kSelfEvent));
  EXPECT_TRUE(validate(make_flow({"a", "b", "c"},
                                 {{"t1", {"a"}, {"b"}, "X:Y:g"}, {"t2", {"b"}, {"c"}, "Y:X:h"}},
                                 {"a"}, {"b", "c"}))
                  .has(FindingKind::kEndPlaceConsumed));
  EXPECT_TRUE(validate(make_flow({"a", "a"}, {{"t1", {"a"}, {"a"}, "X:Y:g"}}, {"a"}, {"a"}))
                  .has(FindingKind::kDuplicatePlace));
}

TEST(Validate, UnreachablePlace) {
  const Flow f = make_flow({"a", "b", "lost"}, {{"t1", {"a"}, {"b"}, "X:Y:g"}}, {"a"}, {"b"});
  EXPECT_TRUE(validate(f).has(FindingKind::kUnreachablePlace));
}

TEST(Validate, BadTermination) {
  // The token can stall in b, which is not an end place.
  const Flow f = make_flow({"a", "b", "c"},
                           {{"t1", {"a"}, {"b"}, "X:Y:g"}, {"t2", {"a"}, {"c"}, "X:Y:h"}},
                           {"a"}, {"c"});
  EXPECT_TRUE(validate(f).has(FindingKind::kBadTermination));
}

TEST(Validate, UnsafeMarking) {
  const Flow f = make_flow({"a", "b", "c", "d"},
                           {{"t1", {"a"}, {"b", "c"}, "X:Y:g"},
                            {"t2", {"b"}, {"c"}, "Y:Z:h"},
                            {"t3", {"c"}, {"d"}, "Z:X:i"}},
                           {"a"}, {"d"});
  EXPECT_TRUE(validate(f).has(FindingKind::kUnsafeMarking));
}

TEST(FlowProperties, TokenConservationOnEveryFiring) {
  Rng rng(7);
  for (int i = 0; i < 60; ++i) {
    const Flow f = flowobs::testing::random_flow(rng, "f");
    for (const auto& p : enumerate_paths(f)) {
      Marking m = f.initial_marking();
      for (const auto& t : p.transitions) {
        const Transition& tr = f.transition(t);
        const Marking next = fire(f, m, t);
        EXPECT_EQ(next.marked.size(), m.marked.size() - tr.preset.size() + tr.postset.size());
        std::set<PlaceId> expect;
        std::set_difference(m.marked.begin(), m.marked.end(), tr.preset.begin(),
                            tr.preset.end(), std::inserter(expect, expect.end()));
        expect.insert(tr.postset.begin(), tr.postset.end());
        EXPECT_EQ(next.marked, expect);
        EXPECT_EQ(fire(f, m, t), next);  // deterministic
        m = next;
      }
    }
  }
}

TEST(FlowProperties, PathsReplayFromStartToEnd) {
  Rng rng(11);
  for (int i = 0; i < 60; ++i) {
    const Flow f = flowobs::testing::random_flow(rng, "f");
    ASSERT_TRUE(validate(f).ok()) << validate(f).findings.front().message;
    const auto starts = start_events(f);
    const auto ends = end_events(f);
    for (const auto& p : enumerate_paths(f)) {
      Marking m = f.initial_marking();
      for (const auto& t : p.transitions) m = fire(f, m, t);
      EXPECT_TRUE(enabled_transitions(f, m).empty());
      EXPECT_TRUE(is_completion(f, m));
      EXPECT_TRUE(starts.contains(f.label(p.transitions.front())));
      EXPECT_TRUE(ends.contains(f.label(p.transitions.back())));
    }
  }
}

TEST(FlowProperties, PathsEqualTokenGameOracle) {
  Rng rng(2024);
  for (int i = 0; i < 200; ++i) {
    const Flow f = flowobs::testing::random_flow(rng, "f");
    ASSERT_LE(f.transitions().size(), 12u);
    const auto paths = enumerate_paths(f);
    std::set<std::vector<std::string>> got;
    for (const auto& p : paths) {
      std::vector<std::string> s;
      for (const auto& t : p.transitions) s.push_back(t.str());
      got.insert(s);
    }
    EXPECT_EQ(got.size(), paths.size()) << "duplicate paths";
    EXPECT_EQ(got, flowobs::testing::token_game_paths(f));
    EXPECT_TRUE(std::is_sorted(paths.begin(), paths.end(), shortlex_less));
  }
}

}  // namespace
