#include <gtest/gtest.h>

#include <numeric>

#include "flowobs/errors.hpp"
#include "flowobs/selection.hpp"
#include "flowobs/spec_io.hpp"
#include "oracles.hpp"

using namespace flowobs;
using flowobs::testing::ev;
using flowobs::testing::linear_flow;

namespace {

const SystemSpec& prototype() {
  static const SystemSpec spec = load_prototype();
  return spec;
}

SelectionProblem problem_of(std::vector<Flow> flows) {
  SelectionProblem p;
  for (const auto& f : flows) {
    for (const auto& e : f.events()) {
      p.event_link_map.emplace(e, LinkId("l_" + e.src.str() + "_" + e.dest.str()));
    }
  }
  p.flows = std::move(flows);
  return p;
}

bool covers_every_flow(const SelectionProblem& p, const Selection& s) {
  for (const auto& f : p.flows) {
    const auto ev = f.events();
    if (std::none_of(s.events.begin(), s.events.end(),
                     [&](const Event& e) { return ev.contains(e); })) {
      return false;
    }
  }
  return true;
}

void expect_links_consistent(const SelectionProblem& p, const Selection& s) {
  std::set<LinkId> links;
  for (const auto& e : s.events) links.insert(p.event_link_map.at(e));
  EXPECT_EQ(s.links, links);
  for (const auto& e : s.events) EXPECT_TRUE(s.rationale.contains(e)) << e;
}

void expect_distinguishing(const SelectionProblem& p, const Selection& s) {
  for (const auto& f : p.flows) {
    const bool reported = std::any_of(s.undistinguishable.begin(), s.undistinguishable.end(),
                                      [&](const Undistinguishable& u) { return u.flow == f.id(); });
    if (reported) continue;
    std::set<std::vector<Event>> projections;
    const auto paths = enumerate_paths(f);
    for (const auto& path : paths) {
      std::vector<Event> proj;
      for (const auto& e : labels_of(f, path)) {
        if (s.events.contains(e)) proj.push_back(e);
      }
      projections.insert(proj);
    }
    EXPECT_EQ(projections.size(), paths.size()) << f.id();
  }
}

std::set<Event> starts_and_ends(const std::vector<Flow>& flows) {
  std::set<Event> out;
  for (const auto& f : flows) {
    for (const auto& e : start_events(f)) out.insert(e);
    for (const auto& e : end_events(f)) out.insert(e);
  }
  return out;
}

TEST(SelectFic, PrototypeCoversAllFlowsWithMinimumLinks) {
  const auto p = make_problem(prototype());
  const auto s = select_fic(p);
  EXPECT_TRUE(covers_every_flow(p, s));
  expect_links_consistent(p, s);
  EXPECT_EQ(s.links.size(), minimal_link_cover_oracle(p, 64));
  EXPECT_EQ(s.links.size(), 6u);
  for (const auto& [e, r] : s.rationale) EXPECT_EQ(r, Reason::kFlowCover);
}

TEST(SelectFic, SingleFlow) {
  const auto p = problem_of({linear_flow("f", {ev("A:B:x"), ev("B:C:y"), ev("C:A:z")})});
  const auto s = select_fic(p);
  EXPECT_EQ(s.events.size(), 1u);
  EXPECT_EQ(s.links.size(), 1u);
}

TEST(SelectFic, SharedEventCoversBoth) {
  const auto p = problem_of({linear_flow("f", {ev("A:B:x"), ev("B:S:shared"), ev("S:A:y")}),
                             linear_flow("g", {ev("C:D:u"), ev("B:S:shared"), ev("S:C:v")})});
  const auto s = select_fic(p);
  EXPECT_EQ(s.events, std::set<Event>{ev("B:S:shared")});
  EXPECT_EQ(s.links.size(), 1u);
}

TEST(SelectFic, CoverEventsLieOnEveryPath) {
  const SystemSpec cw_spec = flowobs::testing::cpu_write_system();
  const Flow& cw = cw_spec.flows.front();
  EXPECT_EQ(cover_events(cw),
            (std::set<Event>{ev("CPU_X:Cache_X:wr_req"), ev("Cache_X:CPU_X:wr_resp")}));
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const Flow f = flowobs::testing::random_flow(rng, "f");
    EXPECT_EQ(cover_events(f), flowobs::testing::token_game_cover_events(f));
  }
}

TEST(SelectFic, MatchesOraclesOnRandomProblems) {
  Rng rng(31337);
  flowobs::testing::GeneratorOptions opt;
  opt.components = 5;
  opt.commands = 2;
  opt.max_transitions = 6;
  int checked = 0;
  while (checked < 60) {
    const auto spec = flowobs::testing::random_system(rng, 2 + rng.index(8), opt);
    const auto p = make_problem(spec);
    std::set<LinkId> candidates;
    for (const auto& f : p.flows) {
      for (const auto& e : cover_events(f)) candidates.insert(p.event_link_map.at(e));
    }
    if (candidates.size() > 20) continue;
    ++checked;
    const auto s = select_fic(p);
    EXPECT_TRUE(covers_every_flow(p, s));
    expect_links_consistent(p, s);
    const std::size_t oracle = minimal_link_cover_oracle(p);
    EXPECT_EQ(oracle, flowobs::testing::brute_min_link_cover(p));
    EXPECT_EQ(s.links.size(), oracle);
    EXPECT_LE(s.events.size(), p.flows.size());
    EXPECT_EQ(select_fic(p), s);
  }
}

TEST(SelectFic, GreedyFallbackStillCovers) {
  const auto p = make_problem(prototype());
  const auto s = select_fic(p, 0);
  EXPECT_TRUE(covers_every_flow(p, s));
  EXPECT_GE(s.links.size(), 6u);
}

TEST(SelectCec, CpuWriteNeedsOneSnoopAndOneMemoryEvent) {
  const SystemSpec spec = flowobs::testing::cpu_write_system();
  const auto p = make_problem(spec);
  const auto s = select_cec(p);
  const Flow& f = spec.flows.front();
  const std::set<Event> snoop{f.label(TransitionId("t2")), f.label(TransitionId("t3"))};
  std::set<Event> memory;
  for (const char* t : {"t4", "t5", "t6", "t7"}) memory.insert(f.label(TransitionId(t)));
  EXPECT_TRUE(s.events.contains(ev("CPU_X:Cache_X:wr_req")));
  EXPECT_TRUE(s.events.contains(ev("Cache_X:CPU_X:wr_resp")));
  EXPECT_EQ(s.events.size(), 4u);
  std::size_t in_snoop = 0, in_memory = 0;
  for (const auto& e : s.events) {
    in_snoop += snoop.contains(e);
    in_memory += memory.contains(e);
  }
  EXPECT_EQ(in_snoop, 1u);
  EXPECT_EQ(in_memory, 1u);
  EXPECT_EQ(s.rationale.at(ev("CPU_X:Cache_X:wr_req")), Reason::kStart);
  EXPECT_EQ(s.rationale.at(ev("Cache_X:CPU_X:wr_resp")), Reason::kEnd);
  for (const auto& e : s.events) {
    if (snoop.contains(e) || memory.contains(e)) {
      EXPECT_EQ(s.rationale.at(e), Reason::kPathDisambig);
    }
  }
  expect_distinguishing(p, s);
  EXPECT_TRUE(s.undistinguishable.empty());
}

TEST(SelectCec, PrototypeMandatoryEvents) {
  const auto p = make_problem(prototype());
  const auto s = select_cec(p);
  const auto mandatory = starts_and_ends(p.flows);
  EXPECT_EQ(mandatory.size(), 32u);
  EXPECT_TRUE(std::includes(s.events.begin(), s.events.end(), mandatory.begin(), mandatory.end()));
  expect_distinguishing(p, s);
  expect_links_consistent(p, s);
  EXPECT_TRUE(s.undistinguishable.empty());
  EXPECT_EQ(select_cec(p), s);
}

TEST(SelectCec, LinearFlowNeedsNoExtras) {
  const auto p = problem_of({linear_flow("f", {ev("A:B:x"), ev("B:C:y"), ev("C:A:z")})});
  EXPECT_EQ(select_cec(p).events, (std::set<Event>{ev("A:B:x"), ev("C:A:z")}));
}

TEST(SelectCec, ReportsUndistinguishablePaths) {
  // Two parallel transitions with one label.
  std::vector<Transition> ts{
      {TransitionId("t1"), {PlaceId("a")}, {PlaceId("b")}, ev("A:B:x")},
      {TransitionId("t2"), {PlaceId("a")}, {PlaceId("b")}, ev("A:B:x")},
      {TransitionId("t3"), {PlaceId("b")}, {PlaceId("c")}, ev("B:A:y")}};
  const Flow f(FlowId("twin"), {PlaceId("a"), PlaceId("b"), PlaceId("c")}, ts, {PlaceId("a")},
               {PlaceId("c")});
  const auto s = select_cec(problem_of({f}));
  ASSERT_EQ(s.undistinguishable.size(), 1u);
  EXPECT_EQ(s.undistinguishable[0].flow, FlowId("twin"));
  EXPECT_EQ(s.events, (std::set<Event>{ev("A:B:x"), ev("B:A:y")}));
}

TEST(SelectCec, RandomFlowsAreDistinguished) {
  Rng rng(4242);
  for (int i = 0; i < 40; ++i) {
    const auto spec = flowobs::testing::random_system(rng, 1 + rng.index(5));
    const auto p = make_problem(spec);
    const auto s = select_cec(p);
    const auto mandatory = starts_and_ends(p.flows);
    EXPECT_TRUE(std::includes(s.events.begin(), s.events.end(), mandatory.begin(), mandatory.end()));
    expect_distinguishing(p, s);
    expect_links_consistent(p, s);
    for (const auto& u : s.undistinguishable) {
      const Flow& f = spec.flow(u.flow);
      EXPECT_EQ(labels_of(f, u.a), labels_of(f, u.b));
    }
  }
}

TEST(ConfusablePairs, StartAndEndOnly) {
  const SystemSpec f_spec = flowobs::testing::cpu_write_system();
  const Flow& f = f_spec.flows.front();
  EXPECT_EQ(confusable_pairs(f, {ev("CPU_X:Cache_X:wr_req"), ev("Cache_X:CPU_X:wr_resp")}).size(), 3u);
  EXPECT_TRUE(confusable_pairs(f, f.events()).empty());
}

TEST(SelectFc, PrototypeTop16) {
  const auto p = make_problem(prototype());
  const auto s = select_fc_baseline(p, 16);
  EXPECT_EQ(s.events.size(), 16u);
  EXPECT_EQ(s.links.size(), 16u);
  const auto mandatory = starts_and_ends(p.flows);
  for (const auto& e : s.events) {
    EXPECT_FALSE(mandatory.contains(e)) << e;
    EXPECT_EQ(s.rationale.at(e), Reason::kFcRank);
  }
  expect_links_consistent(p, s);
}

TEST(SelectFc, AllEventsWhenKIsTotal) {
  const auto p = make_problem(prototype());
  const auto all = prototype().all_events();
  EXPECT_EQ(select_fc_baseline(p, all.size()).events, all);
  EXPECT_EQ(select_fc_baseline(p, all.size() + 10).events, all);
}

TEST(SelectFc, SharedEventRanksFirst) {
  const auto p = problem_of({linear_flow("f", {ev("A:B:x"), ev("B:S:shared"), ev("S:A:y")}),
                             linear_flow("g", {ev("C:D:u"), ev("B:S:shared"), ev("S:C:v")})});
  EXPECT_EQ(select_fc_baseline(p, 1).events, std::set<Event>{ev("B:S:shared")});
}

TEST(SelectFc, TiesGoToSmallerEvents) {
  const auto p = problem_of({linear_flow("f", {ev("B:C:x"), ev("A:B:y"), ev("C:A:z")})});
  EXPECT_EQ(select_fc_baseline(p, 2).events, (std::set<Event>{ev("A:B:y"), ev("B:C:x")}));
}

std::set<LinkId> numbered_links(std::size_t n) {
  std::set<LinkId> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.emplace((i < 10 ? "l0" : "l") + std::to_string(i));
  }
  return out;
}

TEST(ReallocateQueues, EvenShares) {
  const auto all = numbered_links(32);
  for (const auto& [l, c] : reallocate_queues(8, all, all)) EXPECT_EQ(c, 8u) << l;
  std::set<LinkId> half;
  for (const auto& l : all) {
    if (half.size() < 16) half.insert(l);
  }
  const auto q = reallocate_queues(8, all, half);
  EXPECT_EQ(q.size(), 16u);
  for (const auto& [l, c] : q) EXPECT_EQ(c, 16u) << l;
}

TEST(ReallocateQueues, RemainderToFirstLinks) {
  const auto all = numbered_links(32);
  std::set<LinkId> twelve;
  std::size_t i = 0;
  for (const auto& l : all) {
    if (i++ % 2 == 0 && twelve.size() < 12) twelve.insert(l);
  }
  const auto q = reallocate_queues(8, all, twelve);
  ASSERT_EQ(q.size(), 12u);
  std::size_t k = 0, total = 0;
  for (const auto& [l, c] : q) {
    EXPECT_EQ(c, k < 4 ? 22u : 21u) << l;
    total += c;
    ++k;
  }
  EXPECT_EQ(total, 256u);
}

TEST(ReallocateQueues, Errors) {
  const auto all = numbered_links(4);
  EXPECT_THROW(reallocate_queues(8, all, {}), ConfigError);
  EXPECT_THROW(reallocate_queues(8, all, {LinkId("elsewhere")}), ConfigError);
}

TEST(ReallocateQueues, Conserves) {
  Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    const auto all = numbered_links(1 + rng.index(40));
    std::set<LinkId> enabled;
    for (const auto& l : all) {
      if (rng.index(3) == 0) enabled.insert(l);
    }
    if (enabled.empty()) enabled.insert(*all.begin());
    const std::uint64_t base = 1 + rng.index(16);
    const auto q = reallocate_queues(base, all, enabled);
    std::uint64_t total = 0, lo = ~0ull, hi = 0;
    for (const auto& [l, c] : q) {
      total += c;
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    EXPECT_EQ(total, base * all.size());
    EXPECT_LE(hi - lo, 1u);
    EXPECT_GE(lo, 1u);
  }
}

TEST(LinkCoverOracle, SmallCases) {
  EXPECT_EQ(minimal_link_cover_oracle(problem_of({linear_flow("f", {ev("A:B:x"), ev("B:A:y")})})),
            1u);
  EXPECT_EQ(minimal_link_cover_oracle(problem_of({linear_flow("f", {ev("A:B:x")}),
                                                  linear_flow("g", {ev("C:D:x")})})),
            2u);
}

TEST(LinkCoverOracle, PrototypeExceedsDefaultBound) {
  EXPECT_THROW(minimal_link_cover_oracle(make_problem(prototype())), TooLarge);
}

TEST(LinkCoverOracle, ScopedPrototypeMatchesBruteForce) {
  std::set<FlowId> scope;
  for (const auto& init : prototype().initiators) {
    if (init.component.str() != "PMU") scope.insert(init.flows.begin(), init.flows.end());
  }
  const auto p = make_problem(prototype(), scope);
  const std::size_t oracle = minimal_link_cover_oracle(p);
  EXPECT_EQ(oracle, flowobs::testing::brute_min_link_cover(p));
  EXPECT_EQ(select_fic(p).links.size(), oracle);
}

TEST(MakeProblem, ScopeAndBudget) {
  const auto p = make_problem(prototype(), {FlowId("cpu0_wr"), FlowId("gfx_rd")}, 4);
  EXPECT_EQ(p.flows.size(), 2u);
  EXPECT_EQ(p.total_queue_budget, 4u * 32u);
  EXPECT_THROW(make_problem(prototype(), {FlowId("dsp_rd")}), ConfigError);
}

TEST(Selectors, Deterministic) {
  const auto p = make_problem(prototype());
  EXPECT_EQ(select_fic(p), select_fic(p));
  EXPECT_EQ(select_cec(p), select_cec(p));
  EXPECT_EQ(select_fc_baseline(p, 16), select_fc_baseline(p, 16));
}

TEST(SelectionJson, RoundTrip) {
  const auto p = make_problem(prototype());
  for (const auto& s : {select_fic(p), select_cec(p), select_fc_baseline(p, 16)}) {
    const auto j = to_json(s, prototype().topology);
    EXPECT_EQ(j["event_count"], s.events.size());
    EXPECT_EQ(j["link_count"], s.links.size());
    const auto back = selection_from_json(j, prototype().topology);
    EXPECT_EQ(back.events, s.events);
    EXPECT_EQ(back.links, s.links);
    EXPECT_EQ(back.rationale, s.rationale);
  }
  EXPECT_THROW(selection_from_json(nlohmann::json::parse(R"({"events": [{"event": "X:Y:z"}]})"),
                                   prototype().topology),
               ConfigError);
}

TEST(SelectionReasons, Text) {
  for (Reason r : {Reason::kFlowCover, Reason::kStart, Reason::kEnd, Reason::kPathDisambig,
                   Reason::kFcRank}) {
    EXPECT_EQ(reason_from_string(to_string(r)), r);
  }
  EXPECT_EQ(to_string(Reason::kPathDisambig), "PATH_DISAMBIG");
  EXPECT_THROW(reason_from_string("MAYBE"), ConfigError);
}

TEST(ObservabilityFor, ReallocatesOverSelectedLinks) {
  const auto p = make_problem(prototype());
  const auto s = select_fic(p);
  const auto obs = observability_for(prototype(), s, 8, true);
  EXPECT_EQ(obs.enabled_links, s.links);
  std::uint64_t total = 0;
  for (const auto& [l, c] : obs.queue_capacity) total += c;
  EXPECT_EQ(total, 256u);
  const auto flat = observability_for(prototype(), s, 8, false);
  for (const auto& [l, c] : flat.queue_capacity) EXPECT_EQ(c, 8u);
  EXPECT_NO_THROW(check_config(prototype(), WorkloadConfig{}, obs));
}

}  // namespace
