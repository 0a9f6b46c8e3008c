#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowobs/flow.hpp"
#include "flowobs/system.hpp"
#include "flowobs/tracing_sim.hpp"

namespace flowobs {

struct SelectionProblem {
  std::vector<Flow> flows;
  std::map<Event, LinkId> event_link_map;
  std::uint64_t total_queue_budget = 1;
};

/// The flows of `scope` (all of them when empty) with the system's event map.
/// The budget is `base_capacity` for every link of the topology.
SelectionProblem make_problem(const SystemSpec& spec,
                              const std::set<FlowId>& scope = {},
                              std::uint64_t base_capacity = 8);

enum class Reason { kFlowCover, kStart, kEnd, kPathDisambig, kFcRank };

std::string_view to_string(Reason r);
/// Throws ConfigError for unknown text.
Reason reason_from_string(std::string_view text);

/// Two paths of one flow that no event selection can tell apart.
struct Undistinguishable {
  FlowId flow;
  FlowPath a;
  FlowPath b;

  friend bool operator==(const Undistinguishable&, const Undistinguishable&) = default;
};

struct Selection {
  std::set<Event> events;
  std::set<LinkId> links;
  std::map<Event, Reason> rationale;
  std::vector<Undistinguishable> undistinguishable;

  friend bool operator==(const Selection&, const Selection&) = default;
};

/// Events that cover `flow` for FIC purposes: the labels every path emits.
/// A flow without such a label is covered by any of its events.
std::set<Event> cover_events(const Flow& flow,
                             std::size_t path_bound = kDefaultPathBound);

inline constexpr std::size_t kExactLinkLimit = 20;

/// Smallest link set whose events cover every flow, then one covering event
/// per flow on those links (fewest events, then smallest event list).
///
/// Links whose covered flows are a subset of another link's are dropped
/// first (an equal set keeps the smaller id). Branch and bound is exact when
/// at most `exact_limit` links remain and there are at most 64 flows;
/// otherwise links are picked greedily by most newly covered flows. Ties
/// between equal-size link sets go to fewer events, then to the
/// lexicographically smaller link list.
Selection select_fic(const SelectionProblem& problem,
                     std::size_t exact_limit = kExactLinkLimit);

/// Start and end events of every flow, plus events that make the
/// projections of each flow's paths pairwise distinct. Extra events are added
/// greedily by the number of confusable path pairs they split, preferring
/// events on already enabled links, then the smaller event. Pairs with equal
/// label sequences are reported in `undistinguishable` and left alone.
Selection select_cec(const SelectionProblem& problem);

/// FC(e) = number of flows containing e. The `k` events with the highest FC,
/// ties broken by event order. `k` is clamped to the event count.
Selection select_fc_baseline(const SelectionProblem& problem, std::size_t k);

/// Spreads base_capacity * |all_links| over the enabled links: an equal share
/// each, and one extra for the first (total mod |enabled|) links in id order.
/// Throws ConfigError when `enabled` is empty or not within `all_links`.
std::map<LinkId, std::uint64_t> reallocate_queues(
    std::uint64_t base_capacity, const std::set<LinkId>& all_links,
    const std::set<LinkId>& enabled);

inline constexpr std::size_t kOracleLinkBound = 24;

/// Minimum number of links covering every flow (same cover relation as
/// select_fic), found by trying all link subsets in increasing size. Throws
/// TooLarge when more than `bound` links carry a covering event.
std::size_t minimal_link_cover_oracle(const SelectionProblem& problem,
                                      std::size_t bound = kOracleLinkBound);

/// Per-flow path pairs whose projections onto `events` coincide, excluding
/// pairs with identical label sequences.
std::vector<std::pair<FlowPath, FlowPath>> confusable_pairs(
    const Flow& flow, const std::set<Event>& events);

/// Observability for a selection: its events, their links, and queues from
/// reallocate_queues() when `reallocate` is set (`base_capacity` each
/// otherwise).
ObservabilityConfig observability_for(const SystemSpec& spec,
                                      const Selection& selection,
                                      std::uint64_t base_capacity,
                                      bool reallocate,
                                      std::uint64_t port_bandwidth = 1);

nlohmann::ordered_json to_json(const Selection& selection,
                               const Topology& topology);
/// Reads the "events" array written by to_json(). Links are recomputed
/// through `topology`. Throws ConfigError.
Selection selection_from_json(const nlohmann::json& j, const Topology& topology);

}  // namespace flowobs
