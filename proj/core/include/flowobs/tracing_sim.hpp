#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowobs/event.hpp"
#include "flowobs/ids.hpp"
#include "flowobs/system.hpp"

namespace flowobs {

/// Identifies one flow instance. `seq` counts instances per initiator,
/// starting at 0.
struct InstanceTag {
  FlowId flow;
  ComponentId initiator;
  std::uint64_t seq = 0;

  friend auto operator<=>(const InstanceTag&, const InstanceTag&) = default;
  friend bool operator==(const InstanceTag&, const InstanceTag&) = default;
};

std::ostream& operator<<(std::ostream& os, const InstanceTag& tag);

struct EventRecord {
  std::uint64_t cycle = 0;  // cycle the event crossed its link
  Event event;
  LinkId link;
  InstanceTag tag;
  std::optional<TransitionId> transition;  // ground truth only

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

/// Inclusive integer range of cycles.
struct CycleRange {
  std::uint64_t min = 1;
  std::uint64_t max = 1;

  friend bool operator==(const CycleRange&, const CycleRange&) = default;
};

struct WorkloadConfig {
  std::uint64_t instances_per_initiator = 100;
  CycleRange initiation_delay{1, 10};
  CycleRange transition_latency{1, 5};
  std::uint64_t seed = 1;
  /// Livelock guard: maximum lifetime of one instance, in cycles.
  std::uint64_t cycle_budget = 1'000'000;
  /// Keep off-loading after the last instance completes until every queue
  /// is empty. When false, leftovers are reported as residual.
  bool drain = true;

  friend bool operator==(const WorkloadConfig&, const WorkloadConfig&) = default;
};

struct ObservabilityConfig {
  std::set<Event> selected_events;
  std::set<LinkId> enabled_links;
  std::map<LinkId, std::uint64_t> queue_capacity;
  std::uint64_t port_bandwidth = 1;

  friend bool operator==(const ObservabilityConfig&,
                         const ObservabilityConfig&) = default;
};

/// Observes `events` with the same capacity on every link they use.
ObservabilityConfig make_observability(const SystemSpec& spec,
                                       const std::set<Event>& events,
                                       std::uint64_t capacity,
                                       std::uint64_t port_bandwidth = 1);

/// Every event of every flow, `capacity` per link.
ObservabilityConfig full_observability(const SystemSpec& spec,
                                       std::uint64_t capacity,
                                       std::uint64_t port_bandwidth = 1);

struct SimulationResult {
  std::vector<EventRecord> ground_truth;  // emission order
  std::vector<EventRecord> observed;      // off-load order
  /// Indices into ground_truth of every event a monitor detected.
  std::vector<std::size_t> detections;
  // Per enabled link.
  std::map<LinkId, std::uint64_t> detected;
  std::map<LinkId, std::uint64_t> drops;
  std::map<LinkId, std::uint64_t> max_occupancy;
  std::map<LinkId, std::uint64_t> residual;
  /// Instances started, per initiator.
  std::map<ComponentId, std::uint64_t> started;
  std::uint64_t last_completion_cycle = 0;
  std::uint64_t final_cycle = 0;

  std::uint64_t total_drops() const;
  /// Distinct tags in the ground truth, per flow.
  std::map<FlowId, std::uint64_t> instances_per_flow() const;

  friend bool operator==(const SimulationResult&,
                         const SimulationResult&) = default;
};

/// Throws ConfigError when `obs` or `workload` is inconsistent with `spec`.
void check_config(const SystemSpec& spec, const WorkloadConfig& workload,
                  const ObservabilityConfig& obs);

/// Runs the workload and the tracing infrastructure cycle by cycle.
///
/// Each initiator starts `instances_per_initiator` instances, one every
/// `initiation_delay` cycles, picking uniformly among its flows. An instance
/// fires one enabled transition at a time, chosen uniformly, each
/// `transition_latency` cycles after the previous one. A link carries one
/// event per cycle; an instance whose link is busy retries next cycle.
///
/// Per cycle: instances fire (in creation order), monitors enqueue selected
/// events (dropping the arriving event when the queue is full), then the
/// output controller off-loads up to `port_bandwidth` events, scanning
/// enabled links round-robin from the one after the last serviced link.
///
/// Throws ConfigError (see check_config) and Livelock.
SimulationResult run_simulation(const SystemSpec& spec,
                                const WorkloadConfig& workload,
                                const ObservabilityConfig& obs);

/// Detected events grouped by the cycle they were detected in.
std::map<std::uint64_t, std::vector<std::pair<LinkId, Event>>>
event_generation_trace(const SimulationResult& result);

/// CSV: `cycle,link,src,dest,cmd,flow,initiator,seq` plus `,transition` when
/// `with_transition` is set.
std::string records_to_csv(const std::vector<EventRecord>& records,
                           bool with_transition);

/// Counts and per-link maps, no record lists.
nlohmann::ordered_json summary_json(const SimulationResult& result);

nlohmann::ordered_json to_json(const ObservabilityConfig& obs);
ObservabilityConfig observability_from_json(const nlohmann::json& j);

}  // namespace flowobs
