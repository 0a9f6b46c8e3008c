#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowobs/flow.hpp"
#include "flowobs/system.hpp"
#include "flowobs/tracing_sim.hpp"

namespace flowobs {

struct InstanceReconstruction {
  InstanceTag tag;
  std::vector<EventRecord> observed_events;  // detection-cycle order
  /// Position of each observed event in the off-loaded trace.
  std::vector<std::size_t> offload_positions;
  bool started = false;
  bool completed = false;
  /// Indices into observed_events of the first start event and the last end
  /// event; set together with started/completed.
  std::optional<std::size_t> start_index;
  std::optional<std::size_t> end_index;
  std::vector<FlowPath> candidate_paths;
};

/// What the observer knows about how the trace was collected.
struct ReconstructOptions {
  /// Events the monitors were configured to detect. Unset means every event.
  std::optional<std::set<Event>> selected_events;
  /// Links that may have lost events. Unset means every link is suspect,
  /// which reduces matching to plain subsequence containment.
  std::optional<std::set<LinkId>> lossy_links;
  std::size_t path_bound = kDefaultPathBound;
};

/// Links that dropped events or ended the run with events still queued.
std::set<LinkId> lossy_links(const SimulationResult& result);

/// Options describing a simulated collection: its selection and its lossy
/// links.
ReconstructOptions options_for(const ObservabilityConfig& obs,
                               const SimulationResult& result);

/// Groups `observed` by tag (tags in ascending order) and matches each group
/// against the paths of its flow.
///
/// A path is a candidate when its label sequence, restricted to the selected
/// events, contains the group as an ordered subsequence and every label it
/// skips travels on a lossy link. Throws InconsistentTrace when a tag names
/// an unknown flow or no path matches.
std::vector<InstanceReconstruction> reconstruct(
    const std::vector<EventRecord>& observed, const SystemSpec& spec,
    const ReconstructOptions& options = {});

/// True when `observed` (in order) can be explained by `labels`, given which
/// labels were selected and which may have been lost.
bool explains(const std::vector<Event>& labels,
              const std::vector<Event>& observed,
              const std::set<Event>* selected, const std::set<LinkId>* lossy,
              const Topology& topology);

struct FlowCoverage {
  std::uint64_t observed = 0;  // I
  std::uint64_t complete = 0;  // C
  std::uint64_t total = 0;     // N

  friend bool operator==(const FlowCoverage&, const FlowCoverage&) = default;
};

struct CoverageReport {
  double fic = 0.0;
  double cec = 0.0;
  std::uint64_t observed_instances = 0;  // I
  std::uint64_t complete_instances = 0;  // C
  std::uint64_t total_instances = 0;     // N
  /// Complete instances with exactly one candidate path, over C.
  double path_resolved = 0.0;
  std::map<FlowId, FlowCoverage> per_flow;

  friend bool operator==(const CoverageReport&, const CoverageReport&) = default;
};

/// FIC = I/N and CEC = C/N. Flows present in `per_flow_n` but never observed
/// appear in per_flow with I = C = 0. Ratios are 0 when N = 0.
CoverageReport score(const std::vector<InstanceReconstruction>& recons,
                     std::uint64_t ground_truth_n,
                     const std::map<FlowId, std::uint64_t>& per_flow_n);

enum class Relation { kContains, kOverlaps, kPrecedes };

std::string_view to_string(Relation r);

struct Interleaving {
  InstanceTag first;  // the instance that starts first
  InstanceTag second;
  Relation relation;

  friend bool operator==(const Interleaving&, const Interleaving&) = default;
};

/// Which timestamps bound an instance.
enum class IntervalClock {
  kOffloadOrder,   // positions in the off-loaded trace
  kEmissionCycle,  // cycles the events were detected
};

/// Closed interval [start, end] of an instance.
struct Interval {
  std::uint64_t start = 0;
  std::uint64_t end = 0;
};

/// With a.start <= b.start: PRECEDES when a ends strictly before b starts,
/// CONTAINS when a starts strictly before b and ends strictly after it,
/// OVERLAPS otherwise.
Relation classify(const Interval& a, const Interval& b);

/// One entry per unordered pair of completed instances, oriented so that
/// `first` starts no later than `second` (ties by tag). An instance spans
/// from its first observed start event to its last observed end event.
std::vector<Interleaving> interleavings(
    const std::vector<InstanceReconstruction>& recons,
    IntervalClock clock = IntervalClock::kOffloadOrder);

/// "A/B (r)" with r rounded to 3 decimals and trailing zeros removed,
/// e.g. "470/500 (0.94)" or "100/100 (1)".
std::string format_cell(double a, double b);

/// Ratio text used by format_cell().
std::string format_ratio(double r);

nlohmann::ordered_json to_json(const CoverageReport& report);

}  // namespace flowobs
