#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowobs/coverage.hpp"
#include "flowobs/selection.hpp"
#include "flowobs/system.hpp"
#include "flowobs/tracing_sim.hpp"

namespace flowobs {

enum class MethodKind { kNone, kFic, kCec, kFc };

struct Method {
  MethodKind kind = MethodKind::kNone;
  std::size_t k = 16;  // FC only

  /// "NONE", "FIC", "CEC" or "FC16". Also the file name prefix of a cell.
  std::string name() const;
  /// Accepts the names above plus "FC:16" and "FC(16)", case-insensitively.
  /// Throws ConfigError.
  static Method parse(const std::string& text);

  friend bool operator==(const Method&, const Method&) = default;
};

/// Seeds named by FLOWOBS_SEEDS ("1,2,5" or "1-10"), or 1..10 when unset.
/// Throws ConfigError for a malformed value.
std::vector<std::uint64_t> default_seeds();

struct ExperimentPlan {
  std::string spec = "prototype";
  /// Initiators whose instances are observed and scored; unset means all.
  std::optional<std::vector<ComponentId>> scope;
  std::vector<Method> methods{Method{}};
  std::vector<std::uint64_t> capacities{8};
  std::vector<std::uint64_t> seeds = default_seeds();
  WorkloadConfig workload;  // seed is taken from `seeds`
  std::uint64_t port_bandwidth = 1;
  bool reallocate = true;
  /// Emission cycles instead of off-load positions for interleavings.
  bool emission_clock = false;
  std::string output_dir = "flowobs_out";
};

/// Reads a plan object. Keys: spec, scope ("ALL" or a list of initiators),
/// methods, capacities, seeds, workload {instances_per_initiator,
/// initiation_delay: [lo,hi], transition_latency: [lo,hi], cycle_budget,
/// drain}, port_bandwidth, reallocate, emission_clock, output_dir. Missing
/// keys keep their defaults. Throws ConfigError, including for an empty
/// scope, no methods, no capacities or no seeds.
ExperimentPlan plan_from_json(const nlohmann::json& j);

/// Flows the scope's initiators can start (all flows when unscoped).
/// Throws ConfigError for an initiator the system does not declare.
std::set<FlowId> scope_flows(const SystemSpec& spec,
                             const std::optional<std::vector<ComponentId>>& scope);

Selection select(const SystemSpec& spec, const std::set<FlowId>& flows,
                 const Method& method);

struct CellResult {
  Method method;
  std::uint64_t capacity = 0;
  std::uint64_t seed = 0;
  Selection selection;
  ObservabilityConfig observability;
  SimulationResult simulation;
  CoverageReport coverage;
  std::size_t interleaving_counts[3] = {0, 0, 0};  // indexed by Relation
};

/// selection -> queue reallocation -> simulation -> reconstruction -> score,
/// over the instances of the plan's scope.
CellResult run_cell(const SystemSpec& spec, const ExperimentPlan& plan,
                    const Method& method, std::uint64_t capacity,
                    std::uint64_t seed);

/// `<method>_<capacity>_<seed>.json`
std::string cell_file_name(const Method& method, std::uint64_t capacity,
                           std::uint64_t seed);

nlohmann::ordered_json cell_to_json(const CellResult& cell,
                                    const SystemSpec& spec);

/// Medians over the seeds of one (method, capacity) pair.
struct AggregateRow {
  std::string method;
  std::uint64_t capacity = 0;
  std::size_t links = 0;
  std::size_t seeds = 0;
  double observed = 0;  // median I
  double complete = 0;  // median C
  double total = 0;     // median N
  double fic = 0;
  double cec = 0;
  double path_resolved = 0;
  double drops = 0;
};

double median(std::vector<double> values);

/// Rows in first-seen (method, capacity) order. Reads only fields written by
/// cell_to_json(). Throws ConfigError for malformed cells.
std::vector<AggregateRow> aggregate(const std::vector<nlohmann::json>& cells);

/// Fixed-width table with `A/B (r)` cells.
std::string format_table(const std::vector<AggregateRow>& rows);
std::string format_csv(const std::vector<AggregateRow>& rows);

/// method, link count, FIC and CEC only.
std::string format_comparison(const std::vector<AggregateRow>& rows);

}  // namespace flowobs
