// flowobs: flow-spec validation, event selection, trace simulation and
// coverage experiments.
//
// Exit status: 0 success, 1 validation or selection findings, 2 I/O, usage
// or configuration errors.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "flowobs/coverage.hpp"
#include "flowobs/errors.hpp"
#include "flowobs/experiment.hpp"
#include "flowobs/selection.hpp"
#include "flowobs/spec_io.hpp"
#include "flowobs/tracing_sim.hpp"

namespace fs = std::filesystem;
using namespace flowobs;

namespace {

constexpr int kOk = 0;
constexpr int kFindings = 1;
constexpr int kFailure = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::ios_base::failure("cannot write '" + path.string() + "'");
}

nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string spec_text(const std::string& path) {
  return path == "prototype" ? std::string(prototype_text()) : read_file(path);
}

// Parse errors of a spec used as input to another command are configuration
// errors, not findings.
SystemSpec load_input_spec(const std::string& path) {
  try {
    return load_system(path);
  } catch (const SyntaxError& e) {
    throw ConfigError(path + ":" + e.what());
  } catch (const SemanticError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::set<FlowId> parse_scope(const SystemSpec& spec, const std::string& scope) {
  if (scope.empty() || scope == "ALL") return scope_flows(spec, std::nullopt);
  std::vector<ComponentId> ids;
  std::stringstream in(scope);
  std::string item;
  while (std::getline(in, item, ',')) ids.emplace_back(item);
  if (ids.empty()) throw ConfigError("scope is empty");
  return scope_flows(spec, ids);
}

int cmd_validate(const std::string& path) {
  const std::string text = spec_text(path);
  SystemSpec spec;
  try {
    spec = parse_system_unchecked(text);
  } catch (const SyntaxError& e) {
    std::cout << path << ':' << e.what() << '\n';
    return kFindings;
  } catch (const SemanticError& e) {
    std::cout << path << ": " << e.what() << '\n';
    return kFindings;
  }
  const auto findings = check_system(spec);
  for (const auto& f : findings) std::cout << path << ": " << f.message << '\n';
  if (!findings.empty()) return kFindings;
  std::cout << path << ": ok (" << spec.flows.size() << " flows, "
            << spec.topology.links.size() << " links, " << spec.initiators.size()
            << " initiators)\n";
  return kOk;
}

int cmd_paths(const std::string& path, const std::string& flow_id, bool labels,
              std::size_t bound) {
  const SystemSpec spec = load_input_spec(path);
  const Flow* flow = spec.find_flow(FlowId(flow_id));
  if (flow == nullptr) throw ConfigError("unknown flow '" + flow_id + "'");
  for (const auto& p : enumerate_paths(*flow, bound)) {
    std::cout << '[';
    for (std::size_t i = 0; i < p.transitions.size(); ++i) {
      std::cout << (i ? "," : "") << p.transitions[i];
    }
    std::cout << ']';
    if (labels) {
      for (const auto& e : labels_of(*flow, p)) std::cout << ' ' << e;
    }
    std::cout << '\n';
  }
  return kOk;
}

struct SelectOptions {
  std::string spec;
  std::string metric = "fic";
  std::size_t k = 16;
  std::string scope = "ALL";
  std::uint64_t capacity = 8;
  bool no_reallocate = false;
  std::string output;
};

int cmd_select(const SelectOptions& o) {
  const SystemSpec spec = load_input_spec(o.spec);
  Method method = Method::parse(o.metric);
  if (method.kind == MethodKind::kFc) method.k = o.k;
  const Selection sel = select(spec, parse_scope(spec, o.scope), method);
  auto j = to_json(sel, spec.topology);
  j["observability"] = to_json(observability_for(spec, sel, o.capacity, !o.no_reallocate));
  const std::string text = j.dump(2) + "\n";
  if (o.output.empty()) {
    std::cout << text;
  } else {
    write_file(o.output, text);
    std::cout << o.output << ": " << sel.events.size() << " events on " << sel.links.size()
              << " links\n";
  }
  for (const auto& u : sel.undistinguishable) {
    std::cerr << "undistinguishable paths in flow '" << u.flow << "'\n";
  }
  return sel.undistinguishable.empty() ? kOk : kFindings;
}

struct SimulateOptions {
  std::string spec;
  std::string selection;
  std::uint64_t capacity = 8;
  std::uint64_t seed = 1;
  bool no_drain = false;
  bool no_reallocate = false;
  std::uint64_t instances = 100;
  std::uint64_t bandwidth = 1;
  std::string out_dir;
};

int cmd_simulate(const SimulateOptions& o) {
  const SystemSpec spec = load_input_spec(o.spec);
  Selection sel;
  if (o.selection.empty()) {
    sel = select(spec, scope_flows(spec, std::nullopt), Method{});
  } else {
    sel = selection_from_json(read_json(o.selection), spec.topology);
  }
  const ObservabilityConfig obs =
      observability_for(spec, sel, o.capacity, !o.no_reallocate, o.bandwidth);
  WorkloadConfig wl;
  wl.seed = o.seed;
  wl.drain = !o.no_drain;
  wl.instances_per_initiator = o.instances;
  const SimulationResult result = run_simulation(spec, wl, obs);
  const auto recons = reconstruct(result.observed, spec, options_for(obs, result));
  const auto per_flow = result.instances_per_flow();
  std::uint64_t n = 0;
  for (const auto& [f, c] : per_flow) n += c;
  const CoverageReport report = score(recons, n, per_flow);

  nlohmann::ordered_json j;
  j["seed"] = o.seed;
  j["capacity"] = o.capacity;
  j["link_count"] = sel.links.size();
  j["coverage"] = to_json(report);
  j["simulation"] = summary_json(result);
  if (!o.out_dir.empty()) {
    const fs::path dir(o.out_dir);
    write_file(dir / "ground_truth.csv", records_to_csv(result.ground_truth, true));
    write_file(dir / "observed.csv", records_to_csv(result.observed, false));
    write_file(dir / "summary.json", j.dump(2) + "\n");
  }
  std::cout << j.dump(2) << '\n';
  return kOk;
}

std::vector<nlohmann::json> run_plan(const ExperimentPlan& plan, const SystemSpec& spec,
                                     const fs::path& dir) {
  std::vector<nlohmann::json> cells;
  for (const auto& m : plan.methods) {
    for (auto cap : plan.capacities) {
      for (auto seed : plan.seeds) {
        const std::string name = cell_file_name(m, cap, seed);
        nlohmann::ordered_json j;
        try {
          j = cell_to_json(run_cell(spec, plan, m, cap, seed), spec);
        } catch (const Error& e) {
          throw Error("cell " + name + ": " + e.what());
        }
        const std::string text = j.dump(2) + "\n";
        write_file(dir / name, text);
        cells.push_back(nlohmann::json::parse(text));
      }
    }
  }
  return cells;
}

ExperimentPlan load_plan(const std::string& path, const std::string& out_dir) {
  ExperimentPlan plan = plan_from_json(read_json(path));
  if (!out_dir.empty()) plan.output_dir = out_dir;
  return plan;
}

int cmd_run(const std::string& plan_path, const std::string& out_dir) {
  const ExperimentPlan plan = load_plan(plan_path, out_dir);
  const SystemSpec spec = load_input_spec(plan.spec);
  scope_flows(spec, plan.scope);  // reject a bad scope before any run
  const fs::path dir(plan.output_dir);
  const auto rows = aggregate(run_plan(plan, spec, dir));
  const std::string table = format_table(rows);
  write_file(dir / "aggregate.txt", table);
  write_file(dir / "aggregate.csv", format_csv(rows));
  std::cout << table;
  return kOk;
}

int cmd_compare(const std::string& plan_path, const std::string& out_dir) {
  const nlohmann::json raw = read_json(plan_path);
  ExperimentPlan plan = load_plan(plan_path, out_dir);
  if (!raw.contains("methods")) {
    plan.methods = {Method::parse("NONE"), Method::parse("FIC"), Method::parse("CEC"),
                    Method::parse("FC16")};
  }
  const SystemSpec spec = load_input_spec(plan.spec);
  scope_flows(spec, plan.scope);
  const fs::path dir(plan.output_dir);
  const auto rows = aggregate(run_plan(plan, spec, dir));
  const std::string table = format_comparison(rows);
  write_file(dir / "comparison.txt", table);
  write_file(dir / "comparison.csv", format_csv(rows));
  std::cout << table;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flow observability: spec validation, event selection, trace simulation"};
  app.require_subcommand(1);

  std::string validate_spec;
  auto* validate = app.add_subcommand("validate", "Parse and validate a flow spec");
  validate->add_option("spec", validate_spec, "Spec file or 'prototype'")->required();

  std::string paths_spec, paths_flow;
  bool paths_labels = false;
  std::size_t paths_bound = kDefaultPathBound;
  auto* paths = app.add_subcommand("paths", "List the execution paths of a flow");
  paths->add_option("spec", paths_spec, "Spec file or 'prototype'")->required();
  paths->add_option("flow", paths_flow, "Flow id")->required();
  paths->add_flag("--labels", paths_labels, "Print event labels after each path");
  paths->add_option("--bound", paths_bound, "Maximum number of paths")
      ->check(CLI::PositiveNumber);

  SelectOptions sel;
  auto* select_cmd = app.add_subcommand("select", "Choose events to observe");
  select_cmd->add_option("spec", sel.spec, "Spec file or 'prototype'")->required();
  select_cmd->add_option("--metric", sel.metric, "fic, cec, fc or none")
      ->check(CLI::IsMember({"fic", "cec", "fc", "none"}, CLI::ignore_case));
  select_cmd->add_option("--k", sel.k, "Event count for the fc baseline")
      ->check(CLI::PositiveNumber);
  select_cmd->add_option("--scope", sel.scope, "ALL or comma-separated initiators");
  select_cmd->add_option("--capacity", sel.capacity, "Base queue capacity per link")
      ->check(CLI::PositiveNumber);
  select_cmd->add_flag("--no-reallocate", sel.no_reallocate,
                       "Keep the base capacity on enabled links");
  select_cmd->add_option("-o,--output", sel.output, "Write the selection here");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run one traced simulation");
  simulate->add_option("spec", sim.spec, "Spec file or 'prototype'")->required();
  simulate->add_option("--selection", sim.selection,
                       "Selection JSON from 'select' (default: every event)");
  simulate->add_option("--capacity", sim.capacity, "Base queue capacity per link")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Random seed");
  simulate->add_flag("--no-drain", sim.no_drain,
                     "Stop when the last instance completes; report queued events");
  simulate->add_flag("--no-reallocate", sim.no_reallocate,
                     "Keep the base capacity on enabled links");
  simulate->add_option("--instances", sim.instances, "Instances per initiator")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--bandwidth", sim.bandwidth, "Trace port events per cycle")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--out-dir", sim.out_dir, "Write CSV traces and summary.json");

  std::string run_plan_path, run_out;
  auto* run = app.add_subcommand("run", "Run an experiment plan");
  run->add_option("plan", run_plan_path, "Plan JSON")->required();
  run->add_option("--out-dir", run_out, "Override the plan's output_dir");

  std::string cmp_plan_path, cmp_out;
  auto* compare = app.add_subcommand("compare", "Compare NONE, FIC, CEC and FC16");
  compare->add_option("plan", cmp_plan_path, "Plan JSON")->required();
  compare->add_option("--out-dir", cmp_out, "Override the plan's output_dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kFailure;
  }

  try {
    if (*validate) return cmd_validate(validate_spec);
    if (*paths) return cmd_paths(paths_spec, paths_flow, paths_labels, paths_bound);
    if (*select_cmd) return cmd_select(sel);
    if (*simulate) return cmd_simulate(sim);
    if (*run) return cmd_run(run_plan_path, run_out);
    if (*compare) return cmd_compare(cmp_plan_path, cmp_out);
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
