#include "flowobs/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <sstream>

#include "flowobs/errors.hpp"

namespace flowobs {

std::string Method::name() const {
  switch (kind) {
    case MethodKind::kNone: return "NONE";
    case MethodKind::kFic: return "FIC";
    case MethodKind::kCec: return "CEC";
    case MethodKind::kFc: return "FC" + std::to_string(k);
  }
  return "?";
}

namespace {

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  if (text.empty() || !std::all_of(text.begin(), text.end(), [](unsigned char c) {
        return std::isdigit(c) != 0;
      })) {
    throw ConfigError("bad " + what + " '" + text + "'");
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw ConfigError(what + " '" + text + "' is out of range");
  }
}

}  // namespace

Method Method::parse(const std::string& text) {
  std::string up;
  for (char c : text) up += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "NONE") return {MethodKind::kNone, 16};
  if (up == "FIC") return {MethodKind::kFic, 16};
  if (up == "CEC") return {MethodKind::kCec, 16};
  if (up.rfind("FC", 0) == 0) {
    std::string rest = up.substr(2);
    if (rest.empty()) return {MethodKind::kFc, 16};
    if (rest.front() == ':') {
      rest = rest.substr(1);
    } else if (rest.front() == '(' && rest.back() == ')') {
      rest = rest.substr(1, rest.size() - 2);
    }
    const std::uint64_t k = parse_u64(rest, "FC k");
    if (k == 0) throw ConfigError("FC k must be positive");
    return {MethodKind::kFc, static_cast<std::size_t>(k)};
  }
  throw ConfigError("unknown selection method '" + text + "'");
}

std::vector<std::uint64_t> default_seeds() {
  const char* env = std::getenv("FLOWOBS_SEEDS");
  if (env == nullptr || *env == '\0') {
    std::vector<std::uint64_t> out;
    for (std::uint64_t s = 1; s <= 10; ++s) out.push_back(s);
    return out;
  }
  const std::string text(env);
  std::vector<std::uint64_t> out;
  const auto dash = text.find('-');
  if (dash != std::string::npos) {
    const auto lo = parse_u64(text.substr(0, dash), "FLOWOBS_SEEDS bound");
    const auto hi = parse_u64(text.substr(dash + 1), "FLOWOBS_SEEDS bound");
    if (lo > hi) throw ConfigError("FLOWOBS_SEEDS range is empty");
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
    return out;
  }
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_u64(item, "FLOWOBS_SEEDS item"));
  if (out.empty()) throw ConfigError("FLOWOBS_SEEDS names no seeds");
  return out;
}

ExperimentPlan plan_from_json(const nlohmann::json& j) {
  ExperimentPlan plan;
  try {
    if (!j.is_object()) throw ConfigError("plan must be a JSON object");
    plan.spec = j.value("spec", plan.spec);
    if (j.contains("scope")) {
      const auto& s = j.at("scope");
      if (s.is_string()) {
        if (s.get<std::string>() != "ALL") {
          plan.scope = std::vector<ComponentId>{ComponentId(s.get<std::string>())};
        }
      } else {
        std::vector<ComponentId> ids;
        for (const auto& c : s) ids.emplace_back(c.get<std::string>());
        if (ids.empty()) throw ConfigError("scope is empty");
        plan.scope = std::move(ids);
      }
    }
    if (j.contains("methods")) {
      plan.methods.clear();
      for (const auto& m : j.at("methods")) {
        plan.methods.push_back(Method::parse(m.get<std::string>()));
      }
    }
    if (j.contains("capacities")) {
      plan.capacities = j.at("capacities").get<std::vector<std::uint64_t>>();
    }
    if (j.contains("seeds")) plan.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("workload")) {
      const auto& w = j.at("workload");
      auto& wl = plan.workload;
      wl.instances_per_initiator =
          w.value("instances_per_initiator", wl.instances_per_initiator);
      auto range = [&](const char* key, CycleRange& r) {
        if (!w.contains(key)) return;
        const auto v = w.at(key).get<std::vector<std::uint64_t>>();
        if (v.size() != 2) throw ConfigError(std::string(key) + " needs [min, max]");
        r = {v[0], v[1]};
      };
      range("initiation_delay", wl.initiation_delay);
      range("transition_latency", wl.transition_latency);
      wl.cycle_budget = w.value("cycle_budget", wl.cycle_budget);
      wl.drain = w.value("drain", wl.drain);
    }
    plan.port_bandwidth = j.value("port_bandwidth", plan.port_bandwidth);
    plan.reallocate = j.value("reallocate", plan.reallocate);
    plan.emission_clock = j.value("emission_clock", plan.emission_clock);
    plan.output_dir = j.value("output_dir", plan.output_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad plan: ") + e.what());
  } catch (const InvalidIdentifier& e) {
    throw ConfigError(std::string("bad plan: ") + e.what());
  }
  if (plan.methods.empty()) throw ConfigError("plan lists no methods");
  if (plan.capacities.empty()) throw ConfigError("plan lists no capacities");
  if (plan.seeds.empty()) throw ConfigError("plan lists no seeds");
  for (auto c : plan.capacities) {
    if (c == 0) throw ConfigError("capacities must be positive");
  }
  return plan;
}

std::set<FlowId> scope_flows(const SystemSpec& spec,
                             const std::optional<std::vector<ComponentId>>& scope) {
  std::set<FlowId> out;
  if (!scope) {
    for (const auto& f : spec.flows) out.insert(f.id());
    return out;
  }
  if (scope->empty()) throw ConfigError("scope is empty");
  for (const auto& c : *scope) {
    const Initiator* init = spec.find_initiator(c);
    if (init == nullptr) {
      throw ConfigError("scope names unknown initiator '" + c.str() + "'");
    }
    out.insert(init->flows.begin(), init->flows.end());
  }
  return out;
}

Selection select(const SystemSpec& spec, const std::set<FlowId>& flows,
                 const Method& method) {
  const SelectionProblem problem = make_problem(spec, flows);
  switch (method.kind) {
    case MethodKind::kNone: {
      Selection sel;
      for (const auto& f : problem.flows) {
        for (const auto& e : f.events()) {
          sel.events.insert(e);
          sel.links.insert(spec.topology.link_of(e));
          sel.rationale[e] = Reason::kFlowCover;
        }
      }
      return sel;
    }
    case MethodKind::kFic: return select_fic(problem);
    case MethodKind::kCec: return select_cec(problem);
    case MethodKind::kFc: return select_fc_baseline(problem, method.k);
  }
  return {};
}

CellResult run_cell(const SystemSpec& spec, const ExperimentPlan& plan,
                    const Method& method, std::uint64_t capacity,
                    std::uint64_t seed) {
  CellResult cell;
  cell.method = method;
  cell.capacity = capacity;
  cell.seed = seed;
  const std::set<FlowId> flows = scope_flows(spec, plan.scope);
  cell.selection = select(spec, flows, method);
  cell.observability = observability_for(spec, cell.selection, capacity,
                                         plan.reallocate, plan.port_bandwidth);
  WorkloadConfig wl = plan.workload;
  wl.seed = seed;
  cell.simulation = run_simulation(spec, wl, cell.observability);

  std::set<ComponentId> initiators;
  if (plan.scope) {
    initiators.insert(plan.scope->begin(), plan.scope->end());
  } else {
    for (const auto& i : spec.initiators) initiators.insert(i.component);
  }
  std::set<InstanceTag> tags;
  for (const auto& r : cell.simulation.ground_truth) {
    if (initiators.contains(r.tag.initiator)) tags.insert(r.tag);
  }
  std::map<FlowId, std::uint64_t> per_flow;
  for (const auto& t : tags) ++per_flow[t.flow];
  std::vector<EventRecord> observed;
  for (const auto& r : cell.simulation.observed) {
    if (tags.contains(r.tag)) observed.push_back(r);
  }
  const auto recons =
      reconstruct(observed, spec, options_for(cell.observability, cell.simulation));
  cell.coverage = score(recons, tags.size(), per_flow);
  for (const auto& il : interleavings(recons, plan.emission_clock
                                                  ? IntervalClock::kEmissionCycle
                                                  : IntervalClock::kOffloadOrder)) {
    ++cell.interleaving_counts[static_cast<int>(il.relation)];
  }
  return cell;
}

std::string cell_file_name(const Method& method, std::uint64_t capacity,
                           std::uint64_t seed) {
  return method.name() + "_" + std::to_string(capacity) + "_" + std::to_string(seed) +
         ".json";
}

nlohmann::ordered_json cell_to_json(const CellResult& cell, const SystemSpec& spec) {
  nlohmann::ordered_json j;
  j["method"] = cell.method.name();
  j["capacity"] = cell.capacity;
  j["seed"] = cell.seed;
  j["link_count"] = cell.selection.links.size();
  j["event_count"] = cell.selection.events.size();
  j["coverage"] = to_json(cell.coverage);
  j["interleavings"] = {
      {"CONTAINS", cell.interleaving_counts[static_cast<int>(Relation::kContains)]},
      {"OVERLAPS", cell.interleaving_counts[static_cast<int>(Relation::kOverlaps)]},
      {"PRECEDES", cell.interleaving_counts[static_cast<int>(Relation::kPrecedes)]}};
  j["simulation"] = summary_json(cell.simulation);
  j["selection"] = to_json(cell.selection, spec.topology);
  j["observability"] = to_json(cell.observability);
  return j;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

std::vector<AggregateRow> aggregate(const std::vector<nlohmann::json>& cells) {
  struct Acc {
    std::string method;
    std::uint64_t capacity = 0;
    std::size_t links = 0;
    std::vector<double> i, c, n, fic, cec, pr, drops;
  };
  std::vector<Acc> accs;
  try {
    for (const auto& cell : cells) {
      const auto method = cell.at("method").get<std::string>();
      const auto cap = cell.at("capacity").get<std::uint64_t>();
      auto it = std::find_if(accs.begin(), accs.end(), [&](const Acc& a) {
        return a.method == method && a.capacity == cap;
      });
      if (it == accs.end()) {
        Acc acc;
        acc.method = method;
        acc.capacity = cap;
        accs.push_back(std::move(acc));
        it = accs.end() - 1;
      }
      const auto& cov = cell.at("coverage");
      it->links = std::max(it->links, cell.at("link_count").get<std::size_t>());
      it->i.push_back(cov.at("observed_instances").get<double>());
      it->c.push_back(cov.at("complete_instances").get<double>());
      it->n.push_back(cov.at("total_instances").get<double>());
      it->fic.push_back(cov.at("fic").get<double>());
      it->cec.push_back(cov.at("cec").get<double>());
      it->pr.push_back(cov.at("path_resolved").get<double>());
      it->drops.push_back(cell.at("simulation").at("dropped_events").get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad cell: ") + e.what());
  }
  std::vector<AggregateRow> rows;
  for (auto& a : accs) {
    AggregateRow r;
    r.method = a.method;
    r.capacity = a.capacity;
    r.links = a.links;
    r.seeds = a.fic.size();
    r.observed = median(a.i);
    r.complete = median(a.c);
    r.total = median(a.n);
    r.fic = median(a.fic);
    r.cec = median(a.cec);
    r.path_resolved = median(a.pr);
    r.drops = median(a.drops);
    rows.push_back(r);
  }
  return rows;
}

namespace {

std::string pad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

std::string render(const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& body) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : body) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& row) {
    std::string text;
    for (std::size_t c = 0; c < row.size(); ++c) {
      text += c + 1 == row.size() ? row[c] : pad(row[c], width[c] + 2);
    }
    out << text << '\n';
  };
  line(header);
  for (const auto& row : body) line(row);
  return out.str();
}

// Counts are medians over seeds.
std::string fic_cell(const AggregateRow& r) { return format_cell(r.observed, r.total); }
std::string cec_cell(const AggregateRow& r) { return format_cell(r.complete, r.total); }

}  // namespace

std::string format_table(const std::vector<AggregateRow>& rows) {
  std::vector<std::vector<std::string>> body;
  for (const auto& r : rows) {
    body.push_back({r.method, std::to_string(r.capacity), std::to_string(r.links),
                    std::to_string(r.seeds), fic_cell(r), cec_cell(r),
                    format_ratio(r.path_resolved), format_ratio(r.drops)});
  }
  return render({"method", "capacity", "links", "seeds", "FIC", "CEC",
                 "path_resolved", "drops"},
                body);
}

std::string format_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream out;
  out << "method,capacity,links,seeds,observed,complete,total,fic,cec,path_resolved,"
         "drops\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.capacity << ',' << r.links << ',' << r.seeds << ','
        << format_ratio(r.observed) << ',' << format_ratio(r.complete) << ','
        << format_ratio(r.total) << ',' << format_ratio(r.fic) << ','
        << format_ratio(r.cec) << ',' << format_ratio(r.path_resolved) << ','
        << format_ratio(r.drops) << '\n';
  }
  return out.str();
}

std::string format_comparison(const std::vector<AggregateRow>& rows) {
  std::vector<std::vector<std::string>> body;
  for (const auto& r : rows) {
    body.push_back({r.method, std::to_string(r.links), fic_cell(r), cec_cell(r)});
  }
  return render({"method", "links", "FIC", "CEC"}, body);
}

}  // namespace flowobs
