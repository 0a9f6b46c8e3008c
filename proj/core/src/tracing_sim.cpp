#include "flowobs/tracing_sim.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "flowobs/errors.hpp"
#include "flowobs/rng.hpp"

namespace flowobs {

std::ostream& operator<<(std::ostream& os, const InstanceTag& tag) {
  return os << tag.flow << '/' << tag.initiator << '#' << tag.seq;
}

ObservabilityConfig make_observability(const SystemSpec& spec,
                                       const std::set<Event>& events,
                                       std::uint64_t capacity,
                                       std::uint64_t port_bandwidth) {
  ObservabilityConfig obs;
  obs.selected_events = events;
  obs.port_bandwidth = port_bandwidth;
  for (const auto& e : events) {
    const LinkId& link = spec.topology.link_of(e);
    obs.enabled_links.insert(link);
    obs.queue_capacity[link] = capacity;
  }
  return obs;
}

ObservabilityConfig full_observability(const SystemSpec& spec,
                                       std::uint64_t capacity,
                                       std::uint64_t port_bandwidth) {
  return make_observability(spec, spec.all_events(), capacity, port_bandwidth);
}

std::uint64_t SimulationResult::total_drops() const {
  std::uint64_t n = 0;
  for (const auto& [link, d] : drops) n += d;
  return n;
}

std::map<FlowId, std::uint64_t> SimulationResult::instances_per_flow() const {
  std::set<InstanceTag> tags;
  for (const auto& r : ground_truth) tags.insert(r.tag);
  std::map<FlowId, std::uint64_t> out;
  for (const auto& t : tags) ++out[t.flow];
  return out;
}

void check_config(const SystemSpec& spec, const WorkloadConfig& workload,
                  const ObservabilityConfig& obs) {
  auto check_range = [](const CycleRange& r, const char* name) {
    if (r.min < 1 || r.min > r.max) {
      throw ConfigError(std::string(name) + " must satisfy 1 <= min <= max, got [" +
                        std::to_string(r.min) + "," + std::to_string(r.max) + "]");
    }
  };
  if (workload.instances_per_initiator == 0) {
    throw ConfigError("instances_per_initiator must be positive");
  }
  check_range(workload.initiation_delay, "initiation_delay");
  check_range(workload.transition_latency, "transition_latency");
  if (workload.cycle_budget == 0) throw ConfigError("cycle_budget must be positive");

  for (const auto& init : spec.initiators) {
    if (init.flows.empty()) {
      throw ConfigError("initiator '" + init.component.str() + "' has no flows");
    }
  }

  if (obs.port_bandwidth == 0) throw ConfigError("port_bandwidth must be positive");
  const auto all = spec.all_events();
  std::set<LinkId> needed;
  for (const auto& e : obs.selected_events) {
    if (!all.contains(e)) {
      throw ConfigError("selected event '" + e.to_string() +
                        "' belongs to no flow");
    }
    needed.insert(spec.topology.link_of(e));
  }
  if (needed != obs.enabled_links) {
    for (const auto& l : needed) {
      if (!obs.enabled_links.contains(l)) {
        throw ConfigError("link '" + l.str() +
                          "' carries a selected event but is not enabled");
      }
    }
    for (const auto& l : obs.enabled_links) {
      if (!needed.contains(l)) {
        throw ConfigError("link '" + l.str() +
                          "' is enabled but carries no selected event");
      }
    }
  }
  for (const auto& l : obs.enabled_links) {
    auto it = obs.queue_capacity.find(l);
    if (it == obs.queue_capacity.end() || it->second == 0) {
      throw ConfigError("enabled link '" + l.str() +
                        "' needs a positive queue capacity");
    }
  }
  for (const auto& [l, cap] : obs.queue_capacity) {
    if (!obs.enabled_links.contains(l)) {
      throw ConfigError("queue capacity given for disabled link '" + l.str() + "'");
    }
  }
}

namespace {

// Transition data resolved once per flow.
struct CompiledTransition {
  const Transition* t;
  std::size_t link;  // index into topology links
  std::ptrdiff_t queue;  // index into enabled queues, -1 when unmonitored
};

struct CompiledFlow {
  const Flow* flow;
  std::vector<CompiledTransition> transitions;
};

struct Instance {
  InstanceTag tag;
  const CompiledFlow* flow;
  Marking marking;
  std::size_t pending = 0;  // index of the chosen transition
  std::uint64_t due = 0;
  std::uint64_t started = 0;
};

struct InitiatorState {
  const Initiator* initiator;
  std::vector<const CompiledFlow*> flows;
  std::uint64_t started = 0;
  std::uint64_t next_start = 0;
};

std::vector<std::size_t> enabled_indices(const CompiledFlow& f, const Marking& m) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < f.transitions.size(); ++i) {
    const auto& pre = f.transitions[i].t->preset;
    if (std::includes(m.marked.begin(), m.marked.end(), pre.begin(), pre.end())) {
      out.push_back(i);
    }
  }
  return out;
}

}  // namespace

SimulationResult run_simulation(const SystemSpec& spec,
                                const WorkloadConfig& workload,
                                const ObservabilityConfig& obs) {
  check_config(spec, workload, obs);

  const auto& links = spec.topology.links;
  auto link_index = [&](const LinkId& id) {
    auto it = std::lower_bound(links.begin(), links.end(), id,
                               [](const Link& l, const LinkId& v) { return l.id < v; });
    return static_cast<std::size_t>(it - links.begin());
  };

  // Enabled links in id order; queue i belongs to queue_links[i].
  const std::vector<LinkId> queue_links(obs.enabled_links.begin(),
                                        obs.enabled_links.end());
  std::vector<std::ptrdiff_t> queue_of_link(links.size(), -1);
  std::vector<std::uint64_t> capacity(queue_links.size());
  for (std::size_t q = 0; q < queue_links.size(); ++q) {
    queue_of_link[link_index(queue_links[q])] = static_cast<std::ptrdiff_t>(q);
    capacity[q] = obs.queue_capacity.at(queue_links[q]);
  }

  std::map<FlowId, CompiledFlow> compiled;
  for (const auto& f : spec.flows) {
    CompiledFlow cf{&f, {}};
    for (const auto& t : f.transitions()) {
      const std::size_t li = link_index(spec.topology.link_of(t.event));
      const bool selected = obs.selected_events.contains(t.event);
      cf.transitions.push_back({&t, li, selected ? queue_of_link[li] : -1});
    }
    compiled.emplace(f.id(), std::move(cf));
  }

  Rng rng(workload.seed);
  auto draw = [&](const CycleRange& r) { return rng.uniform(r.min, r.max); };

  std::vector<InitiatorState> initiators;
  for (const auto& init : spec.initiators) {
    InitiatorState st{&init, {}, 0, 0};
    for (const auto& fid : init.flows) st.flows.push_back(&compiled.at(fid));
    initiators.push_back(std::move(st));
  }
  for (auto& st : initiators) st.next_start = draw(workload.initiation_delay);

  SimulationResult result;
  for (const auto& l : queue_links) {
    result.detected[l] = 0;
    result.drops[l] = 0;
    result.max_occupancy[l] = 0;
    result.residual[l] = 0;
  }

  std::vector<std::deque<std::size_t>> queues(queue_links.size());
  std::vector<std::uint64_t> busy_until(links.size(), 0);  // cycle + 1 when used
  std::size_t rr = 0;
  std::vector<Instance> live;

  auto choose = [&](Instance& inst, std::uint64_t now, bool first) {
    const auto enabled = enabled_indices(*inst.flow, inst.marking);
    if (enabled.empty()) return false;
    inst.pending = enabled[rng.index(enabled.size())];
    inst.due = first ? now : now + draw(workload.transition_latency);
    return true;
  };

  auto all_started = [&] {
    return std::all_of(initiators.begin(), initiators.end(), [&](const auto& st) {
      return st.started >= workload.instances_per_initiator;
    });
  };
  auto queues_empty = [&] {
    return std::all_of(queues.begin(), queues.end(),
                       [](const auto& q) { return q.empty(); });
  };

  std::uint64_t cycle = 0;
  for (;; ++cycle) {
    const bool workload_done = all_started() && live.empty();
    if (workload_done && (!workload.drain || queues_empty())) break;

    // Initiations.
    for (auto& st : initiators) {
      if (st.started >= workload.instances_per_initiator || st.next_start != cycle) {
        continue;
      }
      const CompiledFlow* cf = st.flows[rng.index(st.flows.size())];
      Instance inst;
      inst.tag = InstanceTag{cf->flow->id(), st.initiator->component, st.started};
      inst.flow = cf;
      inst.marking = cf->flow->initial_marking();
      inst.started = cycle;
      if (!choose(inst, cycle, true)) {
        throw ConfigError("flow '" + cf->flow->id().str() +
                          "' has no transition enabled initially");
      }
      live.push_back(std::move(inst));
      ++st.started;
      ++result.started[st.initiator->component];
      if (st.started < workload.instances_per_initiator) {
        st.next_start = cycle + draw(workload.initiation_delay);
      }
    }

    // Firing, with monitors detecting as events cross their links.
    for (auto& inst : live) {
      if (cycle - inst.started > workload.cycle_budget) {
        std::ostringstream msg;
        msg << "instance " << inst.tag << " exceeded the cycle budget of "
            << workload.cycle_budget;
        throw Livelock(msg.str());
      }
      if (inst.due > cycle) continue;
      const CompiledTransition& ct = inst.flow->transitions[inst.pending];
      if (busy_until[ct.link] > cycle) {
        inst.due = cycle + 1;
        continue;
      }
      busy_until[ct.link] = cycle + 1;
      inst.marking = fire(*inst.flow->flow, inst.marking, ct.t->id);

      const std::size_t gt_index = result.ground_truth.size();
      result.ground_truth.push_back(
          EventRecord{cycle, ct.t->event, links[ct.link].id, inst.tag, ct.t->id});
      if (ct.queue >= 0) {
        const auto q = static_cast<std::size_t>(ct.queue);
        const LinkId& lid = queue_links[q];
        result.detections.push_back(gt_index);
        ++result.detected[lid];
        if (queues[q].size() >= capacity[q]) {
          ++result.drops[lid];
        } else {
          queues[q].push_back(gt_index);
          auto& occ = result.max_occupancy[lid];
          occ = std::max<std::uint64_t>(occ, queues[q].size());
        }
      }

      if (!choose(inst, cycle, false)) {
        if (!is_completion(*inst.flow->flow, inst.marking)) {
          std::ostringstream msg;
          msg << "instance " << inst.tag << " stopped outside its end marking";
          throw Error(msg.str());
        }
        inst.due = UINT64_MAX;  // finished
        result.last_completion_cycle = cycle;
      }
    }
    std::erase_if(live, [](const Instance& i) { return i.due == UINT64_MAX; });

    // Output controller.
    for (std::uint64_t k = 0; k < obs.port_bandwidth && !queues.empty(); ++k) {
      std::size_t q = rr;
      bool found = false;
      for (std::size_t n = 0; n < queues.size(); ++n) {
        const std::size_t cand = (rr + n) % queues.size();
        if (!queues[cand].empty()) {
          q = cand;
          found = true;
          break;
        }
      }
      if (!found) break;
      EventRecord rec = result.ground_truth[queues[q].front()];
      queues[q].pop_front();
      rec.transition.reset();
      result.observed.push_back(std::move(rec));
      rr = (q + 1) % queues.size();
    }
  }

  for (std::size_t q = 0; q < queues.size(); ++q) {
    result.residual[queue_links[q]] = queues[q].size();
  }
  result.final_cycle = cycle == 0 ? 0 : cycle - 1;
  return result;
}

std::map<std::uint64_t, std::vector<std::pair<LinkId, Event>>>
event_generation_trace(const SimulationResult& result) {
  std::map<std::uint64_t, std::vector<std::pair<LinkId, Event>>> out;
  for (std::size_t i : result.detections) {
    const auto& r = result.ground_truth.at(i);
    out[r.cycle].emplace_back(r.link, r.event);
  }
  return out;
}

std::string records_to_csv(const std::vector<EventRecord>& records,
                           bool with_transition) {
  std::ostringstream out;
  out << "cycle,link,src,dest,cmd,flow,initiator,seq";
  if (with_transition) out << ",transition";
  out << '\n';
  for (const auto& r : records) {
    out << r.cycle << ',' << r.link << ',' << r.event.src << ',' << r.event.dest
        << ',' << r.event.cmd << ',' << r.tag.flow << ',' << r.tag.initiator
        << ',' << r.tag.seq;
    if (with_transition) {
      out << ',' << (r.transition ? r.transition->str() : std::string());
    }
    out << '\n';
  }
  return out.str();
}

nlohmann::ordered_json summary_json(const SimulationResult& result) {
  std::map<LinkId, std::uint64_t> observed;
  for (const auto& l : result.detected) observed[l.first] = 0;
  for (const auto& r : result.observed) ++observed[r.link];

  std::uint64_t instances = 0;
  for (const auto& [c, n] : result.started) instances += n;
  std::uint64_t detected = 0, residual = 0;
  for (const auto& [l, n] : result.detected) detected += n;
  for (const auto& [l, n] : result.residual) residual += n;

  nlohmann::ordered_json j;
  j["instances"] = instances;
  nlohmann::ordered_json started = nlohmann::ordered_json::object();
  for (const auto& [c, n] : result.started) started[c.str()] = n;
  j["started"] = started;
  j["ground_truth_events"] = result.ground_truth.size();
  j["detected_events"] = detected;
  j["observed_events"] = result.observed.size();
  j["dropped_events"] = result.total_drops();
  j["residual_events"] = residual;
  j["last_completion_cycle"] = result.last_completion_cycle;
  j["final_cycle"] = result.final_cycle;
  nlohmann::ordered_json per_link = nlohmann::ordered_json::object();
  for (const auto& [l, n] : result.detected) {
    per_link[l.str()] = {{"detected", n},
                         {"observed", observed[l]},
                         {"dropped", result.drops.at(l)},
                         {"residual", result.residual.at(l)},
                         {"max_occupancy", result.max_occupancy.at(l)}};
  }
  j["links"] = per_link;
  return j;
}

nlohmann::ordered_json to_json(const ObservabilityConfig& obs) {
  nlohmann::ordered_json j;
  auto events = nlohmann::ordered_json::array();
  for (const auto& e : obs.selected_events) events.push_back(e.to_string());
  auto links = nlohmann::ordered_json::array();
  for (const auto& l : obs.enabled_links) links.push_back(l.str());
  auto caps = nlohmann::ordered_json::object();
  for (const auto& [l, c] : obs.queue_capacity) caps[l.str()] = c;
  j["selected_events"] = events;
  j["enabled_links"] = links;
  j["queue_capacity"] = caps;
  j["port_bandwidth"] = obs.port_bandwidth;
  return j;
}

ObservabilityConfig observability_from_json(const nlohmann::json& j) {
  try {
    ObservabilityConfig obs;
    for (const auto& e : j.at("selected_events")) {
      obs.selected_events.insert(Event::parse(e.get<std::string>()));
    }
    for (const auto& l : j.at("enabled_links")) {
      obs.enabled_links.emplace(l.get<std::string>());
    }
    for (const auto& [l, c] : j.at("queue_capacity").items()) {
      obs.queue_capacity[LinkId(l)] = c.get<std::uint64_t>();
    }
    obs.port_bandwidth = j.value("port_bandwidth", std::uint64_t{1});
    return obs;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad observability config: ") + e.what());
  } catch (const InvalidIdentifier& e) {
    throw ConfigError(std::string("bad observability config: ") + e.what());
  }
}

}  // namespace flowobs
