#include "flowobs/selection.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <optional>

#include "flowobs/errors.hpp"

namespace flowobs {

SelectionProblem make_problem(const SystemSpec& spec,
                              const std::set<FlowId>& scope,
                              std::uint64_t base_capacity) {
  SelectionProblem p;
  for (const auto& f : spec.flows) {
    if (scope.empty() || scope.contains(f.id())) p.flows.push_back(f);
  }
  for (const auto& id : scope) {
    if (spec.find_flow(id) == nullptr) {
      throw ConfigError("scope names unknown flow '" + id.str() + "'");
    }
  }
  p.event_link_map = spec.topology.event_link_map;
  p.total_queue_budget = base_capacity * spec.topology.links.size();
  return p;
}

std::string_view to_string(Reason r) {
  switch (r) {
    case Reason::kFlowCover: return "FLOW_COVER";
    case Reason::kStart: return "START";
    case Reason::kEnd: return "END";
    case Reason::kPathDisambig: return "PATH_DISAMBIG";
    case Reason::kFcRank: return "FC_RANK";
  }
  return "?";
}

Reason reason_from_string(std::string_view text) {
  for (Reason r : {Reason::kFlowCover, Reason::kStart, Reason::kEnd,
                   Reason::kPathDisambig, Reason::kFcRank}) {
    if (to_string(r) == text) return r;
  }
  throw ConfigError("unknown reason tag '" + std::string(text) + "'");
}

std::set<Event> cover_events(const Flow& flow, std::size_t path_bound) {
  const auto paths = enumerate_paths(flow, path_bound);
  std::optional<std::set<Event>> common;
  for (const auto& p : paths) {
    const auto labels = labels_of(flow, p);
    std::set<Event> here(labels.begin(), labels.end());
    if (!common) {
      common = std::move(here);
    } else {
      std::set<Event> keep;
      std::set_intersection(common->begin(), common->end(), here.begin(),
                            here.end(), std::inserter(keep, keep.end()));
      common = std::move(keep);
    }
  }
  if (!common || common->empty()) return flow.events();
  return *common;
}

namespace {

const LinkId& link_of(const SelectionProblem& p, const Event& e) {
  auto it = p.event_link_map.find(e);
  if (it == p.event_link_map.end()) {
    throw ConfigError("event '" + e.to_string() + "' has no link");
  }
  return it->second;
}

// Which flows each link and each event can cover.
struct CoverModel {
  std::size_t flow_count = 0;
  std::map<Event, std::set<std::size_t>> event_flows;
  std::map<LinkId, std::set<std::size_t>> link_flows;
  std::map<LinkId, std::set<Event>> link_events;
};

CoverModel build_model(const SelectionProblem& p) {
  CoverModel m;
  m.flow_count = p.flows.size();
  for (std::size_t i = 0; i < p.flows.size(); ++i) {
    const Flow& f = p.flows[i];
    if (f.transitions().empty()) {
      throw ConfigError("flow '" + f.id().str() + "' has no events");
    }
    for (const auto& e : cover_events(f)) {
      const LinkId& l = link_of(p, e);
      m.event_flows[e].insert(i);
      m.link_flows[l].insert(i);
      m.link_events[l].insert(e);
    }
  }
  return m;
}

using Mask = std::uint64_t;

Mask mask_of(const std::set<std::size_t>& s) {
  Mask m = 0;
  for (std::size_t i : s) m |= Mask{1} << i;
  return m;
}

Mask full_mask(std::size_t n) {
  return n == 64 ? ~Mask{0} : (Mask{1} << n) - 1;
}

// Fewest events covering every flow, ties to the smaller sorted list.
std::vector<Event> exact_event_cover(const std::vector<Event>& events,
                                     const std::vector<Mask>& masks, Mask goal) {
  std::vector<std::size_t> best;
  bool have_best = false;
  std::vector<std::size_t> chosen;

  auto better = [&](const std::vector<std::size_t>& cand) {
    if (!have_best) return true;
    if (cand.size() != best.size()) return cand.size() < best.size();
    auto a = cand, b = best;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a < b;  // events are indexed in sorted order
  };

  auto dfs = [&](auto&& self, Mask covered) -> void {
    if ((covered & goal) == goal) {
      if (better(chosen)) {
        best = chosen;
        have_best = true;
      }
      return;
    }
    if (have_best && chosen.size() >= best.size()) return;
    const int flow = std::countr_zero(goal & ~covered);
    for (std::size_t e = 0; e < events.size(); ++e) {
      if (!(masks[e] >> flow & 1)) continue;
      chosen.push_back(e);
      self(self, covered | masks[e]);
      chosen.pop_back();
    }
  };
  dfs(dfs, 0);
  std::sort(best.begin(), best.end());
  std::vector<Event> out;
  for (std::size_t i : best) out.push_back(events[i]);
  return out;
}

std::vector<Event> greedy_event_cover(const std::vector<Event>& events,
                                      const std::vector<std::set<std::size_t>>& covers,
                                      std::size_t flow_count) {
  std::vector<bool> covered(flow_count, false);
  std::size_t remaining = flow_count;
  std::vector<Event> out;
  std::vector<bool> used(events.size(), false);
  while (remaining > 0) {
    std::size_t best = events.size();
    std::size_t best_gain = 0;
    for (std::size_t e = 0; e < events.size(); ++e) {
      if (used[e]) continue;
      std::size_t gain = 0;
      for (std::size_t f : covers[e]) gain += covered[f] ? 0 : 1;
      if (gain > best_gain) {
        best = e;
        best_gain = gain;
      }
    }
    if (best == events.size()) throw Error("event cover left flows uncovered");
    used[best] = true;
    out.push_back(events[best]);
    for (std::size_t f : covers[best]) {
      if (!covered[f]) {
        covered[f] = true;
        --remaining;
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Event> event_cover(const CoverModel& m, const std::vector<LinkId>& links) {
  std::vector<Event> events;
  for (const auto& l : links) {
    const auto& ev = m.link_events.at(l);
    events.insert(events.end(), ev.begin(), ev.end());
  }
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());
  if (m.flow_count <= 64 && events.size() <= 32) {
    std::vector<Mask> masks;
    for (const auto& e : events) masks.push_back(mask_of(m.event_flows.at(e)));
    return exact_event_cover(events, masks, full_mask(m.flow_count));
  }
  std::vector<std::set<std::size_t>> covers;
  for (const auto& e : events) covers.push_back(m.event_flows.at(e));
  return greedy_event_cover(events, covers, m.flow_count);
}

std::vector<LinkId> undominated_links(const CoverModel& m) {
  std::vector<LinkId> out;
  for (const auto& [l, flows] : m.link_flows) {
    bool dominated = false;
    for (const auto& [other, of] : m.link_flows) {
      if (other == l) continue;
      const bool subset = std::includes(of.begin(), of.end(), flows.begin(), flows.end());
      if (subset && (of.size() > flows.size() || other < l)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) out.push_back(l);
  }
  return out;
}

std::vector<LinkId> greedy_links(const CoverModel& m, const std::vector<LinkId>& cands) {
  std::vector<bool> covered(m.flow_count, false);
  std::size_t remaining = m.flow_count;
  std::vector<LinkId> out;
  std::vector<bool> used(cands.size(), false);
  while (remaining > 0) {
    std::size_t best = cands.size();
    std::size_t best_gain = 0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (used[i]) continue;
      std::size_t gain = 0;
      for (std::size_t f : m.link_flows.at(cands[i])) gain += covered[f] ? 0 : 1;
      if (gain > best_gain) {
        best = i;
        best_gain = gain;
      }
    }
    if (best == cands.size()) throw Error("link cover left flows uncovered");
    used[best] = true;
    out.push_back(cands[best]);
    for (std::size_t f : m.link_flows.at(cands[best])) {
      if (!covered[f]) {
        covered[f] = true;
        --remaining;
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// All minimum-size link sets covering every flow, each sorted.
std::set<std::vector<std::size_t>> minimum_link_sets(const std::vector<Mask>& link_masks,
                                                     Mask goal, std::size_t upper) {
  const std::size_t n = link_masks.size();
  // Links able to cover each flow.
  std::vector<std::vector<std::size_t>> by_flow(64);
  for (std::size_t l = 0; l < n; ++l) {
    for (Mask m = link_masks[l]; m != 0; m &= m - 1) {
      by_flow[std::countr_zero(m)].push_back(l);
    }
  }
  std::size_t max_gain = 1;
  for (Mask m : link_masks) {
    max_gain = std::max<std::size_t>(max_gain, std::popcount(m));
  }

  std::size_t best = upper;
  std::set<std::vector<std::size_t>> found;
  std::vector<std::size_t> chosen;
  bool collect = false;

  auto dfs = [&](auto&& self, Mask covered) -> void {
    if ((covered & goal) == goal) {
      if (!collect) {
        best = std::min(best, chosen.size());
      } else if (chosen.size() == best) {
        auto s = chosen;
        std::sort(s.begin(), s.end());
        found.insert(std::move(s));
      }
      return;
    }
    const Mask open = goal & ~covered;
    const std::size_t lower =
        (static_cast<std::size_t>(std::popcount(open)) + max_gain - 1) / max_gain;
    if (collect ? chosen.size() + lower > best : chosen.size() + lower >= best) return;
    // Branch on the open flow with the fewest covering links.
    int pick = -1;
    std::size_t fewest = std::numeric_limits<std::size_t>::max();
    for (Mask m = open; m != 0; m &= m - 1) {
      const int f = std::countr_zero(m);
      if (by_flow[f].size() < fewest) {
        fewest = by_flow[f].size();
        pick = f;
      }
    }
    for (std::size_t l : by_flow[pick]) {
      chosen.push_back(l);
      self(self, covered | link_masks[l]);
      chosen.pop_back();
    }
  };
  dfs(dfs, 0);
  collect = true;
  dfs(dfs, 0);
  return found;
}

}  // namespace

Selection select_fic(const SelectionProblem& problem, std::size_t exact_limit) {
  Selection sel;
  if (problem.flows.empty()) return sel;
  const CoverModel m = build_model(problem);
  const std::vector<LinkId> cands = undominated_links(m);

  std::vector<LinkId> links;
  std::vector<Event> events;
  if (cands.size() <= exact_limit && m.flow_count <= 64) {
    std::vector<Mask> masks;
    for (const auto& l : cands) masks.push_back(mask_of(m.link_flows.at(l)));
    const auto greedy = greedy_links(m, cands);
    const auto sets =
        minimum_link_sets(masks, full_mask(m.flow_count), greedy.size() + 1);
    bool have = false;
    for (const auto& s : sets) {
      std::vector<LinkId> ls;
      for (std::size_t i : s) ls.push_back(cands[i]);
      std::sort(ls.begin(), ls.end());
      auto ev = event_cover(m, ls);
      if (!have || ev.size() < events.size() ||
          (ev.size() == events.size() && ls < links)) {
        links = std::move(ls);
        events = std::move(ev);
        have = true;
      }
    }
  } else {
    links = greedy_links(m, cands);
    events = event_cover(m, links);
  }

  for (const auto& e : events) {
    sel.events.insert(e);
    sel.links.insert(link_of(problem, e));
    sel.rationale[e] = Reason::kFlowCover;
  }
  return sel;
}

namespace {

std::vector<Event> project(const std::vector<Event>& labels, const std::set<Event>& s,
                           const Event* extra = nullptr) {
  std::vector<Event> out;
  for (const auto& e : labels) {
    if (s.contains(e) || (extra != nullptr && e == *extra)) out.push_back(e);
  }
  return out;
}

struct PathPair {
  std::size_t flow;
  const std::vector<Event>* a;
  const std::vector<Event>* b;
};

}  // namespace

std::vector<std::pair<FlowPath, FlowPath>> confusable_pairs(
    const Flow& flow, const std::set<Event>& events) {
  const auto paths = enumerate_paths(flow);
  std::vector<std::vector<Event>> labels;
  for (const auto& p : paths) labels.push_back(labels_of(flow, p));
  std::vector<std::pair<FlowPath, FlowPath>> out;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (std::size_t j = i + 1; j < paths.size(); ++j) {
      if (labels[i] == labels[j]) continue;
      if (project(labels[i], events) == project(labels[j], events)) {
        out.emplace_back(paths[i], paths[j]);
      }
    }
  }
  return out;
}

Selection select_cec(const SelectionProblem& problem) {
  Selection sel;
  auto add = [&](const Event& e, Reason r) {
    if (sel.events.insert(e).second) {
      sel.links.insert(link_of(problem, e));
      sel.rationale[e] = r;
    }
  };
  for (const auto& f : problem.flows) {
    for (const auto& e : start_events(f)) add(e, Reason::kStart);
    for (const auto& e : end_events(f)) add(e, Reason::kEnd);
  }

  std::vector<std::vector<std::vector<Event>>> labels(problem.flows.size());
  std::vector<PathPair> pending;
  for (std::size_t fi = 0; fi < problem.flows.size(); ++fi) {
    const Flow& f = problem.flows[fi];
    const auto paths = enumerate_paths(f);
    for (const auto& p : paths) labels[fi].push_back(labels_of(f, p));
    for (std::size_t i = 0; i < paths.size(); ++i) {
      for (std::size_t j = i + 1; j < paths.size(); ++j) {
        if (labels[fi][i] == labels[fi][j]) {
          sel.undistinguishable.push_back({f.id(), paths[i], paths[j]});
        } else {
          pending.push_back({fi, &labels[fi][i], &labels[fi][j]});
        }
      }
    }
  }

  auto split = [&](const PathPair& p, const Event* extra) {
    return project(*p.a, sel.events, extra) != project(*p.b, sel.events, extra);
  };
  auto prune = [&] {
    std::erase_if(pending, [&](const PathPair& p) { return split(p, nullptr); });
  };
  prune();

  while (!pending.empty()) {
    std::set<Event> cands;
    for (const auto& p : pending) {
      for (const auto* seq : {p.a, p.b}) {
        for (const auto& e : *seq) {
          if (!sel.events.contains(e)) cands.insert(e);
        }
      }
    }
    const Event* best = nullptr;
    std::size_t best_count = 0;
    bool best_on_link = false;
    for (const auto& e : cands) {
      std::size_t count = 0;
      for (const auto& p : pending) count += split(p, &e) ? 1 : 0;
      const bool on_link = sel.links.contains(link_of(problem, e));
      if (count > best_count || (count == best_count && count > 0 &&
                                 on_link && !best_on_link)) {
        best = &e;
        best_count = count;
        best_on_link = on_link;
      }
    }
    if (best != nullptr) {
      add(*best, Reason::kPathDisambig);
    } else {
      // No single event separates any pair; add the first pair's missing
      // events until it separates.
      const PathPair p = pending.front();
      std::set<Event> missing;
      for (const auto* seq : {p.a, p.b}) {
        for (const auto& e : *seq) {
          if (!sel.events.contains(e)) missing.insert(e);
        }
      }
      for (const auto& e : missing) {
        add(e, Reason::kPathDisambig);
        if (split(p, nullptr)) break;
      }
    }
    prune();
  }
  return sel;
}

Selection select_fc_baseline(const SelectionProblem& problem, std::size_t k) {
  std::map<Event, std::size_t> fc;
  for (const auto& f : problem.flows) {
    for (const auto& e : f.events()) ++fc[e];
  }
  std::vector<std::pair<std::size_t, Event>> ranked;
  for (const auto& [e, n] : fc) ranked.emplace_back(n, e);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  Selection sel;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    const Event& e = ranked[i].second;
    sel.events.insert(e);
    sel.links.insert(link_of(problem, e));
    sel.rationale[e] = Reason::kFcRank;
  }
  return sel;
}

std::map<LinkId, std::uint64_t> reallocate_queues(
    std::uint64_t base_capacity, const std::set<LinkId>& all_links,
    const std::set<LinkId>& enabled) {
  if (enabled.empty()) throw ConfigError("no enabled links to reallocate to");
  for (const auto& l : enabled) {
    if (!all_links.contains(l)) {
      throw ConfigError("enabled link '" + l.str() + "' is not in the topology");
    }
  }
  const std::uint64_t total = base_capacity * all_links.size();
  const std::uint64_t share = total / enabled.size();
  std::uint64_t extra = total % enabled.size();
  std::map<LinkId, std::uint64_t> out;
  for (const auto& l : enabled) {
    out[l] = share + (extra > 0 ? 1 : 0);
    if (extra > 0) --extra;
  }
  return out;
}

std::size_t minimal_link_cover_oracle(const SelectionProblem& problem,
                                      std::size_t bound) {
  const CoverModel m = build_model(problem);
  if (m.flow_count == 0) return 0;
  std::vector<const std::set<std::size_t>*> links;
  for (const auto& [l, flows] : m.link_flows) links.push_back(&flows);
  const std::size_t n = links.size();
  if (n > bound) {
    throw TooLarge(std::to_string(n) + " candidate links exceed the oracle bound of " +
                   std::to_string(bound));
  }
  for (std::size_t k = 1; k <= n; ++k) {
    // Visit every k-subset via a selector vector in lexicographic order.
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), true);
    do {
      std::vector<bool> covered(m.flow_count, false);
      for (std::size_t i = 0; i < n; ++i) {
        if (!pick[i]) continue;
        for (std::size_t f : *links[i]) covered[f] = true;
      }
      if (std::all_of(covered.begin(), covered.end(), [](bool b) { return b; })) {
        return k;
      }
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  throw Error("flows cannot be covered");
}

ObservabilityConfig observability_for(const SystemSpec& spec,
                                      const Selection& selection,
                                      std::uint64_t base_capacity,
                                      bool reallocate,
                                      std::uint64_t port_bandwidth) {
  ObservabilityConfig obs =
      make_observability(spec, selection.events, base_capacity, port_bandwidth);
  if (reallocate && !obs.enabled_links.empty()) {
    obs.queue_capacity = reallocate_queues(base_capacity, spec.topology.link_ids(),
                                           obs.enabled_links);
  }
  return obs;
}

nlohmann::ordered_json to_json(const Selection& selection, const Topology& topology) {
  nlohmann::ordered_json j;
  auto events = nlohmann::ordered_json::array();
  for (const auto& e : selection.events) {
    nlohmann::ordered_json item;
    item["event"] = e.to_string();
    item["link"] = topology.link_of(e).str();
    item["reason"] = std::string(to_string(selection.rationale.at(e)));
    events.push_back(item);
  }
  auto links = nlohmann::ordered_json::array();
  for (const auto& l : selection.links) links.push_back(l.str());
  auto undist = nlohmann::ordered_json::array();
  for (const auto& u : selection.undistinguishable) {
    auto ids = [](const FlowPath& p) {
      auto a = nlohmann::ordered_json::array();
      for (const auto& t : p.transitions) a.push_back(t.str());
      return a;
    };
    undist.push_back({{"flow", u.flow.str()}, {"a", ids(u.a)}, {"b", ids(u.b)}});
  }
  j["event_count"] = selection.events.size();
  j["link_count"] = selection.links.size();
  j["events"] = events;
  j["links"] = links;
  j["undistinguishable"] = undist;
  return j;
}

Selection selection_from_json(const nlohmann::json& j, const Topology& topology) {
  try {
    Selection sel;
    for (const auto& item : j.at("events")) {
      const Event e = Event::parse(item.at("event").get<std::string>());
      sel.events.insert(e);
      sel.links.insert(topology.link_of(e));
      sel.rationale[e] = reason_from_string(
          item.value("reason", std::string(to_string(Reason::kFlowCover))));
    }
    return sel;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad selection file: ") + e.what());
  } catch (const InvalidIdentifier& e) {
    throw ConfigError(std::string("bad selection file: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw ConfigError(std::string("bad selection file: ") + e.what());
  }
}

}  // namespace flowobs
