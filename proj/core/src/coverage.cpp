#include "flowobs/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "flowobs/errors.hpp"

namespace flowobs {

std::set<LinkId> lossy_links(const SimulationResult& result) {
  std::set<LinkId> out;
  for (const auto& [l, n] : result.drops) {
    if (n > 0) out.insert(l);
  }
  for (const auto& [l, n] : result.residual) {
    if (n > 0) out.insert(l);
  }
  return out;
}

ReconstructOptions options_for(const ObservabilityConfig& obs,
                               const SimulationResult& result) {
  ReconstructOptions opt;
  opt.selected_events = obs.selected_events;
  opt.lossy_links = lossy_links(result);
  return opt;
}

bool explains(const std::vector<Event>& labels,
              const std::vector<Event>& observed,
              const std::set<Event>* selected, const std::set<LinkId>* lossy,
              const Topology& topology) {
  struct Item {
    const Event* event;
    bool may_skip;
  };
  std::vector<Item> proj;
  for (const auto& e : labels) {
    if (selected != nullptr && !selected->contains(e)) continue;
    const bool may_skip =
        lossy == nullptr || lossy->contains(topology.link_of(e));
    proj.push_back({&e, may_skip});
  }
  const std::size_t m = observed.size();
  const std::size_t n = proj.size();
  if (m > n) return false;
  // reach[i]: the first i observed events are matched within the prefix of
  // proj scanned so far.
  std::vector<char> reach(m + 1, 0);
  reach[0] = 1;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<char> next(m + 1, 0);
    for (std::size_t i = 0; i <= m; ++i) {
      if (!reach[i]) continue;
      if (proj[j].may_skip) next[i] = 1;
      if (i < m && observed[i] == *proj[j].event) next[i + 1] = 1;
    }
    reach.swap(next);
  }
  return reach[m] != 0;
}

std::vector<InstanceReconstruction> reconstruct(
    const std::vector<EventRecord>& observed, const SystemSpec& spec,
    const ReconstructOptions& options) {
  std::map<InstanceTag, InstanceReconstruction> groups;
  for (std::size_t pos = 0; pos < observed.size(); ++pos) {
    const auto& r = observed[pos];
    auto& g = groups[r.tag];
    g.tag = r.tag;
    g.observed_events.push_back(r);
    g.offload_positions.push_back(pos);
  }

  struct FlowInfo {
    std::vector<FlowPath> paths;
    std::vector<std::vector<Event>> labels;
    std::set<Event> starts;
    std::set<Event> ends;
  };
  std::map<FlowId, FlowInfo> info;

  const std::set<Event>* selected =
      options.selected_events ? &*options.selected_events : nullptr;
  const std::set<LinkId>* lossy =
      options.lossy_links ? &*options.lossy_links : nullptr;

  std::vector<InstanceReconstruction> out;
  out.reserve(groups.size());
  for (auto& [tag, g] : groups) {
    const Flow* flow = spec.find_flow(tag.flow);
    if (flow == nullptr) {
      std::ostringstream msg;
      msg << "instance " << tag << " names unknown flow '" << tag.flow << "'";
      throw InconsistentTrace(msg.str());
    }
    auto it = info.find(tag.flow);
    if (it == info.end()) {
      FlowInfo fi;
      fi.paths = enumerate_paths(*flow, options.path_bound);
      for (const auto& p : fi.paths) fi.labels.push_back(labels_of(*flow, p));
      fi.starts = start_events(*flow);
      fi.ends = end_events(*flow);
      it = info.emplace(tag.flow, std::move(fi)).first;
    }
    const FlowInfo& fi = it->second;

    // Detection-cycle order.
    std::vector<std::size_t> order(g.observed_events.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return g.observed_events[a].cycle < g.observed_events[b].cycle;
    });
    InstanceReconstruction rec;
    rec.tag = tag;
    for (std::size_t i : order) {
      rec.observed_events.push_back(std::move(g.observed_events[i]));
      rec.offload_positions.push_back(g.offload_positions[i]);
    }

    std::vector<Event> seq;
    for (std::size_t i = 0; i < rec.observed_events.size(); ++i) {
      const Event& e = rec.observed_events[i].event;
      seq.push_back(e);
      if (!rec.start_index && fi.starts.contains(e)) rec.start_index = i;
      if (fi.ends.contains(e)) rec.end_index = i;
    }
    rec.started = rec.start_index.has_value();
    rec.completed = rec.started && rec.end_index.has_value();
    if (!rec.completed) rec.end_index.reset();
    for (std::size_t p = 0; p < fi.paths.size(); ++p) {
      if (explains(fi.labels[p], seq, selected, lossy, spec.topology)) {
        rec.candidate_paths.push_back(fi.paths[p]);
      }
    }
    if (rec.candidate_paths.empty()) {
      std::ostringstream msg;
      msg << "no path of flow '" << tag.flow << "' explains the "
          << seq.size() << " events observed for " << tag;
      throw InconsistentTrace(msg.str());
    }
    out.push_back(std::move(rec));
  }
  return out;
}

CoverageReport score(const std::vector<InstanceReconstruction>& recons,
                     std::uint64_t ground_truth_n,
                     const std::map<FlowId, std::uint64_t>& per_flow_n) {
  CoverageReport rep;
  rep.total_instances = ground_truth_n;
  for (const auto& [f, n] : per_flow_n) rep.per_flow[f].total = n;

  std::uint64_t resolved = 0;
  for (const auto& r : recons) {
    if (r.observed_events.empty()) continue;
    auto& fc = rep.per_flow[r.tag.flow];
    ++rep.observed_instances;
    ++fc.observed;
    if (r.completed) {
      ++rep.complete_instances;
      ++fc.complete;
      if (r.candidate_paths.size() == 1) ++resolved;
    }
  }
  if (ground_truth_n > 0) {
    rep.fic = static_cast<double>(rep.observed_instances) /
              static_cast<double>(ground_truth_n);
    rep.cec = static_cast<double>(rep.complete_instances) /
              static_cast<double>(ground_truth_n);
  }
  if (rep.complete_instances > 0) {
    rep.path_resolved = static_cast<double>(resolved) /
                        static_cast<double>(rep.complete_instances);
  }
  return rep;
}

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::kContains: return "CONTAINS";
    case Relation::kOverlaps: return "OVERLAPS";
    case Relation::kPrecedes: return "PRECEDES";
  }
  return "?";
}

Relation classify(const Interval& a, const Interval& b) {
  if (a.end < b.start) return Relation::kPrecedes;
  if (a.start < b.start && b.end < a.end) return Relation::kContains;
  return Relation::kOverlaps;
}

std::vector<Interleaving> interleavings(
    const std::vector<InstanceReconstruction>& recons, IntervalClock clock) {
  struct Span {
    const InstanceTag* tag;
    Interval iv;
  };
  std::vector<Span> spans;
  for (const auto& r : recons) {
    if (!r.completed) continue;
    auto at = [&](std::size_t i) -> std::uint64_t {
      return clock == IntervalClock::kOffloadOrder ? r.offload_positions[i]
                                                   : r.observed_events[i].cycle;
    };
    const std::uint64_t s = at(*r.start_index);
    const std::uint64_t e = at(*r.end_index);
    const Interval iv{std::min(s, e), std::max(s, e)};
    spans.push_back({&r.tag, iv});
  }
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) {
    if (a.iv.start != b.iv.start) return a.iv.start < b.iv.start;
    return *a.tag < *b.tag;
  });
  std::vector<Interleaving> out;
  out.reserve(spans.size() * (spans.size() > 0 ? spans.size() - 1 : 0) / 2);
  for (std::size_t i = 0; i < spans.size(); ++i) {
    for (std::size_t j = i + 1; j < spans.size(); ++j) {
      out.push_back({*spans[i].tag, *spans[j].tag, classify(spans[i].iv, spans[j].iv)});
    }
  }
  return out;
}

std::string format_ratio(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", r);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

namespace {
std::string format_count(double v) {
  char buf[32];
  if (v == std::floor(v)) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.1f", v);
  }
  return buf;
}
}  // namespace

std::string format_cell(double a, double b) {
  return format_count(a) + "/" + format_count(b) + " (" +
         format_ratio(b > 0 ? a / b : 0.0) + ")";
}

nlohmann::ordered_json to_json(const CoverageReport& report) {
  nlohmann::ordered_json j;
  j["fic"] = report.fic;
  j["cec"] = report.cec;
  j["observed_instances"] = report.observed_instances;
  j["complete_instances"] = report.complete_instances;
  j["total_instances"] = report.total_instances;
  j["path_resolved"] = report.path_resolved;
  j["fic_cell"] = format_cell(static_cast<double>(report.observed_instances),
                              static_cast<double>(report.total_instances));
  j["cec_cell"] = format_cell(static_cast<double>(report.complete_instances),
                              static_cast<double>(report.total_instances));
  auto per_flow = nlohmann::ordered_json::object();
  for (const auto& [f, c] : report.per_flow) {
    per_flow[f.str()] = {{"observed", c.observed},
                         {"complete", c.complete},
                         {"total", c.total}};
  }
  j["per_flow"] = per_flow;
  return j;
}

}  // namespace flowobs
