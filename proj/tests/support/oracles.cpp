#include "oracles.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "flowobs/spec_io.hpp"

namespace flowobs::testing {

namespace {

using Names = std::set<std::string>;

Names names(const std::set<PlaceId>& ids) {
  Names out;
  for (const auto& id : ids) out.insert(id.str());
  return out;
}

void play(const Flow& flow, const Names& marking, std::vector<std::string>& trail,
          const Names& end, std::set<std::vector<std::string>>& out) {
  if (trail.size() > flow.transitions().size()) {
    throw std::logic_error("token game did not terminate");
  }
  bool any = false;
  for (const auto& t : flow.transitions()) {
    const Names pre = names(t.preset);
    bool enabled = true;
    for (const auto& p : pre) enabled = enabled && marking.count(p) == 1;
    if (!enabled) continue;
    any = true;
    Names next;
    for (const auto& p : marking) {
      if (pre.count(p) == 0) next.insert(p);
    }
    for (const auto& p : names(t.postset)) next.insert(p);
    trail.push_back(t.id.str());
    play(flow, next, trail, end, out);
    trail.pop_back();
  }
  if (!any && !marking.empty() &&
      std::includes(end.begin(), end.end(), marking.begin(), marking.end())) {
    out.insert(trail);
  }
}

}  // namespace

std::set<std::vector<std::string>> token_game_paths(const Flow& flow) {
  std::set<std::vector<std::string>> out;
  std::vector<std::string> trail;
  play(flow, names(flow.initial_marking().marked), trail,
       names(flow.end_marking().marked), out);
  return out;
}

std::set<Event> token_game_cover_events(const Flow& flow) {
  std::map<std::string, Event> label;
  for (const auto& t : flow.transitions()) label.emplace(t.id.str(), t.event);
  std::map<Event, std::size_t> seen_in;
  const auto paths = token_game_paths(flow);
  for (const auto& p : paths) {
    std::set<Event> here;
    for (const auto& t : p) here.insert(label.at(t));
    for (const auto& e : here) ++seen_in[e];
  }
  std::set<Event> out;
  for (const auto& [e, n] : seen_in) {
    if (n == paths.size()) out.insert(e);
  }
  if (out.empty()) {
    for (const auto& t : flow.transitions()) out.insert(t.event);
  }
  return out;
}

std::size_t brute_min_link_cover(const SelectionProblem& problem) {
  std::map<std::string, std::uint32_t> link_mask;
  for (std::size_t i = 0; i < problem.flows.size(); ++i) {
    for (const auto& e : token_game_cover_events(problem.flows[i])) {
      link_mask[problem.event_link_map.at(e).str()] |= std::uint32_t{1} << i;
    }
  }
  std::vector<std::uint32_t> masks;
  for (const auto& [l, m] : link_mask) masks.push_back(m);
  if (masks.size() > 24) throw std::invalid_argument("too many links");
  const std::uint32_t goal = problem.flows.size() == 32
                                 ? ~std::uint32_t{0}
                                 : (std::uint32_t{1} << problem.flows.size()) - 1;
  std::size_t best = masks.size() + 1;
  for (std::uint64_t subset = 0; subset < (std::uint64_t{1} << masks.size()); ++subset) {
    const auto size = static_cast<std::size_t>(std::popcount(subset));
    if (size >= best) continue;
    std::uint32_t covered = 0;
    for (std::size_t i = 0; i < masks.size(); ++i) {
      if (subset >> i & 1) covered |= masks[i];
    }
    if ((covered & goal) == goal) best = size;
  }
  return best;
}

namespace {

struct Builder {
  Rng& rng;
  const GeneratorOptions& opt;
  std::vector<PlaceId> places;
  std::vector<Transition> transitions;

  PlaceId place() {
    places.emplace_back("p" + std::to_string(places.size()));
    return places.back();
  }

  Event event() {
    const std::size_t s = rng.index(opt.components);
    std::size_t d = rng.index(opt.components - 1);
    if (d >= s) ++d;
    return Event{ComponentId("C" + std::to_string(s)), ComponentId("C" + std::to_string(d)),
                 "c" + std::to_string(rng.index(opt.commands))};
  }

  void add(std::set<PlaceId> pre, std::set<PlaceId> post) {
    Transition t;
    t.id = TransitionId("t" + std::to_string(transitions.size() + 1));
    t.preset = std::move(pre);
    t.postset = std::move(post);
    t.event = event();
    transitions.push_back(std::move(t));
  }

  // Adds at most `budget` transitions leading from `entry` to `exit`.
  void block(const PlaceId& entry, const PlaceId& exit, std::size_t budget) {
    std::vector<int> kinds{0};
    if (budget >= 2) {
      kinds.push_back(1);
      kinds.push_back(2);
    }
    if (budget >= 4 && opt.allow_fork) kinds.push_back(3);
    switch (kinds[rng.index(kinds.size())]) {
      case 0:
        add({entry}, {exit});
        break;
      case 1: {  // sequence
        const PlaceId mid = place();
        const std::size_t first = 1 + rng.index(budget - 1);
        block(entry, mid, first);
        block(mid, exit, budget - first);
        break;
      }
      case 2: {  // choice
        const std::size_t first = 1 + rng.index(budget - 1);
        block(entry, exit, first);
        block(entry, exit, budget - first);
        break;
      }
      default: {  // fork and join
        const PlaceId a = place(), a2 = place(), b = place(), b2 = place();
        add({entry}, {a, b});
        const std::size_t inner = budget - 2;
        const std::size_t left = 1 + rng.index(inner - 1);
        block(a, a2, left);
        block(b, b2, inner - left);
        add({a2, b2}, {exit});
        break;
      }
    }
  }
};

}  // namespace

Flow random_flow(Rng& rng, const std::string& id, const GeneratorOptions& opt) {
  Builder b{rng, opt, {}, {}};
  const PlaceId start = b.place();
  const PlaceId end = b.place();
  b.block(start, end, 1 + rng.index(opt.max_transitions));
  return Flow(FlowId(id), b.places, b.transitions, {start}, {end});
}

SystemSpec random_system(Rng& rng, std::size_t flows, const GeneratorOptions& opt) {
  SystemSpec spec;
  spec.name = SystemName("random");
  for (std::size_t c = 0; c < opt.components; ++c) {
    spec.topology.components.emplace("C" + std::to_string(c));
  }
  for (std::size_t s = 0; s < opt.components; ++s) {
    for (std::size_t d = 0; d < opt.components; ++d) {
      if (s == d) continue;
      spec.topology.links.push_back(Link{
          LinkId("l" + std::to_string(s) + "_" + std::to_string(d)),
          ComponentId("C" + std::to_string(s)), ComponentId("C" + std::to_string(d)), 0});
    }
  }
  std::sort(spec.topology.links.begin(), spec.topology.links.end(),
            [](const Link& a, const Link& b) { return a.id < b.id; });
  std::map<ComponentId, std::set<FlowId>> starts;
  for (std::size_t i = 0; i < flows; ++i) {
    const std::string name = (i < 10 ? "f0" : "f") + std::to_string(i);
    Flow f = random_flow(rng, name, opt);
    for (const auto& t : f.transitions()) {
      const std::string link = "l" + t.event.src.str().substr(1) + "_" +
                               t.event.dest.str().substr(1);
      spec.topology.event_link_map.emplace(t.event, LinkId(link));
    }
    starts[start_events(f).begin()->src].insert(f.id());
    spec.flows.push_back(std::move(f));
  }
  for (const auto& [c, fs] : starts) spec.initiators.push_back(Initiator{c, fs});
  return spec;
}

SystemSpec cpu_write_system() {
  std::ifstream in(std::string(FLOWOBS_DATA_DIR) + "/cpu_write.flow");
  if (!in) throw std::runtime_error("cpu_write.flow not found");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_system(buf.str());
}

Flow linear_flow(const std::string& id, const std::vector<Event>& labels) {
  std::vector<PlaceId> places;
  std::vector<Transition> ts;
  for (std::size_t i = 0; i <= labels.size(); ++i) {
    places.emplace_back("p" + std::to_string(i));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ts.push_back(Transition{TransitionId("t" + std::to_string(i + 1)), {places[i]},
                            {places[i + 1]}, labels[i]});
  }
  return Flow(FlowId(id), places, ts, {places.front()}, {places.back()});
}

Event ev(const std::string& text) { return Event::parse(text); }

}  // namespace flowobs::testing
