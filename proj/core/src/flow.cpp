#include "flowobs/flow.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <stdexcept>

#include "flowobs/errors.hpp"

namespace flowobs {

Flow::Flow(FlowId id, std::vector<PlaceId> places,
           std::vector<Transition> transitions, std::set<PlaceId> initial,
           std::set<PlaceId> end)
    : id_(std::move(id)),
      places_(std::move(places)),
      transitions_(std::move(transitions)),
      initial_{std::move(initial)},
      end_{std::move(end)} {}

bool Flow::has_place(const PlaceId& p) const {
  return std::find(places_.begin(), places_.end(), p) != places_.end();
}

const Transition* Flow::find(const TransitionId& id) const {
  for (const auto& t : transitions_) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

const Transition& Flow::transition(const TransitionId& id) const {
  if (const auto* t = find(id)) return *t;
  throw std::out_of_range("flow '" + id_.str() + "' has no transition '" +
                          id.str() + "'");
}

std::set<Event> Flow::events() const {
  std::set<Event> out;
  for (const auto& t : transitions_) out.insert(t.event);
  return out;
}

namespace {

bool is_enabled(const Transition& t, const Marking& m) {
  return std::includes(m.marked.begin(), m.marked.end(), t.preset.begin(),
                       t.preset.end());
}

Marking fire_unchecked(const Transition& t, const Marking& m) {
  Marking next;
  std::set_difference(m.marked.begin(), m.marked.end(), t.preset.begin(),
                      t.preset.end(),
                      std::inserter(next.marked, next.marked.end()));
  next.marked.insert(t.postset.begin(), t.postset.end());
  return next;
}

bool shortlex_less(const FlowPath& a, const FlowPath& b) {
  if (a.transitions.size() != b.transitions.size()) {
    return a.transitions.size() < b.transitions.size();
  }
  return a.transitions < b.transitions;
}

}  // namespace

std::vector<TransitionId> enabled_transitions(const Flow& flow,
                                              const Marking& m) {
  std::vector<TransitionId> out;
  for (const auto& t : flow.transitions()) {
    if (is_enabled(t, m)) out.push_back(t.id);
  }
  return out;
}

Marking fire(const Flow& flow, const Marking& m, const TransitionId& t) {
  const Transition* tr = flow.find(t);
  if (tr == nullptr || !is_enabled(*tr, m)) {
    throw NotEnabled("transition '" + t.str() + "' of flow '" +
                     flow.id().str() + "' is not enabled");
  }
  return fire_unchecked(*tr, m);
}

std::set<Event> start_events(const Flow& flow) {
  std::set<Event> out;
  const auto& s0 = flow.initial_marking().marked;
  for (const auto& t : flow.transitions()) {
    if (std::includes(s0.begin(), s0.end(), t.preset.begin(), t.preset.end())) {
      out.insert(t.event);
    }
  }
  return out;
}

std::set<Event> end_events(const Flow& flow) {
  std::set<Event> out;
  const auto& end = flow.end_marking().marked;
  for (const auto& t : flow.transitions()) {
    if (std::includes(end.begin(), end.end(), t.postset.begin(),
                      t.postset.end())) {
      out.insert(t.event);
    }
  }
  return out;
}

bool is_completion(const Flow& flow, const Marking& m) {
  const auto& end = flow.end_marking().marked;
  return !m.marked.empty() && std::includes(end.begin(), end.end(),
                                            m.marked.begin(), m.marked.end());
}

namespace {

struct PathSearch {
  const Flow& flow;
  std::size_t bound;
  std::vector<FlowPath> out;
  std::vector<TransitionId> prefix;

  void run(const Marking& m) {
    if (prefix.size() > flow.transitions().size()) {
      throw PathExplosion("flow '" + flow.id().str() +
                          "' has a firing sequence longer than its "
                          "transition count (cyclic structure)");
    }
    bool any = false;
    for (const auto& t : flow.transitions()) {
      if (!is_enabled(t, m)) continue;
      any = true;
      prefix.push_back(t.id);
      run(fire_unchecked(t, m));
      prefix.pop_back();
    }
    if (!any && !prefix.empty()) {
      if (out.size() == bound) {
        throw PathExplosion("flow '" + flow.id().str() + "' has more than " +
                            std::to_string(bound) + " execution paths");
      }
      out.push_back(FlowPath{prefix});
    }
  }
};

}  // namespace

std::vector<FlowPath> enumerate_paths(const Flow& flow, std::size_t bound) {
  PathSearch search{flow, bound, {}, {}};
  search.run(flow.initial_marking());
  std::sort(search.out.begin(), search.out.end(), shortlex_less);
  return std::move(search.out);
}

std::vector<Event> labels_of(const Flow& flow, const FlowPath& path) {
  std::vector<Event> out;
  out.reserve(path.transitions.size());
  for (const auto& t : path.transitions) out.push_back(flow.label(t));
  return out;
}

std::string_view to_string(FindingKind kind) {
  switch (kind) {
    case FindingKind::kEmptyInitialMarking: return "empty initial marking";
    case FindingKind::kEmptyEndMarking: return "empty end marking";
    case FindingKind::kOverlappingMarkings: return "overlapping markings";
    case FindingKind::kDuplicatePlace: return "duplicate place";
    case FindingKind::kDuplicateTransition: return "duplicate transition";
    case FindingKind::kUnknownPlace: return "unknown place";
    case FindingKind::kEmptyPreset: return "empty preset";
    case FindingKind::kEmptyPostset: return "empty postset";
    case FindingKind::kSelfLoop: return "self loop";
    case FindingKind::kSelfEvent: return "self event";
    case FindingKind::kEndPlaceConsumed: return "end place consumed";
    case FindingKind::kCyclicStructure: return "cyclic structure";
    case FindingKind::kUnreachablePlace: return "unreachable place";
    case FindingKind::kDeadTransition: return "dead transition";
    case FindingKind::kBadTermination: return "bad termination";
    case FindingKind::kUnsafeMarking: return "unsafe marking";
    case FindingKind::kStateExplosion: return "state explosion";
    case FindingKind::kUnmappedEvent: return "unmapped event";
    case FindingKind::kInitiatorMismatch: return "initiator mismatch";
  }
  return "unknown finding";
}

bool ValidationReport::has(FindingKind kind) const {
  return std::any_of(findings.begin(), findings.end(),
                     [kind](const Finding& f) { return f.kind == kind; });
}

namespace {

class Validator {
 public:
  Validator(const Flow& flow, std::size_t state_bound)
      : flow_(flow), state_bound_(state_bound) {}

  ValidationReport run() {
    check_structure();
    if (report_.ok()) check_acyclic();
    if (report_.ok()) check_behaviour();
    return std::move(report_);
  }

 private:
  void add(FindingKind kind, const std::string& subject,
           const std::string& detail) {
    report_.findings.push_back(
        {kind, subject, std::string(to_string(kind)) + ": " + detail});
  }

  void check_places(const std::set<PlaceId>& places, const std::string& where) {
    for (const auto& p : places) {
      if (!flow_.has_place(p)) {
        add(FindingKind::kUnknownPlace, p.str(),
            "place '" + p.str() + "' referenced by " + where +
                " is not declared");
      }
    }
  }

  void check_structure() {
    const auto& s0 = flow_.initial_marking().marked;
    const auto& end = flow_.end_marking().marked;
    if (s0.empty()) {
      add(FindingKind::kEmptyInitialMarking, flow_.id().str(),
          "no place is marked initial");
    }
    if (end.empty()) {
      add(FindingKind::kEmptyEndMarking, flow_.id().str(),
          "no place is marked end");
    }
    for (const auto& p : s0) {
      if (end.contains(p)) {
        add(FindingKind::kOverlappingMarkings, p.str(),
            "place '" + p.str() + "' is both initial and end");
      }
    }

    std::set<PlaceId> seen_places;
    for (const auto& p : flow_.places()) {
      if (!seen_places.insert(p).second) {
        add(FindingKind::kDuplicatePlace, p.str(),
            "place '" + p.str() + "' declared twice");
      }
    }
    check_places(s0, "the initial marking");
    check_places(end, "the end marking");

    std::set<TransitionId> seen_transitions;
    for (const auto& t : flow_.transitions()) {
      const std::string where = "transition '" + t.id.str() + "'";
      if (!seen_transitions.insert(t.id).second) {
        add(FindingKind::kDuplicateTransition, t.id.str(),
            where + " declared twice");
      }
      if (t.preset.empty()) {
        add(FindingKind::kEmptyPreset, t.id.str(), where + " has no preset");
      }
      if (t.postset.empty()) {
        add(FindingKind::kEmptyPostset, t.id.str(), where + " has no postset");
      }
      check_places(t.preset, where);
      check_places(t.postset, where);
      for (const auto& p : t.preset) {
        if (t.postset.contains(p)) {
          add(FindingKind::kSelfLoop, t.id.str(),
              where + " both consumes and produces '" + p.str() + "'");
        }
        if (end.contains(p)) {
          add(FindingKind::kEndPlaceConsumed, t.id.str(),
              where + " consumes end place '" + p.str() + "'");
        }
      }
      if (t.event.src == t.event.dest) {
        add(FindingKind::kSelfEvent, t.id.str(),
            where + " labels an event whose source equals its destination");
      }
    }
  }

  // Depth-first search over the bipartite place/transition graph.
  void check_acyclic() {
    std::map<PlaceId, std::vector<const Transition*>> consumers;
    for (const auto& t : flow_.transitions()) {
      for (const auto& p : t.preset) consumers[p].push_back(&t);
    }
    enum class Colour { kWhite, kGrey, kBlack };
    std::map<PlaceId, Colour> colour;
    for (const auto& p : flow_.places()) colour[p] = Colour::kWhite;

    bool found = false;
    auto visit = [&](auto&& self, const PlaceId& p) -> void {
      colour[p] = Colour::kGrey;
      for (const auto* t : consumers[p]) {
        for (const auto& q : t->postset) {
          if (found) return;
          if (colour[q] == Colour::kGrey) {
            found = true;
            add(FindingKind::kCyclicStructure, q.str(),
                "transition '" + t->id.str() + "' returns a token to '" +
                    q.str() + "'");
            return;
          }
          if (colour[q] == Colour::kWhite) self(self, q);
        }
      }
      colour[p] = Colour::kBlack;
    };
    for (const auto& p : flow_.places()) {
      if (!found && colour[p] == Colour::kWhite) visit(visit, p);
    }
  }

  void check_behaviour() {
    std::set<Marking> seen{flow_.initial_marking()};
    std::deque<Marking> frontier{flow_.initial_marking()};
    std::set<PlaceId> marked(flow_.initial_marking().marked);
    std::set<TransitionId> fired;
    std::size_t bad_terminations = 0;

    while (!frontier.empty()) {
      Marking m = std::move(frontier.front());
      frontier.pop_front();
      bool any = false;
      for (const auto& t : flow_.transitions()) {
        if (!is_enabled(t, m)) continue;
        any = true;
        fired.insert(t.id);
        for (const auto& p : t.postset) {
          if (m.marked.contains(p) && !t.preset.contains(p)) {
            add(FindingKind::kUnsafeMarking, t.id.str(),
                "transition '" + t.id.str() + "' puts a second token on '" +
                    p.str() + "'");
            return;
          }
        }
        Marking next = fire_unchecked(t, m);
        marked.insert(next.marked.begin(), next.marked.end());
        if (seen.insert(next).second) {
          if (seen.size() > state_bound_) {
            add(FindingKind::kStateExplosion, flow_.id().str(),
                "more than " + std::to_string(state_bound_) +
                    " reachable markings");
            return;
          }
          frontier.push_back(std::move(next));
        }
      }
      if (!any && !is_completion(flow_, m) && bad_terminations++ == 0) {
        std::string places;
        for (const auto& p : m.marked) {
          places += (places.empty() ? "" : ",") + p.str();
        }
        add(FindingKind::kBadTermination, flow_.id().str(),
            "execution can stop in {" + places +
                "}, which is not within the end marking");
      }
    }

    for (const auto& p : flow_.places()) {
      if (!marked.contains(p)) {
        add(FindingKind::kUnreachablePlace, p.str(),
            "place '" + p.str() + "' is never marked");
      }
    }
    for (const auto& t : flow_.transitions()) {
      if (!fired.contains(t.id)) {
        add(FindingKind::kDeadTransition, t.id.str(),
            "transition '" + t.id.str() + "' can never fire");
      }
    }
  }

  const Flow& flow_;
  std::size_t state_bound_;
  ValidationReport report_;
};

}  // namespace

ValidationReport validate(const Flow& flow, std::size_t state_bound) {
  return Validator(flow, state_bound).run();
}

}  // namespace flowobs
