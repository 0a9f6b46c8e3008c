#pragma once

#include <compare>
#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "flowobs/event.hpp"
#include "flowobs/ids.hpp"

namespace flowobs {

struct Transition {
  TransitionId id;
  std::set<PlaceId> preset;
  std::set<PlaceId> postset;
  Event event;  // the label L(t)

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Set of token-marked places. Nets are safe: a place holds at most one token.
struct Marking {
  std::set<PlaceId> marked;

  friend auto operator<=>(const Marking&, const Marking&) = default;
  friend bool operator==(const Marking&, const Marking&) = default;
};

/// One maximal firing sequence from the initial marking.
struct FlowPath {
  std::vector<TransitionId> transitions;

  friend auto operator<=>(const FlowPath&, const FlowPath&) = default;
  friend bool operator==(const FlowPath&, const FlowPath&) = default;
};

/// A system flow as a labeled Petri net. Immutable once built; every
/// operation on it is a free function below.
class Flow {
 public:
  Flow() = default;
  Flow(FlowId id, std::vector<PlaceId> places,
       std::vector<Transition> transitions, std::set<PlaceId> initial,
       std::set<PlaceId> end);

  const FlowId& id() const noexcept { return id_; }
  const std::vector<PlaceId>& places() const noexcept { return places_; }
  const std::vector<Transition>& transitions() const noexcept {
    return transitions_;
  }
  const Marking& initial_marking() const noexcept { return initial_; }
  const Marking& end_marking() const noexcept { return end_; }

  bool has_place(const PlaceId& p) const;
  /// nullptr when no transition carries `id`.
  const Transition* find(const TransitionId& id) const;
  /// Throws std::out_of_range for unknown ids.
  const Transition& transition(const TransitionId& id) const;
  const Event& label(const TransitionId& id) const {
    return transition(id).event;
  }

  /// E: the distinct labels used by this flow.
  std::set<Event> events() const;

  friend bool operator==(const Flow&, const Flow&) = default;

 private:
  FlowId id_;
  std::vector<PlaceId> places_;
  std::vector<Transition> transitions_;
  Marking initial_;
  Marking end_;
};

/// { t | preset(t) ⊆ m }, in declaration order.
std::vector<TransitionId> enabled_transitions(const Flow& flow,
                                              const Marking& m);

/// (m − preset(t)) ∪ postset(t). Throws NotEnabled if t is not enabled in m.
Marking fire(const Flow& flow, const Marking& m, const TransitionId& t);

std::set<Event> start_events(const Flow& flow);
std::set<Event> end_events(const Flow& flow);

/// A terminal marking is a valid completion when it is non-empty and lies
/// within the end marking.
bool is_completion(const Flow& flow, const Marking& m);

inline constexpr std::size_t kDefaultPathBound = 4096;

/// All maximal firing sequences from the initial marking, ordered by length
/// and then lexicographically by transition id. Throws PathExplosion once
/// more than `bound` sequences exist.
std::vector<FlowPath> enumerate_paths(const Flow& flow,
                                      std::size_t bound = kDefaultPathBound);

/// Label sequence of a path.
std::vector<Event> labels_of(const Flow& flow, const FlowPath& path);

enum class FindingKind {
  kEmptyInitialMarking,
  kEmptyEndMarking,
  kOverlappingMarkings,
  kDuplicatePlace,
  kDuplicateTransition,
  kUnknownPlace,
  kEmptyPreset,
  kEmptyPostset,
  kSelfLoop,
  kSelfEvent,
  kEndPlaceConsumed,
  kCyclicStructure,
  kUnreachablePlace,
  kDeadTransition,
  kBadTermination,
  kUnsafeMarking,
  kStateExplosion,
  kUnmappedEvent,
  kInitiatorMismatch,
};

std::string_view to_string(FindingKind kind);

struct Finding {
  FindingKind kind;
  std::string subject;  // the place/transition/flow the finding is about
  std::string message;

  friend bool operator==(const Finding&, const Finding&) = default;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool ok() const noexcept { return findings.empty(); }
  bool has(FindingKind kind) const;
};

inline constexpr std::size_t kDefaultStateBound = 1 << 16;

/// Structural and behavioural well-formedness. Behavioural checks
/// (reachability, dead transitions, termination) run only when the
/// structure is sound.
ValidationReport validate(const Flow& flow,
                          std::size_t state_bound = kDefaultStateBound);

}  // namespace flowobs
