#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "flowobs/flow.hpp"
#include "flowobs/rng.hpp"
#include "flowobs/selection.hpp"
#include "flowobs/system.hpp"

namespace flowobs::testing {

/// Paths found by playing the token game directly on place-name strings,
/// without enumerate_paths() or fire(). Only terminal markings that are a
/// non-empty subset of the end marking count.
std::set<std::vector<std::string>> token_game_paths(const Flow& flow);

/// Labels common to every token-game path, or every label when none is.
std::set<Event> token_game_cover_events(const Flow& flow);

/// Minimum number of links covering every flow, by trying all subsets of
/// the links that carry a covering event (bitmask sweep, at most 24 links).
std::size_t brute_min_link_cover(const SelectionProblem& problem);

struct GeneratorOptions {
  std::size_t max_transitions = 12;
  std::size_t components = 4;
  std::size_t commands = 3;
  bool allow_fork = true;
};

/// Random well-formed flow built from sequence, choice and fork/join blocks.
/// Labels come from a small pool, so they repeat. Event endpoints are drawn
/// from components "C0".."C<n-1>".
Flow random_flow(Rng& rng, const std::string& id, const GeneratorOptions& opt = {});

/// A complete system around random flows: one link per ordered component
/// pair and one initiator per flow source.
SystemSpec random_system(Rng& rng, std::size_t flows, const GeneratorOptions& opt = {});

/// The system in data/cpu_write.flow.
SystemSpec cpu_write_system();

/// A flow whose transitions form one chain over the given labels.
Flow linear_flow(const std::string& id, const std::vector<Event>& labels);

Event ev(const std::string& text);

}  // namespace flowobs::testing
