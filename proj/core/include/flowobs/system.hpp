#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "flowobs/event.hpp"
#include "flowobs/flow.hpp"
#include "flowobs/ids.hpp"

namespace flowobs {

/// A monitored point-to-point channel. Several links may join the same pair
/// of components; `channel` tells them apart.
struct Link {
  LinkId id;
  ComponentId src;
  ComponentId dest;
  std::uint32_t channel = 0;

  friend bool operator==(const Link&, const Link&) = default;
};

struct Topology {
  std::set<ComponentId> components;
  std::vector<Link> links;  // sorted by id
  std::map<Event, LinkId> event_link_map;

  /// Throws std::out_of_range for an unmapped event.
  const LinkId& link_of(const Event& e) const;
  const Link* find_link(const LinkId& id) const;
  std::set<LinkId> link_ids() const;

  friend bool operator==(const Topology&, const Topology&) = default;
};

/// A block that starts flow instances, and the flows it may start.
struct Initiator {
  ComponentId component;
  std::set<FlowId> flows;

  friend bool operator==(const Initiator&, const Initiator&) = default;
};

/// A whole system: topology, flows (sorted by id) and initiators (sorted by
/// component).
struct SystemSpec {
  SystemName name;
  Topology topology;
  std::vector<Flow> flows;
  std::vector<Initiator> initiators;

  const Flow* find_flow(const FlowId& id) const;
  /// Throws std::out_of_range for an unknown flow.
  const Flow& flow(const FlowId& id) const;
  const Initiator* find_initiator(const ComponentId& c) const;

  /// Union of every flow's event set.
  std::set<Event> all_events() const;

  friend bool operator==(const SystemSpec&, const SystemSpec&) = default;
};

}  // namespace flowobs
