#include "flowobs/system.hpp"

#include <stdexcept>

namespace flowobs {

const LinkId& Topology::link_of(const Event& e) const {
  auto it = event_link_map.find(e);
  if (it == event_link_map.end()) {
    throw std::out_of_range("event '" + e.to_string() + "' has no link");
  }
  return it->second;
}

const Link* Topology::find_link(const LinkId& id) const {
  for (const auto& l : links) {
    if (l.id == id) return &l;
  }
  return nullptr;
}

std::set<LinkId> Topology::link_ids() const {
  std::set<LinkId> out;
  for (const auto& l : links) out.insert(l.id);
  return out;
}

const Flow* SystemSpec::find_flow(const FlowId& id) const {
  for (const auto& f : flows) {
    if (f.id() == id) return &f;
  }
  return nullptr;
}

const Flow& SystemSpec::flow(const FlowId& id) const {
  if (const auto* f = find_flow(id)) return *f;
  throw std::out_of_range("unknown flow '" + id.str() + "'");
}

const Initiator* SystemSpec::find_initiator(const ComponentId& c) const {
  for (const auto& i : initiators) {
    if (i.component == c) return &i;
  }
  return nullptr;
}

std::set<Event> SystemSpec::all_events() const {
  std::set<Event> out;
  for (const auto& f : flows) {
    auto e = f.events();
    out.insert(e.begin(), e.end());
  }
  return out;
}

}  // namespace flowobs
