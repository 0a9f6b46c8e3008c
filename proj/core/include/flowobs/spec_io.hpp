#pragma once

#include <string>
#include <string_view>

#include "flowobs/flow.hpp"
#include "flowobs/system.hpp"

namespace flowobs {

// Flow-spec documents are line oriented; '#' starts a comment.
//
//   system <name>
//   component <id> ...
//   link <link-id> <src> -> <dest> [channel <n>]
//   flow <flow-id>
//     place <p-id> [initial|end] ...
//     transition <t-id> pre {<p-id>,...} post {<p-id>,...}
//         event <src>:<dest>:<cmd> on <link-id>
//   initiator <component-id> flows {<flow-id>,...}
//
// (the transition directive is a single line.)

/// Parses and fully validates a document. Throws SyntaxError with a 1-based
/// position for malformed text and SemanticError naming the offending entity
/// for unknown components, unmapped or inconsistently mapped events,
/// initiators that cannot start their flows, and flow validation findings.
SystemSpec parse_system(std::string_view text);

/// Like parse_system() but stops after reference checks, leaving flow
/// validation to the caller (see check_system()).
SystemSpec parse_system_unchecked(std::string_view text);

/// Flow findings (subject = flow id, message prefixed with it) plus event
/// mapping and initiator consistency. Empty when the system is well formed.
std::vector<Finding> check_system(const SystemSpec& spec);

/// Canonical document: sorted declarations, places and transitions in flow
/// order. parse_system(serialize_system(s)) == s.
std::string serialize_system(const SystemSpec& spec);

/// The built-in SoC prototype: 2 CPUs with caches, a bus, memory, GFX, PMU
/// and Audio; 32 links; 16 flows; 5 initiators.
SystemSpec load_prototype();

/// Source text load_prototype() parses.
std::string_view prototype_text();

/// Reads a spec from disk, or the prototype for the literal "prototype".
/// Throws std::ios_base::failure when the file cannot be read.
SystemSpec load_system(const std::string& path_or_prototype);

}  // namespace flowobs
