#pragma once

#include <compare>
#include <ostream>
#include <string>
#include <string_view>

#include "flowobs/ids.hpp"

namespace flowobs {

/// A flow event: command `cmd` sent from `src` to `dest`. Equality and
/// ordering are structural over (src, dest, cmd).
struct Event {
  ComponentId src;
  ComponentId dest;
  std::string cmd;

  friend auto operator<=>(const Event&, const Event&) = default;
  friend bool operator==(const Event&, const Event&) = default;

  /// "src:dest:cmd"
  std::string to_string() const;

  /// Inverse of to_string(). Throws InvalidIdentifier on a malformed triple.
  static Event parse(std::string_view text);
};

std::ostream& operator<<(std::ostream& os, const Event& e);

}  // namespace flowobs
