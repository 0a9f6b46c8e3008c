#include "flowobs/event.hpp"

#include "flowobs/errors.hpp"

namespace flowobs {

std::string Event::to_string() const {
  return src.str() + ":" + dest.str() + ":" + cmd;
}

Event Event::parse(std::string_view text) {
  const auto first = text.find(':');
  const auto second =
      first == std::string_view::npos ? first : text.find(':', first + 1);
  if (second == std::string_view::npos ||
      text.find(':', second + 1) != std::string_view::npos) {
    throw InvalidIdentifier("malformed event '" + std::string(text) +
                            "' (expected src:dest:cmd)");
  }
  Event e{ComponentId(std::string(text.substr(0, first))),
          ComponentId(std::string(text.substr(first + 1, second - first - 1))),
          std::string(text.substr(second + 1))};
  if (!is_identifier(e.cmd)) {
    throw InvalidIdentifier("invalid command '" + e.cmd + "' in event '" +
                            std::string(text) + "'");
  }
  return e;
}

std::ostream& operator<<(std::ostream& os, const Event& e) {
  return os << e.src << ':' << e.dest << ':' << e.cmd;
}

}  // namespace flowobs
