#include "flowobs/ids.hpp"

#include "flowobs/errors.hpp"

namespace flowobs {
namespace {

bool is_start_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}

bool is_body_char(char c) {
  return is_start_char(c) || (c >= '0' && c <= '9') || c == '.' || c == '\'';
}

}  // namespace

bool is_identifier(std::string_view text) noexcept {
  if (text.empty() || !is_start_char(text.front())) return false;
  for (char c : text) {
    if (!is_body_char(c)) return false;
  }
  return true;
}

namespace detail {

void throw_invalid_identifier(const std::string& text) {
  throw InvalidIdentifier("invalid identifier '" + text +
                          "' (ASCII letters, digits, '_', '.', '\\'' only)");
}

}  // namespace detail
}  // namespace flowobs
