#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>

namespace flowobs {

/// True if `text` is a valid flow-spec identifier: an ASCII letter or '_'
/// followed by ASCII letters, digits, '_', '.' or '\''.
bool is_identifier(std::string_view text) noexcept;

/// String identifier distinguished at compile time by `Tag`.
///
/// Construction from text validates the identifier charset and throws
/// InvalidIdentifier on anything else (non-ASCII bytes included). The
/// default-constructed id is empty and only exists so ids can live in
/// containers.
template <class Tag>
class BasicId {
 public:
  BasicId() = default;
  explicit BasicId(std::string text);
  explicit BasicId(const char* text) : BasicId(std::string(text)) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const BasicId&, const BasicId&) = default;
  friend bool operator==(const BasicId&, const BasicId&) = default;

  friend std::ostream& operator<<(std::ostream& os, const BasicId& id) {
    return os << id.value_;
  }

 private:
  std::string value_;
};

struct ComponentTag {};
struct PlaceTag {};
struct TransitionTag {};
struct FlowTag {};
struct LinkTag {};
struct SystemTag {};

using ComponentId = BasicId<ComponentTag>;
using PlaceId = BasicId<PlaceTag>;
using TransitionId = BasicId<TransitionTag>;
using FlowId = BasicId<FlowTag>;
using LinkId = BasicId<LinkTag>;
using SystemName = BasicId<SystemTag>;

namespace detail {
[[noreturn]] void throw_invalid_identifier(const std::string& text);
}  // namespace detail

template <class Tag>
BasicId<Tag>::BasicId(std::string text) : value_(std::move(text)) {
  if (!is_identifier(value_)) detail::throw_invalid_identifier(value_);
}

}  // namespace flowobs

template <class Tag>
struct std::hash<flowobs::BasicId<Tag>> {
  std::size_t operator()(const flowobs::BasicId<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
