#include "flowobs/errors.hpp"

namespace flowobs {

SyntaxError::SyntaxError(std::size_t line, std::size_t column,
                         const std::string& message)
    : Error(std::to_string(line) + ":" + std::to_string(column) + ": " +
            message),
      line_(line),
      column_(column),
      detail_(message) {}

SemanticError::SemanticError(std::string entity, const std::string& message)
    : Error(message), entity_(std::move(entity)) {}

}  // namespace flowobs
