#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ccards {

enum class ErrorKind {
  invalid_size,
  invalid_topology,
  invalid_argument,
  foreign_card,
  enumeration_too_large,
  insufficient_data,
  file_error,
  parse_error,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it to an exit code without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ccards
