#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wikievents {

enum class ErrorKind {
  kInvalidConfig,
  kInvalidData,
  kInvalidInput,
  kEmptyResult,
  kIo,
  kProtocol,
  kBackend,
  kIncompleteAnnotation,
};

std::string_view ToString(ErrorKind kind);

// All library failures are reported as Error; the CLI maps kind() to an exit
// code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace wikievents
