#pragma once

#include <stdexcept>
#include <string>

namespace cwl {

// Every failure carries a stable machine-readable code (e.g. "MissingFile")
// alongside the human message; the CLI prints both.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace cwl
