#pragma once

#include <stdexcept>
#include <string>

namespace patchclf {

/// Failure raised by a pipeline module. `module()` names the stage that
/// failed and `hint()` carries a remedy suggestion for the CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& message, std::string hint = {})
      : std::runtime_error(module + ": " + message),
        module_(std::move(module)),
        hint_(std::move(hint)) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& hint() const noexcept { return hint_; }

 private:
  std::string module_;
  std::string hint_;
};

}  // namespace patchclf
