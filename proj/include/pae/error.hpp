#pragma once

#include <stdexcept>
#include <string>

namespace pae {

// Distinguishes bad invocation (config) from bad input data; the CLI maps
// these to exit codes 2 and 3.
enum class ErrorKind { config, data };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_config(const std::string& what) {
  throw Error(ErrorKind::config, what);
}

[[noreturn]] inline void fail_data(const std::string& what) {
  throw Error(ErrorKind::data, what);
}

}  // namespace pae
