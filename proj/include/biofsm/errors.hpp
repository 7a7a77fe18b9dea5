#pragma once

#include <stdexcept>
#include <string>

namespace biofsm {

// Timestamps went backwards (or repeated) on one channel.
class OrderingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration: invalid bands, weights, ports, socket setup failures.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. line() is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace biofsm
