#pragma once

#include <stdexcept>
#include <string>

namespace cascade {

// Exit codes used by the command-line front end; each error class maps to one.
enum class ErrorKind : int {
  Config = 2,
  Solver = 3,
  EnumerationCap = 4,
  Bracket = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

struct SolverError : Error {
  explicit SolverError(const std::string& what) : Error(ErrorKind::Solver, what) {}
};

struct EnumerationCapError : Error {
  explicit EnumerationCapError(const std::string& what)
      : Error(ErrorKind::EnumerationCap, what) {}
};

struct BracketError : Error {
  explicit BracketError(const std::string& what) : Error(ErrorKind::Bracket, what) {}
};

}  // namespace cascade
