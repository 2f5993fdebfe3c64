#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ltlfgen {

// Every error thrown by the library derives from Error; the category drives
// the CLI exit code.
enum class ErrorKind {
  Parse,       // malformed formula / expression / spec text
  Validation,  // well-formed input that violates a contract
  Compile,     // automaton construction exceeded a resource cap
  Infeasible,  // no walk / schedule satisfies the request
  Io,          // filesystem problems
  Domain,      // value outside its declared domain, empty pools, caps
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& message)
      : Error(ErrorKind::Parse,
              "syntax error at position " + std::to_string(position) + ": " + message),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

class CompileError : public Error {
 public:
  explicit CompileError(const std::string& what) : Error(ErrorKind::Compile, what) {}
};

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what) : Error(ErrorKind::Infeasible, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

}  // namespace ltlfgen
