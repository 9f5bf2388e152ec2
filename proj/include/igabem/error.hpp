#pragma once

#include <stdexcept>
#include <string>

namespace igabem {

// Root of all library errors. Subclasses map onto CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the valid parameter range (basis evaluation, maps).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid or degenerate geometry: knot vectors, control nets, mappings.
class GeometryError : public Error {
 public:
  using Error::Error;
};

// Model file schema violations. `path` is a JSON pointer to the offending item.
class ParseError : public Error {
 public:
  ParseError(std::string path, const std::string& reason)
      : Error(path.empty() ? reason : path + ": " + reason), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class AssemblyError : public Error {
 public:
  using Error::Error;
};

class SolveError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace igabem
