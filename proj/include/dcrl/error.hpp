#pragma once

#include <stdexcept>
#include <string>

namespace dcrl {

// Every failure raised by the library derives from Error so the C API can map
// it onto a status code without catching std::exception wholesale.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class SymmetryError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class CapabilityError : public Error {
 public:
  using Error::Error;
};

class ProjectionError : public Error {
 public:
  using Error::Error;
};

class TopologyError : public Error {
 public:
  TopologyError(const std::string& what, long node = -1) : Error(what), node_(node) {}
  long node() const noexcept { return node_; }

 private:
  long node_;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0) : Error(what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dcrl
