#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace satarq {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One violated input constraint. `field` is a dotted path such as
/// `sources[1].q`.
struct Violation {
  std::string field;
  std::string reason;
};

class InvalidScenario : public Error {
 public:
  explicit InvalidScenario(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

// Raised when a source has zero success or selection probability, so its
// AoI never renews.
class Degenerate : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class BeyondHorizon : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class Mismatch : public Error {
 public:
  using Error::Error;
};

class EmptyGrid : public Error {
 public:
  using Error::Error;
};

}  // namespace satarq
