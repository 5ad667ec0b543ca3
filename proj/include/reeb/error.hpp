#pragma once

#include <stdexcept>
#include <string>

namespace reeb {

/// Base class of every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A precondition on the input was violated (bad point, bad surface, bad config).
struct DomainError : Error {
  using Error::Error;
};

/// A numerical procedure did not converge or lost the accuracy it promises.
struct ConvergenceError : Error {
  using Error::Error;
};

/// Two independent routes to the same quantity disagree.
struct VerificationError : Error {
  using Error::Error;
};

}  // namespace reeb
