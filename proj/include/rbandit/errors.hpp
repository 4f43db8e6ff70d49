#pragma once

#include <stdexcept>
#include <string>

namespace rbandit {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The weighted design matrix Phi^T Lambda Phi is numerically singular.
struct SingularDesign : Error {
  using Error::Error;
};

// The reward vector attains its maximum at two or more arms.
struct TiedOptimum : Error {
  using Error::Error;
};

// A half-space constraint degenerated to the zero vector (duplicate features).
struct DegenerateRegion : Error {
  using Error::Error;
};

// An operation that requires a robust member was given a non-member instance.
struct NotMember : Error {
  using Error::Error;
};

// Rejection sampling exhausted its draw budget without an accepted point.
struct RegionTooThin : Error {
  using Error::Error;
};

struct ArmOutOfRange : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

struct InsufficientData : Error {
  using Error::Error;
};

}  // namespace rbandit
