#pragma once

#include <stdexcept>
#include <string>

namespace cellseq {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A cell name or index that does not belong to the complex at hand.
class UnknownCell : public Error {
 public:
  using Error::Error;
};

/// Structural problem found while assembling a complex (cycle, bad dimension).
class ComplexError : public Error {
 public:
  using Error::Error;
};

/// Malformed JSON input. The message carries the offending field path.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A cell set that was required to be closed under taking faces is not.
class NotFaceClosed : public Error {
 public:
  using Error::Error;
};

/// Operation applied at a level where it is undefined, or to cells of different levels.
class LevelError : public Error {
 public:
  using Error::Error;
};

/// Refusal to materialize more cells than the configured cap.
class ResourceCapExceeded : public Error {
 public:
  using Error::Error;
};

/// The rule does not have a property the operation needs (e.g. constant degree).
class RuleError : public Error {
 public:
  using Error::Error;
};

/// Two distinct points whose separation level reached the address depth.
class TruncatedPair : public Error {
 public:
  using Error::Error;
};

/// Missing or inconsistent geometric realization.
class RealizationError : public Error {
 public:
  using Error::Error;
};

}  // namespace cellseq
