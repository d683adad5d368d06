#pragma once

#include <stdexcept>
#include <string>

namespace augpipe {

/// Root of the library's exception hierarchy. Every failure raised by this
/// library is an Error, so callers can catch one type at the boundary.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter value is outside its documented domain.
class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

/// Image/buffer dimensions are inconsistent or non-positive.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Byte stream does not conform to an expected file format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Filesystem operation failed (open, read, write, create).
class IoError : public Error {
 public:
  using Error::Error;
};

/// Configuration file is malformed or contains unknown/invalid entries.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Raw recording cannot be ingested into a dataset (missing frames,
/// inconsistent lengths, out-of-range values).
class IngestionError : public Error {
 public:
  using Error::Error;
};

/// A dataset on disk violates its manifest or layout contract.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// RGB frame and depth map disagree on dimensions or pairing.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// Depth backend subprocess misbehaved (handshake, framing, timeout, exit).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Dataset composition request is unsatisfiable (bad split, no sources).
class CompositionError : public Error {
 public:
  using Error::Error;
};

/// An operation's documented precondition is unmet (e.g. depth not yet
/// precomputed when assembling observations).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace augpipe
