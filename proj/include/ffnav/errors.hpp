#pragma once

#include <stdexcept>
#include <string>

namespace ffnav
{

// Base class for everything thrown by this library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// File could not be opened / read / written.
class IoError : public Error
{
public:
  using Error::Error;
};

// File parsed but does not match the documented schema (missing field,
// wrong type, truncated content, ...).
class SchemaError : public Error
{
public:
  using Error::Error;
};

// File carries a format tag or version this build does not understand.
class VersionMismatchError : public Error
{
public:
  using Error::Error;
};

// A configuration struct fails its validity conditions.
class ConfigError : public Error
{
public:
  using Error::Error;
};

// An operation was called in a state that violates its preconditions.
class PreconditionError : public Error
{
public:
  using Error::Error;
};

// Depth (or shifted depth) too close to zero for a pixel-shift prediction.
class DegenerateDepthError : public Error
{
public:
  using Error::Error;
};

// Flow requested from an empty match set.
class EmptyMatchError : public Error
{
public:
  using Error::Error;
};

// A frame carries too few features to be usable for mapping.
class BarrenFrameError : public Error
{
public:
  using Error::Error;
};

// A finished teach run produced fewer than two keyframes.
class TooShortTeachError : public Error
{
public:
  using Error::Error;
};

// A finished map violates one of its structural invariants.
class MapValidationError : public Error
{
public:
  using Error::Error;
};

}  // namespace ffnav
