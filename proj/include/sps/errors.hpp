#pragma once

#include <stdexcept>
#include <string>

namespace sps {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid grid, exponent, coupling or solver settings.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Decay-fit window with too few usable nodes or outside the grid.
class WindowError : public Error {
public:
  using Error::Error;
};

/// p = 2: the dilation family cannot move the multiplier.
class InvarianceError : public Error {
public:
  using Error::Error;
};

/// Malformed record file; the message names the first violation.
class SchemaError : public Error {
public:
  using Error::Error;
};

} // namespace sps
