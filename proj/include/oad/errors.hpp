#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oad {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerically invalid input (nonpositive depth, radius <= 0, ...).
struct DomainError : Error {
  using Error::Error;
};

// Caller broke a documented precondition (dimension mismatch, missing
// threshold entry, no overlapping valid pixels, ...).
struct ContractError : Error {
  using Error::Error;
};

// Bad experiment configuration (inverted ranges, unknown keys, ...).
struct ConfigError : Error {
  using Error::Error;
};

// Malformed serialized data; carries the byte offset of the problem.
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (byte offset " + std::to_string(offset) + ")"),
        byte_offset(offset) {}
  std::size_t byte_offset = 0;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace oad
