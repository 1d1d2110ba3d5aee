#pragma once

#include <stdexcept>
#include <string>

namespace legsim {

// Invalid parameters or inconsistent shapes. Maps to CLI exit code 3.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Leg or joint index outside its valid range.
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Terrain query outside the height field.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Caller broke an operation's precondition (e.g. asked for a stance velocity
// of a swinging leg).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StatisticsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No ideal-stance foot available to carry the body.
class DegenerateSupportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace legsim
