#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace varsched {

using JobId = std::int64_t;
using GpuId = int;
using NodeId = int;

// Application classes are indexed from 0; index 0 ("A") is the most
// compute-intensive and therefore the most variability-sensitive.
using ClassIndex = int;

std::string class_label(ClassIndex index);

// Accepts a letter label ("A", "b") or a non-negative integer ("2").
// Throws std::invalid_argument on anything else.
ClassIndex parse_class(std::string_view text);

// Malformed or inconsistent input files. The message carries the path and,
// where applicable, the 1-based line number.
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Broken internal bookkeeping (double allocation, capacity overrun...).
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace varsched
