#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace socdp {

// An enumeration or reachable-law budget was exhausted. Carries the
// offending count so callers can report it.
class CapExceededError : public std::runtime_error {
 public:
  CapExceededError(const std::string& what, std::uint64_t count, std::uint64_t cap)
      : std::runtime_error(what), count_(count), cap_(cap) {}

  std::uint64_t count() const noexcept { return count_; }
  std::uint64_t cap() const noexcept { return cap_; }

 private:
  std::uint64_t count_;
  std::uint64_t cap_;
};

// The constrained problem admits no feasible feedback sequence from the
// given initial law.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace socdp
