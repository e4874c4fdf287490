#pragma once

#include <stdexcept>
#include <string>

namespace pathcg {

/// Vector or block sizes do not agree with the problem layout.
class DimensionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A pivot block of a block LDL recursion is singular to working precision.
class SingularPivotError : public std::runtime_error {
  public:
    SingularPivotError(int block, const std::string &what)
        : std::runtime_error(what + " (block " + std::to_string(block) + ")"), block_(block) {}
    [[nodiscard]] int block() const { return block_; }

  private:
    int block_;
};

/// Iterate has a non-positive (or underflowing) dual or slack component.
class NonInteriorError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A Krylov recurrence lost positive definiteness.
class BreakdownError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace pathcg
