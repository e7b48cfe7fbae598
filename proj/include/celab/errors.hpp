// ce-lab: error taxonomy shared by the library and the CLI exit-code table.
// SPDX-License-Identifier: MIT
#ifndef CELAB_ERRORS_HPP
#define CELAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace celab {

/// Input could not be parsed or fails schema validation (CLI exit code 2).
class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// A quantity left its mathematical domain: non-SPD covariance, singular
/// dynamics where an inverse is required, nonpositive eigenvalue weights
/// (CLI exit code 3).
class MathDomainError : public std::runtime_error {
public:
  explicit MathDomainError(const std::string& what) : std::runtime_error(what) {}
};

/// Structural misuse: rank-deficient coarse map, dimension mismatch,
/// infeasible macro dimension (CLI exit code 4).
class StructuralError : public std::runtime_error {
public:
  explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

/// The requested macro dimension k cuts through a 2x2 complex-conjugate
/// eigenvalue block. Conjugate pairs must be retained or discarded together,
/// so the caller has to move k to a block boundary (CLI exit code 4).
class ConjugatePairSplit : public StructuralError {
public:
  ConjugatePairSplit(int k, int k_below, int k_above)
      : StructuralError("k=" + std::to_string(k) +
                        " falls inside a complex-conjugate eigenvalue pair; "
                        "use k=" + std::to_string(k_below) + " or k=" +
                        std::to_string(k_above)),
        k(k), suggested_below(k_below), suggested_above(k_above) {}
  int k;
  int suggested_below;
  int suggested_above;
};

/// Filesystem failure while reading or writing artifacts (CLI exit code 5).
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace celab

#endif  // CELAB_ERRORS_HPP
