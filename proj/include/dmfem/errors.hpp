#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dmfem {

// Bad input value or out-of-range argument.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A cell has zero or negative area, or a vertex move would invert a cell.
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// More degenerate squares requested than the separation rule allows.
class CapacityError : public std::runtime_error {
public:
    CapacityError(const std::string& what, std::size_t max_feasible)
        : std::runtime_error(what), max_feasible_(max_feasible) {}

    std::size_t max_feasible() const noexcept { return max_feasible_; }

private:
    std::size_t max_feasible_;
};

// Patch whose regular cell cannot support the polynomial extension.
class InvalidPatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Factorization or CG breakdown on a matrix that should be SPD.
class NotSpdError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Iterative solve stopped before reaching its tolerance.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Quadratic form of an assembled operator came out negative.
class AssemblyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A generated mesh fails the patch assumptions of the schemes.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dmfem
