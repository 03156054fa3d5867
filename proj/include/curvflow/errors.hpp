#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace curvflow {

// Root of every error the library throws. Numeric failures during a flow are
// caught by the flow engine and turned into a status; everything else
// propagates to the caller.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class TopologyError : public Error {
public:
    using Error::Error;
};

class EmptyMesh : public Error {
public:
    EmptyMesh() : Error("mesh has no vertices or no faces") {}
};

class IoError : public Error {
public:
    using Error::Error;
};

class SpecError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class ConnectivityMismatch : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class OutOfHorizon : public Error {
public:
    using Error::Error;
};

class DegenerateTriangle : public Error {
public:
    DegenerateTriangle(std::size_t face, double area)
        : Error("degenerate triangle " + std::to_string(face) + " (area " + std::to_string(area) + ")"),
          face_(face),
          area_(area) {}

    [[nodiscard]] std::size_t face() const noexcept { return face_; }
    [[nodiscard]] double area() const noexcept { return area_; }

private:
    std::size_t face_;
    double area_;
};

// Raised by the direct solver. `pivot()` is the row of the input matrix
// (original numbering) whose pivot fell below tolerance.
class NotPositiveDefinite : public Error {
public:
    NotPositiveDefinite(std::size_t pivot, double value)
        : Error("matrix is not positive definite (pivot at row " + std::to_string(pivot) +
                ", value " + std::to_string(value) + ")"),
          pivot_(pivot),
          value_(value) {}

    [[nodiscard]] std::size_t pivot() const noexcept { return pivot_; }
    [[nodiscard]] double value() const noexcept { return value_; }

private:
    std::size_t pivot_;
    double value_;
};

class MaxIterations : public Error {
public:
    MaxIterations(std::size_t iterations, double residual)
        : Error("conjugate gradient did not converge in " + std::to_string(iterations) +
                " iterations (relative residual " + std::to_string(residual) + ")"),
          iterations_(iterations),
          residual_(residual) {}

    [[nodiscard]] std::size_t iterations() const noexcept { return iterations_; }
    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    std::size_t iterations_;
    double residual_;
};

// Non-positive curvature p'Ap <= 0 met during conjugate gradient.
class Breakdown : public Error {
public:
    Breakdown(std::size_t iteration, double curvature)
        : Error("conjugate gradient breakdown at iteration " + std::to_string(iteration) +
                " (p'Ap = " + std::to_string(curvature) + ")"),
          iteration_(iteration) {}

    [[nodiscard]] std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

}  // namespace curvflow
