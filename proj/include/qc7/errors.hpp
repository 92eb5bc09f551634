#pragma once

#include <stdexcept>
#include <string>

namespace qc7 {

/// Root of the library's exception hierarchy.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes of operands do not agree (matrix sizes, tensor ranks).
class dimension_error : public error {
public:
    using error::error;
};

/// Malformed or out-of-contract input (non-definite Gram matrix, parse failure).
class input_error : public error {
public:
    using error::error;
};

/// Operation exists only for quaternionic dimension one.
class unsupported_dimension : public error {
public:
    using error::error;
};

/// A model failed one of its structure identities during construction.
class validation_error : public error {
public:
    using error::error;
};

/// Iterative eigensolver failed; carries the best residual it reached.
class convergence_error : public error {
public:
    convergence_error(const std::string& what, double best_residual)
        : error(what), best_residual_(best_residual) {}
    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

/// Invalid run configuration (CLI flags, config file).
class config_error : public error {
public:
    using error::error;
};

} // namespace qc7
