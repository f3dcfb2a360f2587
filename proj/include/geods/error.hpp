#pragma once

#include <stdexcept>
#include <string>

namespace geods {

// All library failures derive from Error so callers (CLI, python bindings)
// can report them uniformly.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

class NonConvergenceError : public SolverError {
public:
    NonConvergenceError(const std::string& what, int iterations, double residual)
        : SolverError(what), iterations_(iterations), residual_(residual) {}
    int iterations() const { return iterations_; }
    double final_residual() const { return residual_; }

private:
    int iterations_;
    double residual_;
};

class DependencyError : public Error {
public:
    using Error::Error;
};

class IntegrityError : public Error {
public:
    using Error::Error;
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, int epoch, double last_finite_loss)
        : Error(what), epoch_(epoch), last_finite_loss_(last_finite_loss) {}
    int epoch() const { return epoch_; }
    double last_finite_loss() const { return last_finite_loss_; }

private:
    int epoch_;
    double last_finite_loss_;
};

class StaleArtifactError : public Error {
public:
    using Error::Error;
};

} // namespace geods
