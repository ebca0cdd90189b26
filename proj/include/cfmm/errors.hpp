#pragma once

#include <stdexcept>
#include <string>

namespace cfmm {

// Trade rejected because it would deplete a reserve or overdraw a balance.
class InfeasibleTradeError : public std::runtime_error {
public:
    explicit InfeasibleTradeError(const std::string& what_arg)
        : std::runtime_error(what_arg) {}
};

// Iterative solver stopped short of its tolerance; carries the best iterate's
// residual so callers can decide whether the answer is still usable.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what_arg, double residual)
        : std::runtime_error(what_arg), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace cfmm
