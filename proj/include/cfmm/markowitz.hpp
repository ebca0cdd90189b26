#pragma once

#include <array>

namespace cfmm {

using Vector3 = std::array<double, 3>;
using Matrix3 = std::array<std::array<double, 3>, 3>;

/// Maximizes mu'x - (lambda/2) x' Sigma x over the probability simplex
/// (1'x = 1, x >= 0) by enumerating the seven nonempty support sets, solving
/// each equality-constrained system and keeping the best feasible candidate.
/// sigma must be symmetric positive semidefinite; callers regularize a
/// degenerate covariance before calling.
Vector3 markowitz_solve(const Vector3& mu, const Matrix3& sigma, double lambda);

/// Objective mu'x - (lambda/2) x' Sigma x.
double markowitz_objective(const Vector3& mu, const Matrix3& sigma, double lambda,
                           const Vector3& x);

}  // namespace cfmm
