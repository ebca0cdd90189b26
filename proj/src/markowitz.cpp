#include "cfmm/markowitz.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cfmm {

namespace {

// Gaussian elimination with partial pivoting for the tiny KKT systems
// (at most 4 x 4). Returns false on a (numerically) singular system.
bool solve_dense(std::vector<std::vector<double>>& a, std::vector<double>& b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < n; ++row) {
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) {
                pivot = row;
            }
        }
        if (std::abs(a[pivot][col]) < 1e-300) {
            return false;
        }
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t row = col + 1; row < n; ++row) {
            const double factor = a[row][col] / a[col][col];
            for (std::size_t k = col; k < n; ++k) {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double sum = b[i];
        for (std::size_t k = i + 1; k < n; ++k) {
            sum -= a[i][k] * b[k];
        }
        b[i] = sum / a[i][i];
    }
    return true;
}

}  // namespace

double markowitz_objective(const Vector3& mu, const Matrix3& sigma, double lambda,
                           const Vector3& x) {
    double linear = 0.0;
    double quad = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        linear += mu[i] * x[i];
        for (std::size_t j = 0; j < 3; ++j) {
            quad += x[i] * sigma[i][j] * x[j];
        }
    }
    return linear - 0.5 * lambda * quad;
}

Vector3 markowitz_solve(const Vector3& mu, const Matrix3& sigma, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("lambda must be positive and finite");
    }
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            if (!std::isfinite(sigma[i][j]) ||
                std::abs(sigma[i][j] - sigma[j][i]) >
                    1e-9 * (1.0 + std::abs(sigma[i][j]))) {
                throw std::invalid_argument("sigma must be finite and symmetric");
            }
        }
        if (!std::isfinite(mu[i])) {
            throw std::invalid_argument("mu must be finite");
        }
    }

    Vector3 best{1.0, 0.0, 0.0};
    double best_value = -std::numeric_limits<double>::infinity();

    for (int support = 1; support < 8; ++support) {
        std::vector<std::size_t> free_indices;
        for (std::size_t i = 0; i < 3; ++i) {
            if (support & (1 << i)) {
                free_indices.push_back(i);
            }
        }
        const std::size_t m = free_indices.size();

        Vector3 candidate{0.0, 0.0, 0.0};
        if (m == 1) {
            candidate[free_indices[0]] = 1.0;
        } else {
            // KKT system of the support-restricted problem:
            //   lambda Sigma_SS x_S + nu 1 = mu_S,  1' x_S = 1.
            std::vector<std::vector<double>> a(m + 1, std::vector<double>(m + 1, 0.0));
            std::vector<double> b(m + 1, 0.0);
            for (std::size_t r = 0; r < m; ++r) {
                for (std::size_t c = 0; c < m; ++c) {
                    a[r][c] = lambda * sigma[free_indices[r]][free_indices[c]];
                }
                a[r][m] = 1.0;
                a[m][r] = 1.0;
                b[r] = mu[free_indices[r]];
            }
            b[m] = 1.0;
            if (!solve_dense(a, b)) {
                continue;
            }
            bool feasible = true;
            for (std::size_t r = 0; r < m; ++r) {
                if (b[r] < -1e-12) {
                    feasible = false;
                    break;
                }
            }
            if (!feasible) {
                continue;
            }
            double total = 0.0;
            for (std::size_t r = 0; r < m; ++r) {
                candidate[free_indices[r]] = std::fmax(b[r], 0.0);
                total += candidate[free_indices[r]];
            }
            for (double& value : candidate) {
                value /= total;
            }
        }

        const double value = markowitz_objective(mu, sigma, lambda, candidate);
        if (value > best_value) {
            best_value = value;
            best = candidate;
        }
    }
    return best;
}

}  // namespace cfmm
