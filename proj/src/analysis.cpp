#include "cfmm/analysis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cfmm/rng.hpp"

namespace cfmm {

namespace {

void validate_gbm(const GbmParams& params) {
    if (!(params.sigma >= 0.0) || !std::isfinite(params.sigma) ||
        !std::isfinite(params.mu)) {
        throw std::invalid_argument("gbm needs finite mu and sigma >= 0");
    }
    if (!(params.horizon > 0.0) || !(params.initial_price > 0.0)) {
        throw std::invalid_argument("gbm needs horizon > 0 and initial price > 0");
    }
}

// Pairwise sum so the reduction is associative to within one ulp-scale
// perturbation regardless of evaluation order.
double pairwise_sum(const double* values, std::size_t count) {
    if (count <= 4) {
        double sum = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            sum += values[i];
        }
        return sum;
    }
    const std::size_t half = count / 2;
    return pairwise_sum(values, half) + pairwise_sum(values + half, count - half);
}

}  // namespace

double manipulation_cost(double r_beta, double epsilon) {
    if (!(r_beta > 0.0)) {
        throw std::invalid_argument("r_beta must be positive");
    }
    if (epsilon == 0.0) {
        return 0.0;
    }
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw std::invalid_argument("epsilon must be positive");
    }
    const double root = std::sqrt(1.0 + epsilon);
    return r_beta * (root + 1.0 / root - 2.0);
}

double manipulation_cost_lower_bound(double r_beta, double epsilon) {
    if (!(r_beta > 0.0) || !(epsilon >= 0.0)) {
        throw std::invalid_argument("r_beta must be positive and epsilon nonnegative");
    }
    constexpr double k_constant = 1.0 / (32.0 * std::numbers::sqrt2);
    return k_constant * r_beta * std::fmin(epsilon * epsilon, std::sqrt(epsilon));
}

double lp_relative_gain(const PricePath& path) {
    if (path.prices.empty() || path.prices.size() != path.times.size()) {
        throw std::invalid_argument("path needs matching, nonempty times and prices");
    }
    for (std::size_t i = 0; i < path.prices.size(); ++i) {
        if (!(path.prices[i] > 0.0)) {
            throw std::invalid_argument("path prices must be positive");
        }
        if (i > 0 && !(path.times[i] > path.times[i - 1])) {
            throw std::invalid_argument("path times must be strictly increasing");
        }
    }
    return std::sqrt(path.prices.back() / path.prices.front());
}

double lp_portfolio_value(double k, double terminal_price) {
    if (!(k > 0.0) || !(terminal_price > 0.0)) {
        throw std::invalid_argument("k and terminal price must be positive");
    }
    return 2.0 * std::sqrt(k * terminal_price);
}

double gbm_expected_portfolio_value(double k, const GbmParams& params) {
    if (!(k > 0.0)) {
        throw std::invalid_argument("k must be positive");
    }
    validate_gbm(params);
    const double t = params.horizon;
    const double exponent =
        t * (4.0 * params.mu - params.sigma * params.sigma) / 8.0;
    return 2.0 * std::sqrt(k * params.initial_price) * std::exp(exponent);
}

MonteCarloEstimate monte_carlo_portfolio_value(double k, const GbmParams& params,
                                               std::size_t n_paths,
                                               std::uint64_t seed) {
    if (!(k > 0.0)) {
        throw std::invalid_argument("k must be positive");
    }
    if (n_paths < 1) {
        throw std::invalid_argument("n_paths must be at least 1");
    }
    validate_gbm(params);

    const double t = params.horizon;
    const double drift = (params.mu - 0.5 * params.sigma * params.sigma) * t;
    const double diffusion = params.sigma * std::sqrt(t);

    std::vector<double> values(n_paths);
    std::vector<double> squares(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) {
        std::uint64_t state = derive_seed(seed, i);
        const double u1 =
            static_cast<double>((splitmix64(state) >> 11) + 1) * 0x1.0p-53;
        const double u2 =
            static_cast<double>((splitmix64(state) >> 11) + 1) * 0x1.0p-53;
        const double z = std::sqrt(-2.0 * std::log(u1)) *
                         std::cos(2.0 * std::numbers::pi * u2);
        const double terminal =
            params.initial_price * std::exp(drift + diffusion * z);
        values[i] = 2.0 * std::sqrt(k * terminal);
        squares[i] = values[i] * values[i];
    }

    const double n = static_cast<double>(n_paths);
    MonteCarloEstimate estimate;
    estimate.mean = pairwise_sum(values.data(), n_paths) / n;
    if (n_paths > 1) {
        const double mean_square = pairwise_sum(squares.data(), n_paths) / n;
        const double variance =
            std::fmax(0.0, (mean_square - estimate.mean * estimate.mean) * n / (n - 1.0));
        estimate.std_error = std::sqrt(variance / n);
    }
    return estimate;
}

PriceGap price_gap(double r_alpha, double r_alpha_prime, double m_u, double gamma,
                   double delta_alpha) {
    if (!(r_alpha > 0.0) || !(r_alpha_prime > r_alpha)) {
        throw std::invalid_argument("need r_alpha_prime > r_alpha > 0");
    }
    if (!(m_u > 0.0) || !(gamma > 0.0) || !(gamma <= 1.0)) {
        throw std::invalid_argument("need m_u > 0 and gamma in (0, 1]");
    }
    if (!(delta_alpha > 0.0) || !(delta_alpha < r_alpha)) {
        throw std::invalid_argument("delta_alpha must lie in (0, r_alpha)");
    }

    PriceGap gap;
    gap.leading_order = m_u / gamma * delta_alpha * delta_alpha *
                        (1.0 / r_alpha - 1.0 / r_alpha_prime);
    // Both pools quote the same marginal price; the cost of extracting
    // delta_alpha is R_beta delta / (gamma (R_alpha - delta)) with
    // R_beta = m_u R_alpha.
    const double cost_small =
        m_u * r_alpha * delta_alpha / (gamma * (r_alpha - delta_alpha));
    const double cost_large =
        m_u * r_alpha_prime * delta_alpha / (gamma * (r_alpha_prime - delta_alpha));
    gap.exact = cost_small - cost_large;
    return gap;
}

double split_trade_deficit(const ConstantProductMarket& market, double delta_a1,
                           double delta_a2) {
    if (!(delta_a1 > 0.0) || !(delta_a2 > 0.0)) {
        throw std::invalid_argument("both trade amounts must be positive");
    }
    const double aggregate = market.quote_alpha_for_beta(delta_a1 + delta_a2);

    ConstantProductMarket scratch = market;
    const double first = scratch.execute_trade(TradeDirection::AlphaForBeta, delta_a1)
                             .amount_out;
    const double second = scratch.quote_alpha_for_beta(delta_a2);
    return aggregate - (first + second);
}

}  // namespace cfmm
