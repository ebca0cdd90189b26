#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cfmm/constant_product.hpp"

namespace cfmm {

/// Geometric Brownian motion of the reference price over a horizon.
struct GbmParams {
    double mu = 0.0;             // drift per unit time
    double sigma = 0.0;          // volatility per sqrt(time)
    double horizon = 1.0;        // T
    double initial_price = 1.0;  // m_p at t = 0
};

/// Reference price observations along a run; times strictly increasing,
/// prices strictly positive.
struct PricePath {
    std::vector<double> times;
    std::vector<double> prices;
};

/// Wealth an attacker burns per period to pin a no-fee pool's price at
/// (1 + epsilon) times the reference price:
///   C(eps) = R_beta * (sqrt(1+eps) + 1/sqrt(1+eps) - 2).
double manipulation_cost(double r_beta, double epsilon);

/// Universal lower bound K * R_beta * min(eps^2, sqrt(eps)) with K = 1/(32 sqrt 2).
double manipulation_cost_lower_bound(double r_beta, double epsilon);

/// Total relative gain of a no-fee pool across the path: sqrt(m_T / m_1).
double lp_relative_gain(const PricePath& path);

/// Pool portfolio value at a terminal price: 2 sqrt(k * m_T).
double lp_portfolio_value(double k, double terminal_price);

/// Expected terminal portfolio value under GBM: 2 sqrt(k m_1) e^{T(4 mu - sigma^2)/8}.
double gbm_expected_portfolio_value(double k, const GbmParams& params);

struct MonteCarloEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo check of the closed form: terminal prices are sampled exactly
/// (one log-normal draw per path, no Euler stepping), each path from its own
/// seed-derived substream, and the reductions are pairwise so the result does
/// not depend on evaluation order.
MonteCarloEstimate monte_carlo_portfolio_value(double k, const GbmParams& params,
                                               std::size_t n_paths, std::uint64_t seed);

struct PriceGap {
    double leading_order = 0.0;
    double exact = 0.0;
};

/// Cost advantage of the deeper of two equal-price pools for buying
/// delta_alpha: leading order m_u gamma^{-1} delta_alpha^2 (1/R - 1/R'),
/// exact value as the difference of the two quotes.
PriceGap price_gap(double r_alpha, double r_alpha_prime, double m_u, double gamma,
                   double delta_alpha);

/// Extra output from one aggregate alpha->beta trade versus the same amount
/// split in two sequential trades; zero without fees, positive with them.
double split_trade_deficit(const ConstantProductMarket& market, double delta_a1,
                           double delta_a2);

}  // namespace cfmm
