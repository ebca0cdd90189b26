#include "cfmm/constant_mean.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "cfmm/errors.hpp"

namespace cfmm {

ConstantMeanMarket::ConstantMeanMarket(std::vector<double> reserves,
                                       std::vector<double> weights,
                                       std::vector<double> gammas)
    : reserves_(std::move(reserves)),
      weights_(std::move(weights)),
      gammas_(std::move(gammas)) {
    const std::size_t n = reserves_.size();
    if (n < 2) {
        throw std::invalid_argument("constant mean market needs at least two coins");
    }
    if (weights_.size() != n || gammas_.size() != n) {
        throw std::invalid_argument("reserves, weights and gammas must have equal length");
    }
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(reserves_[i] > 0.0) || !std::isfinite(reserves_[i])) {
            throw std::invalid_argument("reserves must be positive and finite");
        }
        if (!(weights_[i] > 0.0)) {
            throw std::invalid_argument("weights must be strictly positive");
        }
        if (!(gammas_[i] > 0.0) || !(gammas_[i] <= 1.0)) {
            throw std::invalid_argument("gammas must lie in (0, 1]");
        }
        weight_sum += weights_[i];
    }
    if (std::abs(weight_sum - 1.0) > 1e-12) {
        throw std::invalid_argument("weights must sum to 1 (not normalized silently)");
    }
}

double ConstantMeanMarket::mean_constant() const {
    double log_k = 0.0;
    for (std::size_t i = 0; i < reserves_.size(); ++i) {
        log_k += weights_[i] * std::log(reserves_[i]);
    }
    return std::exp(log_k);
}

double ConstantMeanMarket::quote_mean_trade(std::size_t coin_in, std::size_t coin_out,
                                            double delta_in) const {
    if (coin_in >= size() || coin_out >= size()) {
        throw std::invalid_argument("coin index out of range");
    }
    if (coin_in == coin_out) {
        throw std::invalid_argument("coin_in and coin_out must differ");
    }
    if (!(delta_in > 0.0) || !std::isfinite(delta_in)) {
        throw std::invalid_argument("delta_in must be positive and finite");
    }

    const double r_in = reserves_[coin_in];
    const double r_out = reserves_[coin_out];
    const double credited = r_in + gammas_[coin_in] * delta_in;
    const double exponent = weights_[coin_in] / weights_[coin_out];
    const double retained = std::pow(r_in / credited, exponent);
    const double out = r_out * (1.0 - retained);
    if (!(out > 0.0) || !(out < r_out)) {
        throw InfeasibleTradeError("trade would deplete the output reserve");
    }
    return out;
}

MeanTradeOutcome ConstantMeanMarket::execute_mean_trade(std::size_t coin_in,
                                                        std::size_t coin_out,
                                                        double delta_in) {
    const double k_before = mean_constant();
    const double out = quote_mean_trade(coin_in, coin_out, delta_in);

    // Full input credited to the reserves; the fee stays in the pool.
    reserves_[coin_in] += delta_in;
    reserves_[coin_out] -= out;

    MeanTradeOutcome outcome;
    outcome.coin_in = coin_in;
    outcome.coin_out = coin_out;
    outcome.amount_in = delta_in;
    outcome.amount_out = out;
    outcome.k_before = k_before;
    outcome.k_after = mean_constant();
    return outcome;
}

}  // namespace cfmm
