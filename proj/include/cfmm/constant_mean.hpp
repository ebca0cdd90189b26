#pragma once

#include <cstddef>
#include <vector>

namespace cfmm {

struct MeanTradeOutcome {
    std::size_t coin_in = 0;
    std::size_t coin_out = 0;
    double amount_in = 0.0;
    double amount_out = 0.0;
    double k_before = 0.0;
    double k_after = 0.0;
};

/// n-coin market that keeps the weighted geometric mean of its reserves
/// constant in the absence of fees. Trading delta of coin j for an amount of
/// coin l solves
///   prod_{i != j,l} R_i^{w_i} * (R_j + gamma_j * delta)^{w_j} * (R_l - out)^{w_l} = k.
/// Weights must be strictly positive and sum to one; they are validated, not
/// normalized.
class ConstantMeanMarket {
public:
    ConstantMeanMarket(std::vector<double> reserves, std::vector<double> weights,
                       std::vector<double> gammas);

    std::size_t size() const noexcept { return reserves_.size(); }
    const std::vector<double>& reserves() const noexcept { return reserves_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::vector<double>& gammas() const noexcept { return gammas_; }

    /// Weighted geometric mean of the current reserves.
    double mean_constant() const;

    /// Amount of coin_out received for paying delta_in of coin_in.
    double quote_mean_trade(std::size_t coin_in, std::size_t coin_out,
                            double delta_in) const;

    MeanTradeOutcome execute_mean_trade(std::size_t coin_in, std::size_t coin_out,
                                        double delta_in);

private:
    std::vector<double> reserves_;
    std::vector<double> weights_;
    std::vector<double> gammas_;
};

}  // namespace cfmm
