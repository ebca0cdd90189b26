#pragma once

#include <optional>
#include <vector>

#include "cfmm/constant_mean.hpp"
#include "cfmm/constant_product.hpp"

namespace cfmm {

/// Price of coin alpha in units of beta on an infinitely liquid reference market.
struct ReferencePriceQuote {
    double m_p = 1.0;
};

/// Convex cost-of-risk term added to the arbitrage objective.
///   none:          f = 0
///   quadratic:     f = rho_alpha/2 * delta_alpha^2 + rho_beta/2 * delta_beta^2
///   market_impact: f = m_p * eta/(xi+1) * delta_alpha^(xi+1)
///                  (slippage from the impact model m(t) = m_p (1 - eta t^xi))
struct PenaltySpec {
    enum class Kind { None, Quadratic, MarketImpact };

    Kind kind = Kind::None;
    double rho_alpha = 0.0;
    double rho_beta = 0.0;
    double eta = 0.0;
    double xi = 1.0;

    static PenaltySpec none() { return {}; }
    static PenaltySpec quadratic(double rho_alpha, double rho_beta);
    static PenaltySpec market_impact(double eta, double xi);
};

struct ArbitrageSolution {
    double delta_alpha = 0.0;  // alpha leg of the trade
    double delta_beta = 0.0;   // beta leg of the trade
    // BetaForAlpha: pay delta_beta, receive delta_alpha (profitable when the
    // pool underprices alpha). AlphaForBeta is the reverse.
    TradeDirection direction = TradeDirection::BetaForAlpha;
    double profit = 0.0;  // in units of beta, penalty not subtracted
    bool converged = true;
    double kkt_residual = 0.0;
};

struct NoArbitrageCheck {
    bool holds = false;
    double lower = 0.0;  // gamma * m_p
    double upper = 0.0;  // m_p / gamma
};

/// Exact solution of the riskless arbitrage problem
///   maximize m_p delta_alpha - delta_beta  s.t. the constant product equation,
/// via the closed form delta_alpha* = (R_alpha - sqrt(k / (gamma m_p)))_+ and
/// its beta-side mirror. Returns the profitable direction (at most one is).
ArbitrageSolution solve_riskless_cpmm(const ConstantProductMarket& market,
                                      const ReferencePriceQuote& quote);

/// Maximizes m_p delta_alpha - delta_beta - f(delta_alpha, delta_beta) with the
/// trade pinned to the constant product curve, by bisection on the derivative
/// of the 1-D concave objective. Stops when |derivative| < 1e-10 or the
/// bracket is narrower than 1e-12 times the input-side reserve.
ArbitrageSolution solve_penalized_cpmm(const ConstantProductMarket& market,
                                       const ReferencePriceQuote& quote,
                                       const PenaltySpec& penalty);

/// Eq.-style price band: no profitable riskless arbitrage exists iff
/// gamma m_p <= m_u <= m_p / gamma (checked with 1e-12 relative tolerance).
NoArbitrageCheck check_no_arbitrage(const ConstantProductMarket& market,
                                    const ReferencePriceQuote& quote);

/// Optional separable quadratic penalty for the constant mean solver:
/// rho_delta/2 * sum_i delta_i^2 on external purchases and
/// rho_lambda/2 * sum_j (per-coin withdrawal total)^2 on withdrawals.
struct MeanPenalty {
    double rho_delta = 0.0;
    double rho_lambda = 0.0;
};

struct MeanArbitrageSolution {
    std::vector<double> deltas;                // coin i bought externally and deposited
    std::vector<std::vector<double>> lambdas;  // [i][j]: coin j withdrawn against deposit i
    double profit = 0.0;                       // sum_ij lambda_ij m_j - sum_i delta_i m_i
    double kkt_residual = 0.0;
};

/// Solves the constant mean arbitrage problem (geometric-mean constraint
/// relaxed to an inequality, which is tight at any optimum). The reserve
/// constraint depends on the trade matrix only through per-coin net flows, so
/// the solver works on those and reaches the optimum by bisecting the KKT
/// multiplier of the mean constraint; per-coin stationarity then has a closed
/// form. The reported residual covers stationarity, complementarity and the
/// constraint gap.
MeanArbitrageSolution solve_constant_mean(const ConstantMeanMarket& market,
                                          const std::vector<double>& prices,
                                          const std::optional<MeanPenalty>& penalty = {});

}  // namespace cfmm
