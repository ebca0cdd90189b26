#include "cfmm/arbitrage.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "cfmm/errors.hpp"

namespace cfmm {

namespace {

constexpr int kMaxBisectionIterations = 200;
constexpr double kDerivativeTolerance = 1e-10;
constexpr double kBracketTolerance = 1e-12;

void require_valid_price(double m_p) {
    if (!(m_p > 0.0) || !std::isfinite(m_p)) {
        throw std::invalid_argument("reference price must be positive and finite");
    }
}

ArbitrageSolution zero_trade() { return {}; }

// Riskless closed form for one direction. Mirrors the alpha-buying solution;
// the beta-buying case is the same problem with the coin roles swapped and the
// price inverted.
ArbitrageSolution riskless_direction(double in_reserve, double out_reserve,
                                     double gamma, double out_price_in_in_units,
                                     TradeDirection direction, double profit_scale) {
    const double k = in_reserve * out_reserve;
    const double post_out_reserve = std::sqrt(k / (gamma * out_price_in_in_units));
    const double amount_out = out_reserve - post_out_reserve;
    if (!(amount_out > 0.0)) {
        return zero_trade();
    }
    const double amount_in = (k / post_out_reserve - in_reserve) / gamma;
    const double profit = (out_price_in_in_units * amount_out - amount_in) * profit_scale;

    ArbitrageSolution solution;
    solution.direction = direction;
    if (direction == TradeDirection::BetaForAlpha) {
        solution.delta_alpha = amount_out;
        solution.delta_beta = amount_in;
    } else {
        solution.delta_alpha = amount_in;
        solution.delta_beta = amount_out;
    }
    solution.profit = profit;
    solution.converged = true;
    solution.kkt_residual = 0.0;
    return solution;
}

struct PenalizedObjective {
    // Derivative (in beta units) of the concave objective in x, the amount of
    // the bought coin, with the paid amount eliminated through the constant
    // product equation.
    std::function<double(double)> derivative;
    // Paid amount for a given bought amount.
    std::function<double(double)> input;
    double bought_cap = 0.0;  // trades approach depletion as x -> bought_cap
};

// One direction of the penalized problem. The variable is the amount of the
// bought coin, x in [0, out_reserve); objective, penalty and tolerances are
// all measured in units of beta.
PenalizedObjective make_objective(const ConstantProductMarket& market, double m_p,
                                  const PenaltySpec& penalty, TradeDirection direction) {
    const double gamma = market.gamma();
    const double k = market.product();
    const bool buy_alpha = direction == TradeDirection::BetaForAlpha;
    const double out_reserve = buy_alpha ? market.reserve_alpha() : market.reserve_beta();
    const double in_reserve = buy_alpha ? market.reserve_beta() : market.reserve_alpha();
    const double out_value = buy_alpha ? m_p : 1.0;  // beta value of the bought coin
    const double in_value = buy_alpha ? 1.0 : m_p;   // beta value of the paid coin

    auto input_for = [=](double x) {
        return (k / (out_reserve - x) - in_reserve) / gamma;
    };
    auto input_slope = [=](double x) {
        const double rest = out_reserve - x;
        return k / (gamma * rest * rest);
    };

    PenalizedObjective objective;
    objective.input = input_for;
    objective.bought_cap = out_reserve;

    switch (penalty.kind) {
        case PenaltySpec::Kind::None:
            objective.derivative = [=](double x) {
                return out_value - in_value * input_slope(x);
            };
            break;
        case PenaltySpec::Kind::Quadratic: {
            // rho_alpha charges the alpha leg and rho_beta the beta leg,
            // whichever side of the trade they are on.
            const double rho_out = buy_alpha ? penalty.rho_alpha : penalty.rho_beta;
            const double rho_in = buy_alpha ? penalty.rho_beta : penalty.rho_alpha;
            objective.derivative = [=](double x) {
                return out_value - in_value * input_slope(x) - rho_out * x -
                       rho_in * input_for(x) * input_slope(x);
            };
            break;
        }
        case PenaltySpec::Kind::MarketImpact: {
            // The impact penalty is written in the traded alpha amount, which
            // is the bought coin in one direction and the paid coin in the
            // other.
            if (buy_alpha) {
                objective.derivative = [=, eta = penalty.eta, xi = penalty.xi](double x) {
                    return out_value * (1.0 - eta * std::pow(x, xi)) -
                           in_value * input_slope(x);
                };
            } else {
                objective.derivative = [=, eta = penalty.eta, xi = penalty.xi](double x) {
                    const double alpha_in = input_for(x);
                    return out_value -
                           in_value * input_slope(x) *
                               (1.0 + eta * std::pow(alpha_in, xi));
                };
            }
            break;
        }
    }
    return objective;
}

ArbitrageSolution solve_direction(const ConstantProductMarket& market, double m_p,
                                  const PenaltySpec& penalty, TradeDirection direction) {
    const PenalizedObjective objective = make_objective(market, m_p, penalty, direction);
    if (objective.derivative(0.0) <= 0.0) {
        return zero_trade();
    }

    double lo = 0.0;
    double hi = objective.bought_cap * (1.0 - 1e-12);
    if (objective.derivative(hi) > 0.0) {
        throw SolverError("penalized objective has no interior stationary point",
                          objective.derivative(hi));
    }

    double x = hi;
    double residual = std::abs(objective.derivative(x));
    bool converged = false;
    for (int i = 0; i < kMaxBisectionIterations; ++i) {
        x = 0.5 * (lo + hi);
        const double slope = objective.derivative(x);
        residual = std::abs(slope);
        if (residual < kDerivativeTolerance ||
            hi - lo < kBracketTolerance * objective.bought_cap) {
            converged = true;
            break;
        }
        (slope > 0.0 ? lo : hi) = x;
    }
    if (!converged) {
        throw SolverError("penalized arbitrage bisection hit the iteration cap", residual);
    }

    const double amount_out = x;
    const double amount_in = objective.input(x);
    const bool buy_alpha = direction == TradeDirection::BetaForAlpha;
    const double profit =
        buy_alpha ? m_p * amount_out - amount_in : amount_out - m_p * amount_in;

    if (!(profit > 0.0)) {
        return zero_trade();
    }

    ArbitrageSolution solution;
    solution.direction = direction;
    solution.delta_alpha = buy_alpha ? amount_out : amount_in;
    solution.delta_beta = buy_alpha ? amount_in : amount_out;
    solution.profit = profit;
    solution.converged = true;
    solution.kkt_residual = residual;
    return solution;
}

}  // namespace

PenaltySpec PenaltySpec::quadratic(double rho_alpha, double rho_beta) {
    if (!(rho_alpha >= 0.0) || !(rho_beta >= 0.0)) {
        throw std::invalid_argument("quadratic penalty coefficients must be nonnegative");
    }
    PenaltySpec spec;
    spec.kind = Kind::Quadratic;
    spec.rho_alpha = rho_alpha;
    spec.rho_beta = rho_beta;
    return spec;
}

PenaltySpec PenaltySpec::market_impact(double eta, double xi) {
    if (!(eta >= 0.0) || !(xi > 0.0)) {
        throw std::invalid_argument("market impact penalty needs eta >= 0 and xi > 0");
    }
    PenaltySpec spec;
    spec.kind = Kind::MarketImpact;
    spec.eta = eta;
    spec.xi = xi;
    return spec;
}

ArbitrageSolution solve_riskless_cpmm(const ConstantProductMarket& market,
                                      const ReferencePriceQuote& quote) {
    require_valid_price(quote.m_p);

    // Buy alpha with beta: profit measured directly in beta.
    const ArbitrageSolution buy_alpha =
        riskless_direction(market.reserve_beta(), market.reserve_alpha(), market.gamma(),
                           quote.m_p, TradeDirection::BetaForAlpha, 1.0);
    // Buy beta with alpha: the swapped problem prices beta at 1/m_p and pays in
    // alpha, so its profit converts back to beta with a factor of m_p.
    const ArbitrageSolution buy_beta =
        riskless_direction(market.reserve_alpha(), market.reserve_beta(), market.gamma(),
                           1.0 / quote.m_p, TradeDirection::AlphaForBeta, quote.m_p);

    const ArbitrageSolution& best =
        buy_alpha.profit >= buy_beta.profit ? buy_alpha : buy_beta;
    return best.profit > 0.0 ? best : zero_trade();
}

ArbitrageSolution solve_penalized_cpmm(const ConstantProductMarket& market,
                                       const ReferencePriceQuote& quote,
                                       const PenaltySpec& penalty) {
    require_valid_price(quote.m_p);

    const ArbitrageSolution buy_alpha =
        solve_direction(market, quote.m_p, penalty, TradeDirection::BetaForAlpha);
    const ArbitrageSolution buy_beta =
        solve_direction(market, quote.m_p, penalty, TradeDirection::AlphaForBeta);
    const ArbitrageSolution& best =
        buy_alpha.profit >= buy_beta.profit ? buy_alpha : buy_beta;
    return best.profit > 0.0 ? best : zero_trade();
}

NoArbitrageCheck check_no_arbitrage(const ConstantProductMarket& market,
                                    const ReferencePriceQuote& quote) {
    require_valid_price(quote.m_p);

    NoArbitrageCheck check;
    check.lower = market.gamma() * quote.m_p;
    check.upper = quote.m_p / market.gamma();
    const double tolerance = 1e-12 * quote.m_p;
    const double m_u = market.marginal_price();
    check.holds = m_u >= check.lower - tolerance && m_u <= check.upper + tolerance;
    return check;
}

namespace {

// Positive root of rho x^2 + b x = c with rho >= 0, c > 0, in a form stable
// for small rho (reduces to x = c / b when rho = 0 and b > 0).
double positive_quadratic_root(double rho, double b, double c) {
    if (rho == 0.0) {
        return c / b;
    }
    return 2.0 * c / (b + std::sqrt(b * b + 4.0 * rho * c));
}

struct MeanKktPoint {
    std::vector<double> post_reserves;
    std::vector<double> withdrawals;  // y_i
    std::vector<double> deposits;     // delta_i
};

// Per-coin maximizer of g_i(x) + nu w_i ln x, where g_i is the value of moving
// the reserve of coin i from R_i to x (selling withdrawals, buying deposits at
// the external price, fee and penalty included).
MeanKktPoint evaluate_multiplier(const ConstantMeanMarket& market,
                                 const std::vector<double>& prices, double nu,
                                 double rho_withdraw, double rho_deposit) {
    const std::size_t n = market.size();
    const auto& reserves = market.reserves();
    const auto& weights = market.weights();
    const auto& gammas = market.gammas();

    MeanKktPoint point;
    point.post_reserves.assign(n, 0.0);
    point.withdrawals.assign(n, 0.0);
    point.deposits.assign(n, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        const double r = reserves[i];
        const double m = prices[i];
        const double gamma = gammas[i];
        const double scaled = nu * weights[i];
        double x = r;
        if (scaled / r < m) {
            // Withdraw: m - rho_w (r - x) = scaled / x.
            x = positive_quadratic_root(rho_withdraw, m - rho_withdraw * r, scaled);
        } else if (scaled / r > m / gamma) {
            // Deposit: m/gamma + rho_d (x - r)/gamma^2 = scaled / x.
            x = positive_quadratic_root(rho_deposit / (gamma * gamma),
                                        m / gamma - rho_deposit * r / (gamma * gamma),
                                        scaled);
        }
        point.post_reserves[i] = x;
        if (x < r) {
            point.withdrawals[i] = r - x;
        } else if (x > r) {
            point.deposits[i] = (x - r) / gamma;
        }
    }
    return point;
}

double log_constraint_gap(const ConstantMeanMarket& market,
                          const std::vector<double>& post_reserves) {
    double gap = 0.0;
    for (std::size_t i = 0; i < market.size(); ++i) {
        gap += market.weights()[i] *
               (std::log(post_reserves[i]) - std::log(market.reserves()[i]));
    }
    return gap;
}

}  // namespace

MeanArbitrageSolution solve_constant_mean(const ConstantMeanMarket& market,
                                          const std::vector<double>& prices,
                                          const std::optional<MeanPenalty>& penalty) {
    const std::size_t n = market.size();
    if (prices.size() != n) {
        throw std::invalid_argument("price vector length must match the market size");
    }
    for (const double price : prices) {
        require_valid_price(price);
    }
    const double rho_withdraw = penalty ? penalty->rho_lambda : 0.0;
    const double rho_deposit = penalty ? penalty->rho_delta : 0.0;
    if (!(rho_withdraw >= 0.0) || !(rho_deposit >= 0.0)) {
        throw std::invalid_argument("mean penalty coefficients must be nonnegative");
    }

    // The constraint gap is nondecreasing in the multiplier: larger nu makes
    // every coin keep more reserve. Bracket a root and bisect.
    double nu_hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        nu_hi = std::max(nu_hi, prices[i] * market.reserves()[i] /
                                    (market.gammas()[i] * market.weights()[i]));
    }
    auto gap_at = [&](double nu) {
        return log_constraint_gap(
            market,
            evaluate_multiplier(market, prices, nu, rho_withdraw, rho_deposit)
                .post_reserves);
    };

    double nu_lo = nu_hi;
    for (int i = 0; i < 200 && gap_at(nu_lo) > 0.0; ++i) {
        nu_lo *= 0.5;
    }
    if (gap_at(nu_lo) > 0.0) {
        throw SolverError("could not bracket the mean-constraint multiplier",
                          gap_at(nu_lo));
    }

    double nu = nu_hi;
    for (int i = 0; i < 200; ++i) {
        nu = 0.5 * (nu_lo + nu_hi);
        const double gap = gap_at(nu);
        if (std::abs(gap) < 1e-15 || nu_hi - nu_lo < 1e-16 * nu_hi) {
            break;
        }
        (gap < 0.0 ? nu_lo : nu_hi) = nu;
    }

    const MeanKktPoint point =
        evaluate_multiplier(market, prices, nu, rho_withdraw, rho_deposit);
    const double constraint_gap = log_constraint_gap(market, point.post_reserves);
    if (std::abs(constraint_gap) > 1e-8) {
        throw SolverError("mean-constraint not tight at the solver's solution",
                          std::abs(constraint_gap));
    }

    MeanArbitrageSolution solution;
    solution.deltas = point.deposits;
    solution.lambdas.assign(n, std::vector<double>(n, 0.0));

    double deposit_value = 0.0;
    double withdrawal_value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        deposit_value += prices[i] * point.deposits[i];
        withdrawal_value += prices[i] * point.withdrawals[i];
    }
    solution.profit = withdrawal_value - deposit_value;

    // Attribute each withdrawn coin to the deposited coins pro rata by value;
    // only the per-coin totals are pinned by the problem.
    if (deposit_value > 0.0) {
        for (std::size_t j = 0; j < n; ++j) {
            if (point.withdrawals[j] <= 0.0) {
                continue;
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (i == j || point.deposits[i] <= 0.0) {
                    continue;
                }
                solution.lambdas[i][j] = point.withdrawals[j] * prices[i] *
                                         point.deposits[i] / deposit_value;
            }
        }
    }

    // Residual over stationarity of the active coordinates, the no-trade
    // bands of the inactive ones, and the constraint gap.
    double residual = std::abs(constraint_gap);
    for (std::size_t i = 0; i < n; ++i) {
        const double m = prices[i];
        const double gamma = market.gammas()[i];
        const double internal = nu * market.weights()[i] / point.post_reserves[i];
        const double scale = 1.0 + m;
        if (point.withdrawals[i] > 0.0) {
            residual = std::max(
                residual,
                std::abs(m - rho_withdraw * point.withdrawals[i] - internal) / scale);
        } else if (point.deposits[i] > 0.0) {
            residual = std::max(
                residual, std::abs(m / gamma + rho_deposit * point.deposits[i] / gamma -
                                   internal) /
                              scale);
        } else {
            residual = std::max(residual, std::max(0.0, m - internal) / scale);
            residual = std::max(residual, std::max(0.0, internal - m / gamma) / scale);
        }
    }
    solution.kkt_residual = residual;
    return solution;
}

}  // namespace cfmm
