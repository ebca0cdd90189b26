#include "cfmm/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cfmm/arbitrage.hpp"
#include "cfmm/errors.hpp"

namespace cfmm {

void ReferenceMarket::apply_impact(double delta_alpha, bool buying_alpha) {
    if (!(delta_alpha > 0.0)) {
        return;
    }
    const double impact = kappa * std::pow(delta_alpha, 1.0 + xi);
    if (buying_alpha) {
        price += impact;
    } else {
        price = std::fmax(price - impact, 0.5 * price);
    }
}

void ReferenceMarket::apply_noise(double standard_normal) {
    price *= std::exp(sigma * standard_normal + mu);
}

namespace {

const InitialLpSpec* first_initial_lp(const SimulationConfig& config) {
    for (const AgentSpec& agent : config.agents) {
        if (const auto* lp = std::get_if<InitialLpSpec>(&agent)) {
            return lp;
        }
    }
    return nullptr;
}

const SimulationConfig& validated(const SimulationConfig& config) {
    if (config.steps < 0) {
        throw std::invalid_argument("steps must be nonnegative");
    }
    if (!(config.gamma > 0.0) || !(config.gamma <= 1.0)) {
        throw std::invalid_argument("gamma must lie in (0, 1]");
    }
    const ReferenceMarket& ref = config.reference;
    if (!(ref.price > 0.0) || !(ref.kappa >= 0.0) || !(ref.xi >= 0.0) ||
        !(ref.sigma >= 0.0) || !std::isfinite(ref.mu)) {
        throw std::invalid_argument("invalid reference market parameters");
    }

    const InitialLpSpec* genesis = first_initial_lp(config);
    if (genesis == nullptr) {
        throw std::invalid_argument("at least one initial liquidity provider is required");
    }

    for (const AgentSpec& agent : config.agents) {
        if (const auto* arb = std::get_if<ArbitrageurSpec>(&agent)) {
            if (!(arb->rho_alpha >= 0.0) || !(arb->rho_beta >= 0.0)) {
                throw std::invalid_argument("arbitrageur penalties must be nonnegative");
            }
        } else if (const auto* lp = std::get_if<InitialLpSpec>(&agent)) {
            if (!(lp->alpha_amount > 0.0) || !(lp->beta_amount > 0.0)) {
                throw std::invalid_argument("initial LP amounts must be positive");
            }
            // Every deposit must match the genesis price, or the pool would
            // move against the depositor before the run starts.
            const double ratio = lp->alpha_amount / lp->beta_amount;
            const double genesis_ratio = genesis->alpha_amount / genesis->beta_amount;
            if (std::abs(ratio - genesis_ratio) > 1e-9 * genesis_ratio) {
                throw std::invalid_argument(
                    "initial LP deposits must share the genesis alpha/beta ratio");
            }
        } else if (const auto* lp = std::get_if<RationalLpSpec>(&agent)) {
            if (!(lp->lambda > 0.0) || !(lp->ewma_decay > 0.0) ||
                !(lp->ewma_decay < 1.0) || !(lp->initial_alpha >= 0.0) ||
                !(lp->initial_beta >= 0.0)) {
                throw std::invalid_argument("invalid rational LP parameters");
            }
        } else if (const auto* trader = std::get_if<TraderSpec>(&agent)) {
            if (!(trader->max_premium >= 0.0) || !(trader->direction_prob >= 0.0) ||
                !(trader->direction_prob <= 1.0)) {
                throw std::invalid_argument("invalid trader parameters");
            }
            if (trader->size.kind == SizeDistribution::Kind::Fixed) {
                if (!(trader->size.value >= 0.0)) {
                    throw std::invalid_argument("fixed trade size must be nonnegative");
                }
            } else if (!(trader->size.log_sigma >= 0.0) ||
                       !std::isfinite(trader->size.log_mean)) {
                throw std::invalid_argument("invalid lognormal size parameters");
            }
        }
    }
    return config;
}

ConstantProductMarket genesis_market(const SimulationConfig& config) {
    const InitialLpSpec* genesis = first_initial_lp(config);
    return {genesis->alpha_amount, genesis->beta_amount, config.gamma};
}

}  // namespace

Simulation::Simulation(const SimulationConfig& config)
    : config_(validated(config)),
      market_(genesis_market(config_)),
      reference_(config_.reference),
      wallets_(config_.agents.size()),
      lp_states_(config_.agents.size()),
      rng_(config_.seed) {
    bool genesis_done = false;
    for (std::size_t i = 0; i < config_.agents.size(); ++i) {
        if (const auto* lp = std::get_if<InitialLpSpec>(&config_.agents[i])) {
            if (!genesis_done) {
                // The pool was constructed from this deposit; mint the genesis
                // supply (one UNI per beta deposited).
                ledger_.mint(static_cast<int>(i), lp->beta_amount);
                wallets_[i].uni = lp->beta_amount;
                log_trade(i, TradeLogEntry::Venue::Liquidity, -lp->alpha_amount,
                          -lp->beta_amount, lp->beta_amount);
                genesis_done = true;
            } else {
                const LiquidityDeposit deposit = add_liquidity(
                    market_, ledger_, static_cast<int>(i), lp->beta_amount);
                wallets_[i].uni += deposit.minted_uni;
                log_trade(i, TradeLogEntry::Venue::Liquidity, -deposit.alpha_deposited,
                          -deposit.beta_deposited, deposit.minted_uni);
            }
        } else if (const auto* lp = std::get_if<RationalLpSpec>(&config_.agents[i])) {
            wallets_[i].alpha = lp->initial_alpha;
            wallets_[i].beta = lp->initial_beta;
        }
    }
    record_state(reference_.price);
}

double Simulation::uni_value() const {
    const double supply = ledger_.uni_supply();
    if (!(supply > 0.0)) {
        return 0.0;
    }
    return (reference_.price * market_.reserve_alpha() + market_.reserve_beta()) /
           supply;
}

void Simulation::log_trade(std::size_t agent, TradeLogEntry::Venue venue,
                           double alpha_delta, double beta_delta, double uni_delta) {
    TradeLogEntry entry;
    entry.step = current_step_;
    entry.agent = static_cast<int>(agent);
    entry.venue = venue;
    entry.alpha_delta = alpha_delta;
    entry.beta_delta = beta_delta;
    entry.uni_delta = uni_delta;
    pending_trades_.push_back(entry);
}

double Simulation::agent_utility(std::size_t index) const {
    const Wallet& wallet = wallets_[index];
    const double m_p = reference_.price;
    const AgentSpec& spec = config_.agents[index];

    if (const auto* lp = std::get_if<InitialLpSpec>(&spec)) {
        const double supply = ledger_.uni_supply();
        const double pool_share =
            supply > 0.0 ? wallet.uni / supply *
                               (m_p * market_.reserve_alpha() + market_.reserve_beta())
                         : 0.0;
        const double passive = lp->alpha_amount * m_p + lp->beta_amount;
        return pool_share - passive;
    }
    if (const auto* lp = std::get_if<RationalLpSpec>(&spec)) {
        const double wealth =
            wallet.alpha * m_p + wallet.beta + wallet.uni * uni_value();
        return wealth - (lp->initial_alpha * m_p + lp->initial_beta);
    }
    // Arbitrageurs and traders start flat; their wealth is their utility.
    return wallet.alpha * m_p + wallet.beta + wallet.uni * uni_value();
}

void Simulation::record_state(double pre_noise_price) {
    TimeStepRecord record;
    record.step = current_step_;
    record.m_p = reference_.price;
    record.m_p_pre_noise = pre_noise_price;
    record.m_u = market_.marginal_price();
    record.band_lo = config_.gamma * pre_noise_price;
    record.band_hi = pre_noise_price / config_.gamma;
    record.reserve_alpha = market_.reserve_alpha();
    record.reserve_beta = market_.reserve_beta();
    record.k = market_.product();
    record.uni_supply = ledger_.uni_supply();
    record.holdings = wallets_;
    record.utilities.resize(config_.agents.size());
    for (std::size_t i = 0; i < config_.agents.size(); ++i) {
        record.utilities[i] = agent_utility(i);
    }
    record.trades = std::move(pending_trades_);
    pending_trades_.clear();
    result_.records.push_back(std::move(record));
}

std::vector<std::size_t> Simulation::execution_order() {
    std::vector<std::size_t> order(config_.agents.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    switch (config_.ordering) {
        case OrderingPolicy::FixedOrder:
            break;
        case OrderingPolicy::ShufflePerStep:
            for (std::size_t i = order.size(); i > 1; --i) {
                const std::size_t j = rng_.below(i);
                std::swap(order[i - 1], order[j]);
            }
            break;
        case OrderingPolicy::ArbitrageurLast:
            std::stable_partition(order.begin(), order.end(), [&](std::size_t index) {
                return !std::holds_alternative<ArbitrageurSpec>(config_.agents[index]);
            });
            break;
    }
    return order;
}

void Simulation::act(std::size_t agent_index) {
    if (agent_index >= config_.agents.size()) {
        throw std::invalid_argument("agent index out of range");
    }
    const AgentSpec& spec = config_.agents[agent_index];
    if (const auto* arb = std::get_if<ArbitrageurSpec>(&spec)) {
        arbitrageur_act(agent_index, *arb);
    } else if (const auto* trader = std::get_if<TraderSpec>(&spec)) {
        trader_act(agent_index, *trader);
    } else if (const auto* lp = std::get_if<RationalLpSpec>(&spec)) {
        rational_lp_act(agent_index, *lp);
    }
    // Initial LPs hold their position for the whole run.
}

void Simulation::arbitrageur_act(std::size_t index, const ArbitrageurSpec& spec) {
    const ReferencePriceQuote quote{reference_.price};
    const PenaltySpec penalty = PenaltySpec::quadratic(spec.rho_alpha, spec.rho_beta);
    const ArbitrageSolution solution = solve_penalized_cpmm(market_, quote, penalty);
    if (!(solution.profit > 0.0)) {
        return;
    }

    Wallet& wallet = wallets_[index];
    try {
        if (solution.direction == TradeDirection::BetaForAlpha) {
            const TradeOutcome outcome =
                market_.execute_trade(TradeDirection::BetaForAlpha, solution.delta_beta);
            wallet.beta -= outcome.amount_in;
            wallet.alpha += outcome.amount_out;
            log_trade(index, TradeLogEntry::Venue::Uniswap, outcome.amount_out,
                      -outcome.amount_in, 0.0);

            // Hedge: sell the received alpha at the reference market.
            const double proceeds = reference_.price * outcome.amount_out;
            wallet.alpha -= outcome.amount_out;
            wallet.beta += proceeds;
            log_trade(index, TradeLogEntry::Venue::Reference, -outcome.amount_out,
                      proceeds, 0.0);
            reference_.apply_impact(outcome.amount_out, /*buying_alpha=*/false);
        } else {
            const TradeOutcome outcome =
                market_.execute_trade(TradeDirection::AlphaForBeta, solution.delta_alpha);
            wallet.alpha -= outcome.amount_in;
            wallet.beta += outcome.amount_out;
            log_trade(index, TradeLogEntry::Venue::Uniswap, -outcome.amount_in,
                      outcome.amount_out, 0.0);

            // Hedge: buy the sold alpha back at the reference market.
            const double cost = reference_.price * outcome.amount_in;
            wallet.alpha += outcome.amount_in;
            wallet.beta -= cost;
            log_trade(index, TradeLogEntry::Venue::Reference, outcome.amount_in, -cost,
                      0.0);
            reference_.apply_impact(outcome.amount_in, /*buying_alpha=*/true);
        }
    } catch (const InfeasibleTradeError&) {
        // A candidate that rounds into infeasibility is simply skipped.
    }
}

void Simulation::trader_act(std::size_t index, const TraderSpec& spec) {
    const bool buy_alpha = rng_.uniform01() <= spec.direction_prob;
    double size = spec.size.value;
    if (spec.size.kind == SizeDistribution::Kind::LogNormal) {
        size = rng_.lognormal(spec.size.log_mean, spec.size.log_sigma);
    }
    if (!(size > 0.0)) {
        return;
    }

    Wallet& wallet = wallets_[index];
    try {
        if (buy_alpha) {
            if (!(size < market_.reserve_alpha() * (1.0 - 1e-12))) {
                return;
            }
            const double pool_cost = market_.beta_in_for_alpha_out(size);
            const double reference_cost = reference_.price * size;
            if (pool_cost > (1.0 + spec.max_premium) * reference_cost) {
                return;
            }
            const TradeOutcome outcome =
                market_.execute_trade(TradeDirection::BetaForAlpha, pool_cost);
            wallet.beta -= outcome.amount_in;
            wallet.alpha += outcome.amount_out;
            log_trade(index, TradeLogEntry::Venue::Uniswap, outcome.amount_out,
                      -outcome.amount_in, 0.0);
        } else {
            if (!(size < market_.reserve_beta() * (1.0 - 1e-12))) {
                return;
            }
            const double pool_cost = market_.alpha_in_for_beta_out(size);
            const double reference_cost = size / reference_.price;
            if (pool_cost > (1.0 + spec.max_premium) * reference_cost) {
                return;
            }
            const TradeOutcome outcome =
                market_.execute_trade(TradeDirection::AlphaForBeta, pool_cost);
            wallet.alpha -= outcome.amount_in;
            wallet.beta += outcome.amount_out;
            log_trade(index, TradeLogEntry::Venue::Uniswap, -outcome.amount_in,
                      outcome.amount_out, 0.0);
        }
    } catch (const InfeasibleTradeError&) {
    }
}

void Simulation::rational_lp_act(std::size_t index, const RationalLpSpec& spec) {
    RationalLpState& state = lp_states_[index];
    const Vector3 prices{reference_.price, 1.0, uni_value()};

    if (state.has_observation) {
        Vector3 returns{};
        for (std::size_t i = 0; i < 3; ++i) {
            returns[i] = state.last_prices[i] > 0.0
                             ? prices[i] / state.last_prices[i] - 1.0
                             : 0.0;
        }
        const double decay = spec.ewma_decay;
        for (std::size_t i = 0; i < 3; ++i) {
            state.mu_hat[i] = decay * state.mu_hat[i] + (1.0 - decay) * returns[i];
        }
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                state.sigma_hat[i][j] =
                    decay * state.sigma_hat[i][j] +
                    (1.0 - decay) * (returns[i] - state.mu_hat[i]) *
                        (returns[j] - state.mu_hat[j]);
            }
        }
        ++state.return_count;
    }
    state.last_prices = prices;
    state.has_observation = true;

    if (state.return_count < 2) {
        return;  // not enough history to estimate returns; hold
    }

    Matrix3 sigma = state.sigma_hat;
    for (std::size_t i = 0; i < 3; ++i) {
        sigma[i][i] += 1e-10;  // the numeraire's zero variance makes it singular
    }
    const Vector3 target_weights = markowitz_solve(state.mu_hat, sigma, spec.lambda);

    Wallet& wallet = wallets_[index];
    const double m_p = reference_.price;
    double uni_price = prices[2];
    const double wealth = wallet.alpha * m_p + wallet.beta + wallet.uni * uni_price;
    if (!(wealth > 0.0)) {
        return;
    }
    const double skip_below = 1e-9 * wealth;

    try {
        // Shed excess UNI first so the coins are available for the trades.
        const double uni_target = target_weights[2] * wealth;
        if (uni_price > 0.0 && wallet.uni * uni_price > uni_target + skip_below) {
            const double burn =
                std::fmin(wallet.uni, (wallet.uni * uni_price - uni_target) / uni_price);
            if (burn > 0.0) {
                const auto [alpha_out, beta_out] =
                    remove_liquidity(market_, ledger_, static_cast<int>(index), burn);
                wallet.uni -= burn;
                wallet.alpha += alpha_out;
                wallet.beta += beta_out;
                log_trade(index, TradeLogEntry::Venue::Liquidity, alpha_out, beta_out,
                          -burn);
            }
        }

        // Rebalance alpha through the pool; beta absorbs the residual.
        const double alpha_target = target_weights[0] * wealth;
        const double alpha_value = wallet.alpha * m_p;
        if (alpha_value > alpha_target + skip_below) {
            const double sell = std::fmin(wallet.alpha, (alpha_value - alpha_target) / m_p);
            if (sell > 0.0) {
                const TradeOutcome outcome =
                    market_.execute_trade(TradeDirection::AlphaForBeta, sell);
                wallet.alpha -= outcome.amount_in;
                wallet.beta += outcome.amount_out;
                log_trade(index, TradeLogEntry::Venue::Uniswap, -outcome.amount_in,
                          outcome.amount_out, 0.0);
            }
        } else if (alpha_value < alpha_target - skip_below) {
            const double want = (alpha_target - alpha_value) / m_p;
            double spend = wallet.beta;
            if (want < market_.reserve_alpha() * (1.0 - 1e-12)) {
                spend = std::fmin(spend, market_.beta_in_for_alpha_out(want));
            }
            if (spend > skip_below) {
                const TradeOutcome outcome =
                    market_.execute_trade(TradeDirection::BetaForAlpha, spend);
                wallet.beta -= outcome.amount_in;
                wallet.alpha += outcome.amount_out;
                log_trade(index, TradeLogEntry::Venue::Uniswap, outcome.amount_out,
                          -outcome.amount_in, 0.0);
            }
        }

        // Top the UNI position back up with whatever coins remain.
        uni_price = uni_value();
        const double uni_deficit = uni_target - wallet.uni * uni_price;
        if (uni_deficit > skip_below) {
            const double alpha_per_beta =
                market_.reserve_alpha() / market_.reserve_beta();
            double deposit_beta = uni_deficit / (1.0 + m_p * alpha_per_beta);
            deposit_beta = std::fmin(deposit_beta, wallet.beta);
            if (alpha_per_beta > 0.0) {
                deposit_beta = std::fmin(deposit_beta, wallet.alpha / alpha_per_beta);
            }
            if (deposit_beta > skip_below) {
                const LiquidityDeposit deposit = add_liquidity(
                    market_, ledger_, static_cast<int>(index), deposit_beta);
                wallet.alpha -= deposit.alpha_deposited;
                wallet.beta -= deposit.beta_deposited;
                wallet.uni += deposit.minted_uni;
                log_trade(index, TradeLogEntry::Venue::Liquidity,
                          -deposit.alpha_deposited, -deposit.beta_deposited,
                          deposit.minted_uni);
            }
        }
    } catch (const InfeasibleTradeError&) {
        // Skip the rest of this rebalance; holdings stay consistent because
        // every leg settles atomically above.
    }
}

void Simulation::step() {
    ++current_step_;
    for (const std::size_t index : execution_order()) {
        act(index);
    }
    const double pre_noise_price = reference_.price;
    reference_.apply_noise(rng_.normal());
    record_state(pre_noise_price);
}

void Simulation::run() {
    while (current_step_ < config_.steps) {
        step();
    }
}

SimulationResult run_simulation(const SimulationConfig& config) {
    Simulation simulation(config);
    simulation.run();
    return simulation.result();
}

std::vector<double> initial_lp_utility(const SimulationConfig& config,
                                       const SimulationResult& result,
                                       std::size_t agent_index) {
    if (agent_index >= config.agents.size()) {
        throw std::invalid_argument("agent index out of range");
    }
    const auto* lp = std::get_if<InitialLpSpec>(&config.agents[agent_index]);
    if (lp == nullptr) {
        throw std::invalid_argument("agent is not an initial liquidity provider");
    }

    std::vector<double> utilities;
    utilities.reserve(result.records.size());
    for (const TimeStepRecord& record : result.records) {
        const double pool_share =
            record.uni_supply > 0.0
                ? record.holdings[agent_index].uni / record.uni_supply *
                      (record.m_p * record.reserve_alpha + record.reserve_beta)
                : 0.0;
        const double passive = lp->alpha_amount * record.m_p + lp->beta_amount;
        utilities.push_back(pool_share - passive);
    }
    return utilities;
}

}  // namespace cfmm
