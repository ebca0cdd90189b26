#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "cfmm/constant_product.hpp"
#include "cfmm/markowitz.hpp"
#include "cfmm/rng.hpp"

namespace cfmm {

/// External market the agents hedge and compare against: a power-law impact
/// response to arbitrageur hedging plus end-of-step log-normal noise.
struct ReferenceMarket {
    double price = 1.0;  // m_p
    double kappa = 0.0;  // impact coefficient
    double xi = 0.0;     // impact exponent; impact is kappa * delta^(1 + xi)
    double mu = 0.0;     // per-step log drift
    double sigma = 0.0;  // per-step log volatility

    /// Buying alpha raises the price by kappa * delta^(1+xi); selling lowers
    /// it by the same amount, floored at half the current price so it stays
    /// positive.
    void apply_impact(double delta_alpha, bool buying_alpha);
    void apply_noise(double standard_normal);
};

struct ArbitrageurSpec {
    double rho_alpha = 0.0;
    double rho_beta = 0.0;
};

/// Deposits its coins at simulation start and holds the position to the end.
struct InitialLpSpec {
    double alpha_amount = 0.0;
    double beta_amount = 0.0;
};

/// Rebalances an (alpha, beta, UNI) portfolio each step toward the
/// mean-variance optimum computed from exponentially weighted return
/// estimates, trading through the pool.
struct RationalLpSpec {
    double lambda = 1.0;      // risk aversion
    double ewma_decay = 0.9;  // per-step decay of the return estimators
    double initial_alpha = 0.0;
    double initial_beta = 0.0;
};

struct SizeDistribution {
    enum class Kind { Fixed, LogNormal };
    Kind kind = Kind::Fixed;
    double value = 0.0;     // fixed size
    double log_mean = 0.0;  // lognormal parameters
    double log_sigma = 0.0;
};

/// Trades a drawn size on the pool iff the all-in pool cost is at most
/// (1 + max_premium) times the reference cost of the same trade.
struct TraderSpec {
    SizeDistribution size;
    double max_premium = 0.0;
    double direction_prob = 0.5;  // probability the drawn trade buys alpha
};

using AgentSpec = std::variant<ArbitrageurSpec, InitialLpSpec, RationalLpSpec, TraderSpec>;

enum class OrderingPolicy { FixedOrder, ShufflePerStep, ArbitrageurLast };

struct SimulationConfig {
    int steps = 0;
    std::uint64_t seed = 0;
    double gamma = 0.997;
    ReferenceMarket reference;
    std::vector<AgentSpec> agents;
    OrderingPolicy ordering = OrderingPolicy::ArbitrageurLast;
};

struct Wallet {
    double alpha = 0.0;
    double beta = 0.0;
    double uni = 0.0;
};

struct TradeLogEntry {
    enum class Venue { Uniswap, Reference, Liquidity };
    int step = 0;
    int agent = -1;
    Venue venue = Venue::Uniswap;
    double alpha_delta = 0.0;  // change of the agent's alpha holdings
    double beta_delta = 0.0;
    double uni_delta = 0.0;
};

struct TimeStepRecord {
    int step = 0;
    double m_p = 0.0;            // reference price after the end-of-step noise
    double m_p_pre_noise = 0.0;  // snapshot before the noise draw
    double m_u = 0.0;
    double band_lo = 0.0;  // gamma * m_p_pre_noise (band in force this step)
    double band_hi = 0.0;  // m_p_pre_noise / gamma
    double reserve_alpha = 0.0;
    double reserve_beta = 0.0;
    double k = 0.0;
    double uni_supply = 0.0;
    std::vector<Wallet> holdings;
    std::vector<double> utilities;
    std::vector<TradeLogEntry> trades;
};

struct SimulationResult {
    std::vector<TimeStepRecord> records;
};

/// One deterministic run. A single seeded generator is consumed in a fixed,
/// documented order: per step, the optional ordering shuffle first, then each
/// agent's draws in execution order, then the noise draw. Agent actions run
/// strictly sequentially; the record for a step is taken after the noise
/// update, with the pre-noise price kept alongside.
class Simulation {
public:
    explicit Simulation(const SimulationConfig& config);

    void step();
    void run();  // all remaining configured steps

    /// Runs one agent's action against the current state (the step loop uses
    /// this too).
    void act(std::size_t agent_index);

    const SimulationConfig& config() const noexcept { return config_; }
    const ConstantProductMarket& market() const noexcept { return market_; }
    const LiquidityLedger& ledger() const noexcept { return ledger_; }
    const ReferenceMarket& reference() const noexcept { return reference_; }
    const std::vector<Wallet>& wallets() const noexcept { return wallets_; }
    const SimulationResult& result() const noexcept { return result_; }
    int current_step() const noexcept { return current_step_; }

private:
    struct RationalLpState {
        bool has_observation = false;
        Vector3 last_prices{};
        Vector3 mu_hat{};
        Matrix3 sigma_hat{};
        int return_count = 0;
    };

    void arbitrageur_act(std::size_t index, const ArbitrageurSpec& spec);
    void trader_act(std::size_t index, const TraderSpec& spec);
    void rational_lp_act(std::size_t index, const RationalLpSpec& spec);

    double uni_value() const;
    double agent_utility(std::size_t index) const;
    void record_state(double pre_noise_price);
    void log_trade(std::size_t agent, TradeLogEntry::Venue venue, double alpha_delta,
                   double beta_delta, double uni_delta);
    std::vector<std::size_t> execution_order();

    SimulationConfig config_;
    ConstantProductMarket market_;
    LiquidityLedger ledger_;
    ReferenceMarket reference_;
    std::vector<Wallet> wallets_;
    std::vector<RationalLpState> lp_states_;
    Rng rng_;
    int current_step_ = 0;
    std::vector<TradeLogEntry> pending_trades_;
    SimulationResult result_;
};

SimulationResult run_simulation(const SimulationConfig& config);

/// Recomputes an initial LP's per-step utility from a result stream: the
/// reference value of the burn-equivalent of its UNI holdings minus the value
/// of the initial deposit held passively.
std::vector<double> initial_lp_utility(const SimulationConfig& config,
                                       const SimulationResult& result,
                                       std::size_t agent_index);

}  // namespace cfmm
