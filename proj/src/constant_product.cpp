#include "cfmm/constant_product.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cfmm/errors.hpp"

namespace cfmm {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw std::invalid_argument(std::string(name) + " must be positive and finite");
    }
}

}  // namespace

ConstantProductMarket::ConstantProductMarket(double reserve_alpha, double reserve_beta,
                                             double gamma)
    : reserve_alpha_(reserve_alpha), reserve_beta_(reserve_beta), gamma_(gamma) {
    require_positive(reserve_alpha, "reserve_alpha");
    require_positive(reserve_beta, "reserve_beta");
    if (!(gamma > 0.0) || !(gamma <= 1.0)) {
        throw std::invalid_argument("gamma must lie in (0, 1]");
    }
}

namespace {

// The quote is strictly below the reserve in exact arithmetic; keep it so
// when rounding saturates for enormous inputs.
double clamp_below(double value, double reserve) {
    return value < reserve ? value : std::nextafter(reserve, 0.0);
}

}  // namespace

double ConstantProductMarket::quote_beta_for_alpha(double delta_beta) const {
    require_positive(delta_beta, "delta_beta");
    if (!(reserve_alpha_ > 0.0)) {
        throw InfeasibleTradeError("market has no reserves");
    }
    const double credited = gamma_ * delta_beta;
    return clamp_below(reserve_alpha_ * credited / (reserve_beta_ + credited),
                       reserve_alpha_);
}

double ConstantProductMarket::quote_alpha_for_beta(double delta_alpha) const {
    require_positive(delta_alpha, "delta_alpha");
    if (!(reserve_beta_ > 0.0)) {
        throw InfeasibleTradeError("market has no reserves");
    }
    const double credited = gamma_ * delta_alpha;
    return clamp_below(reserve_beta_ * credited / (reserve_alpha_ + credited),
                       reserve_beta_);
}

double ConstantProductMarket::beta_in_for_alpha_out(double delta_alpha) const {
    require_positive(delta_alpha, "delta_alpha");
    if (!(delta_alpha < reserve_alpha_)) {
        throw InfeasibleTradeError("requested alpha exceeds the reserve");
    }
    return reserve_beta_ * delta_alpha / (gamma_ * (reserve_alpha_ - delta_alpha));
}

double ConstantProductMarket::alpha_in_for_beta_out(double delta_beta) const {
    require_positive(delta_beta, "delta_beta");
    if (!(delta_beta < reserve_beta_)) {
        throw InfeasibleTradeError("requested beta exceeds the reserve");
    }
    return reserve_alpha_ * delta_beta / (gamma_ * (reserve_beta_ - delta_beta));
}

TradeOutcome ConstantProductMarket::execute_trade(TradeDirection direction,
                                                  double amount_in) {
    require_positive(amount_in, "amount_in");
    if (!(reserve_alpha_ > 0.0) || !(reserve_beta_ > 0.0)) {
        throw InfeasibleTradeError("market has no reserves");
    }

    const bool beta_in = direction == TradeDirection::BetaForAlpha;
    const double in_reserve = beta_in ? reserve_beta_ : reserve_alpha_;
    const double out_reserve = beta_in ? reserve_alpha_ : reserve_beta_;

    const double k_before = reserve_alpha_ * reserve_beta_;
    const double credited = in_reserve + gamma_ * amount_in;
    double new_out = k_before / credited;
    const double new_in = in_reserve + amount_in;

    // Rounding of new_out can land one ulp short of the constant-product
    // surface; bump it up so the realized product never dips below k_before.
    for (int i = 0; i < 8 && new_out * new_in < k_before; ++i) {
        new_out = std::nextafter(new_out, INFINITY);
    }

    const double amount_out = out_reserve - new_out;
    if (!(new_out > 0.0) || !(amount_out > 0.0)) {
        throw InfeasibleTradeError("trade would deplete a reserve");
    }

    if (beta_in) {
        reserve_alpha_ = new_out;
        reserve_beta_ = new_in;
    } else {
        reserve_alpha_ = new_in;
        reserve_beta_ = new_out;
    }

    TradeOutcome outcome;
    outcome.amount_in = amount_in;
    outcome.amount_out = amount_out;
    outcome.direction = direction;
    outcome.k_before = k_before;
    outcome.k_after = reserve_alpha_ * reserve_beta_;
    return outcome;
}

void ConstantProductMarket::scale_reserves(double fraction) {
    if (!(fraction >= -1.0) || !std::isfinite(fraction)) {
        throw std::invalid_argument("scale fraction must be finite and >= -1");
    }
    const double factor = 1.0 + fraction;
    reserve_alpha_ *= factor;
    reserve_beta_ *= factor;
}

double LiquidityLedger::balance(int agent) const {
    const auto it = balances_.find(agent);
    return it == balances_.end() ? 0.0 : it->second;
}

void LiquidityLedger::mint(int agent, double amount) {
    require_positive(amount, "mint amount");
    balances_[agent] += amount;
    uni_supply_ += amount;
}

void LiquidityLedger::burn(int agent, double amount) {
    require_positive(amount, "burn amount");
    const auto it = balances_.find(agent);
    if (it == balances_.end() || it->second < amount) {
        throw std::invalid_argument("burn exceeds the agent's UNI balance");
    }
    it->second -= amount;
    uni_supply_ -= amount;
    if (it->second == 0.0) {
        balances_.erase(it);
    }
}

LiquidityDeposit add_liquidity(ConstantProductMarket& market, LiquidityLedger& ledger,
                               int agent, double delta_beta) {
    require_positive(delta_beta, "delta_beta");

    const double fraction = delta_beta / market.reserve_beta();
    LiquidityDeposit deposit;
    deposit.alpha_deposited = market.reserve_alpha() * fraction;
    deposit.beta_deposited = delta_beta;
    // Genesis convention: an empty ledger mints one UNI per beta deposited.
    deposit.minted_uni = ledger.uni_supply() == 0.0
                             ? delta_beta
                             : fraction * ledger.uni_supply();

    market.scale_reserves(fraction);
    ledger.mint(agent, deposit.minted_uni);
    return deposit;
}

std::pair<double, double> remove_liquidity(ConstantProductMarket& market,
                                           LiquidityLedger& ledger, int agent,
                                           double delta_uni) {
    require_positive(delta_uni, "delta_uni");
    if (ledger.balance(agent) < delta_uni) {
        throw std::invalid_argument("agent holds fewer UNI than requested");
    }

    const double fraction = delta_uni / ledger.uni_supply();
    const double alpha_out = market.reserve_alpha() * fraction;
    const double beta_out = market.reserve_beta() * fraction;

    ledger.burn(agent, delta_uni);
    market.scale_reserves(-fraction);
    return {alpha_out, beta_out};
}

}  // namespace cfmm
