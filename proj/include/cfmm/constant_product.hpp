#pragma once

#include <map>
#include <utility>

namespace cfmm {

enum class TradeDirection {
    BetaForAlpha,  // pay beta, receive alpha
    AlphaForBeta,  // pay alpha, receive beta
};

struct TradeOutcome {
    double amount_in = 0.0;
    double amount_out = 0.0;
    TradeDirection direction = TradeDirection::BetaForAlpha;
    double k_before = 0.0;
    double k_after = 0.0;
};

/// Two-coin market that prices trades off the product of its reserves:
/// a trade of delta_beta for delta_alpha must satisfy
///   (R_alpha - delta_alpha) * (R_beta + gamma * delta_beta) = R_alpha * R_beta,
/// where 1 - gamma is the trade fee. The full input (fee included) is credited
/// to the reserves afterwards, so the product never decreases.
class ConstantProductMarket {
public:
    ConstantProductMarket(double reserve_alpha, double reserve_beta, double gamma);

    double reserve_alpha() const noexcept { return reserve_alpha_; }
    double reserve_beta() const noexcept { return reserve_beta_; }
    double gamma() const noexcept { return gamma_; }
    double product() const noexcept { return reserve_alpha_ * reserve_beta_; }

    /// Alpha received for paying delta_beta.
    double quote_beta_for_alpha(double delta_beta) const;
    /// Beta received for paying delta_alpha.
    double quote_alpha_for_beta(double delta_alpha) const;
    /// Beta payment required to withdraw exactly delta_alpha (inverse quote).
    double beta_in_for_alpha_out(double delta_alpha) const;
    /// Alpha payment required to withdraw exactly delta_beta.
    double alpha_in_for_beta_out(double delta_beta) const;

    /// Executes a trade and updates the reserves. Rejects trades that would
    /// deplete a reserve. The realized product is guaranteed not to decrease.
    TradeOutcome execute_trade(TradeDirection direction, double amount_in);

    /// Price of an infinitesimal trade, m_u = R_beta / R_alpha.
    double marginal_price() const noexcept { return reserve_beta_ / reserve_alpha_; }
    double marginal_price_with_fee() const noexcept { return marginal_price() / gamma_; }
    /// Second-order price movement per unit traded, 2 m_u / (gamma R_alpha).
    double marginal_cost_change() const noexcept {
        return 2.0 * marginal_price() / (gamma_ * reserve_alpha_);
    }

    /// Scales both reserves by (1 + fraction); used by liquidity mint/burn so
    /// the marginal price is preserved. fraction = -1 empties the market.
    void scale_reserves(double fraction);

private:
    double reserve_alpha_;
    double reserve_beta_;
    double gamma_;
};

/// Tracks outstanding liquidity (UNI) tokens and who holds them.
class LiquidityLedger {
public:
    double uni_supply() const noexcept { return uni_supply_; }
    double balance(int agent) const;
    const std::map<int, double>& balances() const noexcept { return balances_; }

    void mint(int agent, double amount);
    void burn(int agent, double amount);

private:
    double uni_supply_ = 0.0;
    std::map<int, double> balances_;
};

struct LiquidityDeposit {
    double minted_uni = 0.0;
    double alpha_deposited = 0.0;
    double beta_deposited = 0.0;
};

/// Deposits delta_beta of coin beta plus the proportional amount of coin alpha
/// and mints (delta_beta / R_beta) * R_UNI tokens to the agent. Against an
/// empty ledger the minted amount equals the deposited beta amount.
LiquidityDeposit add_liquidity(ConstantProductMarket& market, LiquidityLedger& ledger,
                               int agent, double delta_beta);

/// Burns delta_uni of the agent's tokens and pays out the proportional share
/// of both reserves as (alpha_out, beta_out).
std::pair<double, double> remove_liquidity(ConstantProductMarket& market,
                                           LiquidityLedger& ledger, int agent,
                                           double delta_uni);

}  // namespace cfmm
