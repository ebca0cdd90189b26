#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "cfmm/constant_product.hpp"
#include "cfmm/errors.hpp"
#include "cfmm/rng.hpp"
#include "oracles.hpp"

using namespace cfmm;

namespace {

ConstantProductMarket random_market(Rng& rng) {
    const double r_alpha = std::exp(rng.uniform01() * 12.0);  // up to ~1.6e5
    const double r_beta = std::exp(rng.uniform01() * 12.0);
    const double gamma = rng.uniform01() < 0.5 ? 1.0 : 0.9 + 0.1 * rng.uniform01();
    return {r_alpha, r_beta, gamma};
}

}  // namespace

TEST_CASE("quote_beta_for_alpha matches the constant product equation") {
    ConstantProductMarket fair(100.0, 100.0, 1.0);
    CHECK(fair.quote_beta_for_alpha(100.0) ==
          doctest::Approx(oracles::quote_beta_for_alpha_bisect(100, 100, 1.0, 100))
              .epsilon(1e-12));
    CHECK(fair.quote_beta_for_alpha(100.0) == doctest::Approx(50.0).epsilon(1e-12));

    ConstantProductMarket fee(100.0, 100.0, 0.997);
    CHECK(fee.quote_beta_for_alpha(100.0) ==
          doctest::Approx(oracles::quote_beta_for_alpha_bisect(100, 100, 0.997, 100))
              .epsilon(1e-12));
    CHECK(fee.quote_beta_for_alpha(100.0) ==
          doctest::Approx(9970.0 / 199.7).epsilon(1e-12));

    // Zero-trade limit.
    CHECK(fair.quote_beta_for_alpha(1e-9) == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(fair.quote_beta_for_alpha(1e-9) > 0.0);

    CHECK_THROWS_AS(fair.quote_beta_for_alpha(0.0), std::invalid_argument);
    CHECK_THROWS_AS(fair.quote_beta_for_alpha(-1.0), std::invalid_argument);
}

TEST_CASE("quote_alpha_for_beta mirrors the swapped equation") {
    ConstantProductMarket fair(100.0, 100.0, 1.0);
    CHECK(fair.quote_alpha_for_beta(100.0) == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(fair.quote_alpha_for_beta(37.0) ==
          doctest::Approx(fair.quote_beta_for_alpha(37.0)).epsilon(1e-15));

    ConstantProductMarket skewed(50.0, 200.0, 0.997);
    // Same equation with the roles swapped.
    CHECK(skewed.quote_alpha_for_beta(13.0) ==
          doctest::Approx(oracles::quote_beta_for_alpha_bisect(200, 50, 0.997, 13))
              .epsilon(1e-12));
    CHECK(skewed.quote_alpha_for_beta(1e300) < 200.0);
    CHECK_THROWS_AS(skewed.quote_alpha_for_beta(0.0), std::invalid_argument);
}

TEST_CASE("execute_trade updates reserves and credits the fee to the pool") {
    ConstantProductMarket market(100.0, 100.0, 1.0);
    const TradeOutcome outcome =
        market.execute_trade(TradeDirection::BetaForAlpha, 100.0);
    CHECK(outcome.amount_out == doctest::Approx(50.0).epsilon(1e-14));
    CHECK(market.reserve_alpha() == doctest::Approx(50.0).epsilon(1e-14));
    CHECK(market.reserve_beta() == doctest::Approx(200.0).epsilon(1e-14));
    CHECK(outcome.k_after == doctest::Approx(10000.0).epsilon(1e-12));

    ConstantProductMarket fee(100.0, 100.0, 0.997);
    const TradeOutcome fee_outcome =
        fee.execute_trade(TradeDirection::BetaForAlpha, 10.0);
    CHECK(fee_outcome.k_after > fee_outcome.k_before);

    CHECK_THROWS_AS(market.execute_trade(TradeDirection::BetaForAlpha, 0.0),
                    std::invalid_argument);
    // An input below rounding resolution has no representable output.
    CHECK_THROWS_AS(market.execute_trade(TradeDirection::BetaForAlpha, 1e-30),
                    InfeasibleTradeError);
    // A drained market (full liquidity burn) cannot quote or trade.
    ConstantProductMarket drained(50.0, 200.0, 1.0);
    LiquidityLedger ledger;
    ledger.mint(0, 10.0);
    remove_liquidity(drained, ledger, 0, 10.0);
    CHECK_THROWS_AS(drained.quote_beta_for_alpha(1.0), InfeasibleTradeError);
    CHECK_THROWS_AS(drained.execute_trade(TradeDirection::BetaForAlpha, 1.0),
                    InfeasibleTradeError);
}

TEST_CASE("inverse quotes agree with the forward quotes") {
    ConstantProductMarket market(140.0, 95.0, 0.997);
    const double out = market.quote_beta_for_alpha(17.0);
    CHECK(market.beta_in_for_alpha_out(out) == doctest::Approx(17.0).epsilon(1e-12));
    const double out2 = market.quote_alpha_for_beta(11.0);
    CHECK(market.alpha_in_for_beta_out(out2) == doctest::Approx(11.0).epsilon(1e-12));
    CHECK_THROWS_AS(market.beta_in_for_alpha_out(140.0), InfeasibleTradeError);
    CHECK_THROWS_AS(market.alpha_in_for_beta_out(95.0), InfeasibleTradeError);
}

TEST_CASE("product is nondecreasing along random trade sequences") {
    Rng rng(20240001);
    for (int trial = 0; trial < 300; ++trial) {
        ConstantProductMarket market = random_market(rng);
        double previous_k = market.product();
        const bool has_fee = market.gamma() < 1.0;
        for (int t = 0; t < 40; ++t) {
            const bool beta_in = rng.uniform01() < 0.5;
            const double in_reserve =
                beta_in ? market.reserve_beta() : market.reserve_alpha();
            const double amount = in_reserve * (0.001 + rng.uniform01());
            const TradeOutcome outcome = market.execute_trade(
                beta_in ? TradeDirection::BetaForAlpha : TradeDirection::AlphaForBeta,
                amount);
            CHECK(outcome.k_after >= outcome.k_before);  // exact, no tolerance
            CHECK(outcome.k_before >= previous_k - 1e-9 * previous_k);
            if (has_fee) {
                CHECK(outcome.k_after > outcome.k_before);
            }
            CHECK(outcome.amount_out > 0.0);
            previous_k = outcome.k_after;
        }
    }
}

TEST_CASE("no-depletion: total reserves stay above twice the initial root-k") {
    Rng rng(20240002);
    for (int trial = 0; trial < 300; ++trial) {
        ConstantProductMarket market = random_market(rng);
        const double floor = 2.0 * std::sqrt(market.product());
        for (int t = 0; t < 60; ++t) {
            const bool beta_in = rng.uniform01() < 0.5;
            const double in_reserve =
                beta_in ? market.reserve_beta() : market.reserve_alpha();
            market.execute_trade(
                beta_in ? TradeDirection::BetaForAlpha : TradeDirection::AlphaForBeta,
                in_reserve * (0.01 + 2.0 * rng.uniform01()));
            CHECK(market.reserve_alpha() + market.reserve_beta() >=
                  floor * (1.0 - 1e-12));
        }
    }
}

TEST_CASE("splitting a trade never beats the aggregate trade") {
    Rng rng(20240003);
    for (int trial = 0; trial < 400; ++trial) {
        ConstantProductMarket market = random_market(rng);
        const double d1 = market.reserve_alpha() * (0.01 + rng.uniform01());
        const double d2 = market.reserve_alpha() * (0.01 + rng.uniform01());

        const double aggregate = market.quote_alpha_for_beta(d1 + d2);
        ConstantProductMarket scratch = market;
        const double first =
            scratch.execute_trade(TradeDirection::AlphaForBeta, d1).amount_out;
        const double second = scratch.quote_alpha_for_beta(d2);

        if (market.gamma() < 1.0) {
            CHECK(aggregate > first + second);
        } else {
            CHECK(aggregate == doctest::Approx(first + second).epsilon(1e-12));
        }
    }
}

TEST_CASE("quotes are strictly increasing and concave in the input") {
    ConstantProductMarket market(250.0, 130.0, 0.997);
    const double step = 2.0;
    double previous = 0.0;
    double previous_gain = 1e300;
    for (int i = 1; i <= 60; ++i) {
        const double quote = market.quote_beta_for_alpha(step * i);
        const double gain = quote - previous;
        CHECK(quote > previous);
        CHECK(gain < previous_gain);
        previous = quote;
        previous_gain = gain;
    }
}

TEST_CASE("round trip loses with a fee and breaks even without") {
    Rng rng(20240004);
    for (int trial = 0; trial < 200; ++trial) {
        ConstantProductMarket market = random_market(rng);
        const double amount_in = market.reserve_beta() * (0.05 + rng.uniform01());
        ConstantProductMarket scratch = market;
        const double alpha_out =
            scratch.execute_trade(TradeDirection::BetaForAlpha, amount_in).amount_out;
        const double beta_back =
            scratch.execute_trade(TradeDirection::AlphaForBeta, alpha_out).amount_out;
        if (market.gamma() < 1.0) {
            CHECK(beta_back < amount_in);
        } else {
            CHECK(beta_back == doctest::Approx(amount_in).epsilon(1e-12));
        }
    }
}

TEST_CASE("marginal prices and the slippage coefficient") {
    ConstantProductMarket market(100.0, 200.0, 1.0);
    CHECK(market.marginal_price() == doctest::Approx(2.0));
    CHECK(market.marginal_cost_change() == doctest::Approx(0.04).epsilon(1e-15));

    ConstantProductMarket flat(123.0, 123.0, 1.0);
    CHECK(flat.marginal_price() == doctest::Approx(1.0));

    ConstantProductMarket fee(100.0, 100.0, 0.997);
    CHECK(fee.marginal_price_with_fee() == doctest::Approx(1.0 / 0.997).epsilon(1e-15));

    // Doubling both reserves at a fixed price halves the marginal cost change.
    ConstantProductMarket doubled(200.0, 400.0, 1.0);
    CHECK(doubled.marginal_cost_change() ==
          doctest::Approx(0.5 * market.marginal_cost_change()).epsilon(1e-15));

    ConstantProductMarket half_gamma(100.0, 200.0, 0.5);
    CHECK(half_gamma.marginal_cost_change() ==
          doctest::Approx(2.0 * market.marginal_cost_change()).epsilon(1e-15));
}

TEST_CASE("constructor rejects invalid state") {
    CHECK_THROWS_AS(ConstantProductMarket(0.0, 100.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ConstantProductMarket(100.0, -1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ConstantProductMarket(100.0, 100.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ConstantProductMarket(100.0, 100.0, 1.5), std::invalid_argument);
}

TEST_CASE("add_liquidity mints pro rata and keeps the price fixed") {
    // Outstanding supply of 100 against reserves (80, 100).
    ConstantProductMarket market(80.0, 100.0, 0.997);
    LiquidityLedger ledger;
    ledger.mint(0, 100.0);

    const double price_before = market.marginal_price();
    const LiquidityDeposit deposit = add_liquidity(market, ledger, 1, 10.0);
    CHECK(deposit.minted_uni == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(deposit.alpha_deposited ==
          doctest::Approx(0.1 * 80.0).epsilon(1e-12));  // 0.1 of the alpha reserve
    CHECK(market.marginal_price() == doctest::Approx(price_before).epsilon(1e-12));

    // A deposit against an empty ledger mints one UNI per beta deposited.
    ConstantProductMarket fresh(50.0, 70.0, 1.0);
    LiquidityLedger fresh_ledger;
    const LiquidityDeposit genesis = add_liquidity(fresh, fresh_ledger, 0, 35.0);
    CHECK(genesis.minted_uni == doctest::Approx(35.0));
    CHECK(fresh_ledger.uni_supply() == doctest::Approx(35.0));

    // Depositing the full beta reserve doubles reserves and supply.
    ConstantProductMarket pool(50.0, 70.0, 1.0);
    LiquidityLedger book;
    book.mint(0, 70.0);
    add_liquidity(pool, book, 1, 70.0);
    CHECK(book.uni_supply() == doctest::Approx(140.0).epsilon(1e-12));
    CHECK(pool.reserve_alpha() == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(pool.reserve_beta() == doctest::Approx(140.0).epsilon(1e-12));

    CHECK_THROWS_AS(add_liquidity(pool, book, 1, -3.0), std::invalid_argument);
}

TEST_CASE("remove_liquidity pays out the proportional share") {
    ConstantProductMarket market(50.0, 200.0, 1.0);
    LiquidityLedger ledger;
    ledger.mint(7, 100.0);

    const auto [alpha_out, beta_out] = remove_liquidity(market, ledger, 7, 10.0);
    CHECK(alpha_out == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(beta_out == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(ledger.uni_supply() == doctest::Approx(90.0).epsilon(1e-12));

    CHECK_THROWS_AS(remove_liquidity(market, ledger, 7, 1000.0), std::invalid_argument);
    CHECK_THROWS_AS(remove_liquidity(market, ledger, 3, 1.0), std::invalid_argument);

    // Burning the whole supply drains the reserves.
    const auto [rest_alpha, rest_beta] = remove_liquidity(market, ledger, 7, 90.0);
    CHECK(rest_alpha == doctest::Approx(45.0).epsilon(1e-12));
    CHECK(rest_beta == doctest::Approx(180.0).epsilon(1e-12));
    CHECK(ledger.uni_supply() == 0.0);
}

TEST_CASE("add then remove is a no-op up to rounding") {
    ConstantProductMarket market(321.0, 654.0, 0.997);
    LiquidityLedger ledger;
    ledger.mint(0, 654.0);

    const LiquidityDeposit deposit = add_liquidity(market, ledger, 1, 12.5);
    const auto [alpha_out, beta_out] =
        remove_liquidity(market, ledger, 1, deposit.minted_uni);
    CHECK(alpha_out == doctest::Approx(deposit.alpha_deposited).epsilon(1e-12));
    CHECK(beta_out == doctest::Approx(deposit.beta_deposited).epsilon(1e-12));
    CHECK(market.reserve_alpha() == doctest::Approx(321.0).epsilon(1e-12));
    CHECK(market.reserve_beta() == doctest::Approx(654.0).epsilon(1e-12));

    double total = 0.0;
    for (const auto& [agent, balance] : ledger.balances()) {
        total += balance;
    }
    CHECK(total == doctest::Approx(ledger.uni_supply()).epsilon(1e-12));
}
