#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfmm/analysis.hpp"
#include "cfmm/arbitrage.hpp"
#include "cfmm/errors.hpp"
#include "cfmm/scenario.hpp"
#include "cfmm/simulation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

std::string read_file(const std::string& path) {
    std::ifstream stream(path, std::ios::binary);
    if (!stream) {
        throw std::invalid_argument("cannot open scenario file: " + path);
    }
    return std::string(std::istreambuf_iterator<char>(stream), {});
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream stream(path, std::ios::binary);
    if (!stream) {
        throw std::runtime_error("cannot write output file: " + path.string());
    }
    stream << content;
}

int cmd_simulate(const std::string& scenario_path, std::optional<std::uint64_t> seed,
                 std::optional<int> steps, std::optional<std::string> out_dir) {
    cfmm::Scenario scenario = cfmm::parse_scenario(read_file(scenario_path));
    if (seed) {
        scenario.config.seed = *seed;
    }
    if (steps) {
        scenario.config.steps = *steps;
    }
    if (out_dir) {
        scenario.output.directory = *out_dir;
    }

    const cfmm::SimulationResult result = cfmm::run_simulation(scenario.config);
    const std::filesystem::path directory(scenario.output.directory);
    std::filesystem::create_directories(directory);
    write_file(directory / "timeseries.csv",
               cfmm::timeseries_csv(scenario.config, result, scenario.output.cadence));
    write_file(directory / "report.json",
               cfmm::run_report(scenario.config, result, scenario.output.cadence));

    std::cout << "wrote " << (directory / "timeseries.csv").string() << " and "
              << (directory / "report.json").string() << "\n";
    return kExitOk;
}

void print_solution(const cfmm::ArbitrageSolution& solution,
                    const cfmm::NoArbitrageCheck& band, bool as_json) {
    if (as_json) {
        nlohmann::json output;
        output["delta_alpha"] = solution.delta_alpha;
        output["delta_beta"] = solution.delta_beta;
        output["direction"] = solution.direction == cfmm::TradeDirection::BetaForAlpha
                                  ? "beta_for_alpha"
                                  : "alpha_for_beta";
        output["profit"] = solution.profit;
        output["converged"] = solution.converged;
        output["kkt_residual"] = solution.kkt_residual;
        output["no_arbitrage"] = {
            {"holds", band.holds}, {"lower", band.lower}, {"upper", band.upper}};
        std::cout << output.dump(2) << "\n";
        return;
    }
    std::cout << "direction:    "
              << (solution.direction == cfmm::TradeDirection::BetaForAlpha
                      ? "pay beta, receive alpha"
                      : "pay alpha, receive beta")
              << "\n"
              << "delta_alpha:  " << cfmm::detail::format_double(solution.delta_alpha)
              << "\n"
              << "delta_beta:   " << cfmm::detail::format_double(solution.delta_beta)
              << "\n"
              << "profit:       " << cfmm::detail::format_double(solution.profit)
              << " beta\n"
              << "price band:   [" << cfmm::detail::format_double(band.lower) << ", "
              << cfmm::detail::format_double(band.upper) << "] "
              << (band.holds ? "(no arbitrage)" : "(arbitrage available)") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constant product / constant mean market toolkit"};
    app.require_subcommand(1);

    // --- simulate ---
    auto* simulate = app.add_subcommand("simulate", "Run a scenario file");
    std::string scenario_path;
    simulate->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    std::optional<std::uint64_t> seed_override;
    std::optional<int> steps_override;
    std::optional<std::string> out_override;
    simulate->add_option("--seed", seed_override, "Override the scenario seed");
    simulate->add_option("--steps", steps_override, "Override the step count");
    simulate->add_option("--out", out_override, "Override the output directory");

    // --- arbitrage ---
    auto* arbitrage = app.add_subcommand("arbitrage", "Solve the optimal arbitrage problem");
    double r_alpha = 0.0, r_beta = 0.0, gamma = 0.997, m_p = 1.0;
    arbitrage->add_option("--ralpha", r_alpha, "Alpha reserve")->required();
    arbitrage->add_option("--rbeta", r_beta, "Beta reserve")->required();
    arbitrage->add_option("--gamma", gamma, "Fee retention factor");
    arbitrage->add_option("--mp", m_p, "Reference price of alpha")->required();
    std::string penalty_kind = "none";
    arbitrage->add_option("--penalty", penalty_kind, "none|quadratic|impact")
        ->check(CLI::IsMember({"none", "quadratic", "impact"}));
    double rho_alpha = 0.0, rho_beta = 0.0, eta = 0.0, xi = 1.0;
    arbitrage->add_option("--rho-alpha", rho_alpha, "Quadratic penalty on alpha");
    arbitrage->add_option("--rho-beta", rho_beta, "Quadratic penalty on beta");
    arbitrage->add_option("--rho", rho_alpha, "Shorthand for --rho-alpha");
    arbitrage->add_option("--eta", eta, "Impact coefficient");
    arbitrage->add_option("--xi", xi, "Impact exponent");
    bool as_json = false;
    arbitrage->add_flag("--json", as_json, "Machine-readable output");

    // --- analyze ---
    auto* analyze = app.add_subcommand("analyze", "Closed-form analytic quantities");
    analyze->require_subcommand(1);

    auto* manipulation = analyze->add_subcommand("manipulation", "Price manipulation cost");
    double man_rbeta = 0.0, man_eps = 0.0;
    manipulation->add_option("--rbeta", man_rbeta, "Beta reserve")->required();
    manipulation->add_option("--eps", man_eps, "Relative price push")->required();

    auto* lp_returns = analyze->add_subcommand("lp-returns", "No-fee LP gain and value");
    double lp_m1 = 1.0, lp_mt = 1.0, lp_k = 0.0;
    lp_returns->add_option("--m1", lp_m1, "Initial price")->required();
    lp_returns->add_option("--mt", lp_mt, "Terminal price")->required();
    lp_returns->add_option("--k", lp_k, "Product constant (adds portfolio value)");

    auto* gbm = analyze->add_subcommand("gbm", "GBM expected portfolio value");
    double gbm_k = 0.0;
    cfmm::GbmParams gbm_params;
    std::size_t mc_paths = 0;
    std::uint64_t mc_seed = 0;
    gbm->add_option("--k", gbm_k, "Product constant")->required();
    gbm->add_option("--mu", gbm_params.mu, "Drift per unit time");
    gbm->add_option("--sigma", gbm_params.sigma, "Volatility per sqrt(time)");
    gbm->add_option("--horizon", gbm_params.horizon, "Horizon T");
    gbm->add_option("--mc", mc_paths, "Cross-check with this many Monte Carlo paths");
    gbm->add_option("--seed", mc_seed, "Monte Carlo seed");

    auto* price_gap = analyze->add_subcommand("price-gap", "Cost gap between pool depths");
    double pg_ralpha = 0.0, pg_ralpha_prime = 0.0, pg_mu = 1.0, pg_gamma = 1.0,
           pg_dalpha = 0.0;
    price_gap->add_option("--ralpha", pg_ralpha, "Alpha reserve (shallow pool)")->required();
    price_gap->add_option("--ralpha-prime", pg_ralpha_prime, "Alpha reserve (deep pool)")
        ->required();
    price_gap->add_option("--mu-price", pg_mu, "Shared marginal price");
    price_gap->add_option("--gamma", pg_gamma, "Fee retention factor");
    price_gap->add_option("--dalpha", pg_dalpha, "Trade size")->required();

    auto* split = analyze->add_subcommand("split", "Split-vs-aggregate trade deficit");
    double sp_ralpha = 0.0, sp_rbeta = 0.0, sp_gamma = 0.997, sp_d1 = 0.0, sp_d2 = 0.0;
    split->add_option("--ralpha", sp_ralpha, "Alpha reserve")->required();
    split->add_option("--rbeta", sp_rbeta, "Beta reserve")->required();
    split->add_option("--gamma", sp_gamma, "Fee retention factor");
    split->add_option("--d1", sp_d1, "First trade amount")->required();
    split->add_option("--d2", sp_d2, "Second trade amount")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& error) {
        const int code = app.exit(error);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(scenario_path, seed_override, steps_override,
                                out_override);
        }
        if (arbitrage->parsed()) {
            const cfmm::ConstantProductMarket market(r_alpha, r_beta, gamma);
            const cfmm::ReferencePriceQuote quote{m_p};
            cfmm::ArbitrageSolution solution;
            if (penalty_kind == "none") {
                solution = cfmm::solve_riskless_cpmm(market, quote);
            } else if (penalty_kind == "quadratic") {
                solution = cfmm::solve_penalized_cpmm(
                    market, quote, cfmm::PenaltySpec::quadratic(rho_alpha, rho_beta));
            } else {
                solution = cfmm::solve_penalized_cpmm(
                    market, quote, cfmm::PenaltySpec::market_impact(eta, xi));
            }
            print_solution(solution, cfmm::check_no_arbitrage(market, quote), as_json);
            return kExitOk;
        }
        if (manipulation->parsed()) {
            std::cout << cfmm::detail::format_double(
                             cfmm::manipulation_cost(man_rbeta, man_eps))
                      << "\n";
            return kExitOk;
        }
        if (lp_returns->parsed()) {
            const cfmm::PricePath path{{0.0, 1.0}, {lp_m1, lp_mt}};
            std::cout << "relative_gain: "
                      << cfmm::detail::format_double(cfmm::lp_relative_gain(path))
                      << "\n";
            if (lp_k > 0.0) {
                std::cout << "portfolio_value: "
                          << cfmm::detail::format_double(
                                 cfmm::lp_portfolio_value(lp_k, lp_mt))
                          << "\n";
            }
            return kExitOk;
        }
        if (gbm->parsed()) {
            std::cout << "expected_value: "
                      << cfmm::detail::format_double(
                             cfmm::gbm_expected_portfolio_value(gbm_k, gbm_params))
                      << "\n";
            if (mc_paths > 0) {
                const cfmm::MonteCarloEstimate estimate =
                    cfmm::monte_carlo_portfolio_value(gbm_k, gbm_params, mc_paths,
                                                      mc_seed);
                std::cout << "monte_carlo:    "
                          << cfmm::detail::format_double(estimate.mean) << " +/- "
                          << cfmm::detail::format_double(estimate.std_error) << "\n";
            }
            return kExitOk;
        }
        if (price_gap->parsed()) {
            const cfmm::PriceGap gap =
                cfmm::price_gap(pg_ralpha, pg_ralpha_prime, pg_mu, pg_gamma, pg_dalpha);
            std::cout << "leading_order: "
                      << cfmm::detail::format_double(gap.leading_order) << "\n"
                      << "exact:         " << cfmm::detail::format_double(gap.exact)
                      << "\n";
            return kExitOk;
        }
        if (split->parsed()) {
            const cfmm::ConstantProductMarket market(sp_ralpha, sp_rbeta, sp_gamma);
            std::cout << cfmm::detail::format_double(
                             cfmm::split_trade_deficit(market, sp_d1, sp_d2))
                      << "\n";
            return kExitOk;
        }
    } catch (const std::invalid_argument& error) {
        std::cerr << "error: " << error.what() << "\n";
        return kExitUsage;
    } catch (const cfmm::SolverError& error) {
        std::cerr << "solver error: " << error.what()
                  << " (residual " << error.residual() << ")\n";
        return kExitRuntime;
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
