#include "cfmm/scenario.hpp"

#include <charconv>
#include <cmath>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <variant>

#include <json.hpp>

namespace cfmm {

namespace detail {

std::string format_double(double value) {
    char buffer[32];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

}  // namespace detail

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw std::invalid_argument("scenario error at " + path + ": " + message);
}

void reject_unknown_keys(const json& object, const std::string& path,
                         const std::set<std::string>& allowed) {
    for (const auto& item : object.items()) {
        if (!allowed.contains(item.key())) {
            fail(path + "." + item.key(), "unknown key");
        }
    }
}

double get_number(const json& object, const std::string& path, const char* key,
                  double fallback, bool required = false) {
    if (!object.contains(key)) {
        if (required) {
            fail(path + "." + key, "missing required key");
        }
        return fallback;
    }
    const json& value = object.at(key);
    if (!value.is_number()) {
        fail(path + "." + key, "expected a number");
    }
    return value.get<double>();
}

SizeDistribution parse_size(const json& object, const std::string& path) {
    if (!object.is_object()) {
        fail(path, "expected an object");
    }
    reject_unknown_keys(object, path, {"kind", "value", "log_mean", "log_sigma"});
    if (!object.contains("kind") || !object.at("kind").is_string()) {
        fail(path + ".kind", "expected \"fixed\" or \"lognormal\"");
    }
    const std::string kind = object.at("kind").get<std::string>();

    SizeDistribution size;
    if (kind == "fixed") {
        size.kind = SizeDistribution::Kind::Fixed;
        size.value = get_number(object, path, "value", 0.0, /*required=*/true);
    } else if (kind == "lognormal") {
        size.kind = SizeDistribution::Kind::LogNormal;
        size.log_mean = get_number(object, path, "log_mean", 0.0, /*required=*/true);
        size.log_sigma = get_number(object, path, "log_sigma", 0.0, /*required=*/true);
    } else {
        fail(path + ".kind", "unknown size distribution \"" + kind + "\"");
    }
    return size;
}

AgentSpec parse_agent(const json& object, const std::string& path) {
    if (!object.is_object()) {
        fail(path, "expected an object");
    }
    if (!object.contains("kind") || !object.at("kind").is_string()) {
        fail(path + ".kind", "missing agent kind");
    }
    const std::string kind = object.at("kind").get<std::string>();

    if (kind == "arbitrageur") {
        reject_unknown_keys(object, path, {"kind", "rho_alpha", "rho_beta"});
        ArbitrageurSpec spec;
        spec.rho_alpha = get_number(object, path, "rho_alpha", 0.0);
        spec.rho_beta = get_number(object, path, "rho_beta", 0.0);
        return spec;
    }
    if (kind == "initial_lp") {
        reject_unknown_keys(object, path, {"kind", "alpha", "beta"});
        InitialLpSpec spec;
        spec.alpha_amount = get_number(object, path, "alpha", 0.0, /*required=*/true);
        spec.beta_amount = get_number(object, path, "beta", 0.0, /*required=*/true);
        return spec;
    }
    if (kind == "rational_lp") {
        reject_unknown_keys(object, path,
                            {"kind", "lambda", "ewma_decay", "alpha", "beta"});
        RationalLpSpec spec;
        spec.lambda = get_number(object, path, "lambda", 1.0);
        spec.ewma_decay = get_number(object, path, "ewma_decay", 0.9);
        spec.initial_alpha = get_number(object, path, "alpha", 0.0);
        spec.initial_beta = get_number(object, path, "beta", 0.0);
        return spec;
    }
    if (kind == "trader") {
        reject_unknown_keys(object, path,
                            {"kind", "size", "max_premium", "direction_prob"});
        TraderSpec spec;
        if (!object.contains("size")) {
            fail(path + ".size", "missing required key");
        }
        spec.size = parse_size(object.at("size"), path + ".size");
        spec.max_premium = get_number(object, path, "max_premium", 0.0);
        spec.direction_prob = get_number(object, path, "direction_prob", 0.5);
        if (!std::isfinite(spec.max_premium)) {
            fail(path + ".max_premium", "must be finite in a scenario file");
        }
        return spec;
    }
    fail(path + ".kind", "unknown agent kind \"" + kind + "\"");
}

std::string agent_kind_name(const AgentSpec& spec) {
    if (std::holds_alternative<ArbitrageurSpec>(spec)) return "arbitrageur";
    if (std::holds_alternative<InitialLpSpec>(spec)) return "initial_lp";
    if (std::holds_alternative<RationalLpSpec>(spec)) return "rational_lp";
    return "trader";
}

std::string ordering_name(OrderingPolicy policy) {
    switch (policy) {
        case OrderingPolicy::FixedOrder: return "fixed_order";
        case OrderingPolicy::ShufflePerStep: return "shuffle_per_step";
        case OrderingPolicy::ArbitrageurLast: break;
    }
    return "arbitrageur_last";
}

// Records emitted to the CSV: step 0, every cadence-th step, plus the last.
bool emitted(const TimeStepRecord& record, int cadence, int last_step) {
    return record.step % cadence == 0 || record.step == last_step;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
    json document;
    try {
        document = json::parse(json_text);
    } catch (const json::parse_error& error) {
        // Translate the byte offset into a line/column diagnostic.
        std::size_t line = 1;
        std::size_t column = 1;
        for (std::size_t i = 0; i + 1 < error.byte && i < json_text.size(); ++i) {
            if (json_text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw std::invalid_argument("scenario syntax error at line " +
                                    std::to_string(line) + ", column " +
                                    std::to_string(column) + ": " + error.what());
    }
    if (!document.is_object()) {
        fail("$", "expected a JSON object");
    }
    reject_unknown_keys(document, "$",
                        {"steps", "seed", "ordering", "market", "reference", "agents",
                         "output"});

    Scenario scenario;
    SimulationConfig& config = scenario.config;

    if (!document.contains("steps") || !document.at("steps").is_number_integer()) {
        fail("$.steps", "missing integer step count");
    }
    config.steps = document.at("steps").get<int>();

    if (!document.contains("seed") || !document.at("seed").is_number_unsigned()) {
        fail("$.seed", "missing unsigned integer seed");
    }
    config.seed = document.at("seed").get<std::uint64_t>();

    if (document.contains("ordering")) {
        const json& value = document.at("ordering");
        if (!value.is_string()) {
            fail("$.ordering", "expected a string");
        }
        const std::string name = value.get<std::string>();
        if (name == "fixed_order") {
            config.ordering = OrderingPolicy::FixedOrder;
        } else if (name == "shuffle_per_step") {
            config.ordering = OrderingPolicy::ShufflePerStep;
        } else if (name == "arbitrageur_last") {
            config.ordering = OrderingPolicy::ArbitrageurLast;
        } else {
            fail("$.ordering", "unknown ordering policy \"" + name + "\"");
        }
    }

    if (document.contains("market")) {
        const json& market = document.at("market");
        if (!market.is_object()) {
            fail("$.market", "expected an object");
        }
        reject_unknown_keys(market, "$.market", {"gamma"});
        config.gamma = get_number(market, "$.market", "gamma", 0.997);
    }

    if (document.contains("reference")) {
        const json& reference = document.at("reference");
        if (!reference.is_object()) {
            fail("$.reference", "expected an object");
        }
        reject_unknown_keys(reference, "$.reference",
                            {"initial_price", "kappa", "xi", "mu", "sigma"});
        config.reference.price =
            get_number(reference, "$.reference", "initial_price", 1.0);
        config.reference.kappa = get_number(reference, "$.reference", "kappa", 0.0);
        config.reference.xi = get_number(reference, "$.reference", "xi", 0.0);
        config.reference.mu = get_number(reference, "$.reference", "mu", 0.0);
        config.reference.sigma = get_number(reference, "$.reference", "sigma", 0.0);
    }

    if (!document.contains("agents") || !document.at("agents").is_array()) {
        fail("$.agents", "missing agent list");
    }
    const json& agents = document.at("agents");
    for (std::size_t i = 0; i < agents.size(); ++i) {
        config.agents.push_back(
            parse_agent(agents.at(i), "$.agents[" + std::to_string(i) + "]"));
    }

    if (document.contains("output")) {
        const json& output = document.at("output");
        if (!output.is_object()) {
            fail("$.output", "expected an object");
        }
        reject_unknown_keys(output, "$.output", {"directory", "cadence"});
        if (output.contains("directory")) {
            if (!output.at("directory").is_string()) {
                fail("$.output.directory", "expected a string");
            }
            scenario.output.directory = output.at("directory").get<std::string>();
        }
        if (output.contains("cadence")) {
            if (!output.at("cadence").is_number_integer()) {
                fail("$.output.cadence", "expected an integer");
            }
            scenario.output.cadence = output.at("cadence").get<int>();
            if (scenario.output.cadence < 1) {
                fail("$.output.cadence", "must be at least 1");
            }
        }
    }

    // Surface config-level problems (bad ranges, missing initial LP, ...)
    // now rather than at run time; Simulation's constructor validates.
    try {
        (void)Simulation(config);
    } catch (const std::invalid_argument& error) {
        throw std::invalid_argument(std::string("scenario error: ") + error.what());
    }
    return scenario;
}

std::string serialize_scenario(const Scenario& scenario) {
    const SimulationConfig& config = scenario.config;
    json document;
    document["steps"] = config.steps;
    document["seed"] = config.seed;
    document["ordering"] = ordering_name(config.ordering);
    document["market"] = {{"gamma", config.gamma}};
    document["reference"] = {{"initial_price", config.reference.price},
                             {"kappa", config.reference.kappa},
                             {"xi", config.reference.xi},
                             {"mu", config.reference.mu},
                             {"sigma", config.reference.sigma}};

    json agents = json::array();
    for (const AgentSpec& spec : config.agents) {
        json agent;
        agent["kind"] = agent_kind_name(spec);
        if (const auto* arb = std::get_if<ArbitrageurSpec>(&spec)) {
            agent["rho_alpha"] = arb->rho_alpha;
            agent["rho_beta"] = arb->rho_beta;
        } else if (const auto* lp = std::get_if<InitialLpSpec>(&spec)) {
            agent["alpha"] = lp->alpha_amount;
            agent["beta"] = lp->beta_amount;
        } else if (const auto* lp = std::get_if<RationalLpSpec>(&spec)) {
            agent["lambda"] = lp->lambda;
            agent["ewma_decay"] = lp->ewma_decay;
            agent["alpha"] = lp->initial_alpha;
            agent["beta"] = lp->initial_beta;
        } else if (const auto* trader = std::get_if<TraderSpec>(&spec)) {
            json size;
            if (trader->size.kind == SizeDistribution::Kind::Fixed) {
                size["kind"] = "fixed";
                size["value"] = trader->size.value;
            } else {
                size["kind"] = "lognormal";
                size["log_mean"] = trader->size.log_mean;
                size["log_sigma"] = trader->size.log_sigma;
            }
            agent["size"] = size;
            agent["max_premium"] = trader->max_premium;
            agent["direction_prob"] = trader->direction_prob;
        }
        agents.push_back(agent);
    }
    document["agents"] = agents;
    document["output"] = {{"directory", scenario.output.directory},
                          {"cadence", scenario.output.cadence}};
    return document.dump(2) + "\n";
}

std::string timeseries_csv(const SimulationConfig& config,
                           const SimulationResult& result, int cadence) {
    if (cadence < 1) {
        throw std::invalid_argument("cadence must be at least 1");
    }

    std::string csv = "step,m_p,m_u,band_lo,band_hi,R_alpha,R_beta,k,uni_supply";
    for (std::size_t i = 0; i < config.agents.size(); ++i) {
        csv += ",u" + std::to_string(i) + "_" + agent_kind_name(config.agents[i]);
    }
    csv += "\n";

    const int last_step =
        result.records.empty() ? 0 : result.records.back().step;
    for (const TimeStepRecord& record : result.records) {
        if (!emitted(record, cadence, last_step)) {
            continue;
        }
        csv += std::to_string(record.step);
        for (const double value :
             {record.m_p, record.m_u, record.band_lo, record.band_hi,
              record.reserve_alpha, record.reserve_beta, record.k,
              record.uni_supply}) {
            csv += ",";
            csv += detail::format_double(value);
        }
        for (const double utility : record.utilities) {
            csv += ",";
            csv += detail::format_double(utility);
        }
        csv += "\n";
    }
    return csv;
}

std::string run_report(const SimulationConfig& config, const SimulationResult& result,
                       int cadence) {
    if (cadence < 1) {
        throw std::invalid_argument("cadence must be at least 1");
    }
    if (result.records.empty()) {
        throw std::invalid_argument("cannot report on an empty result");
    }

    const int last_step = result.records.back().step;
    std::size_t rows = 0;
    std::size_t in_band = 0;
    for (const TimeStepRecord& record : result.records) {
        if (!emitted(record, cadence, last_step)) {
            continue;
        }
        ++rows;
        // Tolerance expressed through an emitted column so the statistic can
        // be recomputed from the CSV alone.
        const double tolerance = 1e-9 * record.band_hi;
        if (record.m_u >= record.band_lo - tolerance &&
            record.m_u <= record.band_hi + tolerance) {
            ++in_band;
        }
    }

    const TimeStepRecord& final_record = result.records.back();
    double arbitrageur_profit = 0.0;
    json utilities = json::array();
    for (std::size_t i = 0; i < config.agents.size(); ++i) {
        utilities.push_back(final_record.utilities[i]);
        if (std::holds_alternative<ArbitrageurSpec>(config.agents[i])) {
            arbitrageur_profit += final_record.utilities[i];
        }
    }

    json report;
    report["seed"] = config.seed;
    report["steps"] = config.steps;
    report["gamma"] = config.gamma;
    report["rows"] = rows;
    report["bounds_fraction"] = static_cast<double>(in_band) / static_cast<double>(rows);
    report["final"] = {{"m_p", final_record.m_p},
                       {"m_u", final_record.m_u},
                       {"reserve_alpha", final_record.reserve_alpha},
                       {"reserve_beta", final_record.reserve_beta},
                       {"k", final_record.k},
                       {"uni_supply", final_record.uni_supply}};
    report["final_utilities"] = utilities;
    report["arbitrageur_profit"] = arbitrageur_profit;
    return report.dump(2) + "\n";
}

}  // namespace cfmm
