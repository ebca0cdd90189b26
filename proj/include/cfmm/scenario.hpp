#pragma once

#include <string>

#include "cfmm/simulation.hpp"

namespace cfmm {

struct OutputOptions {
    std::string directory = "out";
    int cadence = 1;  // emit every cadence-th step (step 0 and the last always)
};

struct Scenario {
    SimulationConfig config;
    OutputOptions output;
};

/// Parses and validates a scenario document. Unknown keys are rejected;
/// errors carry the JSON path (and line/column for syntax errors).
Scenario parse_scenario(const std::string& json_text);

std::string serialize_scenario(const Scenario& scenario);

/// Time series with a fixed column order:
///   step,m_p,m_u,band_lo,band_hi,R_alpha,R_beta,k,uni_supply,
/// followed by one utility column per agent (u<i>_<kind>). Values use
/// shortest round-trip formatting, '.' decimals and LF line endings, so a
/// rerun with the same seed is byte-identical. band_lo/band_hi belong to the
/// pre-noise price that governed the step's trading; m_p is the post-noise
/// price carried into the next step.
std::string timeseries_csv(const SimulationConfig& config,
                           const SimulationResult& result, int cadence = 1);

/// JSON summary of a run. Every statistic is recomputable from the emitted
/// CSV rows; seed/steps/gamma are config echoes.
std::string run_report(const SimulationConfig& config, const SimulationResult& result,
                       int cadence = 1);

namespace detail {
/// Shortest round-trip, locale-independent double formatting.
std::string format_double(double value);
}  // namespace detail

}  // namespace cfmm
