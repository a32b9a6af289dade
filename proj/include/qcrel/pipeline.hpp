#pragma once
// Orchestration: scenario -> per-channel filtering -> CoV summaries ->
// calibration -> report artifacts. Fixed-V channels bypass the sampler but
// feed the identical downstream calibration path as MCMC channels.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qcrel/calib.hpp"
#include "qcrel/scenario.hpp"

namespace qcrel::pipeline {

inline constexpr std::string_view kVersion = "0.1.0";

struct ChannelResult {
    std::string name;
    double n_i = 0.0;
    ChannelMode mode = ChannelMode::fixed;
    // index 0 = incoming, then one entry per stage
    std::vector<double> v;        // chain mean of v (fixed mode: configured)
    std::vector<double> ci75_lo;
    std::vector<double> ci75_hi;
    std::vector<double> median_v;
    std::vector<double> predictive_v;  // parameter uncertainty included
    // per stage (mcmc mode only)
    std::vector<double> acceptance_rate;
    std::vector<double> rhat_mu;
    std::vector<double> rhat_q;
    std::vector<std::string> warnings;
};

struct StageCalibration {
    int stage = 0;
    double q_r = 0.0;
    double delta_q = 0.0;
    double r = 1.0;
    double gamma = 0.0;
};

struct RunReport {
    std::string scenario_name;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    std::string version;
    std::string kernels;

    std::vector<ChannelResult> channels;
    double q_r_incoming = 0.0;
    double q_r_incoming_ci75 = 0.0;
    std::vector<StageCalibration> stages;           // expected-V based
    std::vector<calib::ScenarioRow> subsets;        // expected-V based
    std::vector<calib::ScenarioRow> subsets_ci75;   // upper 75% credibility V

    std::string text(const ReportSettings& settings) const;
    std::string json() const;
};

// Builds the calibration channel set from completed channel results, using
// the requested value column ("v", "ci75_hi", ...).
calib::ChannelSet channel_set_from_results(
    const std::vector<ChannelResult>& results, bool upper_ci);

// Full run. Writes report.txt, report.json, scenario.echo, and CSV
// artifacts (trajectories, calibration, subsets, chains, predictive
// densities) under out_dir; returns the report. Deterministic per
// (scenario, seed).
RunReport run(const Scenario& scenario, const std::string& out_dir,
              std::optional<std::uint64_t> seed_override = std::nullopt);

// OC curves for one channel's first-stage plan: paired CSVs over the same
// defect-rate sweep, independent and AR(2).
void emit_oc(const Scenario& scenario, const std::string& channel,
             const std::string& out_dir,
             std::optional<std::uint64_t> seed_override = std::nullopt);

// Resolve a channel's homogeneity degree (wall bindings evaluate the wall
// model at its design point).
double resolve_homogeneity(const Scenario& scenario, const ChannelSpec& ch);

}  // namespace qcrel::pipeline
