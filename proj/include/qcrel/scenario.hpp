#pragma once
// Scenario files: a small strict TOML-like text format describing channels,
// plans, priors, the wall model and calibration settings. Unknown keys are
// errors; all defaults are filled in and echoed back canonically, and the
// provenance hash is taken over that echo.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qcrel/bayes.hpp"
#include "qcrel/calib.hpp"
#include "qcrel/plans.hpp"
#include "qcrel/wall.hpp"

namespace qcrel::pipeline {

// Validation/schema failure; carries the offending key path or line.
struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ReportSettings {
    int round_q = 3;
    int round_r = 2;
    int round_gamma = 2;
    std::string out_dir = "out";
};

struct OCSettings {
    std::size_t n_sim = 20000;
    std::size_t levels = 15;
    double p_min = 0.01;
    double p_max = 0.60;
};

struct WallConfig {
    wall::WallGeometry geom;
    wall::MasonrySpec spec;
};

enum class WallBinding { f_b, f_m, r_e };
using HomogeneitySource = std::variant<double, WallBinding>;

struct PriorSpec {
    double mean = 0.0;
    double v0 = 0.0;
    int n = 6;
    double kappa = 0.0;  // 0 -> defaults to n
};

struct StageSpec {
    plans::AcceptancePlan plan;
    bool use_ar = false;
};

enum class ChannelMode { mcmc, fixed };

struct ChannelSpec {
    std::string name;
    ChannelMode mode = ChannelMode::fixed;
    plans::DefectSide defect_side = plans::DefectSide::below;
    HomogeneitySource homogeneity = 1.0;
    // mcmc mode
    PriorSpec prior;
    std::optional<plans::ARModel> ar;
    std::vector<StageSpec> stages;
    // fixed mode
    double v_in = 0.0;
    std::vector<double> v_out;
};

struct Scenario {
    std::string name;
    std::uint64_t seed = 1;
    calib::CalibrationConfig calib;
    bayes::MCMCConfig mcmc;  // chain settings; seeds derive from `seed`
    std::optional<WallConfig> wall;
    std::vector<ChannelSpec> channels;
    std::vector<calib::SubsetSpec> subsets;
    ReportSettings report;
    OCSettings oc;

    int n_stages() const;  // common stage count of the controlled channels
    std::string echo() const;         // canonical round-trippable text
    std::uint64_t config_hash() const;  // FNV-1a over echo()
};

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text, const std::string& origin);

}  // namespace qcrel::pipeline
