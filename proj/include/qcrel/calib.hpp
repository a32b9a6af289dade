#pragma once
// Partial safety factor calibration: converts incoming/outgoing parameter
// variabilities into log-space resistance spread Q_R, improvement factors
// and recalibrated gamma values.
//
// Core relations (all in log-space, where reductions add exactly):
//   Q = sqrt(ln(1+V^2))
//   Q_R^2 = sum_i n_i^2 Q_i^2
//   gamma_R = b * exp((alpha_R beta - k) * Q_R)
//   r = exp((alpha_R beta - k) * (Q_R_in - Q_R_out)),  gamma' = gamma_base/r
// With the default alpha_R=0.8, beta=3.8, k=1.645 the coefficient is 1.395;
// it is evaluated exactly, never rounded to 1.4.

#include <string>
#include <vector>

namespace qcrel::calib {

struct CalibrationConfig {
    double alpha_r = 0.8;      // resistance sensitivity
    double beta_t = 3.8;       // target reliability index
    double k_fractile = 1.645; // 5% fractile factor
    double bias_b = 1.0;       // model bias
    double gamma_base = 1.5;   // code baseline gamma

    double coefficient() const { return alpha_r * beta_t - k_fractile; }
    void validate() const;  // throws std::domain_error
};

// One parameter channel of the resistance model. v_out holds the outgoing
// CoV after each quality-control stage; an empty v_out means the channel is
// never controlled (it keeps v_in at every stage). A channel with fewer
// stages than requested carries its last value forward.
struct Channel {
    std::string name;
    double n_i = 0.0;  // homogeneity degree (elasticity weight)
    double v_in = 0.0;
    std::vector<double> v_out;

    // CoV at stage (0 = incoming).
    double v_at(int stage) const;
    // non-fatal issues (e.g. v_out increases across stages)
    std::vector<std::string> warnings() const;
};

struct ChannelSet {
    std::vector<Channel> channels;

    void validate() const;  // throws std::domain_error
    const Channel& find(const std::string& name) const;
};

double q_of_v(double v);
double v_of_q(double q);

// Q_R at a stage: all channels at their stage value (uncontrolled channels
// sit at v_in). Throws naming the channel on invalid data.
double aggregate_qr(const ChannelSet& set, int stage);

// Q_R with only the named channels taken at `stage`; everyone else stays at
// v_in. Unknown names throw.
double aggregate_qr_controlled(const ChannelSet& set,
                               const std::vector<std::string>& controlled,
                               int stage);

double improvement_factor(double q_in, double q_out,
                          const CalibrationConfig& cfg);
double partial_safety_factor(double q_r, const CalibrationConfig& cfg);
double improved_gamma(const CalibrationConfig& cfg, double r);

struct SubsetSpec {
    std::string name;
    std::vector<std::string> channels;  // controlled channels
    int stage = 1;
};

struct ScenarioRow {
    std::string name;
    double r = 1.0;
    double gamma = 0.0;
};

// One row per subset: r and gamma when only the subset's channels are
// controlled at the given stage. Full precision retained; rounding is a
// report concern.
std::vector<ScenarioRow> scenario_table(const ChannelSet& set,
                                        const std::vector<SubsetSpec>& subsets,
                                        const CalibrationConfig& cfg);

std::string scenario_table_csv(const std::vector<ScenarioRow>& rows);

}  // namespace qcrel::calib
