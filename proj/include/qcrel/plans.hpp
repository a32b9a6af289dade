#pragma once
// Acceptance sampling plans and their Monte Carlo evaluation.
//
// A plan inspects a batch by drawing samples of a lognormal property and
// applying an accept/reject criterion. Sampling is lane-parallel: replicates
// map onto SIMD lanes, each replicate owning its own RNG stream derived from
// (seed, replicate index), so a batched estimate equals the average over the
// corresponding single-replicate runs.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qcrel/priors.hpp"

namespace qcrel::plans {

// What happens after a failed first sample set of the two-stage unit plan.
// The written rule behind this plan is ambiguous on retests, so all three
// readings are selectable:
//  * combined_must_pass: accept if the first set passes, otherwise accept
//    iff the pooled 2n-sample set passes (default).
//  * second_set_must_pass: accept if the first set passes, otherwise accept
//    iff the fresh second set passes on its own.
//  * both_sets_must_pass: always test two sets, accept iff each passes.
enum class SecondStagePolicy {
    combined_must_pass,
    second_set_must_pass,
    both_sets_must_pass,
};

// Two-stage plan for unit strength: a sample set of n passes when
// mean - k_char*sd >= fc_declared and mean >= fm_declared.
struct UnitTwoStage {
    int n_per_stage = 6;
    double fc_declared = 0.0;  // characteristic strength threshold
    double fm_declared = 0.0;  // mean strength threshold
    double k_char = 1.645;
    SecondStagePolicy policy = SecondStagePolicy::combined_must_pass;
};

// Mean criterion for mortar strength: accept when
// mean > xk_declared + margin_factor * sd.
struct MortarMeanCriterion {
    int n = 3;
    double xk_declared = 0.0;
    double margin_factor = 1.48;
};

// Execution control: accept when none of the n measurements exceeds the
// limit (one-sided upper test on the eccentricity ratio).
struct ExecutionLimit {
    int n = 10;
    double limit = 0.05;
};

using AcceptancePlan =
    std::variant<UnitTwoStage, MortarMeanCriterion, ExecutionLimit>;

void validate(const AcceptancePlan& plan);  // throws std::domain_error

// Second-order autoregression on the underlying normal variates:
// x_k = phi1 x_{k-1} + phi2 x_{k-2} + N(innov_mean_scale * mu_x,
//                                        innov_var_scale * sigma_x^2).
// The sequence starts at x_0 = x_1 = mu_x and the first burn_in entries are
// discarded. Note the printed parameter set implies a stationary variance of
// about 1.111 sigma_x^2; the recursion is implemented exactly as given, with
// no renormalisation.
struct ARModel {
    double phi1 = 0.4;
    double phi2 = 0.2;
    double innov_mean_scale = 0.4;
    double innov_var_scale = 0.8;
    int burn_in = 50;

    bool stationary() const;
    void validate() const;  // throws std::domain_error when non-stationary
    // stationary mean = mean_scale() * mu_x
    double mean_scale() const;
    // stationary sd = sd_scale() * sigma_x
    double sd_scale() const;
};

// Which side of the limit counts as defective.
enum class DefectSide { below, above };

// The underlying normal sequence the AR sampler feeds to a single replicate
// (post burn-in), exposed for diagnostics and stationarity checks.
std::vector<double> ar2_sequence(const priors::ParamPoint& point,
                                 const ARModel& ar, std::size_t steps,
                                 std::uint64_t seed);

// Simulate one batch inspection; deterministic per seed.
bool simulate_batch(const priors::ParamPoint& point, const AcceptancePlan& plan,
                    const std::optional<ARModel>& ar, std::uint64_t seed);

struct PaEstimate {
    double pa;
    double stderr_;  // binomial standard error
};

// Monte Carlo acceptance probability over n_sim replicates; replicate g uses
// the stream mix_seed(seed, g), so the estimate is the exact average of the
// matching simulate_batch calls.
PaEstimate acceptance_probability(const priors::ParamPoint& point,
                                  const AcceptancePlan& plan,
                                  const std::optional<ARModel>& ar,
                                  std::size_t n_sim, std::uint64_t seed);

// P(X < limit) (side = below) or P(X > limit) (side = above).
double defect_rate(const priors::ParamPoint& point, double limit,
                   DefectSide side);

// Closed forms for independent samples.
double execution_acceptance(const priors::ParamPoint& point,
                            const ExecutionLimit& plan);
// Normal approximation (samples treated as N(raw mean, raw sd)); evaluates
// the noncentral-t survival function by Gauss-Legendre quadrature.
double mortar_acceptance_normal_approx(const priors::ParamPoint& point,
                                       const MortarMeanCriterion& plan);
// Noncentral-t survival P(T'_{nu,delta} > t).
double noncentral_t_sf(double t, double nu, double delta);

// The natural defect threshold and side of a plan.
double plan_threshold(const AcceptancePlan& plan);
DefectSide plan_defect_side(const AcceptancePlan& plan);

enum class QualityAxis { defect_rate, mean, cov };

// Sweep spec: levels of the chosen axis, plus the held-fixed parameter.
//  * defect_rate: levels are defect fractions, fixed = q (log-space sd);
//    the level maps to mu through the plan threshold using the stationary
//    marginal when an AR model is supplied.
//  * mean: levels are raw-space means, fixed = q.
//  * cov: levels are raw-space CoVs, fixed = raw-space mean.
struct QualitySweep {
    QualityAxis axis = QualityAxis::defect_rate;
    std::vector<double> levels;
    double fixed = 0.0;
};

struct OCPoint {
    double quality;
    double pa;
    double stderr_;
};

struct OCCurve {
    QualityAxis axis = QualityAxis::defect_rate;
    std::vector<OCPoint> points;  // sorted by quality

    // header "quality,pa,stderr", one row per point, full precision, LF
    std::string to_csv() const;
};

// Map a sweep level to the parameter point it represents.
priors::ParamPoint sweep_point(const QualitySweep& sweep, double level,
                               const AcceptancePlan& plan,
                               const std::optional<ARModel>& ar,
                               DefectSide side);

// One acceptance_probability evaluation per level; points are evaluated in
// parallel with per-point seeds mix_seed(seed, index).
OCCurve oc_curve(const AcceptancePlan& plan, const std::optional<ARModel>& ar,
                 const QualitySweep& sweep, DefectSide side, std::size_t n_sim,
                 std::uint64_t seed);

}  // namespace qcrel::plans
