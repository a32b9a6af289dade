#pragma once
// Bayesian updating of parameter distributions through the acceptance
// filter. The posterior over (mu, q) is proportional to
// P_a(mu, q) * prior(mu, q); it is sampled with random-walk
// Metropolis-Hastings in (mu, ln q) coordinates. Successive quality-control
// stages multiply further acceptance factors into the same target, so stage
// k targets prior * P_a,1 * ... * P_a,k.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcrel/plans.hpp"
#include "qcrel/priors.hpp"

namespace qcrel::bayes {

// log P_a(mu, q); -inf marks zero acceptance.
using LogPaFn = std::function<double(double mu, double q)>;

enum class PaEstimatorKind {
    auto_select,  // closed form where exact/documented, grid otherwise
    closed_form,
    monte_carlo,
    grid_interpolation,
};

struct GridSpec {
    std::size_t n_mu = 60;
    std::size_t n_logq = 60;
    std::size_t n_sim_per_node = 2000;
    double pad = 0.15;  // relative widening of the prior's sampled span
};

struct PaEstimatorCfg {
    PaEstimatorKind kind = PaEstimatorKind::auto_select;
    std::size_t n_sim = 2000;  // per monte_carlo evaluation
    GridSpec grid;
};

struct MCMCConfig {
    int n_chains = 4;
    long n_samples = 50000;  // per chain, burn-in included
    long burn_in = 10000;
    // Initial random-walk scales; <= 0 means "half the prior spread".
    // During burn-in both scales adapt jointly towards ~28% acceptance and
    // freeze before the retained phase.
    double proposal_scale_mu = 0.0;
    double proposal_scale_logq = 0.0;
    PaEstimatorCfg pa;
    std::uint64_t seed = 1;

    void validate() const;
};

struct ParamChain {
    std::vector<priors::ParamPoint> samples;  // post burn-in, all chains
    std::vector<int> chain_ids;               // parallel to samples
    double acceptance_rate = 0.0;
    double rhat_mu = 0.0;  // split-chain potential scale reduction
    double rhat_q = 0.0;
    bool converged = true;  // false flags rhat > 1.1 (warning, not error)

    // header "chain,iter,mu,q", full precision
    std::string to_csv() const;
};

struct PredictiveDensity {
    struct Node {
        double x;
        double density;
    };
    std::vector<Node> grid;
    double normalization_check = 0.0;  // pre-normalisation trapezoid integral

    std::string to_csv() const;  // header "x,density"
};

struct CoVSummary {
    double mean_v = 0.0;
    double median_v = 0.0;
    double ci75_lo = 0.0;  // 12.5% empirical quantile
    double ci75_hi = 0.0;  // 87.5% empirical quantile
};

// Acceptance-factor construction for a (plan, AR) pair. auto_select picks
// the execution closed form and the mortar normal-approximation closed form
// when no AR model is attached, and a frozen bilinear P_a grid (Monte Carlo
// at the nodes, spanning the prior bulk) otherwise.
LogPaFn make_log_pa(const plans::AcceptancePlan& plan,
                    const std::optional<plans::ARModel>& ar,
                    const PaEstimatorCfg& cfg,
                    const priors::NormalGammaHyper& prior,
                    std::uint64_t seed);

// Generic random-walk MH over (mu, ln q); exposed for property tests.
ParamChain run_random_walk(
    const std::function<double(double mu, double logq)>& log_target,
    const std::vector<std::pair<double, double>>& init, const MCMCConfig& cfg);

// Posterior for one stage. Throws std::runtime_error("empty posterior...")
// when the plan rejects everywhere the prior has mass.
ParamChain run_posterior(const priors::NormalGammaHyper& prior,
                         const plans::AcceptancePlan& plan,
                         const std::optional<plans::ARModel>& ar,
                         const MCMCConfig& cfg);

// Same with explicit acceptance factors (all applied jointly).
ParamChain run_posterior_with(const priors::NormalGammaHyper& prior,
                              const std::vector<LogPaFn>& factors,
                              const MCMCConfig& cfg);

struct StagePlan {
    plans::AcceptancePlan plan;
    std::optional<plans::ARModel> ar;
};

// One chain per stage; stage k targets the prior times the first k
// acceptance factors.
std::vector<ParamChain> sequential_update(const priors::NormalGammaHyper& prior,
                                          const std::vector<StagePlan>& stages,
                                          const MCMCConfig& cfg);

// Predictive density on a strictly increasing positive grid: the chain
// average of the lognormal pdf, renormalised on the grid. Throws when the
// grid captures less than 95% of the predictive mass, naming the deficient
// tail.
PredictiveDensity predictive_density(const ParamChain& chain,
                                     std::span<const double> grid);

// Per-sample predictive CoV v = sqrt(exp(q^2)-1) summarised over the chain;
// the 75% interval is equal-tailed (12.5%/87.5% empirical quantiles).
CoVSummary cov_summary(const ParamChain& chain);

// CoV of the predictive distribution itself (parameter uncertainty
// included), from the chain's mixture moments.
double predictive_moment_cov(const ParamChain& chain);

}  // namespace qcrel::bayes
