#pragma once
// Prior distributions of material and execution parameters: lognormal
// properties whose log-space mean and spread carry normal-gamma parameter
// uncertainty.
//
// Conventions used throughout the project:
//  * every property X is lognormal; q is the log-space standard deviation,
//    mu the log-space mean, V = sigma/mu the raw-space coefficient of
//    variation, with q = sqrt(ln(1+V^2)).
//  * parameter uncertainty lives in (mu, precision tau = q^-2) with a
//    normal-gamma law: tau ~ Gamma(alpha0, rate beta0),
//    mu | tau ~ N(mu0, 1/(kappa0 tau)).
//  * densities over (mu, q) include the tau -> q Jacobian 2 q^-3, matching
//    what sample_prior draws.

#include <cstdint>
#include <vector>

namespace qcrel::priors {

// q = sqrt(ln(1+v^2)) and its inverse; exact mutual inverses to rounding.
double q_from_cov(double v);
double cov_from_q(double q);

// A lognormal property pinned to known parameters (no parameter
// uncertainty).
struct LognormalSpec {
    double mean;   // raw-space mean, > 0
    double cov;    // V = sigma/mu, > 0
    double q;      // log-space standard deviation
    double mu_ln;  // log-space mean = ln(mean) - q^2/2

    static LognormalSpec from_mean_cov(double mean, double cov);
    static LognormalSpec from_log(double mu_ln, double q);
};

// A single point in parameter space.
struct ParamPoint {
    double mu;  // log-space mean
    double q;   // log-space standard deviation, > 0
};

struct NormalGammaHyper {
    double mu0;     // prior log-space mean
    double kappa0;  // precision weight (pseudo-sample count), > 0
    double alpha0;  // gamma shape, > 0
    double beta0;   // gamma rate, > 0

    void validate() const;  // throws std::domain_error
};

// Hyperparameters from (raw mean, prior CoV, pseudo-sample count):
// Q0 = sqrt(ln(1+v0^2)), mu0 = ln(mean) - Q0^2/2, kappa0 = n,
// alpha0 = n/2, beta0 = alpha0 * Q0^2. Q0 is carried at full precision.
NormalGammaHyper hyper_from_prior(double mean, double v0, int n);

// Same, with kappa0 decoupled from n (scenario-level knob).
NormalGammaHyper hyper_from_prior(double mean, double v0, int n,
                                  double kappa0);

// Log density of the normal-gamma prior at (mu, q), including the tau -> q
// Jacobian; the convention matches sample_prior exactly.
double normal_gamma_logpdf(const NormalGammaHyper& h, const ParamPoint& p);

// i.i.d. draws from the prior; deterministic for a fixed seed.
std::vector<ParamPoint> sample_prior(const NormalGammaHyper& h,
                                     std::size_t count, std::uint64_t seed);

// P(X <= x) for the lognormal property; x must be positive.
double lognormal_cdf(const LognormalSpec& spec, double x);
double lognormal_cdf(const ParamPoint& p, double x);

}  // namespace qcrel::priors
