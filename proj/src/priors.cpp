#include "qcrel/priors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qcrel/rng.hpp"
#include "qcrel/special.hpp"

namespace qcrel::priors {
namespace {

void require_finite_positive(double v, const char* what) {
    if (!std::isfinite(v) || v <= 0.0)
        throw std::domain_error(std::string(what) +
                                " must be finite and positive");
}

}  // namespace

double q_from_cov(double v) {
    require_finite_positive(v, "cov");
    return std::sqrt(std::log1p(v * v));
}

double cov_from_q(double q) {
    require_finite_positive(q, "q");
    return std::sqrt(std::expm1(q * q));
}

LognormalSpec LognormalSpec::from_mean_cov(double mean, double cov) {
    require_finite_positive(mean, "mean");
    const double q = q_from_cov(cov);
    return {mean, cov, q, std::log(mean) - 0.5 * q * q};
}

LognormalSpec LognormalSpec::from_log(double mu_ln, double q) {
    require_finite_positive(q, "q");
    if (!std::isfinite(mu_ln))
        throw std::domain_error("mu_ln must be finite");
    return {std::exp(mu_ln + 0.5 * q * q), cov_from_q(q), q, mu_ln};
}

void NormalGammaHyper::validate() const {
    if (!std::isfinite(mu0)) throw std::domain_error("mu0 must be finite");
    require_finite_positive(kappa0, "kappa0");
    require_finite_positive(alpha0, "alpha0");
    require_finite_positive(beta0, "beta0");
}

NormalGammaHyper hyper_from_prior(double mean, double v0, int n) {
    if (n < 1) throw std::domain_error("n must be >= 1");
    return hyper_from_prior(mean, v0, n, static_cast<double>(n));
}

NormalGammaHyper hyper_from_prior(double mean, double v0, int n,
                                  double kappa0) {
    require_finite_positive(mean, "mean");
    require_finite_positive(v0, "v0");
    require_finite_positive(kappa0, "kappa0");
    if (n < 1) throw std::domain_error("n must be >= 1");
    const double q0 = q_from_cov(v0);
    const double alpha0 = 0.5 * static_cast<double>(n);
    NormalGammaHyper h{std::log(mean) - 0.5 * q0 * q0, kappa0, alpha0,
                       alpha0 * q0 * q0};
    h.validate();
    return h;
}

double normal_gamma_logpdf(const NormalGammaHyper& h, const ParamPoint& p) {
    h.validate();
    if (!(p.q > 0.0)) throw std::domain_error("q must be positive");
    const double log_q = std::log(p.q);
    const double tau = 1.0 / (p.q * p.q);
    const double log_tau = -2.0 * log_q;
    const double d = p.mu - h.mu0;
    // Gamma(tau; alpha0, beta0) * Normal(mu; mu0, 1/(kappa0 tau)),
    // times |dtau/dq| = 2 q^-3.
    return h.alpha0 * std::log(h.beta0) - std::lgamma(h.alpha0) +
           (h.alpha0 - 1.0) * log_tau - h.beta0 * tau +
           0.5 * (std::log(h.kappa0) + log_tau -
                  std::log(2.0 * std::numbers::pi)) -
           0.5 * h.kappa0 * tau * d * d + std::numbers::ln2 - 3.0 * log_q;
}

std::vector<ParamPoint> sample_prior(const NormalGammaHyper& h,
                                     std::size_t count, std::uint64_t seed) {
    h.validate();
    if (count < 1) throw std::domain_error("count must be >= 1");
    rng::Xoshiro256pp gen(seed);
    std::vector<ParamPoint> out(count);
    for (auto& p : out) {
        const double tau = gen.gamma(h.alpha0, h.beta0);
        p.q = 1.0 / std::sqrt(tau);
        p.mu = h.mu0 + gen.normal() / std::sqrt(h.kappa0 * tau);
    }
    return out;
}

double lognormal_cdf(const LognormalSpec& spec, double x) {
    return lognormal_cdf(ParamPoint{spec.mu_ln, spec.q}, x);
}

double lognormal_cdf(const ParamPoint& p, double x) {
    if (!(x > 0.0)) throw std::domain_error("lognormal_cdf: x must be > 0");
    if (!(p.q > 0.0)) throw std::domain_error("lognormal_cdf: q must be > 0");
    return special::norm_cdf((std::log(x) - p.mu) / p.q);
}

}  // namespace qcrel::priors
