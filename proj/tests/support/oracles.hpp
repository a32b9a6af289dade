#pragma once
// Test-only oracles. Everything here is deliberately independent of the
// implementation paths it checks: plain trapezoid quadrature, libm-based
// normal functions, std::mt19937_64 sampling.

#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

// Phi via std::erfc (libm).
double norm_cdf(double x);
double norm_pdf(double x);

// 2-D trapezoid quadrature of f over [ax,bx] x [ay,by] on an n x m grid.
double trapezoid_2d(const std::function<double(double, double)>& f, double ax,
                    double bx, double ay, double by, int nx, int ny);

// 1-D trapezoid quadrature.
double trapezoid(const std::function<double(double)>& f, double a, double b,
                 int n);

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b);

// Noncentral-t survival P(T' > t) by dense trapezoid integration over the
// chi distribution (s = sqrt(W), W ~ chi^2_nu).
double noncentral_t_sf(double t, double nu, double delta);

// Marsaglia-style lognormal batch mean/sd Monte Carlo using mt19937_64 --
// used to cross-check the production sampler's statistics.
struct MomentEstimate {
    double mean;
    double sd;
};
MomentEstimate lognormal_moments_mc(double mu, double q, std::size_t n,
                                    std::uint64_t seed);

}  // namespace oracle
