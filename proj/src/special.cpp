#include "qcrel/special.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qcrel::special {
namespace {

constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;
constexpr double kInvSqrt2Pi =
    std::numbers::inv_sqrtpi_v<double> * (1.0 / std::numbers::sqrt2);

// Crude quantile seed: logistic-style approximation, relative error a few
// percent, good enough for Newton to converge in three steps.
double icdf_seed(double p) {
    const double pl = p < 0.5 ? p : 1.0 - p;
    const double t = std::sqrt(-2.0 * std::log(pl));
    // Rational fit in t, accuracy ~1e-2 across (0, 0.5]
    const double x = t - (2.30753 + 0.27061 * t) /
                             (1.0 + t * (0.99229 + 0.04481 * t));
    return p < 0.5 ? -x : x;
}

}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_icdf(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("norm_icdf: p must lie in (0,1)");
    double x = icdf_seed(p);
    for (int it = 0; it < 3; ++it) {
        const double err = norm_cdf(x) - p;
        const double d = norm_pdf(x);
        if (d <= 0.0) break;
        x -= err / d;
    }
    return x;
}

}  // namespace qcrel::special
