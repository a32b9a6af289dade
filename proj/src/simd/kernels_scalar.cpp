// Scalar reference kernels. These define the semantics the SIMD variants
// must reproduce; they lean on libm and stay deliberately simple.

#include <cassert>
#include <cmath>
#include <numbers>

#include "kernels_internal.hpp"

namespace qcrel::simd::detail {
namespace {

constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;
constexpr double kInvSqrt2Pi =
    std::numbers::inv_sqrtpi_v<double> * (1.0 / std::numbers::sqrt2);

void s_exp_pd(std::span<const double> x, std::span<double> out) {
    assert(x.size() == out.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < -708.0) {
            out[i] = 0.0;
        } else if (x[i] > 709.0) {
            out[i] = HUGE_VAL;
        } else {
            out[i] = std::exp(x[i]);
        }
    }
}

void s_norm_cdf_pd(std::span<const double> x, std::span<double> out) {
    assert(x.size() == out.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = 0.5 * std::erfc(-x[i] * kInvSqrt2);
}

void s_affine_exp_pd(std::span<const double> z, double mu, double q,
                     std::span<double> out) {
    assert(z.size() == out.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = std::exp(mu + q * z[i]);
}

void s_box_muller_pd(std::span<const double> u1, std::span<const double> u2,
                     std::span<double> z0, std::span<double> z1) {
    assert(u1.size() == u2.size() && u1.size() == z0.size() &&
           u1.size() == z1.size());
    for (std::size_t i = 0; i < u1.size(); ++i) {
        const double r = std::sqrt(-2.0 * std::log(u1[i]));
        const double theta = 2.0 * std::numbers::pi * u2[i];
        z0[i] = r * std::cos(theta);
        z1[i] = r * std::sin(theta);
    }
}

void s_ar2_step_pd(std::span<const double> x1, std::span<const double> x2,
                   std::span<const double> z, double phi1, double phi2,
                   double c_mean, double c_sd, std::span<double> out) {
    assert(x1.size() == out.size() && x2.size() == out.size() &&
           z.size() == out.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = phi1 * x1[i] + phi2 * x2[i] + c_mean + c_sd * z[i];
}

void s_lognorm_pdf_accum_pd(std::span<const double> log_x,
                            std::span<const double> inv_x, double mu, double q,
                            double w, std::span<double> acc) {
    assert(log_x.size() == acc.size() && inv_x.size() == acc.size());
    const double a = -0.5 / (q * q);
    const double c = w * kInvSqrt2Pi / q;
    for (std::size_t i = 0; i < acc.size(); ++i) {
        const double d = log_x[i] - mu;
        acc[i] += c * inv_x[i] * std::exp(a * d * d);
    }
}

void s_lane_mean_sd_pd(const double* x, std::size_t rows, std::size_t lanes,
                       double* mean, double* sd) {
    for (std::size_t s = 0; s < lanes; ++s) {
        double acc = 0.0;
        for (std::size_t r = 0; r < rows; ++r) acc += x[r * lanes + s];
        const double m = acc / static_cast<double>(rows);
        mean[s] = m;
        if (rows < 2) {
            sd[s] = 0.0;
            continue;
        }
        double m2 = 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
            const double d = x[r * lanes + s] - m;
            m2 += d * d;
        }
        sd[s] = std::sqrt(m2 / static_cast<double>(rows - 1));
    }
}

void s_lane_max_pd(const double* x, std::size_t rows, std::size_t lanes,
                   double* out) {
    for (std::size_t s = 0; s < lanes; ++s) {
        double m = x[s];
        for (std::size_t r = 1; r < rows; ++r) {
            const double v = x[r * lanes + s];
            if (v > m) m = v;
        }
        out[s] = m;
    }
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{
        s_exp_pd,      s_norm_cdf_pd,          s_affine_exp_pd,
        s_box_muller_pd, s_ar2_step_pd,        s_lognorm_pdf_accum_pd,
        s_lane_mean_sd_pd, s_lane_max_pd,
    };
    return table;
}

}  // namespace qcrel::simd::detail
