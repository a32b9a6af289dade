#pragma once
// Runtime-dispatched numeric kernels.
//
// Every kernel exists in a scalar reference implementation and, on x86-64,
// an AVX2+FMA variant; the active variant is picked once at startup from
// CPUID and can be overridden with the QCREL_SIMD environment variable
// ("scalar" or "avx2") or force_isa() in tests. Batched data uses a
// [row][lane] row-major layout: the lane (replicate) index runs fastest, so
// independent Monte Carlo replicates map onto SIMD lanes.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace qcrel::simd {

enum class Isa { scalar, avx2 };

bool isa_available(Isa isa);
Isa best_isa();
Isa active_isa();
void force_isa(Isa isa);  // throws std::invalid_argument if unavailable
std::string_view isa_name(Isa isa);

// out[i] = exp(x[i]). Full double accuracy for |x| <= ~700; clamps to
// 0 below -708 and to +inf above +709 instead of producing subnormals.
void exp_pd(std::span<const double> x, std::span<double> out);

// out[i] = Phi(x[i]), the standard normal CDF.
void norm_cdf_pd(std::span<const double> x, std::span<double> out);

// out[i] = exp(mu + q * z[i])
void affine_exp_pd(std::span<const double> z, double mu, double q,
                   std::span<double> out);

// Box-Muller transform of two uniform(0,1) arrays into two standard normal
// arrays: z0 = sqrt(-2 ln u1) cos(2 pi u2), z1 = sqrt(-2 ln u1) sin(2 pi u2).
void box_muller_pd(std::span<const double> u1, std::span<const double> u2,
                   std::span<double> z0, std::span<double> z1);

// One autoregressive step across lanes:
// out[s] = phi1*x1[s] + phi2*x2[s] + c_mean + c_sd*z[s]
void ar2_step_pd(std::span<const double> x1, std::span<const double> x2,
                 std::span<const double> z, double phi1, double phi2,
                 double c_mean, double c_sd, std::span<double> out);

// acc[i] += w * lognormal_pdf(x_i; mu, q), where the caller precomputed
// log_x[i] = ln(x_i) and inv_x[i] = 1/x_i once for the whole grid.
void lognorm_pdf_accum_pd(std::span<const double> log_x,
                          std::span<const double> inv_x, double mu, double q,
                          double w, std::span<double> acc);

// Per-lane mean and sample standard deviation (n-1 divisor, sd = 0 when
// rows < 2) over a [rows x lanes] row-major block.
void lane_mean_sd_pd(const double* x, std::size_t rows, std::size_t lanes,
                     double* mean, double* sd);

// Per-lane maximum over a [rows x lanes] row-major block. rows >= 1.
void lane_max_pd(const double* x, std::size_t rows, std::size_t lanes,
                 double* out);

}  // namespace qcrel::simd
