#pragma once
// Shared declarations between the kernel variants and the dispatcher.

#include <cstddef>
#include <span>

namespace qcrel::simd::detail {

struct KernelTable {
    void (*exp_pd)(std::span<const double>, std::span<double>);
    void (*norm_cdf_pd)(std::span<const double>, std::span<double>);
    void (*affine_exp_pd)(std::span<const double>, double, double,
                          std::span<double>);
    void (*box_muller_pd)(std::span<const double>, std::span<const double>,
                          std::span<double>, std::span<double>);
    void (*ar2_step_pd)(std::span<const double>, std::span<const double>,
                        std::span<const double>, double, double, double,
                        double, std::span<double>);
    void (*lognorm_pdf_accum_pd)(std::span<const double>,
                                 std::span<const double>, double, double,
                                 double, std::span<double>);
    void (*lane_mean_sd_pd)(const double*, std::size_t, std::size_t, double*,
                            double*);
    void (*lane_max_pd)(const double*, std::size_t, std::size_t, double*);
};

const KernelTable& scalar_table();
#if defined(QCREL_HAVE_AVX2_TU)
const KernelTable& avx2_table();
#endif

}  // namespace qcrel::simd::detail
