// Kernel dispatch: picks the best available ISA once, honours the
// QCREL_SIMD environment variable, and lets tests switch variants.

#include "qcrel/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

#include "kernels_internal.hpp"

namespace qcrel::simd {
namespace {

using detail::KernelTable;

bool cpu_has_avx2() {
#if defined(QCREL_HAVE_AVX2_TU) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* table_for(Isa isa) {
#if defined(QCREL_HAVE_AVX2_TU)
    if (isa == Isa::avx2) return &detail::avx2_table();
#endif
    (void)isa;
    return &detail::scalar_table();
}

struct Dispatch {
    std::atomic<const KernelTable*> table;
    std::atomic<Isa> isa;

    Dispatch() {
        Isa pick = cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
        if (const char* env = std::getenv("QCREL_SIMD")) {
            if (std::strcmp(env, "scalar") == 0) {
                pick = Isa::scalar;
            } else if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) {
                pick = Isa::avx2;
            }
        }
        isa.store(pick);
        table.store(table_for(pick));
    }
};

Dispatch& dispatch() {
    static Dispatch d;
    return d;
}

}  // namespace

bool isa_available(Isa isa) {
    return isa == Isa::scalar || (isa == Isa::avx2 && cpu_has_avx2());
}

Isa best_isa() { return cpu_has_avx2() ? Isa::avx2 : Isa::scalar; }

Isa active_isa() { return dispatch().isa.load(); }

void force_isa(Isa isa) {
    if (!isa_available(isa))
        throw std::invalid_argument(std::string("simd ISA unavailable: ") +
                                    std::string(isa_name(isa)));
    dispatch().isa.store(isa);
    dispatch().table.store(table_for(isa));
}

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

void exp_pd(std::span<const double> x, std::span<double> out) {
    dispatch().table.load()->exp_pd(x, out);
}

void norm_cdf_pd(std::span<const double> x, std::span<double> out) {
    dispatch().table.load()->norm_cdf_pd(x, out);
}

void affine_exp_pd(std::span<const double> z, double mu, double q,
                   std::span<double> out) {
    dispatch().table.load()->affine_exp_pd(z, mu, q, out);
}

void box_muller_pd(std::span<const double> u1, std::span<const double> u2,
                   std::span<double> z0, std::span<double> z1) {
    dispatch().table.load()->box_muller_pd(u1, u2, z0, z1);
}

void ar2_step_pd(std::span<const double> x1, std::span<const double> x2,
                 std::span<const double> z, double phi1, double phi2,
                 double c_mean, double c_sd, std::span<double> out) {
    dispatch().table.load()->ar2_step_pd(x1, x2, z, phi1, phi2, c_mean, c_sd,
                                         out);
}

void lognorm_pdf_accum_pd(std::span<const double> log_x,
                          std::span<const double> inv_x, double mu, double q,
                          double w, std::span<double> acc) {
    dispatch().table.load()->lognorm_pdf_accum_pd(log_x, inv_x, mu, q, w, acc);
}

void lane_mean_sd_pd(const double* x, std::size_t rows, std::size_t lanes,
                     double* mean, double* sd) {
    dispatch().table.load()->lane_mean_sd_pd(x, rows, lanes, mean, sd);
}

void lane_max_pd(const double* x, std::size_t rows, std::size_t lanes,
                 double* out) {
    dispatch().table.load()->lane_max_pd(x, rows, lanes, out);
}

}  // namespace qcrel::simd
