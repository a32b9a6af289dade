#include "qcrel/plans.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qcrel/format.hpp"
#include "qcrel/parallel.hpp"
#include "qcrel/rng.hpp"
#include "qcrel/simd/kernels.hpp"
#include "qcrel/special.hpp"

namespace qcrel::plans {
namespace {

constexpr std::size_t kBlockLanes = 8192;

int plan_max_draws(const AcceptancePlan& plan) {
    return std::visit(
        [](const auto& p) -> int {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, UnitTwoStage>)
                return 2 * p.n_per_stage;
            else if constexpr (std::is_same_v<T, MortarMeanCriterion>)
                return p.n;
            else
                return p.n;
        },
        plan);
}

// All draws for a replicate block, row-major [row][lane]. Each lane owns a
// stream derived from (seed, lane0 + lane); normals are generated in row
// pairs so every lane consumes exactly two uniforms per pair.
void fill_normals(std::vector<double>& z, std::size_t rows, std::size_t lanes,
                  std::uint64_t seed, std::size_t lane0) {
    z.assign(rows * lanes, 0.0);
    if (rows == 0) return;
    std::vector<rng::Xoshiro256pp> streams;
    streams.reserve(lanes);
    for (std::size_t s = 0; s < lanes; ++s)
        streams.emplace_back(rng::mix_seed(seed, lane0 + s));

    std::vector<double> u1(lanes), u2(lanes), scratch(lanes);
    for (std::size_t r = 0; r < rows; r += 2) {
        for (std::size_t s = 0; s < lanes; ++s) {
            u1[s] = streams[s].uniform01();
            u2[s] = streams[s].uniform01();
        }
        double* z0 = z.data() + r * lanes;
        double* z1 = (r + 1 < rows) ? z.data() + (r + 1) * lanes
                                    : scratch.data();
        simd::box_muller_pd(u1, u2, {z0, lanes}, {z1, lanes});
    }
}

// Underlying normals after the AR recursion, rows [burn_in, burn_in+rows).
void fill_underlying_ar(std::vector<double>& x_out,
                        const priors::ParamPoint& point, std::size_t rows,
                        const ARModel& ar, std::uint64_t seed,
                        std::size_t lane0, std::size_t lanes) {
    ar.validate();
    const std::size_t burn = static_cast<std::size_t>(ar.burn_in);
    const std::size_t len = burn + rows;  // underlying sequence length
    const std::size_t rec = len > 2 ? len - 2 : 0;  // recursion steps
    std::vector<double> z;
    fill_normals(z, rec, lanes, seed, lane0);

    std::vector<double> x(std::max<std::size_t>(len, 2) * lanes);
    std::fill_n(x.data(), 2 * lanes, point.mu);  // x_0 = x_1 = mu
    const double c_mean = ar.innov_mean_scale * point.mu;
    const double c_sd = std::sqrt(ar.innov_var_scale) * point.q;
    for (std::size_t i = 2; i < len; ++i) {
        simd::ar2_step_pd({x.data() + (i - 1) * lanes, lanes},
                          {x.data() + (i - 2) * lanes, lanes},
                          {z.data() + (i - 2) * lanes, lanes}, ar.phi1,
                          ar.phi2, c_mean, c_sd,
                          {x.data() + i * lanes, lanes});
    }
    x_out.assign(x.begin() + static_cast<std::ptrdiff_t>(burn * lanes),
                 x.begin() + static_cast<std::ptrdiff_t>(len * lanes));
}

// Lognormal draws for `draw_rows` consecutive inspections of every lane,
// through the AR recursion on the underlying normals when requested.
void fill_samples(std::vector<double>& y, const priors::ParamPoint& point,
                  int draw_rows, const std::optional<ARModel>& ar,
                  std::uint64_t seed, std::size_t lane0, std::size_t lanes) {
    const std::size_t rows = static_cast<std::size_t>(draw_rows);
    y.resize(rows * lanes);
    if (!ar) {
        std::vector<double> z;
        fill_normals(z, rows, lanes, seed, lane0);
        for (std::size_t r = 0; r < rows; ++r)
            simd::affine_exp_pd({z.data() + r * lanes, lanes}, point.mu,
                                point.q, {y.data() + r * lanes, lanes});
        return;
    }
    std::vector<double> x;
    fill_underlying_ar(x, point, rows, *ar, seed, lane0, lanes);
    simd::exp_pd({x.data(), rows * lanes}, {y.data(), rows * lanes});
}

struct SetStats {
    std::vector<double> mean, sd;
};

void set_stats(const std::vector<double>& y, std::size_t row0,
               std::size_t rows, std::size_t lanes, SetStats& out) {
    out.mean.resize(lanes);
    out.sd.resize(lanes);
    simd::lane_mean_sd_pd(y.data() + row0 * lanes, rows, lanes,
                          out.mean.data(), out.sd.data());
}

std::size_t count_accepted(const priors::ParamPoint& point,
                           const AcceptancePlan& plan,
                           const std::optional<ARModel>& ar,
                           std::uint64_t seed, std::size_t lane0,
                           std::size_t lanes) {
    if (!(point.q > 0.0)) throw std::domain_error("point.q must be positive");
    std::vector<double> y;
    fill_samples(y, point, plan_max_draws(plan), ar, seed, lane0, lanes);

    std::size_t accepted = 0;
    if (const auto* ex = std::get_if<ExecutionLimit>(&plan)) {
        std::vector<double> mx(lanes);
        simd::lane_max_pd(y.data(), static_cast<std::size_t>(ex->n), lanes,
                          mx.data());
        for (std::size_t s = 0; s < lanes; ++s)
            if (mx[s] <= ex->limit) ++accepted;
    } else if (const auto* mo = std::get_if<MortarMeanCriterion>(&plan)) {
        SetStats st;
        set_stats(y, 0, static_cast<std::size_t>(mo->n), lanes, st);
        for (std::size_t s = 0; s < lanes; ++s)
            if (st.mean[s] > mo->xk_declared + mo->margin_factor * st.sd[s])
                ++accepted;
    } else {
        const auto& un = std::get<UnitTwoStage>(plan);
        const std::size_t n = static_cast<std::size_t>(un.n_per_stage);
        SetStats first, second, pooled;
        set_stats(y, 0, n, lanes, first);
        set_stats(y, n, n, lanes, second);
        if (un.policy == SecondStagePolicy::combined_must_pass)
            set_stats(y, 0, 2 * n, lanes, pooled);
        const auto pass = [&un](double m, double s) {
            return m - un.k_char * s >= un.fc_declared && m >= un.fm_declared;
        };
        for (std::size_t s = 0; s < lanes; ++s) {
            const bool p1 = pass(first.mean[s], first.sd[s]);
            bool ok = false;
            switch (un.policy) {
                case SecondStagePolicy::combined_must_pass:
                    ok = p1 || pass(pooled.mean[s], pooled.sd[s]);
                    break;
                case SecondStagePolicy::second_set_must_pass:
                    ok = p1 || pass(second.mean[s], second.sd[s]);
                    break;
                case SecondStagePolicy::both_sets_must_pass:
                    ok = p1 && pass(second.mean[s], second.sd[s]);
                    break;
            }
            if (ok) ++accepted;
        }
    }
    return accepted;
}

// Fixed Gauss-Legendre rule on [-1,1], computed once by Newton iteration on
// the Legendre recurrence.
template <int N>
struct GaussLegendre {
    std::array<double, N> node{}, weight{};

    GaussLegendre() {
        for (int i = 0; i < N; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (N + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= N; ++k) {
                    const double p2 =
                        ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = N * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            node[i] = x;
            weight[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

}  // namespace

void validate(const AcceptancePlan& plan) {
    std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, UnitTwoStage>) {
                if (p.n_per_stage < 2)
                    throw std::domain_error("unit plan: n_per_stage >= 2");
                if (!(p.fc_declared > 0.0) || !(p.fm_declared > 0.0) ||
                    !(p.k_char > 0.0))
                    throw std::domain_error(
                        "unit plan: thresholds must be positive");
            } else if constexpr (std::is_same_v<T, MortarMeanCriterion>) {
                if (p.n < 2) throw std::domain_error("mortar plan: n >= 2");
                if (!(p.xk_declared > 0.0))
                    throw std::domain_error(
                        "mortar plan: xk_declared must be positive");
            } else {
                if (p.n < 1) throw std::domain_error("execution plan: n >= 1");
                if (!(p.limit > 0.0))
                    throw std::domain_error(
                        "execution plan: limit must be positive");
            }
        },
        plan);
}

bool ARModel::stationary() const {
    return phi2 > -1.0 && phi2 < 1.0 && phi1 + phi2 < 1.0 &&
           phi2 - phi1 < 1.0;
}

void ARModel::validate() const {
    if (!stationary())
        throw std::domain_error("AR model violates stationarity region");
    if (burn_in < 0) throw std::domain_error("AR burn_in must be >= 0");
    if (!(innov_var_scale > 0.0))
        throw std::domain_error("AR innovation variance scale must be > 0");
}

double ARModel::mean_scale() const {
    return innov_mean_scale / (1.0 - phi1 - phi2);
}

double ARModel::sd_scale() const {
    // gamma_0 / sigma_x^2 for an AR(2) with innovation variance
    // innov_var_scale * sigma_x^2
    const double num = innov_var_scale * (1.0 - phi2);
    const double den =
        (1.0 + phi2) * ((1.0 - phi2) * (1.0 - phi2) - phi1 * phi1);
    return std::sqrt(num / den);
}

std::vector<double> ar2_sequence(const priors::ParamPoint& point,
                                 const ARModel& ar, std::size_t steps,
                                 std::uint64_t seed) {
    std::vector<double> x;
    fill_underlying_ar(x, point, steps, ar, seed, 0, 1);
    return x;
}

bool simulate_batch(const priors::ParamPoint& point, const AcceptancePlan& plan,
                    const std::optional<ARModel>& ar, std::uint64_t seed) {
    validate(plan);
    return count_accepted(point, plan, ar, seed, 0, 1) == 1;
}

PaEstimate acceptance_probability(const priors::ParamPoint& point,
                                  const AcceptancePlan& plan,
                                  const std::optional<ARModel>& ar,
                                  std::size_t n_sim, std::uint64_t seed) {
    validate(plan);
    if (n_sim < 100)
        throw std::domain_error("acceptance_probability: n_sim >= 100");
    std::size_t accepted = 0;
    for (std::size_t lane0 = 0; lane0 < n_sim; lane0 += kBlockLanes) {
        const std::size_t lanes = std::min(kBlockLanes, n_sim - lane0);
        accepted += count_accepted(point, plan, ar, seed, lane0, lanes);
    }
    const double pa =
        static_cast<double>(accepted) / static_cast<double>(n_sim);
    const double se =
        std::sqrt(pa * (1.0 - pa) / static_cast<double>(n_sim));
    return {pa, se};
}

double defect_rate(const priors::ParamPoint& point, double limit,
                   DefectSide side) {
    if (!(limit > 0.0)) throw std::domain_error("defect_rate: limit > 0");
    const double below = priors::lognormal_cdf(point, limit);
    return side == DefectSide::below ? below : 1.0 - below;
}

double execution_acceptance(const priors::ParamPoint& point,
                            const ExecutionLimit& plan) {
    const double f = priors::lognormal_cdf(point, plan.limit);
    return std::pow(f, static_cast<double>(plan.n));
}

double noncentral_t_sf(double t, double nu, double delta) {
    if (!(nu > 0.0)) throw std::domain_error("noncentral_t_sf: nu > 0");
    // P(T' > t) = E_W[ Phi(delta - t sqrt(W/nu)) ], W ~ chi^2_nu, with the
    // substitution W = s^2 to keep the integrand regular for nu < 2.
    static const GaussLegendre<160> gl;
    const double w_max = nu + 12.0 * std::sqrt(2.0 * nu) + 36.0;
    const double s_max = std::sqrt(w_max);
    const double log_norm = std::numbers::ln2 * (1.0 - 0.5 * nu) -
                            std::lgamma(0.5 * nu);
    std::array<double, 160> arg{}, phi{}, dens{};
    for (int i = 0; i < 160; ++i) {
        const double s = 0.5 * s_max * (gl.node[i] + 1.0);
        arg[i] = delta - t * s / std::sqrt(nu);
        const double log_dens =
            (nu - 1.0) * std::log(std::max(s, 1e-300)) - 0.5 * s * s +
            log_norm;
        dens[i] = 0.5 * s_max * gl.weight[i] * std::exp(log_dens);
    }
    simd::norm_cdf_pd(arg, phi);
    double acc = 0.0;
    for (int i = 0; i < 160; ++i) acc += phi[i] * dens[i];
    return std::clamp(acc, 0.0, 1.0);
}

double mortar_acceptance_normal_approx(const priors::ParamPoint& point,
                                       const MortarMeanCriterion& plan) {
    const auto spec = priors::LognormalSpec::from_log(point.mu, point.q);
    const double m = spec.mean;
    const double sd = m * spec.cov;
    const double root_n = std::sqrt(static_cast<double>(plan.n));
    const double delta = (m - plan.xk_declared) * root_n / sd;
    return noncentral_t_sf(plan.margin_factor * root_n,
                           static_cast<double>(plan.n - 1), delta);
}

double plan_threshold(const AcceptancePlan& plan) {
    return std::visit(
        [](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, UnitTwoStage>)
                return p.fc_declared;
            else if constexpr (std::is_same_v<T, MortarMeanCriterion>)
                return p.xk_declared;
            else
                return p.limit;
        },
        plan);
}

DefectSide plan_defect_side(const AcceptancePlan& plan) {
    return std::holds_alternative<ExecutionLimit>(plan) ? DefectSide::above
                                                        : DefectSide::below;
}

priors::ParamPoint sweep_point(const QualitySweep& sweep, double level,
                               const AcceptancePlan& plan,
                               const std::optional<ARModel>& ar,
                               DefectSide side) {
    switch (sweep.axis) {
        case QualityAxis::defect_rate: {
            if (!(level > 0.0 && level < 1.0))
                throw std::domain_error("defect rate level must be in (0,1)");
            const double q = sweep.fixed;
            if (!(q > 0.0)) throw std::domain_error("sweep fixed q must be > 0");
            // Invert the defect fraction of the (stationary) marginal of the
            // underlying normals at fixed q, holding the plan threshold.
            const double limit = plan_threshold(plan);
            const double sd_m = q * (ar ? ar->sd_scale() : 1.0);
            const double mean_scale = ar ? ar->mean_scale() : 1.0;
            const double z = side == DefectSide::below
                                 ? special::norm_icdf(level)
                                 : special::norm_icdf(1.0 - level);
            return {(std::log(limit) - sd_m * z) / mean_scale, q};
        }
        case QualityAxis::mean: {
            const double q = sweep.fixed;
            if (!(level > 0.0) || !(q > 0.0))
                throw std::domain_error("mean sweep needs positive level/q");
            return {std::log(level) - 0.5 * q * q, q};
        }
        case QualityAxis::cov: {
            const double mean = sweep.fixed;
            if (!(level > 0.0) || !(mean > 0.0))
                throw std::domain_error("cov sweep needs positive level/mean");
            const double q = priors::q_from_cov(level);
            return {std::log(mean) - 0.5 * q * q, q};
        }
    }
    throw std::logic_error("unreachable");
}

OCCurve oc_curve(const AcceptancePlan& plan, const std::optional<ARModel>& ar,
                 const QualitySweep& sweep, DefectSide side, std::size_t n_sim,
                 std::uint64_t seed) {
    validate(plan);
    if (sweep.levels.size() < 2)
        throw std::domain_error("oc_curve: sweep needs >= 2 levels");
    if (!std::is_sorted(sweep.levels.begin(), sweep.levels.end()))
        throw std::domain_error("oc_curve: sweep levels must be ascending");

    OCCurve curve;
    curve.axis = sweep.axis;
    curve.points.resize(sweep.levels.size());
    parallel_for(sweep.levels.size(), 0, [&](std::size_t i) {
        const auto point = sweep_point(sweep, sweep.levels[i], plan, ar, side);
        const auto est = acceptance_probability(point, plan, ar, n_sim,
                                                rng::mix_seed(seed, i));
        curve.points[i] = {sweep.levels[i], est.pa, est.stderr_};
    });
    return curve;
}

std::string OCCurve::to_csv() const {
    std::string out = "quality,pa,stderr\n";
    for (const auto& p : points) {
        out += fmt::g17(p.quality);
        out += ',';
        out += fmt::g17(p.pa);
        out += ',';
        out += fmt::g17(p.stderr_);
        out += '\n';
    }
    return out;
}

}  // namespace qcrel::plans
