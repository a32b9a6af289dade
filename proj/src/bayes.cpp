#include "qcrel/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

#include "qcrel/format.hpp"
#include "qcrel/parallel.hpp"
#include "qcrel/rng.hpp"
#include "qcrel/simd/kernels.hpp"

namespace qcrel::bayes {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw std::domain_error("quantile of empty sample");
    if (sorted.size() == 1) return sorted[0];
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// Frozen bilinear interpolation of P_a over a (mu, ln q) box. Outside the
// box coordinates clamp to the edge; zero cells stay zero (log -> -inf).
struct PaGrid {
    double mu0, mu1, lq0, lq1;
    std::size_t n_mu, n_lq;
    std::vector<double> pa;  // [i_mu * n_lq + j_lq]

    double value(double mu, double lq) const {
        const double fi = std::clamp((mu - mu0) / (mu1 - mu0), 0.0, 1.0) *
                          static_cast<double>(n_mu - 1);
        const double fj = std::clamp((lq - lq0) / (lq1 - lq0), 0.0, 1.0) *
                          static_cast<double>(n_lq - 1);
        std::size_t i = std::min(static_cast<std::size_t>(fi), n_mu - 2);
        std::size_t j = std::min(static_cast<std::size_t>(fj), n_lq - 2);
        const double di = fi - static_cast<double>(i);
        const double dj = fj - static_cast<double>(j);
        const double v00 = pa[i * n_lq + j];
        const double v01 = pa[i * n_lq + j + 1];
        const double v10 = pa[(i + 1) * n_lq + j];
        const double v11 = pa[(i + 1) * n_lq + j + 1];
        return (1.0 - di) * ((1.0 - dj) * v00 + dj * v01) +
               di * ((1.0 - dj) * v10 + dj * v11);
    }
};

struct PriorStats {
    double mu_lo, mu_hi, lq_lo, lq_hi;
    double sd_mu, sd_lq;
};

PriorStats prior_stats(const priors::NormalGammaHyper& prior,
                       std::uint64_t seed) {
    const auto pts = priors::sample_prior(prior, 4096, seed);
    PriorStats st{1e300, -1e300, 1e300, -1e300, 0.0, 0.0};
    double s_mu = 0.0, s_lq = 0.0, ss_mu = 0.0, ss_lq = 0.0;
    for (const auto& p : pts) {
        const double lq = std::log(p.q);
        st.mu_lo = std::min(st.mu_lo, p.mu);
        st.mu_hi = std::max(st.mu_hi, p.mu);
        st.lq_lo = std::min(st.lq_lo, lq);
        st.lq_hi = std::max(st.lq_hi, lq);
        s_mu += p.mu;
        s_lq += lq;
        ss_mu += p.mu * p.mu;
        ss_lq += lq * lq;
    }
    const double n = static_cast<double>(pts.size());
    st.sd_mu = std::sqrt(std::max(0.0, ss_mu / n - (s_mu / n) * (s_mu / n)));
    st.sd_lq = std::sqrt(std::max(0.0, ss_lq / n - (s_lq / n) * (s_lq / n)));
    return st;
}

LogPaFn grid_log_pa(const plans::AcceptancePlan& plan,
                    const std::optional<plans::ARModel>& ar,
                    const GridSpec& spec,
                    const priors::NormalGammaHyper& prior,
                    std::uint64_t seed) {
    if (spec.n_mu < 2 || spec.n_logq < 2)
        throw std::domain_error("pa grid needs at least 2x2 nodes");
    const auto st = prior_stats(prior, rng::mix_seed(seed, 0x9D1));
    auto grid = std::make_shared<PaGrid>();
    const double pad_mu = spec.pad * (st.mu_hi - st.mu_lo);
    const double pad_lq = spec.pad * (st.lq_hi - st.lq_lo);
    grid->mu0 = st.mu_lo - pad_mu;
    grid->mu1 = st.mu_hi + pad_mu;
    grid->lq0 = st.lq_lo - pad_lq;
    grid->lq1 = st.lq_hi + pad_lq;
    grid->n_mu = spec.n_mu;
    grid->n_lq = spec.n_logq;
    grid->pa.assign(spec.n_mu * spec.n_logq, 0.0);

    parallel_for(spec.n_mu * spec.n_logq, 0, [&](std::size_t node) {
        const std::size_t i = node / spec.n_logq;
        const std::size_t j = node % spec.n_logq;
        const double mu =
            grid->mu0 + (grid->mu1 - grid->mu0) * static_cast<double>(i) /
                            static_cast<double>(spec.n_mu - 1);
        const double lq =
            grid->lq0 + (grid->lq1 - grid->lq0) * static_cast<double>(j) /
                            static_cast<double>(spec.n_logq - 1);
        const auto est = plans::acceptance_probability(
            {mu, std::exp(lq)}, plan, ar, spec.n_sim_per_node,
            rng::mix_seed(seed, 0xA000 + node));
        grid->pa[node] = est.pa;
    });

    return [grid](double mu, double q) {
        const double v = grid->value(mu, std::log(q));
        return v > 0.0 ? std::log(v) : kNegInf;
    };
}

LogPaFn monte_carlo_log_pa(const plans::AcceptancePlan& plan,
                           const std::optional<plans::ARModel>& ar,
                           std::size_t n_sim, std::uint64_t seed) {
    // Deterministic per (mu, q): the replicate seed is a hash of the point.
    // This is a noisy plug-in target, kept for experimentation; the grid
    // estimator is the default for a well-defined stationary law.
    return [plan, ar, n_sim, seed](double mu, double q) {
        std::uint64_t h = seed;
        std::uint64_t bits;
        static_assert(sizeof(double) == sizeof(std::uint64_t));
        std::memcpy(&bits, &mu, sizeof(bits));
        h = rng::mix_seed(h, bits);
        std::memcpy(&bits, &q, sizeof(bits));
        h = rng::mix_seed(h, bits);
        const auto est =
            plans::acceptance_probability({mu, q}, plan, ar, n_sim, h);
        return est.pa > 0.0 ? std::log(est.pa) : kNegInf;
    };
}

}  // namespace

void MCMCConfig::validate() const {
    if (n_chains < 1) throw std::domain_error("mcmc: n_chains >= 1");
    if (burn_in < 0) throw std::domain_error("mcmc: burn_in >= 0");
    if (n_samples <= burn_in)
        throw std::domain_error("mcmc: n_samples must exceed burn_in");
}

LogPaFn make_log_pa(const plans::AcceptancePlan& plan,
                    const std::optional<plans::ARModel>& ar,
                    const PaEstimatorCfg& cfg,
                    const priors::NormalGammaHyper& prior,
                    std::uint64_t seed) {
    plans::validate(plan);
    const bool closed_available =
        !ar && (std::holds_alternative<plans::ExecutionLimit>(plan) ||
                std::holds_alternative<plans::MortarMeanCriterion>(plan));
    PaEstimatorKind kind = cfg.kind;
    if (kind == PaEstimatorKind::auto_select)
        kind = closed_available ? PaEstimatorKind::closed_form
                                : PaEstimatorKind::grid_interpolation;

    switch (kind) {
        case PaEstimatorKind::closed_form: {
            if (!closed_available)
                throw std::domain_error(
                    "closed-form P_a unavailable for this plan/AR setting");
            if (const auto* ex = std::get_if<plans::ExecutionLimit>(&plan)) {
                const auto p = *ex;
                return [p](double mu, double q) {
                    const double pa =
                        plans::execution_acceptance({mu, q}, p);
                    return pa > 0.0 ? std::log(pa) : kNegInf;
                };
            }
            const auto p = std::get<plans::MortarMeanCriterion>(plan);
            return [p](double mu, double q) {
                const double pa =
                    plans::mortar_acceptance_normal_approx({mu, q}, p);
                return pa > 0.0 ? std::log(pa) : kNegInf;
            };
        }
        case PaEstimatorKind::monte_carlo:
            return monte_carlo_log_pa(plan, ar, cfg.n_sim, seed);
        case PaEstimatorKind::grid_interpolation:
        default:
            return grid_log_pa(plan, ar, cfg.grid, prior, seed);
    }
}

ParamChain run_random_walk(
    const std::function<double(double mu, double logq)>& log_target,
    const std::vector<std::pair<double, double>>& init, const MCMCConfig& cfg) {
    cfg.validate();
    if (init.empty()) throw std::domain_error("mcmc: no initial points");

    const int n_chains = cfg.n_chains;
    const long retained = cfg.n_samples - cfg.burn_in;
    struct ChainOut {
        std::vector<priors::ParamPoint> samples;
        long accepted = 0;
    };
    std::vector<ChainOut> outs(static_cast<std::size_t>(n_chains));

    parallel_for(static_cast<std::size_t>(n_chains), 0, [&](std::size_t c) {
        rng::Xoshiro256pp gen(rng::mix_seed(cfg.seed, 0xC0DE + c));
        double mu = init[c % init.size()].first;
        double lq = init[c % init.size()].second;
        double lp = log_target(mu, lq);
        if (!std::isfinite(lp))
            throw std::runtime_error(
                "mcmc: initial point has zero target density");

        double s_mu =
            cfg.proposal_scale_mu > 0.0 ? cfg.proposal_scale_mu : 0.25;
        double s_lq =
            cfg.proposal_scale_logq > 0.0 ? cfg.proposal_scale_logq : 0.25;

        auto& out = outs[c];
        out.samples.reserve(static_cast<std::size_t>(retained));
        long window_accepted = 0;
        constexpr long kWindow = 100;

        for (long it = 0; it < cfg.n_samples; ++it) {
            const double pm = mu + s_mu * gen.normal();
            const double pl = lq + s_lq * gen.normal();
            const double lp2 = log_target(pm, pl);
            bool accept = false;
            if (lp2 > kNegInf) {
                const double d = lp2 - lp;
                accept = d >= 0.0 || std::log(gen.uniform01()) < d;
            }
            if (accept) {
                mu = pm;
                lq = pl;
                lp = lp2;
            }
            if (it < cfg.burn_in) {
                // joint scale adaptation, frozen before the retained phase
                window_accepted += accept ? 1 : 0;
                if ((it + 1) % kWindow == 0) {
                    const double rate = static_cast<double>(window_accepted) /
                                        static_cast<double>(kWindow);
                    const double f =
                        std::clamp(std::exp(0.8 * (rate - 0.28)), 0.5, 2.0);
                    s_mu = std::clamp(s_mu * f, 1e-5, 20.0);
                    s_lq = std::clamp(s_lq * f, 1e-5, 20.0);
                    window_accepted = 0;
                }
            } else {
                out.accepted += accept ? 1 : 0;
                out.samples.push_back({mu, std::exp(lq)});
            }
        }
    });

    ParamChain chain;
    chain.samples.reserve(static_cast<std::size_t>(retained) *
                          static_cast<std::size_t>(n_chains));
    chain.chain_ids.reserve(chain.samples.capacity());
    long accepted = 0;
    for (int c = 0; c < n_chains; ++c) {
        for (const auto& s : outs[static_cast<std::size_t>(c)].samples) {
            chain.samples.push_back(s);
            chain.chain_ids.push_back(c);
        }
        accepted += outs[static_cast<std::size_t>(c)].accepted;
    }
    chain.acceptance_rate = static_cast<double>(accepted) /
                            static_cast<double>(retained * n_chains);

    // split-chain potential scale reduction per coordinate
    const auto rhat = [&](auto&& get) {
        const long half = retained / 2;
        if (half < 2) return 1.0;
        const std::size_t m = static_cast<std::size_t>(2 * n_chains);
        std::vector<double> means(m, 0.0), vars(m, 0.0);
        for (std::size_t seg = 0; seg < m; ++seg) {
            const std::size_t c = seg / 2;
            const long off = (seg % 2 == 0) ? 0 : half;
            const auto& src = outs[c].samples;
            double s = 0.0, ss = 0.0;
            for (long i = 0; i < half; ++i) {
                const double v = get(src[static_cast<std::size_t>(off + i)]);
                s += v;
                ss += v * v;
            }
            const double n = static_cast<double>(half);
            means[seg] = s / n;
            vars[seg] = (ss - s * s / n) / (n - 1.0);
        }
        double w = 0.0, mbar = 0.0;
        for (std::size_t seg = 0; seg < m; ++seg) {
            w += vars[seg];
            mbar += means[seg];
        }
        w /= static_cast<double>(m);
        mbar /= static_cast<double>(m);
        double b = 0.0;
        for (std::size_t seg = 0; seg < m; ++seg)
            b += (means[seg] - mbar) * (means[seg] - mbar);
        b *= static_cast<double>(half) / (static_cast<double>(m) - 1.0);
        if (w <= 0.0) return 1.0;
        const double nd = static_cast<double>(half);
        const double var_hat = (nd - 1.0) / nd * w + b / nd;
        return std::sqrt(var_hat / w);
    };
    if (n_chains >= 2 || retained >= 4) {
        chain.rhat_mu = rhat([](const priors::ParamPoint& p) { return p.mu; });
        chain.rhat_q = rhat([](const priors::ParamPoint& p) { return p.q; });
    } else {
        chain.rhat_mu = chain.rhat_q = 1.0;
    }
    chain.converged = chain.rhat_mu <= 1.1 && chain.rhat_q <= 1.1;
    return chain;
}

ParamChain run_posterior_with(const priors::NormalGammaHyper& prior,
                              const std::vector<LogPaFn>& factors,
                              const MCMCConfig& cfg) {
    prior.validate();
    cfg.validate();

    const auto log_target = [&prior, &factors](double mu, double lq) {
        const double q = std::exp(lq);
        // prior over (mu, q) plus the q -> ln q Jacobian
        double lp = priors::normal_gamma_logpdf(prior, {mu, q}) + lq;
        for (const auto& f : factors) {
            if (lp == kNegInf) return kNegInf;
            lp += f(mu, q);
        }
        return std::isnan(lp) ? kNegInf : lp;
    };

    // probe the prior bulk: initial points and the empty-posterior guard
    const auto probes =
        priors::sample_prior(prior, 512, rng::mix_seed(cfg.seed, 0xEE));
    std::vector<std::pair<double, double>> init;
    for (const auto& p : probes) {
        const double lq = std::log(p.q);
        if (std::isfinite(log_target(p.mu, lq))) {
            init.emplace_back(p.mu, lq);
            if (init.size() >=
                static_cast<std::size_t>(std::max(cfg.n_chains, 1)))
                break;
        }
    }
    if (init.empty())
        throw std::runtime_error(
            "empty posterior: the acceptance factors reject everywhere the "
            "prior has mass");

    MCMCConfig run_cfg = cfg;
    if (run_cfg.proposal_scale_mu <= 0.0 ||
        run_cfg.proposal_scale_logq <= 0.0) {
        const auto st = prior_stats(prior, rng::mix_seed(cfg.seed, 0x5CA1E));
        if (run_cfg.proposal_scale_mu <= 0.0)
            run_cfg.proposal_scale_mu = std::max(0.5 * st.sd_mu, 1e-4);
        if (run_cfg.proposal_scale_logq <= 0.0)
            run_cfg.proposal_scale_logq = std::max(0.5 * st.sd_lq, 1e-4);
    }
    return run_random_walk(log_target, init, run_cfg);
}

ParamChain run_posterior(const priors::NormalGammaHyper& prior,
                         const plans::AcceptancePlan& plan,
                         const std::optional<plans::ARModel>& ar,
                         const MCMCConfig& cfg) {
    // single stage of the sequential update, so the two entry points agree
    // sample for sample
    return std::move(sequential_update(prior, {{plan, ar}}, cfg).front());
}

std::vector<ParamChain> sequential_update(const priors::NormalGammaHyper& prior,
                                          const std::vector<StagePlan>& stages,
                                          const MCMCConfig& cfg) {
    if (stages.empty())
        throw std::domain_error("sequential_update: at least one stage");
    std::vector<LogPaFn> factors;
    factors.reserve(stages.size());
    std::vector<ParamChain> chains;
    chains.reserve(stages.size());
    for (std::size_t k = 0; k < stages.size(); ++k) {
        factors.push_back(make_log_pa(stages[k].plan, stages[k].ar, cfg.pa,
                                      prior,
                                      rng::mix_seed(cfg.seed, 0x57A6E + k)));
        MCMCConfig stage_cfg = cfg;
        stage_cfg.seed = rng::mix_seed(cfg.seed, 0xBEE0 + k);
        chains.push_back(run_posterior_with(prior, factors, stage_cfg));
    }
    return chains;
}

PredictiveDensity predictive_density(const ParamChain& chain,
                                     std::span<const double> grid) {
    if (chain.samples.empty())
        throw std::domain_error("predictive_density: empty chain");
    if (grid.size() < 3)
        throw std::domain_error("predictive_density: grid too small");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || (i > 0 && !(grid[i] > grid[i - 1])))
            throw std::domain_error(
                "predictive_density: grid must be positive and strictly "
                "increasing");
    }

    const std::size_t n = grid.size();
    std::vector<double> log_x(n), inv_x(n), acc(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        log_x[i] = std::log(grid[i]);
        inv_x[i] = 1.0 / grid[i];
    }
    const double w = 1.0 / static_cast<double>(chain.samples.size());
    for (const auto& s : chain.samples)
        simd::lognorm_pdf_accum_pd(log_x, inv_x, s.mu, s.q, w, acc);

    double integral = 0.0;
    for (std::size_t i = 1; i < n; ++i)
        integral += 0.5 * (acc[i] + acc[i - 1]) * (grid[i] - grid[i - 1]);

    if (integral < 0.95) {
        const double lo_edge = acc.front() * (grid[1] - grid[0]);
        const double hi_edge = acc.back() * (grid[n - 1] - grid[n - 2]);
        const char* tail = lo_edge > hi_edge ? "lower" : "upper";
        throw std::runtime_error(
            std::string("predictive_density: grid covers only ") +
            fmt::g17(integral) + " of the predictive mass; deficient tail: " +
            tail);
    }

    PredictiveDensity out;
    out.normalization_check = integral;
    out.grid.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.grid[i] = {grid[i], acc[i] / integral};
    return out;
}

CoVSummary cov_summary(const ParamChain& chain) {
    if (chain.samples.empty())
        throw std::domain_error("cov_summary: empty chain");
    std::vector<double> vs(chain.samples.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        vs[i] = std::sqrt(std::expm1(chain.samples[i].q *
                                     chain.samples[i].q));
        mean += vs[i];
    }
    mean /= static_cast<double>(vs.size());
    std::sort(vs.begin(), vs.end());
    CoVSummary s;
    s.mean_v = mean;
    s.median_v = quantile_sorted(vs, 0.5);
    s.ci75_lo = quantile_sorted(vs, 0.125);
    s.ci75_hi = quantile_sorted(vs, 0.875);
    return s;
}

double predictive_moment_cov(const ParamChain& chain) {
    if (chain.samples.empty())
        throw std::domain_error("predictive_moment_cov: empty chain");
    double ex = 0.0, ex2 = 0.0;
    for (const auto& s : chain.samples) {
        const double q2 = s.q * s.q;
        ex += std::exp(s.mu + 0.5 * q2);
        ex2 += std::exp(2.0 * s.mu + 2.0 * q2);
    }
    const double n = static_cast<double>(chain.samples.size());
    ex /= n;
    ex2 /= n;
    return std::sqrt(std::max(0.0, ex2 / (ex * ex) - 1.0));
}

std::string ParamChain::to_csv() const {
    std::string out = "chain,iter,mu,q\n";
    long iter = 0;
    int last_chain = samples.empty() ? 0 : chain_ids.front();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (chain_ids[i] != last_chain) {
            last_chain = chain_ids[i];
            iter = 0;
        }
        out += std::to_string(chain_ids[i]);
        out += ',';
        out += std::to_string(iter++);
        out += ',';
        out += fmt::g17(samples[i].mu);
        out += ',';
        out += fmt::g17(samples[i].q);
        out += '\n';
    }
    return out;
}

std::string PredictiveDensity::to_csv() const {
    std::string out = "x,density\n";
    for (const auto& n : grid) {
        out += fmt::g17(n.x);
        out += ',';
        out += fmt::g17(n.density);
        out += '\n';
    }
    return out;
}

}  // namespace qcrel::bayes
