#include <doctest.h>

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "qcrel/bayes.hpp"
#include "qcrel/plans.hpp"
#include "qcrel/priors.hpp"
#include "support/oracles.hpp"

using namespace qcrel::bayes;
using qcrel::priors::NormalGammaHyper;
using qcrel::priors::ParamPoint;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

MCMCConfig fast_cfg(std::uint64_t seed) {
    MCMCConfig cfg;
    cfg.n_chains = 4;
    cfg.n_samples = 30000;
    cfg.burn_in = 5000;
    cfg.seed = seed;
    return cfg;
}

std::vector<double> coords(const ParamChain& c, bool mu) {
    std::vector<double> v(c.samples.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = mu ? c.samples[i].mu : c.samples[i].q;
    return v;
}

// independent prior sampler (std::gamma_distribution, not the production
// generator)
std::vector<ParamPoint> oracle_prior(const NormalGammaHyper& h, std::size_t n,
                                     std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::gamma_distribution<double> gd(h.alpha0, 1.0 / h.beta0);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<ParamPoint> out(n);
    for (auto& p : out) {
        const double tau = gd(gen);
        p.q = 1.0 / std::sqrt(tau);
        p.mu = h.mu0 + nd(gen) / std::sqrt(h.kappa0 * tau);
    }
    return out;
}

}  // namespace

TEST_CASE("always-accept filter: posterior equals the prior (KS < 0.02)") {
    const auto h = qcrel::priors::hyper_from_prior(15.0, 0.18, 6);
    const auto chain = run_posterior_with(h, {}, fast_cfg(101));
    REQUIRE(chain.samples.size() == 100000);
    CHECK(chain.acceptance_rate > 0.05);
    CHECK(chain.acceptance_rate < 0.95);
    CHECK(chain.rhat_mu < 1.1);
    CHECK(chain.rhat_q < 1.1);

    const auto ref = qcrel::priors::sample_prior(h, 100000, 777);
    std::vector<double> ref_mu(ref.size()), ref_q(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        ref_mu[i] = ref[i].mu;
        ref_q[i] = ref[i].q;
    }
    CHECK(oracle::ks_statistic(coords(chain, true), ref_mu) < 0.02);
    CHECK(oracle::ks_statistic(coords(chain, false), ref_q) < 0.02);
}

TEST_CASE("constant filter: the normalisation cancels exactly") {
    // P_a = c rescales the target by a constant, so the chain must follow
    // the prior for any c, not just c = 1
    const auto h = qcrel::priors::hyper_from_prior(15.0, 0.18, 6);
    const qcrel::bayes::LogPaFn constant = [](double, double) {
        return std::log(0.3);
    };
    auto cfg = fast_cfg(404);
    cfg.n_samples = 20000;
    cfg.burn_in = 4000;
    const auto chain = run_posterior_with(h, {constant}, cfg);
    const auto ref = qcrel::priors::sample_prior(h, 64000, 3131);
    std::vector<double> rq(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) rq[i] = ref[i].q;
    CHECK(oracle::ks_statistic(coords(chain, false), rq) < 0.02);
}

TEST_CASE("indicator filter: posterior equals the truncated prior") {
    const auto h = qcrel::priors::hyper_from_prior(5.0, 0.20, 6);
    const double q_star = 0.20;
    const LogPaFn truncate = [q_star](double, double q) {
        return q < q_star ? 0.0 : -kInf;
    };
    const auto chain = run_posterior_with(h, {truncate}, fast_cfg(212));

    // rejection-sampling oracle: draw from the prior, keep q < q*
    const auto prior = qcrel::priors::sample_prior(h, 600000, 888);
    std::vector<double> keep_mu, keep_q;
    for (const auto& p : prior) {
        if (p.q < q_star) {
            keep_mu.push_back(p.mu);
            keep_q.push_back(p.q);
        }
    }
    REQUIRE(keep_q.size() > 50000);
    bool all_below = true;
    for (const auto& s : chain.samples) all_below = all_below && s.q < q_star;
    CHECK(all_below);
    CHECK(oracle::ks_statistic(coords(chain, true), keep_mu) < 0.02);
    CHECK(oracle::ks_statistic(coords(chain, false), keep_q) < 0.02);
}

TEST_CASE("posterior mean of q matches 100x100 grid quadrature within 2%") {
    const auto h = qcrel::priors::hyper_from_prior(0.05, 0.35, 6);
    const qcrel::plans::ExecutionLimit plan{10, 0.05};
    auto cfg = fast_cfg(333);
    const auto chain = run_posterior(h, plan, std::nullopt, cfg);

    // direct normalized quadrature of P_a * prior on a coarse grid
    const auto f = [&](double mu, double q) {
        if (q <= 1e-6) return 0.0;
        const double pa = qcrel::plans::execution_acceptance({mu, q}, plan);
        return pa * std::exp(qcrel::priors::normal_gamma_logpdf(h, {mu, q}));
    };
    const double mu_lo = h.mu0 - 2.0, mu_hi = h.mu0 + 2.0;
    const double q_lo = 1e-4, q_hi = 1.6;
    const double z =
        oracle::trapezoid_2d(f, mu_lo, mu_hi, q_lo, q_hi, 100, 100);
    const double zq = oracle::trapezoid_2d(
        [&](double mu, double q) { return q * f(mu, q); }, mu_lo, mu_hi, q_lo,
        q_hi, 100, 100);
    const double want = zq / z;

    double got = 0.0;
    for (const auto& s : chain.samples) got += s.q;
    got /= static_cast<double>(chain.samples.size());
    CHECK(std::abs(got - want) < 0.02 * want);
}

TEST_CASE("detailed balance smoke test: uniform target stays uniform") {
    const auto target = [](double mu, double lq) {
        return (mu >= 0.0 && mu <= 1.0 && lq >= 0.0 && lq <= 1.0) ? 0.0
                                                                  : -kInf;
    };
    MCMCConfig cfg;
    cfg.n_chains = 2;
    cfg.n_samples = 120000;
    cfg.burn_in = 20000;
    cfg.proposal_scale_mu = 0.3;
    cfg.proposal_scale_logq = 0.3;
    cfg.seed = 4;
    const auto chain = run_random_walk(target, {{0.5, 0.5}}, cfg);

    // chi-square on 10 bins per coordinate; thinned so the independence
    // assumption behind the test is reasonable
    for (bool mu : {true, false}) {
        std::array<int, 10> bins{};
        int total = 0;
        for (std::size_t i = 0; i < chain.samples.size(); i += 100) {
            const double v =
                mu ? chain.samples[i].mu : std::log(chain.samples[i].q);
            const int b =
                std::min(9, std::max(0, static_cast<int>(v * 10.0)));
            ++bins[static_cast<std::size_t>(b)];
            ++total;
        }
        const double expect = total / 10.0;
        double chi2 = 0.0;
        for (int b : bins) chi2 += (b - expect) * (b - expect) / expect;
        // chi-square with 9 dof, p = 0.001 critical value
        CHECK(chi2 < 27.877);
    }
}

TEST_CASE("single stage sequential update equals run_posterior exactly") {
    const auto h = qcrel::priors::hyper_from_prior(5.0, 0.20, 6);
    const qcrel::plans::MortarMeanCriterion plan{3, 4.0, 1.48};
    auto cfg = fast_cfg(55);
    cfg.n_samples = 6000;
    cfg.burn_in = 1000;
    const auto a = run_posterior(h, plan, std::nullopt, cfg);
    const auto b = sequential_update(h, {{plan, std::nullopt}}, cfg).front();
    REQUIRE(a.samples.size() == b.samples.size());
    bool identical = true;
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        identical = identical && a.samples[i].mu == b.samples[i].mu &&
                    a.samples[i].q == b.samples[i].q;
    CHECK(identical);
}

TEST_CASE("two always-accept stages leave the prior untouched") {
    const auto h = qcrel::priors::hyper_from_prior(15.0, 0.18, 6);
    const qcrel::plans::ExecutionLimit open{10, 1e12};
    const auto chains = sequential_update(
        h, {{open, std::nullopt}, {open, std::nullopt}}, fast_cfg(66));
    REQUIRE(chains.size() == 2);
    const auto ref = qcrel::priors::sample_prior(h, 100000, 321);
    std::vector<double> ref_q(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) ref_q[i] = ref[i].q;
    for (const auto& c : chains)
        CHECK(oracle::ks_statistic(coords(c, false), ref_q) < 0.02);
}

TEST_CASE("repeating a filter keeps trimming the predictive CoV") {
    const auto h = qcrel::priors::hyper_from_prior(0.05, 0.47, 20);
    const qcrel::plans::ExecutionLimit plan{10, 0.05};
    const auto chains = sequential_update(
        h, {{plan, std::nullopt}, {plan, std::nullopt}}, fast_cfg(77));
    const auto s0 = cov_summary(chains[0]);
    const auto s1 = cov_summary(chains[1]);
    CHECK(s1.mean_v <= s0.mean_v + 0.005);

    // grid-quadrature oracle for both stages (P_a and P_a^2 weights)
    const auto mean_v_quad = [&](int power) {
        const auto f = [&](double mu, double q) {
            if (q <= 1e-6) return 0.0;
            const double pa =
                qcrel::plans::execution_acceptance({mu, q}, plan);
            return std::pow(pa, power) *
                   std::exp(qcrel::priors::normal_gamma_logpdf(h, {mu, q}));
        };
        const double mu_lo = h.mu0 - 2.5, mu_hi = h.mu0 + 2.5;
        const double q_lo = 1e-4, q_hi = 1.8;
        const double z =
            oracle::trapezoid_2d(f, mu_lo, mu_hi, q_lo, q_hi, 100, 100);
        const double zv = oracle::trapezoid_2d(
            [&](double mu, double q) {
                return std::sqrt(std::expm1(q * q)) * f(mu, q);
            },
            mu_lo, mu_hi, q_lo, q_hi, 100, 100);
        return zv / z;
    };
    CHECK(std::abs(s0.mean_v - mean_v_quad(1)) < 0.02 * mean_v_quad(1));
    CHECK(std::abs(s1.mean_v - mean_v_quad(2)) < 0.02 * mean_v_quad(2));
}

TEST_CASE("filtering with an upper-side plan cannot inflate q") {
    const auto h = qcrel::priors::hyper_from_prior(5.0, 0.27, 10);
    const qcrel::plans::MortarMeanCriterion plan{3, 4.0, 1.48};
    const auto post = run_posterior(h, plan, std::nullopt, fast_cfg(88));
    const auto prior = qcrel::priors::sample_prior(h, 100000, 11);
    double q_post = 0.0, q_prior = 0.0;
    for (const auto& s : post.samples) q_post += s.q;
    q_post /= static_cast<double>(post.samples.size());
    for (const auto& p : prior) q_prior += p.q;
    q_prior /= static_cast<double>(prior.size());
    CHECK(q_post <= q_prior + 0.005);
}

TEST_CASE("empty posterior raises a dedicated error") {
    const auto h = qcrel::priors::hyper_from_prior(5.0, 0.20, 6);
    const qcrel::plans::MortarMeanCriterion impossible{3, 1e12, 1.48};
    CHECK_THROWS_WITH_AS(
        run_posterior(h, impossible, std::nullopt, fast_cfg(3)),
        doctest::Contains("empty posterior"), std::runtime_error);
}

TEST_CASE("predictive density of a degenerate chain is the lognormal pdf") {
    ParamChain chain;
    chain.samples.assign(100, ParamPoint{std::log(15.0), 0.2});
    chain.chain_ids.assign(100, 0);
    std::vector<double> grid(400);
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = 4.0 + 36.0 * static_cast<double>(i) / 399.0;
    const auto pd = predictive_density(chain, grid);
    CHECK(pd.normalization_check > 0.99);
    CHECK(pd.normalization_check < 1.01);
    for (std::size_t i = 0; i < grid.size(); i += 41) {
        const double x = grid[i];
        const double d = (std::log(x) - std::log(15.0)) / 0.2;
        const double pdf = std::exp(-0.5 * d * d) /
                           (x * 0.2 * std::sqrt(2.0 * 3.14159265358979324));
        CHECK(std::abs(pd.grid[i].density - pdf / pd.normalization_check) <
              1e-10);
    }
}

TEST_CASE("prior-chain predictive density: mean and normalization") {
    const auto h = qcrel::priors::hyper_from_prior(15.0, 0.18, 6);
    ParamChain chain;
    chain.samples = qcrel::priors::sample_prior(h, 100000, 2468);
    chain.chain_ids.assign(chain.samples.size(), 0);

    std::vector<double> grid(400);
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = 5.0 + 35.0 * static_cast<double>(i) / 399.0;
    const auto pd = predictive_density(chain, grid);
    CHECK(pd.normalization_check > 0.99);
    CHECK(pd.normalization_check < 1.01);

    // mixture-moment oracle: E[X] averaged analytically over the chain
    double want = 0.0;
    for (const auto& s : chain.samples)
        want += std::exp(s.mu + 0.5 * s.q * s.q);
    want /= static_cast<double>(chain.samples.size());
    double got = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double xm = 0.5 * (grid[i] + grid[i - 1]);
        const double dm =
            0.5 * (pd.grid[i].density + pd.grid[i - 1].density);
        got += xm * dm * (grid[i] - grid[i - 1]);
    }
    CHECK(std::abs(got - want) < 0.01 * want);
}

TEST_CASE("predictive density names the deficient tail") {
    ParamChain chain;
    chain.samples.assign(10, ParamPoint{std::log(15.0), 0.2});
    chain.chain_ids.assign(10, 0);
    std::vector<double> grid = {20.0, 25.0, 30.0, 40.0};  // misses the bulk
    CHECK_THROWS_WITH_AS(predictive_density(chain, grid),
                         doctest::Contains("lower"), std::runtime_error);
    std::vector<double> bad = {15.0, 10.0, 20.0};
    CHECK_THROWS_AS(predictive_density(chain, bad), std::domain_error);
}

TEST_CASE("cov_summary: exact inverse on a single-point chain") {
    ParamChain chain;
    chain.samples.assign(5, ParamPoint{1.0, 0.19804});
    chain.chain_ids.assign(5, 0);
    const auto s = cov_summary(chain);
    CHECK(std::abs(s.mean_v - 0.20) < 1e-5);
    CHECK(std::abs(s.median_v - 0.20) < 1e-5);
    CHECK(s.ci75_lo == s.ci75_hi);
    CHECK(s.ci75_lo <= s.median_v);
    CHECK(s.median_v <= s.ci75_hi);
}

TEST_CASE("cov_summary is monotone in the q-marginal") {
    ParamChain lo, hi;
    for (int i = 0; i < 1000; ++i) {
        const double q = 0.1 + 1e-4 * i;
        lo.samples.push_back({0.0, q});
        hi.samples.push_back({0.0, q + 0.05});
    }
    lo.chain_ids.assign(1000, 0);
    hi.chain_ids.assign(1000, 0);
    CHECK(cov_summary(lo).mean_v < cov_summary(hi).mean_v);
}

TEST_CASE("unfiltered chain summary matches the prior-sampling oracle") {
    // The documented Jensen effect: with alpha0 = 3 the prior mean of
    // v = sqrt(exp(q^2)-1) sits ~15% above the V0 that built the prior
    // (E[tau^(-1/2)] > E[tau]^(-1/2)), so the oracle value -- not V0 --
    // is the correct expectation here.
    const auto h = qcrel::priors::hyper_from_prior(15.0, 0.18, 6);
    const auto ref = oracle_prior(h, 400000, 1357);
    double want = 0.0;
    for (const auto& p : ref) want += std::sqrt(std::expm1(p.q * p.q));
    want /= static_cast<double>(ref.size());
    CHECK(want > 0.18 + 0.02);  // the literal V0 target is unattainable

    const auto chain = run_posterior_with(h, {}, fast_cfg(99));
    const auto s = cov_summary(chain);
    CHECK(std::abs(s.mean_v - want) < 0.02);
    CHECK(s.ci75_lo <= s.median_v);
    CHECK(s.median_v <= s.ci75_hi);

    // the moment-based predictive CoV includes parameter uncertainty and
    // must exceed the parameter-conditional mean
    CHECK(predictive_moment_cov(chain) > s.mean_v);
}

TEST_CASE("grid-interpolated P_a tracks the direct Monte Carlo estimate") {
    const auto h = qcrel::priors::hyper_from_prior(15.0, 0.25, 10);
    qcrel::plans::UnitTwoStage plan;
    plan.fc_declared = 9.0;
    plan.fm_declared = 12.0;
    PaEstimatorCfg cfg;
    cfg.kind = PaEstimatorKind::grid_interpolation;
    cfg.grid.n_mu = 40;
    cfg.grid.n_logq = 40;
    cfg.grid.n_sim_per_node = 2000;
    const auto log_pa = make_log_pa(plan, std::nullopt, cfg, h, 31337);

    for (const auto& p : qcrel::priors::sample_prior(h, 8, 5)) {
        const auto direct = qcrel::plans::acceptance_probability(
            p, plan, std::nullopt, 40000, 9);
        const double interp = std::exp(log_pa(p.mu, p.q));
        CHECK(std::abs(interp - direct.pa) < 0.05);
    }
}

TEST_CASE("non-convergence sets the warning flag without throwing") {
    // two far-separated modes with a frozen small proposal: each chain
    // stays in its own mode, so the split-chain diagnostic must trip
    const auto target = [](double mu, double lq) {
        const double a = mu + 10.0, b = mu - 10.0;
        const double peaks =
            std::exp(-0.5 * a * a * 25.0) + std::exp(-0.5 * b * b * 25.0);
        const double lq_pen = -0.5 * lq * lq * 25.0;
        return std::log(peaks + 1e-300) + lq_pen;
    };
    MCMCConfig cfg;
    cfg.n_chains = 2;
    cfg.n_samples = 4000;
    cfg.burn_in = 0;  // no adaptation: scales stay frozen
    cfg.proposal_scale_mu = 0.05;
    cfg.proposal_scale_logq = 0.05;
    cfg.seed = 77;
    const auto chain =
        run_random_walk(target, {{-10.0, 0.0}, {10.0, 0.0}}, cfg);
    CHECK(chain.rhat_mu > 1.1);
    CHECK_FALSE(chain.converged);
}

TEST_CASE("grid estimator handles AR-sampled plans end to end") {
    const auto h = qcrel::priors::hyper_from_prior(15.0, 0.25, 10);
    qcrel::plans::UnitTwoStage plan;
    plan.n_per_stage = 6;
    plan.fc_declared = 9.5;
    plan.fm_declared = 13.0;
    MCMCConfig cfg;
    cfg.n_chains = 2;
    cfg.n_samples = 4000;
    cfg.burn_in = 1000;
    cfg.pa.grid.n_mu = 16;
    cfg.pa.grid.n_logq = 16;
    cfg.pa.grid.n_sim_per_node = 400;
    cfg.seed = 5150;
    const auto chain =
        run_posterior(h, plan, qcrel::plans::ARModel{}, cfg);
    REQUIRE(chain.samples.size() == 6000);
    // the filter must not inflate q
    const auto prior = qcrel::priors::sample_prior(h, 50000, 2);
    double q_post = 0.0, q_prior = 0.0;
    for (const auto& s : chain.samples) q_post += s.q;
    for (const auto& p : prior) q_prior += p.q;
    CHECK(q_post / chain.samples.size() <= q_prior / prior.size() + 0.01);
}

TEST_CASE("monte-carlo P_a estimator is a deterministic function of a point") {
    const auto h = qcrel::priors::hyper_from_prior(5.0, 0.2, 6);
    const qcrel::plans::MortarMeanCriterion plan{3, 4.0, 1.48};
    PaEstimatorCfg cfg;
    cfg.kind = PaEstimatorKind::monte_carlo;
    cfg.n_sim = 4000;
    const auto log_pa = make_log_pa(plan, std::nullopt, cfg, h, 808);
    const double a = log_pa(1.57, 0.2);
    CHECK(log_pa(1.57, 0.2) == a);  // same point, same value
    CHECK(log_pa(1.5700001, 0.2) != a);  // new point, new stream
    const double direct = qcrel::plans::mortar_acceptance_normal_approx(
        {1.57, 0.2}, plan);
    CHECK(std::abs(std::exp(a) - direct) < 0.05);
}
