// Acceptance suite: one line per criterion, nonzero exit on any failure.
//
// The heavy criteria share a single full-scenario pipeline run. Criterion 8
// includes a qualitative ordering claim about autocorrelated OC curves that
// the implemented sampling model contradicts at the high-defect endpoint;
// the check is asserted as specified and its failure is expected and
// documented rather than masked.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qcrel/bayes.hpp"
#include "qcrel/format.hpp"
#include "qcrel/pipeline.hpp"
#include "qcrel/plans.hpp"
#include "qcrel/priors.hpp"
#include "qcrel/rng.hpp"
#include "qcrel/special.hpp"
#include "qcrel/wall.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using qcrel::priors::ParamPoint;

namespace {

struct Criterion {
    std::string id;
    std::string name;
    bool pass = true;
    std::vector<std::string> notes;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            notes.push_back(what);
        }
    }
};

std::string scenario_path(const char* name) {
    return std::string(QCREL_SCENARIO_DIR) + "/" + name;
}

fs::path work_dir(const char* tag) {
    const fs::path p = fs::temp_directory_path() / "qcrel_acceptance" / tag;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

bool near(double got, double want, double tol) {
    return std::abs(got - want) <= tol;
}

std::string show(double got, double want, double tol) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "got %.5f, want %.5f +/- %.5f", got, want,
                  tol);
    return buf;
}

// ---------------------------------------------------------------- C1

void c1_prior_table(Criterion& c) {
    struct Column {
        double mean, v0, q0, mu0, beta0;
    };
    // the unit-column q0 target is the beta0-implied 0.1786; the printed
    // 0.177 is inconsistent with beta0 = 0.0957 = 3 q0^2
    const Column cols[] = {
        {15.0, 0.18, 0.1786, 2.692, 0.0957},
        {5.0, 0.20, 0.198, 1.590, 0.118},
        {0.05, 0.35, 0.340, -3.054, 0.347},
    };
    for (const auto& col : cols) {
        const auto h = qcrel::priors::hyper_from_prior(col.mean, col.v0, 6);
        const double q0 = std::sqrt(h.beta0 / h.alpha0);
        c.expect(near(q0, col.q0, 0.001), "Q0 " + show(q0, col.q0, 0.001));
        c.expect(near(h.mu0, col.mu0, 0.001),
                 "mu0 " + show(h.mu0, col.mu0, 0.001));
        c.expect(near(h.kappa0, 6.0, 0.001), "kappa0");
        c.expect(near(h.alpha0, 3.0, 0.001), "alpha0");
        c.expect(near(h.beta0, col.beta0, 0.0005),
                 "beta0 " + show(h.beta0, col.beta0, 0.0005));
    }
}

// ---------------------------------------------------------------- C2

void c2_wall_design_point(Criterion& c) {
    const qcrel::wall::WallGeometry geom{3.3, 0.24, 0.024};
    const qcrel::wall::MasonrySpec spec{15.0, 5.0, 0.79, 0.585, 0.162,
                                        2400.0};
    const double fk = qcrel::wall::characteristic_strength(spec);
    c.expect(near(fk, 5.00, 0.01), "f_k " + show(fk, 5.00, 0.01));

    const double lambda = qcrel::wall::slenderness(geom, spec);
    c.expect(near(lambda, 0.281, 0.001),
             "lambda " + show(lambda, 0.281, 0.001));

    const double a = 1.0 - 2.0 * geom.r_e();
    c.expect(std::abs(a - 0.8) < 1e-15, "A " + show(a, 0.8, 0.0));

    const double n_re = qcrel::wall::homogeneity_eccentricity(lambda, 0.1);
    c.expect(near(n_re, 0.275, 0.001), "n_re " + show(n_re, 0.275, 0.001));

    const double n_fb = qcrel::wall::homogeneity_numeric(
        [&](double x) {
            auto m = spec;
            m.f_b = x;
            return qcrel::wall::characteristic_strength(m);
        },
        spec.f_b, 1e-5);
    c.expect(near(n_fb, 0.585, 1e-6), "n_fb " + show(n_fb, 0.585, 1e-6));
    const double n_fm = qcrel::wall::homogeneity_numeric(
        [&](double x) {
            auto m = spec;
            m.f_m = x;
            return qcrel::wall::characteristic_strength(m);
        },
        spec.f_m, 1e-5);
    c.expect(near(n_fm, 0.162, 1e-6), "n_fm " + show(n_fm, 0.162, 1e-6));
}

// ------------------------------------------------------------- C3 + C4

void c3_c4_fixed_v(Criterion& c3, Criterion& c4) {
    const auto sc = qcrel::pipeline::load_scenario(
        scenario_path("masonry_wall_fixedv.scenario"));
    const auto rep = qcrel::pipeline::run(sc, work_dir("fixedv").string());

    c3.expect(near(rep.q_r_incoming, 0.200, 0.0005),
              "Q_R in " + show(rep.q_r_incoming, 0.200, 0.0005));
    c3.expect(rep.stages.size() == 2, "expected two stages");
    if (rep.stages.size() == 2) {
        c3.expect(near(rep.stages[0].q_r, 0.165, 0.0005),
                  "Q_R 1 " + show(rep.stages[0].q_r, 0.165, 0.0005));
        c3.expect(near(rep.stages[1].q_r, 0.151, 0.0005),
                  "Q_R 2 " + show(rep.stages[1].q_r, 0.151, 0.0005));
        c3.expect(near(rep.stages[0].delta_q, 0.035, 0.001),
                  "dQ 1 " + show(rep.stages[0].delta_q, 0.035, 0.001));
        c3.expect(near(rep.stages[1].delta_q, 0.050, 0.001),
                  "dQ 2 " + show(rep.stages[1].delta_q, 0.050, 0.001));
        c3.expect(near(rep.stages[0].r, 1.05, 0.01),
                  "r 1 " + show(rep.stages[0].r, 1.05, 0.01));
        c3.expect(near(rep.stages[1].r, 1.07, 0.01),
                  "r 2 " + show(rep.stages[1].r, 1.07, 0.01));
        c3.expect(near(rep.stages[0].gamma, 1.43, 0.01),
                  "gamma 1 " + show(rep.stages[0].gamma, 1.43, 0.01));
        c3.expect(near(rep.stages[1].gamma, 1.40, 0.01),
                  "gamma 2 " + show(rep.stages[1].gamma, 1.40, 0.01));
    }

    // six subset rows; the "Execution 1.QC + 2.QC" row computes r = 1.025
    // where the reference prints 1.03 (rounding artifact; inside tolerance)
    const double want_r[] = {1.05, 1.07, 1.03, 1.04, 1.02, 1.03};
    const double want_g[] = {1.43, 1.40, 1.46, 1.45, 1.47, 1.46};
    c4.expect(rep.subsets.size() == 6, "expected six subset rows");
    for (std::size_t i = 0; i < rep.subsets.size() && i < 6; ++i) {
        c4.expect(near(rep.subsets[i].r, want_r[i], 0.015),
                  rep.subsets[i].name + " r " +
                      show(rep.subsets[i].r, want_r[i], 0.015));
        c4.expect(near(rep.subsets[i].gamma, want_g[i], 0.01),
                  rep.subsets[i].name + " gamma " +
                      show(rep.subsets[i].gamma, want_g[i], 0.01));
    }
}

// ------------------------------------------------------------- C5 + C6

void c5_c6_mcmc(Criterion& c5, Criterion& c6) {
    const auto sc = qcrel::pipeline::load_scenario(
        scenario_path("masonry_wall.scenario"));
    const auto rep = qcrel::pipeline::run(sc, work_dir("mcmc").string());

    // C5: gamma from the pipeline's own upper-credibility column for the
    // two-stage units+execution subset lies in [1.36, 1.42]
    bool found = false;
    for (const auto& row : rep.subsets_ci75) {
        if (row.name == "Masonry Units and Execution 1.QC + 2.QC") {
            found = true;
            char buf[120];
            std::snprintf(buf, sizeof(buf),
                          "ci75 gamma = %.4f (band [1.36, 1.42])", row.gamma);
            c5.notes.push_back(buf);
            c5.expect(row.gamma >= 1.36 && row.gamma <= 1.42, buf);
        }
    }
    c5.expect(found, "subset row not found");

    // C6: per-channel CoV trajectories within +/- 0.03
    const struct {
        const char* name;
        double want[3];
    } targets[] = {
        {"Masonry Unit", {0.25, 0.20, 0.18}},
        {"Mortar", {0.27, 0.22, 0.20}},
        {"Execution", {0.47, 0.38, 0.34}},
    };
    for (const auto& t : targets) {
        for (const auto& ch : rep.channels) {
            if (ch.name != t.name) continue;
            c6.expect(ch.v.size() == 3, std::string(t.name) + ": stages");
            for (std::size_t k = 0; k < ch.v.size() && k < 3; ++k) {
                c6.expect(near(ch.v[k], t.want[k], 0.03),
                          std::string(t.name) + " stage " +
                              std::to_string(k) + " " +
                              show(ch.v[k], t.want[k], 0.03));
            }
        }
    }
}

// ---------------------------------------------------------------- C7

void c7_bayesian_properties(Criterion& c) {
    qcrel::bayes::MCMCConfig cfg;
    cfg.n_chains = 4;
    cfg.n_samples = 30000;
    cfg.burn_in = 5000;
    cfg.seed = 11;

    // (a) always-accept filter: posterior = prior, KS < 0.02 at 1e5
    {
        const auto h = qcrel::priors::hyper_from_prior(15.0, 0.18, 6);
        const auto chain = qcrel::bayes::run_posterior_with(h, {}, cfg);
        const auto ref = qcrel::priors::sample_prior(h, 100000, 4);
        std::vector<double> cm(chain.samples.size()), cq(chain.samples.size());
        std::vector<double> rm(ref.size()), rq(ref.size());
        for (std::size_t i = 0; i < chain.samples.size(); ++i) {
            cm[i] = chain.samples[i].mu;
            cq[i] = chain.samples[i].q;
        }
        for (std::size_t i = 0; i < ref.size(); ++i) {
            rm[i] = ref[i].mu;
            rq[i] = ref[i].q;
        }
        const double ks_mu = oracle::ks_statistic(cm, rm);
        const double ks_q = oracle::ks_statistic(cq, rq);
        c.expect(ks_mu < 0.02, "identity filter KS(mu) = " +
                                   std::to_string(ks_mu));
        c.expect(ks_q < 0.02, "identity filter KS(q) = " +
                                  std::to_string(ks_q));
    }

    // (b) truncation filter vs rejection-sampling oracle
    {
        const auto h = qcrel::priors::hyper_from_prior(5.0, 0.20, 6);
        const double q_star = 0.20;
        qcrel::bayes::LogPaFn ind = [q_star](double, double q) {
            return q < q_star ? 0.0
                              : -std::numeric_limits<double>::infinity();
        };
        auto cfg_b = cfg;
        cfg_b.seed = 12;
        const auto chain = qcrel::bayes::run_posterior_with(h, {ind}, cfg_b);
        const auto prior = qcrel::priors::sample_prior(h, 600000, 5);
        std::vector<double> cq, rq;
        for (const auto& s : chain.samples) cq.push_back(s.q);
        for (const auto& p : prior)
            if (p.q < q_star) rq.push_back(p.q);
        const double ks = oracle::ks_statistic(cq, rq);
        c.expect(ks < 0.02, "truncation filter KS(q) = " + std::to_string(ks));
    }

    // (c) posterior mean of q vs 100x100 grid quadrature, within 2%
    {
        const auto h = qcrel::priors::hyper_from_prior(0.05, 0.35, 6);
        const qcrel::plans::ExecutionLimit plan{10, 0.05};
        auto cfg_c = cfg;
        cfg_c.seed = 13;
        const auto chain =
            qcrel::bayes::run_posterior(h, plan, std::nullopt, cfg_c);
        const auto f = [&](double mu, double q) {
            if (q <= 1e-6) return 0.0;
            return qcrel::plans::execution_acceptance({mu, q}, plan) *
                   std::exp(qcrel::priors::normal_gamma_logpdf(h, {mu, q}));
        };
        const double z = oracle::trapezoid_2d(f, h.mu0 - 2.0, h.mu0 + 2.0,
                                              1e-4, 1.6, 100, 100);
        const double zq = oracle::trapezoid_2d(
            [&](double mu, double q) { return q * f(mu, q); }, h.mu0 - 2.0,
            h.mu0 + 2.0, 1e-4, 1.6, 100, 100);
        const double want = zq / z;
        double got = 0.0;
        for (const auto& s : chain.samples) got += s.q;
        got /= static_cast<double>(chain.samples.size());
        c.expect(std::abs(got - want) < 0.02 * want,
                 "grid quadrature E[q] " + show(got, want, 0.02 * want));
    }
}

// ---------------------------------------------------------------- C8

void c8_oc(Criterion& c) {
    // (a) execution closed form vs Monte Carlo at 5 random points
    {
        qcrel::rng::Xoshiro256pp gen(2211);
        const qcrel::plans::ExecutionLimit plan{10, 0.05};
        for (int i = 0; i < 5; ++i) {
            const double q = 0.2 + 0.3 * gen.uniform01();
            const double f = 0.2 + 0.75 * gen.uniform01();
            const double mu =
                std::log(0.05) - q * qcrel::special::norm_icdf(f);
            const ParamPoint pt{mu, q};
            const double closed = qcrel::plans::execution_acceptance(pt, plan);
            const auto est = qcrel::plans::acceptance_probability(
                pt, plan, std::nullopt, 100000, gen.next());
            c.expect(std::abs(est.pa - closed) <=
                         3.0 * std::max(est.stderr_, 1e-4),
                     "closed form point " + std::to_string(i) + " " +
                         show(est.pa, closed, 3.0 * est.stderr_));
        }
    }

    // (b) OC curves monotone non-increasing in defect rate, all variants
    {
        std::vector<std::pair<qcrel::plans::AcceptancePlan,
                              qcrel::plans::DefectSide>>
            cases;
        cases.emplace_back(qcrel::plans::ExecutionLimit{10, 0.05},
                           qcrel::plans::DefectSide::above);
        cases.emplace_back(qcrel::plans::MortarMeanCriterion{3, 4.0, 1.48},
                           qcrel::plans::DefectSide::below);
        qcrel::plans::UnitTwoStage unit;
        unit.fc_declared = 9.0;
        unit.fm_declared = 12.0;
        cases.emplace_back(unit, qcrel::plans::DefectSide::below);

        qcrel::plans::QualitySweep sweep;
        sweep.axis = qcrel::plans::QualityAxis::defect_rate;
        sweep.fixed = 0.25;
        sweep.levels.resize(10);
        for (int i = 0; i < 10; ++i) sweep.levels[i] = 0.02 + 0.07 * i;
        int variant = 0;
        for (const auto& [plan, side] : cases) {
            const auto curve = qcrel::plans::oc_curve(plan, std::nullopt,
                                                      sweep, side, 100000, 6);
            for (std::size_t i = 1; i < curve.points.size(); ++i) {
                const auto& a = curve.points[i - 1];
                const auto& b = curve.points[i];
                c.expect(b.pa <= a.pa + 3.0 * (a.stderr_ + b.stderr_) + 1e-9,
                         "variant " + std::to_string(variant) +
                             " not monotone at level " +
                             std::to_string(b.quality));
            }
            variant++;
        }
    }

    // (c) qualitative AR(2)-vs-independent ordering at the sweep endpoints:
    // higher acceptance at the low-defect endpoint, lower at the high-defect
    // endpoint. The second half contradicts the implemented sampling model
    // (the autocorrelated curve dominates everywhere); asserted as specified
    // and expected to fail -- see the project notes.
    {
        qcrel::plans::UnitTwoStage unit;
        unit.fc_declared = 10.0;
        unit.fm_declared = 14.0;
        qcrel::plans::QualitySweep sweep;
        sweep.axis = qcrel::plans::QualityAxis::defect_rate;
        sweep.fixed = 0.25;
        sweep.levels = {0.02, 0.60};
        const auto indep = qcrel::plans::oc_curve(
            unit, std::nullopt, sweep, qcrel::plans::DefectSide::below,
            100000, 8);
        const auto ar = qcrel::plans::oc_curve(
            unit, qcrel::plans::ARModel{}, sweep,
            qcrel::plans::DefectSide::below, 100000, 8);
        const auto& il = indep.points.front();
        const auto& ih = indep.points.back();
        const auto& al = ar.points.front();
        const auto& ah = ar.points.back();
        c.expect(al.pa >= il.pa - 3.0 * (al.stderr_ + il.stderr_),
                 "low endpoint: AR should not be below independent");
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "high endpoint ordering: AR pa = %.4f vs independent "
                      "pa = %.4f (claimed AR lower)",
                      ah.pa, ih.pa);
        c.expect(ah.pa <= ih.pa + 3.0 * (ah.stderr_ + ih.stderr_), buf);
    }
}

// ---------------------------------------------------------------- C9

void c9_determinism(Criterion& c) {
    const auto a = work_dir("det_a");
    const auto b = work_dir("det_b");
    const std::string cli = QCREL_CLI_PATH;
    const std::string base = "\"" + cli + "\" --scenario \"" +
                             scenario_path("determinism_smoke.scenario") +
                             "\" run --out ";
    const int ra =
        std::system((base + "\"" + a.string() + "\" > /dev/null").c_str());
    const int rb =
        std::system((base + "\"" + b.string() + "\" > /dev/null").c_str());
    c.expect(ra == 0 && rb == 0, "pipeline runs exited nonzero");

    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        const auto name = entry.path().filename();
        const auto lhs = qcrel::fmt::read_file((a / name).string());
        const auto rhs = qcrel::fmt::read_file((b / name).string());
        c.expect(lhs == rhs, "artifact differs: " + name.string());
        ++compared;
    }
    c.expect(compared >= 8, "expected at least 8 artifacts");
}

}  // namespace

int main() {
    std::vector<Criterion> cs;
    cs.push_back({"C1", "prior hyperparameter table reproduced"});
    c1_prior_table(cs.back());
    cs.push_back({"C2", "wall design-point values"});
    c2_wall_design_point(cs.back());
    {
        Criterion c3{"C3", "fixed-V resistance-spread and gamma lines"};
        Criterion c4{"C4", "fixed-V subset table (six rows)"};
        c3_c4_fixed_v(c3, c4);
        cs.push_back(std::move(c3));
        cs.push_back(std::move(c4));
    }
    {
        Criterion c5{"C5",
                     "combined QC lowers gamma to ~1.38 at upper-credibility V"};
        Criterion c6{"C6", "sampled CoV trajectories (three channels)"};
        c5_c6_mcmc(c5, c6);
        cs.push_back(std::move(c5));
        cs.push_back(std::move(c6));
    }
    cs.push_back({"C7", "Bayesian filter property suite"});
    c7_bayesian_properties(cs.back());
    cs.push_back({"C8", "OC curve correctness and AR ordering"});
    c8_oc(cs.back());
    cs.push_back({"C9", "byte-identical reruns"});
    c9_determinism(cs.back());

    int failures = 0;
    for (const auto& c : cs) {
        std::printf("[%s] %s: %s\n", c.pass ? "PASS" : "FAIL", c.id.c_str(),
                    c.name.c_str());
        for (const auto& n : c.notes) std::printf("       %s\n", n.c_str());
        failures += c.pass ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(cs.size()) - failures,
                cs.size());
    return failures == 0 ? 0 : 1;
}
