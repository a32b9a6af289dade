#include "qcrel/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <json.hpp>
#include <sstream>

#include "qcrel/format.hpp"
#include "qcrel/parallel.hpp"
#include "qcrel/rng.hpp"
#include "qcrel/simd/kernels.hpp"
#include "qcrel/special.hpp"

namespace qcrel::pipeline {
namespace {

std::string pad(const std::string& s, std::size_t width) {
    std::string out = s;
    while (out.size() < width) out += ' ';
    out += ' ';
    return out;
}

std::string slug(const std::string& name) {
    std::string out;
    for (char c : name) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            out += static_cast<char>(
                std::tolower(static_cast<unsigned char>(c)));
        else if (!out.empty() && out.back() != '_')
            out += '_';
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out;
}

std::vector<double> quantile_grid(const bayes::ParamChain& chain) {
    // geometric grid spanning well past the chain's predictive bulk
    double mu_lo = 1e300, mu_hi = -1e300, q_hi = 0.0;
    for (const auto& s : chain.samples) {
        mu_lo = std::min(mu_lo, s.mu);
        mu_hi = std::max(mu_hi, s.mu);
        q_hi = std::max(q_hi, s.q);
    }
    const double lo = mu_lo - 7.0 * q_hi;
    const double hi = mu_hi + 7.0 * q_hi;
    constexpr std::size_t kPoints = 400;
    std::vector<double> grid(kPoints);
    for (std::size_t i = 0; i < kPoints; ++i)
        grid[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) /
                                    static_cast<double>(kPoints - 1));
    return grid;
}

void summarise_stage(ChannelResult& res, const bayes::ParamChain& chain) {
    const auto s = bayes::cov_summary(chain);
    res.v.push_back(s.mean_v);
    res.median_v.push_back(s.median_v);
    res.ci75_lo.push_back(s.ci75_lo);
    res.ci75_hi.push_back(s.ci75_hi);
    res.predictive_v.push_back(bayes::predictive_moment_cov(chain));
}

struct ChannelArtifacts {
    std::vector<std::pair<std::string, std::string>> files;  // name, payload
};

ChannelResult run_channel(const Scenario& sc, const ChannelSpec& ch,
                          const std::string& file_tag, double n_i,
                          std::uint64_t run_seed,
                          ChannelArtifacts* artifacts) {
    ChannelResult res;
    res.name = ch.name;
    res.n_i = n_i;
    res.mode = ch.mode;

    if (ch.mode == ChannelMode::fixed) {
        res.v.push_back(ch.v_in);
        res.median_v.push_back(ch.v_in);
        res.ci75_lo.push_back(ch.v_in);
        res.ci75_hi.push_back(ch.v_in);
        res.predictive_v.push_back(ch.v_in);
        double prev = ch.v_in;
        for (double v : ch.v_out) {
            if (v > prev)
                res.warnings.push_back("channel '" + ch.name +
                                       "': outgoing CoV increases");
            prev = v;
            res.v.push_back(v);
            res.median_v.push_back(v);
            res.ci75_lo.push_back(v);
            res.ci75_hi.push_back(v);
            res.predictive_v.push_back(v);
        }
        return res;
    }

    const double kappa =
        ch.prior.kappa > 0.0 ? ch.prior.kappa : static_cast<double>(ch.prior.n);
    const auto hyper =
        priors::hyper_from_prior(ch.prior.mean, ch.prior.v0, ch.prior.n, kappa);

    bayes::MCMCConfig cfg = sc.mcmc;
    cfg.seed = run_seed;

    // incoming state: the raw prior, sampled directly (no filter)
    const std::size_t retained =
        static_cast<std::size_t>(cfg.n_samples - cfg.burn_in) *
        static_cast<std::size_t>(cfg.n_chains);
    bayes::ParamChain incoming;
    incoming.samples =
        priors::sample_prior(hyper, retained, rng::mix_seed(run_seed, 0x1));
    incoming.chain_ids.assign(retained, 0);
    incoming.acceptance_rate = 1.0;
    incoming.rhat_mu = incoming.rhat_q = 1.0;
    summarise_stage(res, incoming);

    std::vector<bayes::StagePlan> stages;
    for (const auto& st : ch.stages)
        stages.push_back({st.plan, st.use_ar ? ch.ar : std::nullopt});
    const auto chains = bayes::sequential_update(hyper, stages, cfg);

    for (std::size_t k = 0; k < chains.size(); ++k) {
        const auto& chain = chains[k];
        summarise_stage(res, chain);
        res.acceptance_rate.push_back(chain.acceptance_rate);
        res.rhat_mu.push_back(chain.rhat_mu);
        res.rhat_q.push_back(chain.rhat_q);
        if (!chain.converged)
            res.warnings.push_back(
                "channel '" + ch.name + "' stage " + std::to_string(k + 1) +
                ": potential scale reduction above 1.1");
        if (artifacts) {
            const std::string base =
                file_tag + "_stage" + std::to_string(k + 1);
            artifacts->files.emplace_back("chain_" + base + ".csv",
                                          chain.to_csv());
            const auto grid = quantile_grid(chain);
            const auto pd = bayes::predictive_density(chain, grid);
            artifacts->files.emplace_back("predictive_" + base + ".csv",
                                          pd.to_csv());
        }
    }
    for (std::size_t k = 1; k < res.v.size(); ++k) {
        if (res.v[k] > res.v[k - 1])
            res.warnings.push_back("channel '" + ch.name +
                                   "': filtered CoV increases at stage " +
                                   std::to_string(k));
    }
    return res;
}

std::string trajectories_csv(const std::vector<ChannelResult>& channels) {
    std::string out =
        "channel,stage,v_mean,v_median,ci75_lo,ci75_hi,predictive_v\n";
    for (const auto& c : channels) {
        for (std::size_t k = 0; k < c.v.size(); ++k) {
            out += c.name + ',' + std::to_string(k) + ',' +
                   fmt::g17(c.v[k]) + ',' + fmt::g17(c.median_v[k]) + ',' +
                   fmt::g17(c.ci75_lo[k]) + ',' + fmt::g17(c.ci75_hi[k]) +
                   ',' + fmt::g17(c.predictive_v[k]) + '\n';
        }
    }
    return out;
}

std::string calibration_csv(const RunReport& rep) {
    std::string out = "stage,q_r,delta_q,r,gamma\n";
    out += "0," + fmt::g17(rep.q_r_incoming) + ",0,1," + fmt::g17(0.0) + "\n";
    for (const auto& st : rep.stages) {
        out += std::to_string(st.stage) + ',' + fmt::g17(st.q_r) + ',' +
               fmt::g17(st.delta_q) + ',' + fmt::g17(st.r) + ',' +
               fmt::g17(st.gamma) + '\n';
    }
    return out;
}

}  // namespace

calib::ChannelSet channel_set_from_results(
    const std::vector<ChannelResult>& results, bool upper_ci) {
    calib::ChannelSet set;
    for (const auto& r : results) {
        const auto& src = upper_ci ? r.ci75_hi : r.v;
        calib::Channel c;
        c.name = r.name;
        c.n_i = r.n_i;
        c.v_in = src.front();
        c.v_out.assign(src.begin() + 1, src.end());
        set.channels.push_back(std::move(c));
    }
    return set;
}

double resolve_homogeneity(const Scenario& sc, const ChannelSpec& ch) {
    if (const double* d = std::get_if<double>(&ch.homogeneity)) return *d;
    if (!sc.wall)
        throw ScenarioError("channel '" + ch.name +
                            "' needs the [wall] section");
    const auto& w = *sc.wall;
    switch (std::get<WallBinding>(ch.homogeneity)) {
        case WallBinding::f_b: {
            auto spec = w.spec;
            return wall::homogeneity_numeric(
                [&](double x) {
                    auto m = spec;
                    m.f_b = x;
                    return wall::characteristic_strength(m);
                },
                spec.f_b, 1e-5);
        }
        case WallBinding::f_m: {
            auto spec = w.spec;
            return wall::homogeneity_numeric(
                [&](double x) {
                    auto m = spec;
                    m.f_m = x;
                    return wall::characteristic_strength(m);
                },
                spec.f_m, 1e-5);
        }
        case WallBinding::r_e: {
            const double lambda = wall::slenderness(w.geom, w.spec);
            return wall::homogeneity_eccentricity(lambda, w.geom.r_e());
        }
    }
    throw std::logic_error("unreachable");
}

RunReport run(const Scenario& scenario, const std::string& out_dir,
              std::optional<std::uint64_t> seed_override) {
    const std::uint64_t seed = seed_override.value_or(scenario.seed);

    RunReport rep;
    rep.scenario_name = scenario.name;
    rep.seed = seed;
    rep.config_hash = scenario.config_hash();
    rep.version = std::string(kVersion);
    rep.kernels = std::string(simd::isa_name(simd::active_isa()));

    // channels run in parallel; every channel derives its own seed and
    // writes to its own slot, so scheduling cannot change the result
    const std::size_t n_ch = scenario.channels.size();
    rep.channels.resize(n_ch);
    std::vector<ChannelArtifacts> artifacts(n_ch);
    std::vector<double> degrees(n_ch);
    for (std::size_t i = 0; i < n_ch; ++i)
        degrees[i] = resolve_homogeneity(scenario, scenario.channels[i]);

    // artifact file tags: slugged names, disambiguated if they collide
    std::vector<std::string> tags(n_ch);
    for (std::size_t i = 0; i < n_ch; ++i) {
        tags[i] = slug(scenario.channels[i].name);
        for (std::size_t j = 0; j < i; ++j)
            if (tags[j] == tags[i]) {
                tags[i] += "_" + std::to_string(i);
                break;
            }
    }

    parallel_for(n_ch, 0, [&](std::size_t i) {
        try {
            rep.channels[i] = run_channel(scenario, scenario.channels[i],
                                          tags[i], degrees[i],
                                          rng::mix_seed(seed, 0xC4A + i),
                                          &artifacts[i]);
        } catch (const std::exception& e) {
            throw std::runtime_error("channel '" + scenario.channels[i].name +
                                     "': " + e.what());
        }
    });

    const auto set = channel_set_from_results(rep.channels, false);
    const auto set_ci = channel_set_from_results(rep.channels, true);
    const int n_stages = scenario.n_stages();

    rep.q_r_incoming = calib::aggregate_qr(set, 0);
    rep.q_r_incoming_ci75 = calib::aggregate_qr(set_ci, 0);
    for (int k = 1; k <= n_stages; ++k) {
        StageCalibration st;
        st.stage = k;
        st.q_r = calib::aggregate_qr(set, k);
        st.delta_q = rep.q_r_incoming - st.q_r;
        st.r = calib::improvement_factor(rep.q_r_incoming, st.q_r,
                                         scenario.calib);
        st.gamma = calib::improved_gamma(scenario.calib, st.r);
        rep.stages.push_back(st);
    }

    rep.subsets = calib::scenario_table(set, scenario.subsets, scenario.calib);
    rep.subsets_ci75 =
        calib::scenario_table(set_ci, scenario.subsets, scenario.calib);

    // artifacts
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto emit = [&](const std::string& name, const std::string& body) {
        fmt::write_file((fs::path(out_dir) / name).string(), body);
    };
    emit("scenario.echo", scenario.echo());
    emit("trajectories.csv", trajectories_csv(rep.channels));
    emit("calibration.csv", calibration_csv(rep));
    emit("subsets.csv", calib::scenario_table_csv(rep.subsets));
    emit("subsets_ci75.csv", calib::scenario_table_csv(rep.subsets_ci75));
    for (const auto& art : artifacts)
        for (const auto& [name, body] : art.files) emit(name, body);
    emit("report.txt", rep.text(scenario.report));
    emit("report.json", rep.json());
    return rep;
}

void emit_oc(const Scenario& scenario, const std::string& channel,
             const std::string& out_dir,
             std::optional<std::uint64_t> seed_override) {
    const std::uint64_t seed = seed_override.value_or(scenario.seed);
    const ChannelSpec* ch = nullptr;
    for (const auto& c : scenario.channels)
        if (c.name == channel) ch = &c;
    if (!ch) throw ScenarioError("unknown channel: " + channel);
    if (ch->mode != ChannelMode::mcmc || ch->stages.empty())
        throw ScenarioError("channel '" + channel +
                            "' has no acceptance plan to sweep");

    const auto& plan = ch->stages.front().plan;
    plans::QualitySweep sweep;
    sweep.axis = plans::QualityAxis::defect_rate;
    sweep.fixed = priors::q_from_cov(ch->prior.v0);
    sweep.levels.resize(scenario.oc.levels);
    for (std::size_t i = 0; i < scenario.oc.levels; ++i)
        sweep.levels[i] =
            scenario.oc.p_min +
            (scenario.oc.p_max - scenario.oc.p_min) * static_cast<double>(i) /
                static_cast<double>(scenario.oc.levels - 1);

    const auto ar = ch->ar.value_or(plans::ARModel{});
    const auto independent =
        plans::oc_curve(plan, std::nullopt, sweep, ch->defect_side,
                        scenario.oc.n_sim, rng::mix_seed(seed, 0x0C1));
    const auto autocorr =
        plans::oc_curve(plan, ar, sweep, ch->defect_side, scenario.oc.n_sim,
                        rng::mix_seed(seed, 0x0C2));

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    fmt::write_file(
        (fs::path(out_dir) / ("oc_" + slug(channel) + "_independent.csv"))
            .string(),
        independent.to_csv());
    fmt::write_file(
        (fs::path(out_dir) / ("oc_" + slug(channel) + "_ar2.csv")).string(),
        autocorr.to_csv());
}

std::string RunReport::text(const ReportSettings& s) const {
    std::ostringstream out;
    out << "conformity-control calibration report\n";
    out << "scenario: " << scenario_name << "\n";
    out << "seed: " << seed << "\n";
    char hash_buf[20];
    std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                  static_cast<unsigned long long>(config_hash));
    out << "config-hash: " << hash_buf << "\n";
    out << "version: " << version << "   kernels: " << kernels << "\n\n";

    const int n_stages = stages.empty() ? 0 : stages.back().stage;
    out << "channel trajectories (coefficient of variation, chain mean)\n";
    out << "  " << pad("channel", 24) << pad("n_i", 8) << pad("incoming", 10);
    for (int k = 1; k <= n_stages; ++k)
        out << pad("stage " + std::to_string(k), 10);
    out << "\n";
    for (const auto& c : channels) {
        out << "  " << pad(c.name, 24) << pad(fmt::fixed(c.n_i, 3), 8);
        for (std::size_t k = 0; k < c.v.size(); ++k)
            out << pad(fmt::fixed(c.v[k], s.round_q), 10);
        for (std::size_t k = c.v.size();
             k < static_cast<std::size_t>(n_stages) + 1; ++k)
            out << pad("-", 10);
        out << "\n";
    }

    out << "\nresistance spread (log-space)\n";
    out << "  " << pad("Q_R", 32) << pad(fmt::fixed(q_r_incoming, s.round_q), 10);
    for (const auto& st : stages)
        out << pad(fmt::fixed(st.q_r, s.round_q), 10);
    out << "\n";

    out << "\nimprovement relative to incoming\n";
    out << "  " << pad("delta Q_R", 32) << pad("-", 10);
    for (const auto& st : stages)
        out << pad(fmt::fixed(st.delta_q, s.round_q), 10);
    out << "\n  " << pad("improvement factor r", 32) << pad("-", 10);
    for (const auto& st : stages)
        out << pad(fmt::fixed(st.r, s.round_r), 10);
    out << "\n  " << pad("partial safety factor gamma_M", 32) << pad("-", 10);
    for (const auto& st : stages)
        out << pad(fmt::fixed(st.gamma, s.round_gamma), 10);
    out << "\n";

    if (!subsets.empty()) {
        out << "\nquality-control subsets\n";
        out << "  " << pad("task", 40) << pad("r(E[V])", 9)
            << pad("gamma", 9) << pad("r(V75)", 9) << pad("gamma75", 9)
            << "\n";
        for (std::size_t i = 0; i < subsets.size(); ++i) {
            out << "  " << pad(subsets[i].name, 40)
                << pad(fmt::fixed(subsets[i].r, s.round_r), 9)
                << pad(fmt::fixed(subsets[i].gamma, s.round_gamma), 9)
                << pad(fmt::fixed(subsets_ci75[i].r, s.round_r), 9)
                << pad(fmt::fixed(subsets_ci75[i].gamma, s.round_gamma), 9)
                << "\n";
        }
        out << "  (V75 columns use the upper limit of the 75% credibility "
               "interval of V)\n";
    }

    bool any_warn = false;
    for (const auto& c : channels)
        for (const auto& w : c.warnings) {
            if (!any_warn) out << "\nwarnings\n";
            any_warn = true;
            out << "  " << w << "\n";
        }
    return std::move(out).str();
}

std::string RunReport::json() const {
    nlohmann::json j;
    j["scenario"] = scenario_name;
    j["seed"] = seed;
    char hash_buf[20];
    std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                  static_cast<unsigned long long>(config_hash));
    j["config_hash"] = hash_buf;
    j["version"] = version;
    j["kernels"] = kernels;
    j["q_r_incoming"] = q_r_incoming;
    j["q_r_incoming_ci75"] = q_r_incoming_ci75;
    j["channels"] = nlohmann::json::array();
    for (const auto& c : channels) {
        nlohmann::json cj;
        cj["name"] = c.name;
        cj["n_i"] = c.n_i;
        cj["mode"] = c.mode == ChannelMode::mcmc ? "mcmc" : "fixed";
        cj["v_mean"] = c.v;
        cj["v_median"] = c.median_v;
        cj["ci75_lo"] = c.ci75_lo;
        cj["ci75_hi"] = c.ci75_hi;
        cj["predictive_v"] = c.predictive_v;
        cj["acceptance_rate"] = c.acceptance_rate;
        cj["rhat_mu"] = c.rhat_mu;
        cj["rhat_q"] = c.rhat_q;
        cj["warnings"] = c.warnings;
        j["channels"].push_back(cj);
    }
    j["stages"] = nlohmann::json::array();
    for (const auto& st : stages) {
        j["stages"].push_back({{"stage", st.stage},
                               {"q_r", st.q_r},
                               {"delta_q", st.delta_q},
                               {"r", st.r},
                               {"gamma", st.gamma}});
    }
    const auto rows = [](const std::vector<calib::ScenarioRow>& rs) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& row : rs)
            a.push_back(
                {{"name", row.name}, {"r", row.r}, {"gamma", row.gamma}});
        return a;
    };
    j["subsets"] = rows(subsets);
    j["subsets_ci75"] = rows(subsets_ci75);
    return j.dump(2) + "\n";
}

}  // namespace qcrel::pipeline
