#include "qcrel/calib.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "qcrel/format.hpp"
#include "qcrel/priors.hpp"

namespace qcrel::calib {

void CalibrationConfig::validate() const {
    if (!(alpha_r > 0.0 && alpha_r <= 1.0))
        throw std::domain_error("calib: alpha_r must be in (0,1]");
    if (!(beta_t > 0.0) || !(k_fractile > 0.0) || !(bias_b > 0.0) ||
        !(gamma_base > 0.0))
        throw std::domain_error("calib: parameters must be positive");
}

double Channel::v_at(int stage) const {
    if (stage < 0) throw std::domain_error("channel stage must be >= 0");
    if (stage == 0 || v_out.empty()) return v_in;
    const std::size_t k = static_cast<std::size_t>(stage);
    return k <= v_out.size() ? v_out[k - 1] : v_out.back();
}

std::vector<std::string> Channel::warnings() const {
    std::vector<std::string> w;
    double prev = v_in;
    for (std::size_t k = 0; k < v_out.size(); ++k) {
        if (v_out[k] > prev)
            w.push_back("channel '" + name + "': CoV increases at stage " +
                        std::to_string(k + 1));
        prev = v_out[k];
    }
    return w;
}

void ChannelSet::validate() const {
    if (channels.empty())
        throw std::domain_error("channel set must not be empty");
    std::set<std::string> names;
    for (const auto& c : channels) {
        if (!names.insert(c.name).second)
            throw std::domain_error("duplicate channel name: " + c.name);
        if (!(c.v_in > 0.0))
            throw std::domain_error("channel '" + c.name +
                                    "': v_in must be positive");
        for (double v : c.v_out)
            if (!(v > 0.0))
                throw std::domain_error("channel '" + c.name +
                                        "': outgoing CoV must be positive");
    }
}

const Channel& ChannelSet::find(const std::string& name) const {
    for (const auto& c : channels)
        if (c.name == name) return c;
    throw std::domain_error("unknown channel: " + name);
}

double q_of_v(double v) { return priors::q_from_cov(v); }

double v_of_q(double q) { return priors::cov_from_q(q); }

namespace {

double qr_from_values(const ChannelSet& set,
                      const std::vector<double>& v_values) {
    double acc = 0.0;
    for (std::size_t i = 0; i < set.channels.size(); ++i) {
        const auto& c = set.channels[i];
        if (!(v_values[i] > 0.0) || !std::isfinite(v_values[i]))
            throw std::domain_error("channel '" + c.name +
                                    "': missing or invalid CoV for stage");
        const double qi = q_of_v(v_values[i]);
        acc += c.n_i * c.n_i * qi * qi;
    }
    return std::sqrt(acc);
}

}  // namespace

double aggregate_qr(const ChannelSet& set, int stage) {
    set.validate();
    std::vector<double> vs(set.channels.size());
    for (std::size_t i = 0; i < set.channels.size(); ++i)
        vs[i] = set.channels[i].v_at(stage);
    return qr_from_values(set, vs);
}

double aggregate_qr_controlled(const ChannelSet& set,
                               const std::vector<std::string>& controlled,
                               int stage) {
    set.validate();
    for (const auto& name : controlled) set.find(name);  // throws on unknown
    std::vector<double> vs(set.channels.size());
    for (std::size_t i = 0; i < set.channels.size(); ++i) {
        const auto& c = set.channels[i];
        const bool on = std::find(controlled.begin(), controlled.end(),
                                  c.name) != controlled.end();
        vs[i] = on ? c.v_at(stage) : c.v_in;
    }
    return qr_from_values(set, vs);
}

double improvement_factor(double q_in, double q_out,
                          const CalibrationConfig& cfg) {
    cfg.validate();
    if (q_in < 0.0 || q_out < 0.0)
        throw std::domain_error("improvement_factor: q values must be >= 0");
    return std::exp(cfg.coefficient() * (q_in - q_out));
}

double partial_safety_factor(double q_r, const CalibrationConfig& cfg) {
    cfg.validate();
    if (q_r < 0.0)
        throw std::domain_error("partial_safety_factor: q_r must be >= 0");
    return cfg.bias_b * std::exp(cfg.coefficient() * q_r);
}

double improved_gamma(const CalibrationConfig& cfg, double r) {
    cfg.validate();
    if (!(r > 0.0)) throw std::domain_error("improved_gamma: r must be > 0");
    return cfg.gamma_base / r;
}

std::vector<ScenarioRow> scenario_table(const ChannelSet& set,
                                        const std::vector<SubsetSpec>& subsets,
                                        const CalibrationConfig& cfg) {
    cfg.validate();
    const double qr_in = aggregate_qr(set, 0);
    std::vector<ScenarioRow> rows;
    rows.reserve(subsets.size());
    for (const auto& sub : subsets) {
        const double qr_out =
            aggregate_qr_controlled(set, sub.channels, sub.stage);
        const double r = improvement_factor(qr_in, qr_out, cfg);
        rows.push_back({sub.name, r, improved_gamma(cfg, r)});
    }
    return rows;
}

std::string scenario_table_csv(const std::vector<ScenarioRow>& rows) {
    std::string out = "name,r,gamma\n";
    for (const auto& row : rows) {
        out += row.name;
        out += ',';
        out += fmt::g17(row.r);
        out += ',';
        out += fmt::g17(row.gamma);
        out += '\n';
    }
    return out;
}

}  // namespace qcrel::calib
