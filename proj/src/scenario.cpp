#include "qcrel/scenario.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

#include "qcrel/format.hpp"

namespace qcrel::pipeline {
namespace {

// ---------------------------------------------------------------- parsing

using ValueData = std::variant<double, std::string, bool, std::vector<double>,
                               std::vector<std::string>>;

struct Value {
    ValueData data;
    int line = 0;
    mutable bool consumed = false;
};

struct Table {
    std::map<std::string, Value> values;
    std::map<std::string, Table> tables;
    std::map<std::string, std::vector<Table>> arrays;
    mutable bool visited = false;
};

[[noreturn]] void fail(const std::string& origin, int line,
                       const std::string& msg) {
    throw ScenarioError(origin + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// strips a trailing comment that is not inside a quoted string
std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
        if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

std::vector<std::string> split_path(const std::string& origin, int line,
                                    const std::string& path) {
    std::vector<std::string> segs;
    std::string cur;
    for (char c : path) {
        if (c == '.') {
            if (cur.empty()) fail(origin, line, "empty path segment");
            segs.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (cur.empty()) fail(origin, line, "empty path segment");
    segs.push_back(cur);
    return segs;
}

Table* descend(const std::string& origin, int line, Table* t,
               const std::string& seg) {
    if (auto it = t->arrays.find(seg); it != t->arrays.end()) {
        if (it->second.empty()) fail(origin, line, "empty table array");
        return &it->second.back();
    }
    return &t->tables[seg];
}

bool is_number(const std::string& s, double* out) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') return false;
    *out = v;
    return true;
}

std::string parse_quoted(const std::string& origin, int line,
                         const std::string& s) {
    if (s.size() < 2 || s.back() != '"')
        fail(origin, line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        if (s[i] == '\\' && i + 2 < s.size() &&
            (s[i + 1] == '"' || s[i + 1] == '\\')) {
            out += s[++i];
        } else if (s[i] == '"') {
            fail(origin, line, "unexpected quote inside string");
        } else {
            out += s[i];
        }
    }
    return out;
}

ValueData parse_value(const std::string& origin, int line,
                      const std::string& raw) {
    if (raw.empty()) fail(origin, line, "missing value");
    if (raw.front() == '"') return parse_quoted(origin, line, raw);
    if (raw == "true") return true;
    if (raw == "false") return false;
    if (raw.front() == '[') {
        if (raw.back() != ']') fail(origin, line, "unterminated array");
        std::vector<std::string> parts;
        std::string cur;
        bool in_str = false;
        for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
            const char c = raw[i];
            if (c == '"' && raw[i - 1] != '\\') in_str = !in_str;
            if (c == ',' && !in_str) {
                parts.push_back(trim(cur));
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!trim(cur).empty()) parts.push_back(trim(cur));
        if (parts.empty()) return std::vector<double>{};
        if (parts.front().front() == '"') {
            std::vector<std::string> out;
            for (const auto& p : parts) {
                if (p.empty() || p.front() != '"')
                    fail(origin, line, "mixed array element types");
                out.push_back(parse_quoted(origin, line, p));
            }
            return out;
        }
        std::vector<double> out;
        for (const auto& p : parts) {
            double v;
            if (!is_number(p, &v))
                fail(origin, line, "bad numeric array element '" + p + "'");
            out.push_back(v);
        }
        return out;
    }
    double v;
    if (!is_number(raw, &v))
        fail(origin, line, "cannot parse value '" + raw + "'");
    return v;
}

Table parse_tree(const std::string& text, const std::string& origin) {
    Table root;
    Table* current = &root;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(strip_comment(raw));
        if (s.empty()) continue;
        if (s.front() == '[') {
            const bool array = s.size() > 1 && s[1] == '[';
            const std::string close = array ? "]]" : "]";
            if (s.substr(s.size() - close.size()) != close)
                fail(origin, line, "malformed table header");
            const std::string inner = trim(
                s.substr(array ? 2 : 1, s.size() - 2 * (array ? 2 : 1)));
            const auto segs = split_path(origin, line, inner);
            Table* t = &root;
            for (std::size_t i = 0; i + 1 < segs.size(); ++i)
                t = descend(origin, line, t, segs[i]);
            const std::string& last = segs.back();
            if (array) {
                t->arrays[last].emplace_back();
                current = &t->arrays[last].back();
            } else {
                if (t->tables.count(last) || t->arrays.count(last))
                    fail(origin, line, "table redefined: " + inner);
                current = &t->tables[last];
            }
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            fail(origin, line, "expected key = value");
        const std::string key = trim(s.substr(0, eq));
        if (key.empty()) fail(origin, line, "empty key");
        for (char c : key)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' &&
                c != '-')
                fail(origin, line, "bad key character in '" + key + "'");
        if (current->values.count(key))
            fail(origin, line, "duplicate key '" + key + "'");
        current->values[key] =
            Value{parse_value(origin, line, trim(s.substr(eq + 1))), line};
    }
    return root;
}

// --------------------------------------------------------------- reading

struct Reader {
    const Table* t;  // may be null (missing optional section)
    std::string path;
    std::string origin;

    const Value* find(const std::string& key) const {
        if (!t) return nullptr;
        auto it = t->values.find(key);
        if (it == t->values.end()) return nullptr;
        it->second.consumed = true;
        return &it->second;
    }

    [[noreturn]] void missing(const std::string& key) const {
        throw ScenarioError(origin + ": missing required key: " + path + key);
    }

    [[noreturn]] void bad(const std::string& key, const char* want) const {
        throw ScenarioError(origin + ": key " + path + key + " must be a " +
                            want);
    }

    double num(const std::string& key, double def) const {
        const Value* v = find(key);
        if (!v) return def;
        if (const double* d = std::get_if<double>(&v->data)) return *d;
        bad(key, "number");
    }

    double require_num(const std::string& key) const {
        const Value* v = find(key);
        if (!v) missing(key);
        if (const double* d = std::get_if<double>(&v->data)) return *d;
        bad(key, "number");
    }

    long integer(const std::string& key, long def) const {
        const double d = num(key, static_cast<double>(def));
        const long l = static_cast<long>(d);
        if (static_cast<double>(l) != d) bad(key, "integer");
        return l;
    }

    bool boolean(const std::string& key, bool def) const {
        const Value* v = find(key);
        if (!v) return def;
        if (const bool* b = std::get_if<bool>(&v->data)) return *b;
        bad(key, "boolean");
    }

    std::string str(const std::string& key, const std::string& def) const {
        const Value* v = find(key);
        if (!v) return def;
        if (const auto* s = std::get_if<std::string>(&v->data)) return *s;
        bad(key, "string");
    }

    std::string require_str(const std::string& key) const {
        const Value* v = find(key);
        if (!v) missing(key);
        if (const auto* s = std::get_if<std::string>(&v->data)) return *s;
        bad(key, "string");
    }

    std::vector<double> num_array(const std::string& key,
                                  std::vector<double> def) const {
        const Value* v = find(key);
        if (!v) return def;
        if (const auto* a = std::get_if<std::vector<double>>(&v->data))
            return *a;
        bad(key, "numeric array");
    }

    std::vector<std::string> require_str_array(const std::string& key) const {
        const Value* v = find(key);
        if (!v) missing(key);
        if (const auto* a = std::get_if<std::vector<std::string>>(&v->data))
            return *a;
        if (const auto* e = std::get_if<std::vector<double>>(&v->data);
            e && e->empty())
            return {};
        bad(key, "string array");
    }

    // number, or a string (used for homogeneity = 0.585 | "wall:f_b")
    const Value* find_required(const std::string& key) const {
        const Value* v = find(key);
        if (!v) missing(key);
        return v;
    }

    Reader section(const std::string& key) const {
        if (!t) return {nullptr, path + key + ".", origin};
        auto it = t->tables.find(key);
        if (it == t->tables.end())
            return {nullptr, path + key + ".", origin};
        it->second.visited = true;
        return {&it->second, path + key + ".", origin};
    }

    std::vector<Reader> array(const std::string& key) const {
        std::vector<Reader> out;
        if (!t) return out;
        auto it = t->arrays.find(key);
        if (it == t->arrays.end()) return out;
        for (std::size_t i = 0; i < it->second.size(); ++i) {
            it->second[i].visited = true;
            out.push_back({&it->second[i],
                           path + key + "[" + std::to_string(i) + "].",
                           origin});
        }
        return out;
    }
};

void check_consumed(const Table& t, const std::string& path,
                    const std::string& origin) {
    for (const auto& [key, v] : t.values)
        if (!v.consumed)
            throw ScenarioError(origin + ": unknown key: " + path + key +
                                " (line " + std::to_string(v.line) + ")");
    for (const auto& [key, sub] : t.tables) {
        if (!sub.visited)
            throw ScenarioError(origin + ": unknown section: " + path + key);
        check_consumed(sub, path + key + ".", origin);
    }
    for (const auto& [key, arr] : t.arrays) {
        for (std::size_t i = 0; i < arr.size(); ++i) {
            if (!arr[i].visited)
                throw ScenarioError(origin + ": unknown section: " + path +
                                    key);
            check_consumed(arr[i], path + key + "[" + std::to_string(i) + "].",
                           origin);
        }
    }
}

// ----------------------------------------------------------- construction

plans::AcceptancePlan read_plan(const Reader& r) {
    const std::string kind = r.require_str("plan");
    if (kind == "unit_two_stage") {
        plans::UnitTwoStage p;
        p.n_per_stage = static_cast<int>(r.integer("n_per_stage", 6));
        p.fc_declared = r.require_num("fc_declared");
        p.fm_declared = r.require_num("fm_declared");
        p.k_char = r.num("k_char", 1.645);
        const std::string pol = r.str("policy", "combined");
        if (pol == "combined")
            p.policy = plans::SecondStagePolicy::combined_must_pass;
        else if (pol == "second_set")
            p.policy = plans::SecondStagePolicy::second_set_must_pass;
        else if (pol == "both_sets")
            p.policy = plans::SecondStagePolicy::both_sets_must_pass;
        else
            throw ScenarioError(r.origin + ": key " + r.path +
                                "policy must be combined|second_set|both_sets");
        return p;
    }
    if (kind == "mortar_mean") {
        plans::MortarMeanCriterion p;
        p.n = static_cast<int>(r.integer("n", 3));
        p.xk_declared = r.require_num("xk_declared");
        p.margin_factor = r.num("margin_factor", 1.48);
        return p;
    }
    if (kind == "execution_limit") {
        plans::ExecutionLimit p;
        p.n = static_cast<int>(r.integer("n", 10));
        p.limit = r.num("limit", 0.05);
        return p;
    }
    throw ScenarioError(
        r.origin + ": key " + r.path +
        "plan must be unit_two_stage|mortar_mean|execution_limit");
}

ChannelSpec read_channel(const Reader& r) {
    ChannelSpec c;
    c.name = r.require_str("name");
    const std::string mode = r.require_str("mode");
    if (mode == "mcmc")
        c.mode = ChannelMode::mcmc;
    else if (mode == "fixed")
        c.mode = ChannelMode::fixed;
    else
        throw ScenarioError(r.origin + ": key " + r.path +
                            "mode must be mcmc|fixed");

    const std::string side = r.str("defect_side", "below");
    if (side == "below")
        c.defect_side = plans::DefectSide::below;
    else if (side == "above")
        c.defect_side = plans::DefectSide::above;
    else
        throw ScenarioError(r.origin + ": key " + r.path +
                            "defect_side must be below|above");

    const Value* h = r.find_required("homogeneity");
    if (const double* d = std::get_if<double>(&h->data)) {
        c.homogeneity = *d;
    } else if (const auto* s = std::get_if<std::string>(&h->data)) {
        if (*s == "wall:f_b")
            c.homogeneity = WallBinding::f_b;
        else if (*s == "wall:f_m")
            c.homogeneity = WallBinding::f_m;
        else if (*s == "wall:r_e")
            c.homogeneity = WallBinding::r_e;
        else
            throw ScenarioError(r.origin + ": key " + r.path +
                                "homogeneity must be a number or "
                                "wall:f_b|wall:f_m|wall:r_e");
    } else {
        throw ScenarioError(r.origin + ": key " + r.path +
                            "homogeneity must be a number or wall binding");
    }

    if (c.mode == ChannelMode::mcmc) {
        c.prior.mean = r.require_num("prior_mean");
        c.prior.v0 = r.require_num("prior_v0");
        c.prior.n = static_cast<int>(r.integer("prior_n", 6));
        c.prior.kappa = r.num("prior_kappa", 0.0);
        const bool ar_on = r.boolean("ar", false);
        plans::ARModel ar;
        ar.phi1 = r.num("ar_phi1", ar.phi1);
        ar.phi2 = r.num("ar_phi2", ar.phi2);
        ar.innov_mean_scale = r.num("ar_innov_mean_scale", ar.innov_mean_scale);
        ar.innov_var_scale = r.num("ar_innov_var_scale", ar.innov_var_scale);
        ar.burn_in = static_cast<int>(r.integer("ar_burn_in", ar.burn_in));
        bool stage_uses_ar = false;
        for (const auto& sr : r.array("stage")) {
            StageSpec st;
            st.use_ar = sr.boolean("ar", false);
            st.plan = read_plan(sr);
            stage_uses_ar = stage_uses_ar || st.use_ar;
            c.stages.push_back(std::move(st));
        }
        if (c.stages.empty())
            throw ScenarioError(r.origin + ": channel '" + c.name +
                                "' in mcmc mode needs at least one "
                                "[[channel.stage]]");
        if (ar_on || stage_uses_ar) c.ar = ar;
    } else {
        c.v_in = r.require_num("v_in");
        c.v_out = r.num_array("v_out", {});
    }
    return c;
}

}  // namespace

int Scenario::n_stages() const {
    int n = 0;
    for (const auto& c : channels) {
        const int k = c.mode == ChannelMode::mcmc
                          ? static_cast<int>(c.stages.size())
                          : static_cast<int>(c.v_out.size());
        n = std::max(n, k);
    }
    return n;
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
    const Table root = parse_tree(text, origin);
    root.visited = true;
    Reader r{&root, "", origin};

    Scenario sc;
    sc.name = r.require_str("name");
    {
        const double seed = r.num("seed", 1.0);
        if (seed < 0 || seed != std::floor(seed))
            throw ScenarioError(origin +
                                ": key seed must be a non-negative integer");
        sc.seed = static_cast<std::uint64_t>(seed);
    }

    {
        Reader cal = r.section("calib");
        sc.calib.alpha_r = cal.num("alpha_r", sc.calib.alpha_r);
        sc.calib.beta_t = cal.num("beta_t", sc.calib.beta_t);
        sc.calib.k_fractile = cal.num("k_fractile", sc.calib.k_fractile);
        sc.calib.bias_b = cal.num("bias_b", sc.calib.bias_b);
        sc.calib.gamma_base = cal.num("gamma_base", sc.calib.gamma_base);
        try {
            sc.calib.validate();
        } catch (const std::exception& e) {
            throw ScenarioError(origin + ": [calib] invalid: " + e.what());
        }
    }

    {
        Reader m = r.section("mcmc");
        sc.mcmc.n_chains = static_cast<int>(m.integer("n_chains", 4));
        sc.mcmc.n_samples = m.integer("n_samples", 50000);
        sc.mcmc.burn_in = m.integer("burn_in", 10000);
        sc.mcmc.proposal_scale_mu = m.num("proposal_scale_mu", 0.0);
        sc.mcmc.proposal_scale_logq = m.num("proposal_scale_logq", 0.0);
        const std::string est = m.str("pa_estimator", "auto");
        if (est == "auto")
            sc.mcmc.pa.kind = bayes::PaEstimatorKind::auto_select;
        else if (est == "closed_form")
            sc.mcmc.pa.kind = bayes::PaEstimatorKind::closed_form;
        else if (est == "monte_carlo")
            sc.mcmc.pa.kind = bayes::PaEstimatorKind::monte_carlo;
        else if (est == "grid")
            sc.mcmc.pa.kind = bayes::PaEstimatorKind::grid_interpolation;
        else
            throw ScenarioError(origin +
                                ": [mcmc] pa_estimator must be "
                                "auto|closed_form|monte_carlo|grid");
        sc.mcmc.pa.n_sim =
            static_cast<std::size_t>(m.integer("pa_n_sim", 2000));
        sc.mcmc.pa.grid.n_mu =
            static_cast<std::size_t>(m.integer("grid_nodes_mu", 60));
        sc.mcmc.pa.grid.n_logq =
            static_cast<std::size_t>(m.integer("grid_nodes_logq", 60));
        sc.mcmc.pa.grid.n_sim_per_node =
            static_cast<std::size_t>(m.integer("grid_n_sim", 2000));
        sc.mcmc.pa.grid.pad = m.num("grid_pad", 0.15);
        try {
            sc.mcmc.validate();
        } catch (const std::exception& e) {
            throw ScenarioError(origin + ": [mcmc] invalid: " + e.what());
        }
    }

    if (Reader w = r.section("wall"); w.t) {
        WallConfig wc;
        wc.geom.h = w.require_num("h");
        wc.geom.t = w.require_num("t");
        wc.geom.e = w.require_num("e");
        wc.spec.f_b = w.require_num("f_b");
        wc.spec.f_m = w.require_num("f_m");
        wc.spec.big_k = w.require_num("big_k");
        wc.spec.exp_alpha = w.require_num("exp_alpha");
        wc.spec.exp_beta = w.require_num("exp_beta");
        wc.spec.k_e = w.require_num("k_e");
        try {
            wc.geom.validate();
            wc.spec.validate();
        } catch (const std::exception& e) {
            throw ScenarioError(origin + ": [wall] invalid: " + e.what());
        }
        sc.wall = wc;
    }

    {
        Reader rep = r.section("report");
        sc.report.round_q = static_cast<int>(rep.integer("round_q", 3));
        sc.report.round_r = static_cast<int>(rep.integer("round_r", 2));
        sc.report.round_gamma =
            static_cast<int>(rep.integer("round_gamma", 2));
        sc.report.out_dir = rep.str("out_dir", "out");
    }

    {
        Reader oc = r.section("oc");
        sc.oc.n_sim = static_cast<std::size_t>(oc.integer("n_sim", 20000));
        sc.oc.levels = static_cast<std::size_t>(oc.integer("levels", 15));
        sc.oc.p_min = oc.num("p_min", 0.01);
        sc.oc.p_max = oc.num("p_max", 0.60);
        if (!(sc.oc.p_min > 0.0 && sc.oc.p_max < 1.0 &&
              sc.oc.p_min < sc.oc.p_max) ||
            sc.oc.levels < 2)
            throw ScenarioError(origin + ": [oc] sweep settings invalid");
    }

    for (const auto& cr : r.array("channel"))
        sc.channels.push_back(read_channel(cr));
    if (sc.channels.empty())
        throw ScenarioError(origin + ": missing required key: channel");

    for (const auto& sr : r.array("subset")) {
        calib::SubsetSpec sub;
        sub.name = sr.require_str("name");
        sub.channels = sr.require_str_array("channels");
        sub.stage = static_cast<int>(sr.integer("stage", 1));
        sc.subsets.push_back(std::move(sub));
    }

    check_consumed(root, "", origin);

    // cross-field validation
    std::set<std::string> names;
    int stage_count = 0;
    for (const auto& c : sc.channels) {
        if (!names.insert(c.name).second)
            throw ScenarioError(origin + ": duplicate channel name: " +
                                c.name);
        if (std::holds_alternative<WallBinding>(c.homogeneity) && !sc.wall)
            throw ScenarioError(origin + ": channel '" + c.name +
                                "' binds homogeneity to the wall model but "
                                "no [wall] section is present");
        const int k = c.mode == ChannelMode::mcmc
                          ? static_cast<int>(c.stages.size())
                          : static_cast<int>(c.v_out.size());
        if (k > 0) {
            if (stage_count == 0) stage_count = k;
            if (k != stage_count)
                throw ScenarioError(origin + ": channel '" + c.name +
                                    "' has " + std::to_string(k) +
                                    " stages; other channels have " +
                                    std::to_string(stage_count));
        }
        if (c.mode == ChannelMode::mcmc) {
            if (!(c.prior.mean > 0.0) || !(c.prior.v0 > 0.0) ||
                c.prior.n < 1 || c.prior.kappa < 0.0)
                throw ScenarioError(origin + ": channel '" + c.name +
                                    "' has an invalid prior");
            for (const auto& st : c.stages) {
                try {
                    plans::validate(st.plan);
                    if (st.use_ar && c.ar) c.ar->validate();
                } catch (const std::exception& e) {
                    throw ScenarioError(origin + ": channel '" + c.name +
                                        "' plan invalid: " + e.what());
                }
            }
        } else if (!(c.v_in > 0.0)) {
            throw ScenarioError(origin + ": channel '" + c.name +
                                "' needs a positive v_in");
        }
    }
    for (const auto& sub : sc.subsets) {
        for (const auto& n : sub.channels)
            if (!names.count(n))
                throw ScenarioError(origin + ": subset '" + sub.name +
                                    "' references unknown channel: " + n);
        if (sub.stage < 1 || sub.stage > std::max(sc.n_stages(), 1))
            throw ScenarioError(origin + ": subset '" + sub.name +
                                "' stage out of range");
    }
    return sc;
}

Scenario load_scenario(const std::string& path) {
    return parse_scenario(fmt::read_file(path), path);
}

namespace {

const char* side_name(plans::DefectSide s) {
    return s == plans::DefectSide::below ? "below" : "above";
}

std::string homogeneity_text(const HomogeneitySource& h) {
    if (const double* d = std::get_if<double>(&h)) return fmt::g17(*d);
    switch (std::get<WallBinding>(h)) {
        case WallBinding::f_b: return "\"wall:f_b\"";
        case WallBinding::f_m: return "\"wall:f_m\"";
        case WallBinding::r_e: return "\"wall:r_e\"";
    }
    return "";
}

void echo_plan(std::string& out, const plans::AcceptancePlan& plan,
               bool use_ar) {
    if (const auto* u = std::get_if<plans::UnitTwoStage>(&plan)) {
        out += "plan = \"unit_two_stage\"\n";
        out += "n_per_stage = " + std::to_string(u->n_per_stage) + "\n";
        out += "fc_declared = " + fmt::g17(u->fc_declared) + "\n";
        out += "fm_declared = " + fmt::g17(u->fm_declared) + "\n";
        out += "k_char = " + fmt::g17(u->k_char) + "\n";
        out += "policy = ";
        switch (u->policy) {
            case plans::SecondStagePolicy::combined_must_pass:
                out += "\"combined\"\n";
                break;
            case plans::SecondStagePolicy::second_set_must_pass:
                out += "\"second_set\"\n";
                break;
            case plans::SecondStagePolicy::both_sets_must_pass:
                out += "\"both_sets\"\n";
                break;
        }
    } else if (const auto* m = std::get_if<plans::MortarMeanCriterion>(&plan)) {
        out += "plan = \"mortar_mean\"\n";
        out += "n = " + std::to_string(m->n) + "\n";
        out += "xk_declared = " + fmt::g17(m->xk_declared) + "\n";
        out += "margin_factor = " + fmt::g17(m->margin_factor) + "\n";
    } else {
        const auto& e = std::get<plans::ExecutionLimit>(plan);
        out += "plan = \"execution_limit\"\n";
        out += "n = " + std::to_string(e.n) + "\n";
        out += "limit = " + fmt::g17(e.limit) + "\n";
    }
    out += std::string("ar = ") + (use_ar ? "true" : "false") + "\n";
}

}  // namespace

std::string Scenario::echo() const {
    std::string out;
    out += "name = \"" + name + "\"\n";
    out += "seed = " + std::to_string(seed) + "\n\n";

    out += "[calib]\n";
    out += "alpha_r = " + fmt::g17(calib.alpha_r) + "\n";
    out += "beta_t = " + fmt::g17(calib.beta_t) + "\n";
    out += "k_fractile = " + fmt::g17(calib.k_fractile) + "\n";
    out += "bias_b = " + fmt::g17(calib.bias_b) + "\n";
    out += "gamma_base = " + fmt::g17(calib.gamma_base) + "\n\n";

    out += "[mcmc]\n";
    out += "n_chains = " + std::to_string(mcmc.n_chains) + "\n";
    out += "n_samples = " + std::to_string(mcmc.n_samples) + "\n";
    out += "burn_in = " + std::to_string(mcmc.burn_in) + "\n";
    out += "proposal_scale_mu = " + fmt::g17(mcmc.proposal_scale_mu) + "\n";
    out +=
        "proposal_scale_logq = " + fmt::g17(mcmc.proposal_scale_logq) + "\n";
    out += "pa_estimator = ";
    switch (mcmc.pa.kind) {
        case bayes::PaEstimatorKind::auto_select: out += "\"auto\"\n"; break;
        case bayes::PaEstimatorKind::closed_form:
            out += "\"closed_form\"\n";
            break;
        case bayes::PaEstimatorKind::monte_carlo:
            out += "\"monte_carlo\"\n";
            break;
        case bayes::PaEstimatorKind::grid_interpolation:
            out += "\"grid\"\n";
            break;
    }
    out += "pa_n_sim = " + std::to_string(mcmc.pa.n_sim) + "\n";
    out += "grid_nodes_mu = " + std::to_string(mcmc.pa.grid.n_mu) + "\n";
    out += "grid_nodes_logq = " + std::to_string(mcmc.pa.grid.n_logq) + "\n";
    out += "grid_n_sim = " + std::to_string(mcmc.pa.grid.n_sim_per_node) +
           "\n";
    out += "grid_pad = " + fmt::g17(mcmc.pa.grid.pad) + "\n\n";

    if (wall) {
        out += "[wall]\n";
        out += "h = " + fmt::g17(wall->geom.h) + "\n";
        out += "t = " + fmt::g17(wall->geom.t) + "\n";
        out += "e = " + fmt::g17(wall->geom.e) + "\n";
        out += "f_b = " + fmt::g17(wall->spec.f_b) + "\n";
        out += "f_m = " + fmt::g17(wall->spec.f_m) + "\n";
        out += "big_k = " + fmt::g17(wall->spec.big_k) + "\n";
        out += "exp_alpha = " + fmt::g17(wall->spec.exp_alpha) + "\n";
        out += "exp_beta = " + fmt::g17(wall->spec.exp_beta) + "\n";
        out += "k_e = " + fmt::g17(wall->spec.k_e) + "\n\n";
    }

    out += "[report]\n";
    out += "round_q = " + std::to_string(report.round_q) + "\n";
    out += "round_r = " + std::to_string(report.round_r) + "\n";
    out += "round_gamma = " + std::to_string(report.round_gamma) + "\n";
    out += "out_dir = \"" + report.out_dir + "\"\n\n";

    out += "[oc]\n";
    out += "n_sim = " + std::to_string(oc.n_sim) + "\n";
    out += "levels = " + std::to_string(oc.levels) + "\n";
    out += "p_min = " + fmt::g17(oc.p_min) + "\n";
    out += "p_max = " + fmt::g17(oc.p_max) + "\n";

    for (const auto& c : channels) {
        out += "\n[[channel]]\n";
        out += "name = \"" + c.name + "\"\n";
        out += std::string("mode = ") +
               (c.mode == ChannelMode::mcmc ? "\"mcmc\"" : "\"fixed\"") + "\n";
        out += std::string("defect_side = \"") + side_name(c.defect_side) +
               "\"\n";
        out += "homogeneity = " + homogeneity_text(c.homogeneity) + "\n";
        if (c.mode == ChannelMode::mcmc) {
            out += "prior_mean = " + fmt::g17(c.prior.mean) + "\n";
            out += "prior_v0 = " + fmt::g17(c.prior.v0) + "\n";
            out += "prior_n = " + std::to_string(c.prior.n) + "\n";
            out += "prior_kappa = " + fmt::g17(c.prior.kappa) + "\n";
            out += std::string("ar = ") + (c.ar ? "true" : "false") + "\n";
            if (c.ar) {
                out += "ar_phi1 = " + fmt::g17(c.ar->phi1) + "\n";
                out += "ar_phi2 = " + fmt::g17(c.ar->phi2) + "\n";
                out += "ar_innov_mean_scale = " +
                       fmt::g17(c.ar->innov_mean_scale) + "\n";
                out += "ar_innov_var_scale = " +
                       fmt::g17(c.ar->innov_var_scale) + "\n";
                out += "ar_burn_in = " + std::to_string(c.ar->burn_in) + "\n";
            }
            for (const auto& st : c.stages) {
                out += "[[channel.stage]]\n";
                echo_plan(out, st.plan, st.use_ar);
            }
        } else {
            out += "v_in = " + fmt::g17(c.v_in) + "\n";
            out += "v_out = [";
            for (std::size_t i = 0; i < c.v_out.size(); ++i) {
                if (i) out += ", ";
                out += fmt::g17(c.v_out[i]);
            }
            out += "]\n";
        }
    }

    for (const auto& sub : subsets) {
        out += "\n[[subset]]\n";
        out += "name = \"" + sub.name + "\"\n";
        out += "channels = [";
        for (std::size_t i = 0; i < sub.channels.size(); ++i) {
            if (i) out += ", ";
            out += "\"" + sub.channels[i] + "\"";
        }
        out += "]\n";
        out += "stage = " + std::to_string(sub.stage) + "\n";
    }
    return out;
}

std::uint64_t Scenario::config_hash() const {
    const std::string text = echo();
    std::uint64_t h = 14695981039346656037ull;  // FNV-1a
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace qcrel::pipeline
