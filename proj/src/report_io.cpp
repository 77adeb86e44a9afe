#include "delstab/report_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "delstab/errors.hpp"

namespace delstab {

namespace {

void require_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                  const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <typename T>
std::optional<T> opt_get(const nlohmann::json& j, const std::string& key) {
    if (!j.contains(key)) return std::nullopt;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad value for '" + key + "': " + e.what());
    }
}

} // namespace

HistoryFunction HistorySpec::build(int dim) const {
    if (constant) {
        std::vector<double> v = values;
        if (v.empty()) v.assign(static_cast<size_t>(dim), 1.0);
        return HistoryFunction::constant(v);
    }
    return HistoryFunction::sampled(times, states);
}

DelaySystem RunConfig::build_delay_system() const {
    if (!matrix) throw ConfigError("config needs 'matrix'");
    if (!placement) throw ConfigError("config needs 'placement'");
    DelayPlacement pl;
    pl.kind = placement_from_string(*placement);
    if (pl.kind == Placement::MixedSelf) pl.a13 = a13;
    return build_system(InteractionMatrix::from_coeffs(*matrix), pl);
}

RunConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    require_keys(j,
                 {"matrix", "placement", "a13", "tau", "tau_max", "horizon", "step", "history",
                  "scan", "triad", "out", "seed"},
                 "config");
    RunConfig c;
    c.matrix = opt_get<std::vector<double>>(j, "matrix");
    c.placement = opt_get<std::string>(j, "placement");
    c.a13 = opt_get<double>(j, "a13").value_or(0.0);
    c.tau = opt_get<double>(j, "tau");
    c.tau_max = opt_get<double>(j, "tau_max");
    c.horizon = opt_get<double>(j, "horizon");
    c.step = opt_get<double>(j, "step");
    c.out = opt_get<std::string>(j, "out").value_or(".");
    c.seed = opt_get<std::uint64_t>(j, "seed").value_or(1);

    if (j.contains("history")) {
        const auto& h = j.at("history");
        require_keys(h, {"type", "values", "times", "states"}, "history");
        HistorySpec hs;
        const std::string type = opt_get<std::string>(h, "type").value_or("constant");
        if (type == "constant") {
            hs.constant = true;
            hs.values = opt_get<std::vector<double>>(h, "values").value_or(std::vector<double>{});
        } else if (type == "sampled") {
            hs.constant = false;
            hs.times = opt_get<std::vector<double>>(h, "times").value_or(std::vector<double>{});
            hs.states = opt_get<std::vector<std::vector<double>>>(h, "states")
                            .value_or(std::vector<std::vector<double>>{});
        } else {
            throw ConfigError("history type must be 'constant' or 'sampled'");
        }
        c.history = hs;
    }
    if (j.contains("scan")) {
        const auto& s = j.at("scan");
        require_keys(s, {"ranges", "counts", "request", "verify_fraction", "parallel"}, "scan");
        ScanSpec sp;
        const auto ranges =
            opt_get<std::vector<std::vector<double>>>(s, "ranges")
                .value_or(std::vector<std::vector<double>>(4, std::vector<double>{-9.0, 9.0}));
        const auto counts = opt_get<std::vector<int>>(s, "counts").value_or(std::vector<int>(4, 19));
        if (ranges.size() != 4 || counts.size() != 4)
            throw ConfigError("scan needs 4 ranges and 4 counts");
        for (int d = 0; d < 4; ++d) {
            if (ranges[d].size() != 2 || !(ranges[d][0] <= ranges[d][1]))
                throw ConfigError("scan range " + std::to_string(d) + " must be [lo, hi]");
            sp.grid.ranges[d] = {ranges[d][0], ranges[d][1]};
            sp.grid.counts[d] = counts[d];
        }
        sp.request = opt_get<std::vector<int>>(s, "request").value_or(std::vector<int>{});
        sp.verify_fraction = opt_get<double>(s, "verify_fraction").value_or(0.0);
        sp.parallel = opt_get<bool>(s, "parallel").value_or(true);
        c.scan = sp;
    }
    if (j.contains("triad")) {
        const auto& t = j.at("triad");
        require_keys(t, {"window", "samples"}, "triad");
        const auto window =
            opt_get<std::vector<double>>(t, "window").value_or(std::vector<double>{0.0, 1.0});
        if (window.size() != 2 || !(window[0] < window[1]))
            throw ConfigError("triad window must be [lo, hi]");
        c.triad.window_lo = window[0];
        c.triad.window_hi = window[1];
        c.triad.samples = opt_get<int>(t, "samples").value_or(512);
    }
    return c;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config parse error in '" + path + "': " + e.what());
    }
    return parse_config(j);
}

nlohmann::json to_json(const BaselineStability& b) {
    return {{"trace", b.trace}, {"determinant", b.determinant}, {"verdict", to_string(b.verdict)}};
}

nlohmann::json to_json(const QuasiPolynomial& w) {
    return {{"p", w.p.c}, {"q1", w.q1.c}, {"q2", w.q2.c}, {"placement", to_string(w.tag)}};
}

nlohmann::json to_json(const SwitchEvent& ev) {
    return {{"tau", ev.tau}, {"direction", to_string(ev.direction)}, {"omega", ev.omega}};
}

nlohmann::json to_json(const SwitchReport& rep) {
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : rep.events) events.push_back(to_json(e));
    nlohmann::json switches = nlohmann::json::array();
    for (const auto& s : rep.switches) switches.push_back(to_json(s));
    nlohmann::json intervals = nlohmann::json::array();
    for (const auto& iv : rep.stable_intervals) {
        nlohmann::json o = {{"lo", iv.lo}};
        if (iv.unbounded)
            o["hi"] = nullptr;
        else
            o["hi"] = iv.hi;
        intervals.push_back(o);
    }
    nlohmann::json ev;
    if (rep.eventual == EventualKind::StableForever)
        ev = {{"kind", "stable_forever"}};
    else
        ev = {{"kind", "unstable_beyond"}, {"tau", rep.eventual_tau}};
    return {{"baseline", to_json(rep.baseline)},
            {"initial_unstable_roots", rep.initial_unstable_roots},
            {"tau_max", rep.tau_max},
            {"events", events},
            {"switches", switches},
            {"total_switch_count", rep.total_switch_count},
            {"stable_intervals", intervals},
            {"eventual", ev},
            {"annotations", rep.annotations}};
}

nlohmann::json to_json(const TheoremClassification& tc) {
    nlohmann::json o = {{"regime", to_string(tc.regime)}};
    if (tc.switch_bound)
        o["switch_bound"] = *tc.switch_bound;
    else
        o["switch_bound"] = nullptr;
    return o;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << content;
    if (!out.good()) throw ConfigError("write failed for '" + path + "'");
}

void write_report_json(const nlohmann::json& report, const std::string& dir) {
    std::filesystem::create_directories(dir);
    write_text_file(dir + "/report.json", report.dump(2) + "\n");
}

void write_switches_csv(const std::vector<SwitchEvent>& switches, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::string csv = "tau,direction,omega\n";
    char buf[128];
    for (const auto& s : switches) {
        std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g\n", s.tau, to_string(s.direction).c_str(),
                      s.omega);
        csv += buf;
    }
    write_text_file(dir + "/switches.csv", csv);
}

} // namespace delstab
