#include "wgtomo/scenario.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "wgtomo/errors.hpp"

namespace wgtomo {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what)
{
    throw ConfigError(path + ": " + what);
}

std::string join(const std::string& prefix, const std::string& key)
{
    return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const json& obj, const std::string& prefix,
                    std::initializer_list<std::string_view> known)
{
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (auto k : known) {
            ok = ok || key == k;
        }
        if (!ok) {
            fail(join(prefix, key), "unknown field");
        }
    }
}

const json* find(const json& obj, const std::string& key)
{
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return nullptr;
    }
    return &*it;
}

double as_number(const json& v, const std::string& path)
{
    if (!v.is_number()) {
        fail(path, "expected a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        fail(path, "must be finite");
    }
    return x;
}

std::optional<double> opt_number(const json& obj, const std::string& prefix, const std::string& key)
{
    if (const json* v = find(obj, key)) {
        return as_number(*v, join(prefix, key));
    }
    return std::nullopt;
}

double req_number(const json& obj, const std::string& prefix, const std::string& key)
{
    if (auto v = opt_number(obj, prefix, key)) {
        return *v;
    }
    fail(join(prefix, key), "required field missing");
}

std::optional<std::uint64_t> opt_count(const json& obj, const std::string& prefix,
                                       const std::string& key)
{
    const json* v = find(obj, key);
    if (!v) {
        return std::nullopt;
    }
    if (!v->is_number_integer() || v->get<long long>() < 0) {
        fail(join(prefix, key), "expected a non-negative integer");
    }
    return v->get<std::uint64_t>();
}

const json& req_object(const json& obj, const std::string& key, const std::string& path)
{
    const json* v = find(obj, key);
    if (!v) {
        fail(path, "required field missing");
    }
    if (!v->is_object()) {
        fail(path, "expected an object");
    }
    return *v;
}

// Reads `<stem>_rad` or `<stem>_pi`, exactly one of which may be present.
std::optional<double> opt_angle(const json& obj, const std::string& prefix, const std::string& stem)
{
    auto rad = opt_number(obj, prefix, stem + "_rad");
    auto in_pi = opt_number(obj, prefix, stem + "_pi");
    if (rad && in_pi) {
        fail(join(prefix, stem), "give either " + stem + "_rad or " + stem + "_pi, not both");
    }
    if (in_pi) {
        return *in_pi * pi;
    }
    return rad;
}

template <typename Fn>
auto guarded(const std::string& path, Fn&& fn)
{
    try {
        return fn();
    } catch (const ConfigError& e) {
        if (std::string_view(e.what()).starts_with(path)) {
            throw;
        }
        fail(path, e.what());
    }
}

SystemConfig parse_system(const json& j, json& out)
{
    const std::string p = "system";
    SystemConfig sys;
    if (const json* s = find(j, "system")) {
        if (!s->is_object()) {
            fail(p, "expected an object");
        }
        reject_unknown(*s, p, {"gamma", "kd", "kd_pi", "dt_gamma"});
        sys.gamma = opt_number(*s, p, "gamma").value_or(sys.gamma);
        auto kd = opt_number(*s, p, "kd");
        auto kd_pi = opt_number(*s, p, "kd_pi");
        if (kd && kd_pi) {
            fail("system.kd", "give either kd or kd_pi, not both");
        }
        if (kd_pi) {
            sys.kd = *kd_pi * pi;
        } else if (kd) {
            sys.kd = *kd;
        }
        sys.dt_gamma = opt_number(*s, p, "dt_gamma").value_or(sys.dt_gamma);
    }
    if (!(sys.gamma > 0.0)) {
        fail("system.gamma", "must be positive");
    }
    if (!(sys.dt_gamma > 0.0) || sys.dt_gamma > 0.01) {
        fail("system.dt_gamma", "must lie in (0, 0.01]");
    }
    out["system"] = {{"gamma", sys.gamma}, {"kd", sys.kd}, {"dt_gamma", sys.dt_gamma}};
    return sys;
}

TwoQubitPreparation parse_preparation(const json& j, json& out)
{
    const std::string p = "preparation";
    const json& s = req_object(j, "preparation", p);
    reject_unknown(s, p, {"a1", "a3", "phi1_rad", "phi1_pi", "phi3_rad", "phi3_pi"});
    auto a1 = opt_number(s, p, "a1");
    auto a3 = opt_number(s, p, "a3");
    if (!a1 && !a3) {
        fail("preparation.a1", "required field missing");
    }
    for (auto [v, key] : {std::pair{a1, "a1"}, std::pair{a3, "a3"}}) {
        if (v && !(*v >= 0.0 && *v <= 1.0)) {
            fail(join(p, key), "must lie in [0, 1]");
        }
    }
    if (!a3) {
        a3 = std::sqrt(std::max(0.0, 1.0 - *a1 * *a1));
    } else if (!a1) {
        a1 = std::sqrt(std::max(0.0, 1.0 - *a3 * *a3));
    }
    const double phi1 = opt_angle(s, p, "phi1").value_or(0.0);
    const double phi3 = opt_angle(s, p, "phi3").value_or(0.0);
    auto prep = guarded(p, [&] { return TwoQubitPreparation(*a1, *a3, phi1, phi3); });
    out["preparation"] = {{"a1", prep.a1()}, {"a3", prep.a3()}, {"phi1_rad", prep.phi1()},
                          {"phi3_rad", prep.phi3()}};
    return prep;
}

PulseSegment parse_segment(const json& s, const std::string& p)
{
    if (!s.is_object()) {
        fail(p, "expected an object");
    }
    reject_unknown(s, p, {"t_start_gamma", "t_end_gamma", "amplitude_over_gamma"});
    return {req_number(s, p, "t_start_gamma"), req_number(s, p, "t_end_gamma"),
            req_number(s, p, "amplitude_over_gamma")};
}

json pulse_to_json(const ModulationPulse& pulse)
{
    json out;
    out["shape"] = to_string(pulse.shape());
    switch (pulse.shape()) {
    case PulseShape::none: return nullptr;
    case PulseShape::rectangular: {
        const auto& s = pulse.segments().front();
        out["amplitude_over_gamma"] = s.amplitude_over_gamma;
        out["t_start_gamma"] = s.t_start_gamma;
        out["t_end_gamma"] = s.t_end_gamma;
        break;
    }
    case PulseShape::piecewise_constant:
        out["segments"] = json::array();
        for (const auto& s : pulse.segments()) {
            out["segments"].push_back({{"t_start_gamma", s.t_start_gamma},
                                       {"t_end_gamma", s.t_end_gamma},
                                       {"amplitude_over_gamma", s.amplitude_over_gamma}});
        }
        break;
    case PulseShape::tabulated:
        out["samples"] = json::array();
        for (const auto& s : pulse.samples()) {
            out["samples"].push_back({s.t_gamma, s.value_over_gamma});
        }
        break;
    }
    return out;
}

ModulationPulse parse_pulse(const json& s)
{
    const std::string p = "pulse";
    if (!s.is_object()) {
        fail(p, "expected an object");
    }
    std::string shape = "rectangular";
    if (const json* v = find(s, "shape")) {
        if (!v->is_string()) {
            fail("pulse.shape", "expected a string");
        }
        shape = v->get<std::string>();
    }
    if (shape == "rectangular") {
        reject_unknown(s, p, {"shape", "amplitude_over_gamma", "t_start_gamma", "t_end_gamma"});
        const double amp = req_number(s, p, "amplitude_over_gamma");
        const double t0 = req_number(s, p, "t_start_gamma");
        const double t1 = req_number(s, p, "t_end_gamma");
        if (t0 < 0.0) {
            fail("pulse.t_start_gamma", "must be >= 0");
        }
        if (!(t1 > t0)) {
            fail("pulse.t_end_gamma", "must be greater than t_start_gamma");
        }
        return guarded("pulse.amplitude_over_gamma",
                       [&] { return ModulationPulse::rectangular(amp, t0, t1); });
    }
    if (shape == "piecewise") {
        reject_unknown(s, p, {"shape", "segments"});
        const json* segs = find(s, "segments");
        if (!segs || !segs->is_array() || segs->empty()) {
            fail("pulse.segments", "expected a non-empty array");
        }
        std::vector<PulseSegment> out;
        for (std::size_t i = 0; i < segs->size(); ++i) {
            out.push_back(parse_segment((*segs)[i], "pulse.segments[" + std::to_string(i) + "]"));
        }
        return guarded("pulse.segments", [&] { return ModulationPulse::piecewise(out); });
    }
    if (shape == "tabulated") {
        reject_unknown(s, p, {"shape", "samples"});
        const json* samples = find(s, "samples");
        if (!samples || !samples->is_array()) {
            fail("pulse.samples", "expected an array of [t_gamma, f_over_gamma] pairs");
        }
        std::vector<PulseSample> out;
        for (std::size_t i = 0; i < samples->size(); ++i) {
            const std::string sp = "pulse.samples[" + std::to_string(i) + "]";
            const json& row = (*samples)[i];
            if (!row.is_array() || row.size() != 2) {
                fail(sp, "expected [t_gamma, f_over_gamma]");
            }
            out.push_back({as_number(row[0], sp + "[0]"), as_number(row[1], sp + "[1]")});
        }
        return guarded("pulse.samples", [&] { return ModulationPulse::tabulated(out); });
    }
    fail("pulse.shape", "unknown shape '" + shape + "' (rectangular, piecewise, tabulated)");
}

std::vector<double> parse_axis(const json& v, const std::string& path, double scale)
{
    std::vector<double> out;
    if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            out.push_back(scale * as_number(v[i], path + "[" + std::to_string(i) + "]"));
        }
    } else if (v.is_object()) {
        reject_unknown(v, path, {"start", "stop", "count"});
        const double a = req_number(v, path, "start");
        const double b = req_number(v, path, "stop");
        const auto n = opt_count(v, path, "count");
        if (!n || *n == 0) {
            fail(join(path, "count"), "required positive integer");
        }
        for (std::uint64_t i = 0; i < *n; ++i) {
            const double w = *n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(*n - 1);
            out.push_back(scale * (a + w * (b - a)));
        }
    } else {
        fail(path, "expected an array or {start, stop, count}");
    }
    if (out.empty()) {
        fail(path, "grid axis is empty");
    }
    return out;
}

} // namespace

std::vector<double> default_sweep_a1_sq()
{
    std::vector<double> out;
    for (int i = 1; i <= 9; ++i) {
        out.push_back(0.1 * i);
    }
    return out;
}

std::vector<double> default_sweep_dphi()
{
    std::vector<double> out;
    for (int k = -7; k <= 8; ++k) {
        out.push_back(k * pi / 8.0);
    }
    return out;
}

json parse_config_text(std::string_view text, std::string_view source)
{
    try {
        return json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < upto; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream msg;
        msg << source << ":" << line << ":" << col << ": " << e.what();
        throw ConfigError(msg.str());
    }
}

json load_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path + ": cannot open config file");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

json preset_config(std::string_view name)
{
    const double h = 1.0 / std::sqrt(2.0);
    json base = {
        {"system", {{"gamma", 1.0}, {"kd_pi", 2.0}, {"dt_gamma", 1e-3}}},
        {"preparation", {{"a1", h}, {"a3", h}, {"phi1_pi", 0.0}, {"phi3_pi", 0.4}}},
        {"t_final_gamma", 200.0},
        {"sample_every", 100},
    };
    if (name == "fig3" || name == "fig4") {
        base["design"] = {{"u_target_pi", name == "fig3" ? 0.5 : 1.0},
                          {"t_start_gamma", 10.0},
                          {"duration_gamma", 141.0}};
        return base;
    }
    if (name == "free") {
        base["preparation"] = {{"a1", 1.0}, {"a3", 0.0}, {"phi1_pi", 0.0}, {"phi3_pi", 0.0}};
        base["t_final_gamma"] = 20.0;
        base["sample_every"] = 10;
        return base;
    }
    throw ConfigError("unknown preset '" + std::string(name) + "' (fig3, fig4, free)");
}

ScenarioConfig parse_scenario(const json& j)
{
    if (!j.is_object()) {
        fail("<root>", "config must be a JSON object");
    }
    reject_unknown(j, "", {"system", "preparation", "pulse", "design", "t_final_gamma",
                           "sample_every", "shots", "seed", "output", "protocol", "sweep"});

    ScenarioConfig cfg;
    json out;
    cfg.system = parse_system(j, out);
    cfg.preparation = parse_preparation(j, out);

    const json* pulse = find(j, "pulse");
    const json* design = find(j, "design");
    if (pulse && design) {
        fail("design", "give either an explicit pulse or a design triple, not both");
    }
    if (pulse) {
        cfg.pulse = parse_pulse(*pulse);
    } else if (design) {
        const std::string p = "design";
        if (!design->is_object()) {
            fail(p, "expected an object");
        }
        reject_unknown(*design, p, {"u_target", "u_target_pi", "t_start_gamma", "duration_gamma"});
        auto u = opt_angle(*design, p, "u_target");
        if (!u) {
            fail("design.u_target", "required field missing");
        }
        DesignTriple triple{*u, req_number(*design, p, "t_start_gamma"),
                            req_number(*design, p, "duration_gamma")};
        cfg.pulse = guarded(p, [&] {
            return design_pulse(triple.u_target, triple.t_start_gamma, triple.duration_gamma);
        });
        cfg.design = triple;
    }
    out["pulse"] = pulse_to_json(cfg.pulse);
    if (cfg.design) {
        out["design"] = {{"u_target", cfg.design->u_target},
                         {"t_start_gamma", cfg.design->t_start_gamma},
                         {"duration_gamma", cfg.design->duration_gamma}};
    } else {
        out["design"] = nullptr;
    }

    cfg.t_final_gamma = opt_number(j, "", "t_final_gamma").value_or(cfg.t_final_gamma);
    if (!(cfg.t_final_gamma > 0.0)) {
        fail("t_final_gamma", "must be positive");
    }
    if (auto n = opt_count(j, "", "sample_every")) {
        if (*n == 0) {
            fail("sample_every", "must be positive");
        }
        cfg.sample_every = *n;
    }
    cfg.shots = opt_count(j, "", "shots");
    if (cfg.shots && *cfg.shots == 0) {
        fail("shots", "must be positive");
    }
    cfg.seed = opt_count(j, "", "seed");
    out["t_final_gamma"] = cfg.t_final_gamma;
    out["sample_every"] = cfg.sample_every;
    out["shots"] = cfg.shots ? json(*cfg.shots) : json(nullptr);
    out["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);

    if (const json* o = find(j, "output")) {
        if (!o->is_object()) {
            fail("output", "expected an object");
        }
        reject_unknown(*o, "output", {"path", "format"});
        if (const json* v = find(*o, "path")) {
            if (!v->is_string()) {
                fail("output.path", "expected a string");
            }
            cfg.output.path = v->get<std::string>();
        }
        if (const json* v = find(*o, "format")) {
            if (!v->is_string() || (*v != "csv" && *v != "json")) {
                fail("output.format", "expected \"csv\" or \"json\"");
            }
            cfg.output.format = v->get<std::string>();
        }
    }
    out["output"] = {{"path", cfg.output.path}, {"format", cfg.output.format}};

    cfg.protocol.kd = cfg.system.kd;
    cfg.protocol.dt_gamma = cfg.system.dt_gamma;
    if (const json* pr = find(j, "protocol")) {
        const std::string p = "protocol";
        if (!pr->is_object()) {
            fail(p, "expected an object");
        }
        reject_unknown(*pr, p, {"t_start_gamma", "duration_gamma", "settle_gamma", "eps_prod",
                                "lambda_correct"});
        auto& pp = cfg.protocol;
        pp.t_start_gamma = opt_number(*pr, p, "t_start_gamma").value_or(pp.t_start_gamma);
        pp.duration_gamma = opt_number(*pr, p, "duration_gamma").value_or(pp.duration_gamma);
        pp.settle_gamma = opt_number(*pr, p, "settle_gamma").value_or(pp.settle_gamma);
        pp.eps_prod = opt_number(*pr, p, "eps_prod").value_or(pp.eps_prod);
        if (const json* v = find(*pr, "lambda_correct")) {
            if (!v->is_boolean()) {
                fail("protocol.lambda_correct", "expected true or false");
            }
            pp.lambda_correct = v->get<bool>();
        }
        if (pp.t_start_gamma < 0.0) {
            fail("protocol.t_start_gamma", "must be >= 0");
        }
        if (!(pp.duration_gamma > 0.0)) {
            fail("protocol.duration_gamma", "must be positive");
        }
        if (pp.settle_gamma < 0.0) {
            fail("protocol.settle_gamma", "must be >= 0");
        }
        if (pp.eps_prod < 0.0) {
            fail("protocol.eps_prod", "must be >= 0");
        }
    }
    // The pi pulse is the stronger of the two; reject timings it cannot meet.
    guarded("protocol.duration_gamma", [&] {
        return design_pulse(pi, cfg.protocol.t_start_gamma, cfg.protocol.duration_gamma);
    });
    out["protocol"] = {{"t_start_gamma", cfg.protocol.t_start_gamma},
                       {"duration_gamma", cfg.protocol.duration_gamma},
                       {"settle_gamma", cfg.protocol.settle_gamma},
                       {"eps_prod", cfg.protocol.eps_prod},
                       {"lambda_correct", cfg.protocol.lambda_correct}};

    cfg.sweep.a1_sq = default_sweep_a1_sq();
    cfg.sweep.dphi = default_sweep_dphi();
    if (const json* sw = find(j, "sweep")) {
        const std::string p = "sweep";
        if (!sw->is_object()) {
            fail(p, "expected an object");
        }
        reject_unknown(*sw, p, {"a1_sq", "dphi_rad", "dphi_pi"});
        if (const json* v = find(*sw, "a1_sq")) {
            cfg.sweep.a1_sq = parse_axis(*v, "sweep.a1_sq", 1.0);
            for (double x : cfg.sweep.a1_sq) {
                if (!(x >= 0.0 && x <= 1.0)) {
                    fail("sweep.a1_sq", "values must lie in [0, 1]");
                }
            }
        }
        const json* rad = find(*sw, "dphi_rad");
        const json* in_pi = find(*sw, "dphi_pi");
        if (rad && in_pi) {
            fail("sweep.dphi", "give either dphi_rad or dphi_pi, not both");
        }
        if (rad) {
            cfg.sweep.dphi = parse_axis(*rad, "sweep.dphi_rad", 1.0);
        } else if (in_pi) {
            cfg.sweep.dphi = parse_axis(*in_pi, "sweep.dphi_pi", pi);
        }
    }
    out["sweep"] = {{"a1_sq", cfg.sweep.a1_sq}, {"dphi_rad", cfg.sweep.dphi}};

    cfg.resolved = std::move(out);
    return cfg;
}

} // namespace wgtomo
