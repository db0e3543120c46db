#pragma once

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qlh/lighthill.hpp"

namespace qlh {

/// Parsed scenario description. The text format is INI-like:
/// [section] headers, key = value lines, '#' comments, values are scalars or
/// space-separated lists. Unknown sections or keys are hard errors.
struct ScenarioConfig {
    std::string name = "scenario";

    GridSpec grid;
    PhysicsParams physics;
    PotentialSpec potential;
    PresetSpec initial;

    double t_end = 0.0;
    double dt = 0.0;  // 0: pre-flight rule
    double cfl_alpha = 0.25;
    int snapshot_stride = 1;

    std::vector<std::string> checks;
    double tol_continuity = 1e-6;
    double tol_euler = 1e-5;
    double tol_momentum = 1e-5;
    double tol_lighthill = 1e-5;
    double mask_floor = kMaskFloor;

    LighthillConfig lighthill;
    double comparison_min_printed = 0.01;  // lighthill_comparison: printed must exceed this

    std::vector<int> dispersion_modes{1, 3, 6, 10, 15, 20};
    double dispersion_periods = 5.0;
    double tol_dispersion = 0.005;

    double circulation_radius = 1.8;
    int circulation_points = 8192;
    double tol_circulation_rel = 1e-6;
    double tol_circulation_abs = 1e-10;

    struct IntegralCheck {
        double sigma = 0.95;
        double pulse_width = 0.8;
        double pulse_center = 3.2;
        double dt = 0.08;
        int slices = 84;
        double tol = 0.05;
    } integral;

    struct TwoTimeCheck {
        int steps = 256;
        double dt = 0.02;
        double tol = 1e-6;
        std::vector<int> modes{2, 3};
        double amplitude = 0.01;
    } two_time;

    std::string out_dir = "out";
    bool emit_fields = false;

    bool has_check(const std::string& c) const {
        for (const auto& s : checks)
            if (s == c) return true;
        return false;
    }
    bool has_residual_check() const {
        for (const auto& s : checks)
            if (s == "continuity" || s == "euler" || s == "momentum" || s == "lighthill" ||
                s == "lighthill_comparison")
                return true;
        return false;
    }
};

namespace detail {

struct RawConfig {
    // section -> (key -> value); insertion-ordered error reporting handled
    // by the collector below
    std::map<std::string, std::map<std::string, std::string>> sections;
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline RawConfig parse_raw(const std::string& text, std::vector<std::string>& problems) {
    RawConfig raw;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                problems.push_back("line " + std::to_string(lineno) + ": malformed section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            raw.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            problems.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        if (section.empty()) {
            problems.push_back("line " + std::to_string(lineno) + ": key outside any section");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        auto& sec = raw.sections[section];
        if (sec.count(key))
            problems.push_back("section [" + section + "]: duplicate key '" + key + "'");
        sec[key] = val;
    }
    return raw;
}

class ValueReader {
public:
    ValueReader(const RawConfig& raw, std::vector<std::string>& problems)
        : raw_(raw), problems_(problems) {}

    bool have(const std::string& sec, const std::string& key) const {
        auto s = raw_.sections.find(sec);
        return s != raw_.sections.end() && s->second.count(key) > 0;
    }

    std::string str(const std::string& sec, const std::string& key, const std::string& dflt) {
        mark(sec, key);
        auto s = raw_.sections.find(sec);
        if (s == raw_.sections.end()) return dflt;
        auto k = s->second.find(key);
        return k == s->second.end() ? dflt : k->second;
    }

    double num(const std::string& sec, const std::string& key, double dflt) {
        const std::string v = str(sec, key, "");
        if (v.empty()) return dflt;
        try {
            std::size_t used = 0;
            const double x = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument("");
            return x;
        } catch (...) {
            problems_.push_back("[" + sec + "] " + key + ": not a number: '" + v + "'");
            return dflt;
        }
    }

    int integer(const std::string& sec, const std::string& key, int dflt) {
        const double x = num(sec, key, dflt);
        if (x != std::floor(x))
            problems_.push_back("[" + sec + "] " + key + ": expected an integer");
        return static_cast<int>(x);
    }

    std::vector<double> nums(const std::string& sec, const std::string& key,
                             std::vector<double> dflt) {
        const std::string v = str(sec, key, "");
        if (v.empty()) return dflt;
        std::vector<double> out;
        std::istringstream is(v);
        std::string tok;
        while (is >> tok) {
            try {
                out.push_back(std::stod(tok));
            } catch (...) {
                problems_.push_back("[" + sec + "] " + key + ": bad list entry '" + tok + "'");
            }
        }
        return out;
    }

    std::vector<int> ints(const std::string& sec, const std::string& key,
                          std::vector<int> dflt) {
        auto d = nums(sec, key, {});
        if (d.empty()) return dflt;
        std::vector<int> out;
        for (double x : d) out.push_back(static_cast<int>(std::lround(x)));
        return out;
    }

    void mark(const std::string& sec, const std::string& key) {
        seen_[sec].insert(key);
    }

    /// After extraction: anything present in the raw text but never read is a
    /// misspelled or unsupported key; silent typos corrupt physics runs.
    void report_unknown() {
        for (const auto& [sec, keys] : raw_.sections) {
            auto s = seen_.find(sec);
            if (s == seen_.end()) {
                problems_.push_back("unknown section [" + sec + "]");
                continue;
            }
            for (const auto& [key, val] : keys)
                if (!s->second.count(key))
                    problems_.push_back("[" + sec + "]: unknown key '" + key + "'");
        }
    }

    void touch_section(const std::string& sec) { seen_[sec]; }

private:
    const RawConfig& raw_;
    std::vector<std::string>& problems_;
    std::map<std::string, std::set<std::string>> seen_;
};

inline std::array<double, 3> to3(const std::vector<double>& v, double fill = 0.0) {
    std::array<double, 3> a{fill, fill, fill};
    for (std::size_t i = 0; i < std::min<std::size_t>(3, v.size()); ++i) a[i] = v[i];
    return a;
}

}  // namespace detail

inline ScenarioConfig parse_scenario_config(const std::string& text,
                                            const std::string& name = "scenario") {
    std::vector<std::string> problems;
    detail::RawConfig raw = detail::parse_raw(text, problems);
    detail::ValueReader r(raw, problems);
    ScenarioConfig cfg;
    cfg.name = name;

    // [grid]
    r.touch_section("grid");
    const int dim = r.integer("grid", "dim", 0);
    auto pts = r.ints("grid", "points", {});
    auto ext = r.nums("grid", "extent", {});
    auto org = r.nums("grid", "origin", {});
    if (dim < 1 || dim > 3) problems.push_back("[grid] dim: must be 1, 2 or 3");
    if (pts.empty()) problems.push_back("[grid] points: required");
    if (ext.empty()) problems.push_back("[grid] extent: required");
    auto broadcast = [&](auto& v, std::size_t n) {
        if (v.size() == 1)
            while (v.size() < n) v.push_back(v[0]);
    };
    if (dim >= 1 && dim <= 3) {
        broadcast(pts, dim);
        broadcast(ext, dim);
        broadcast(org, dim);
        if ((int)pts.size() != dim) problems.push_back("[grid] points: need one entry per axis");
        if ((int)ext.size() != dim) problems.push_back("[grid] extent: need one entry per axis");
        if (!org.empty() && (int)org.size() != dim)
            problems.push_back("[grid] origin: need one entry per axis");
    }
    if (problems.empty()) {
        std::array<int, 3> p3{1, 1, 1};
        for (int a = 0; a < dim; ++a) p3[a] = pts[a];
        std::array<double, 3> e3{1, 1, 1}, o3{0, 0, 0};
        for (int a = 0; a < dim; ++a) e3[a] = ext[a];
        for (int a = 0; a < dim && a < (int)org.size(); ++a) o3[a] = org[a];
        try {
            cfg.grid = make_grid(dim, e3, p3, o3);
        } catch (const GridError& e) {
            problems.push_back(std::string("[grid] ") + e.what());
        }
    }

    // [physics]
    r.touch_section("physics");
    cfg.physics.hbar = r.num("physics", "hbar", 1.0);
    cfg.physics.mass = r.num("physics", "mass", 1.0);
    cfg.physics.coupling = r.num("physics", "g", 0.0);
    try {
        cfg.physics.validate();
    } catch (const ConfigError& e) {
        problems.push_back(e.what());
    }

    // [potential]
    r.touch_section("potential");
    const std::string pkind = r.str("potential", "kind", "none");
    if (pkind == "none") {
        cfg.potential = PotentialSpec::none();
        r.str("potential", "omega", "");
        r.str("potential", "center", "");
    } else if (pkind == "harmonic") {
        cfg.potential = PotentialSpec::harmonic(
            detail::to3(r.nums("potential", "omega", {1.0}), 0.0),
            detail::to3(r.nums("potential", "center", {}), 0.0));
    } else {
        problems.push_back("[potential] kind: unknown '" + pkind +
                           "' (none | harmonic; tabulated fields load via the library API)");
    }
    const std::string ptime = r.str("potential", "time_dependence", "static");
    if (ptime == "sine") {
        cfg.potential.set_time_dependence(r.num("potential", "sine_amp", 0.0),
                                          r.num("potential", "sine_omega", 0.0));
    } else if (ptime != "static") {
        problems.push_back("[potential] time_dependence: 'static' or 'sine'");
    } else {
        r.num("potential", "sine_amp", 0.0);
        r.num("potential", "sine_omega", 0.0);
    }

    // [initial]
    r.touch_section("initial");
    const std::string preset = r.str("initial", "preset", "");
    if (preset.empty()) {
        problems.push_back("[initial] preset: required");
    } else {
        try {
            cfg.initial.kind = preset_from_name(preset);
        } catch (const ConfigError& e) {
            problems.push_back(e.what());
        }
    }
    cfg.initial.amplitude = r.num("initial", "amplitude", 1.0);
    cfg.initial.sigma = r.num("initial", "sigma", 1.0);
    cfg.initial.n_inf = r.num("initial", "n_inf", 1.0);
    cfg.initial.charge = r.integer("initial", "charge", 1);
    {
        auto m = r.ints("initial", "modes", {0, 0, 0});
        for (std::size_t i = 0; i < std::min<std::size_t>(3, m.size()); ++i)
            cfg.initial.modes[i] = m[i];
    }
    cfg.initial.center = detail::to3(r.nums("initial", "center", {}), 0.0);
    cfg.initial.omega = detail::to3(r.nums("initial", "omega", {1.0}), 1.0);

    // [run]
    r.touch_section("run");
    cfg.t_end = r.num("run", "t_end", 0.0);
    const std::string dts = r.str("run", "dt", "auto");
    if (dts != "auto") {
        try {
            cfg.dt = std::stod(dts);
        } catch (...) {
            problems.push_back("[run] dt: 'auto' or a positive number");
        }
        if (cfg.dt <= 0.0) problems.push_back("[run] dt: must be positive");
    }
    cfg.cfl_alpha = r.num("run", "cfl_alpha", 0.25);
    cfg.snapshot_stride = r.integer("run", "snapshot_stride", 1);
    if (cfg.snapshot_stride < 1) problems.push_back("[run] snapshot_stride: must be >= 1");

    // [checks]
    r.touch_section("checks");
    {
        std::istringstream is(r.str("checks", "list", ""));
        std::string tok;
        const std::set<std::string> known{"continuity",  "euler",      "momentum",
                                          "lighthill",   "dispersion", "circulation",
                                          "integral",    "two_time",   "lighthill_comparison"};
        while (is >> tok) {
            if (!known.count(tok))
                problems.push_back("[checks] list: unknown check '" + tok + "'");
            cfg.checks.push_back(tok);
        }
        if (cfg.checks.empty()) problems.push_back("[checks] list: at least one check required");
    }
    cfg.tol_continuity = r.num("checks", "tol_continuity", cfg.tol_continuity);
    cfg.tol_euler = r.num("checks", "tol_euler", cfg.tol_euler);
    cfg.tol_momentum = r.num("checks", "tol_momentum", cfg.tol_momentum);
    cfg.tol_lighthill = r.num("checks", "tol_lighthill", cfg.tol_lighthill);
    cfg.mask_floor = r.num("checks", "mask_floor", cfg.mask_floor);

    // [lighthill]
    r.touch_section("lighthill");
    cfg.lighthill.c0 = r.num("lighthill", "c0", 1.0);
    const std::string conv = r.str("lighthill", "convention", "audited");
    if (conv == "audited")
        cfg.lighthill.convention = SignConvention::audited();
    else if (conv == "printed")
        cfg.lighthill.convention = SignConvention::printed_lighthill();
    else
        problems.push_back("[lighthill] convention: 'audited' or 'printed'");
    cfg.lighthill.density_floor = r.num("lighthill", "density_floor", kMaskFloor);
    const std::string kern = r.str("lighthill", "kernel", "retarded");
    if (kern == "retarded")
        cfg.lighthill.kernel = KernelKind::retarded;
    else if (kern == "advanced")
        cfg.lighthill.kernel = KernelKind::advanced;
    else if (kern == "mixed")
        cfg.lighthill.kernel = KernelKind::mixed;
    else
        problems.push_back("[lighthill] kernel: retarded | advanced | mixed");
    cfg.lighthill.lambda = r.num("lighthill", "lambda", 1.0);
    cfg.comparison_min_printed = r.num("lighthill", "comparison_min_printed", 0.01);
    try {
        cfg.lighthill.validate();
    } catch (const ConfigError& e) {
        problems.push_back(e.what());
    }

    // [dispersion]
    r.touch_section("dispersion");
    cfg.dispersion_modes = r.ints("dispersion", "modes", cfg.dispersion_modes);
    cfg.dispersion_periods = r.num("dispersion", "periods", cfg.dispersion_periods);
    cfg.tol_dispersion = r.num("dispersion", "tol", cfg.tol_dispersion);

    // [circulation]
    r.touch_section("circulation");
    cfg.circulation_radius = r.num("circulation", "radius", cfg.circulation_radius);
    cfg.circulation_points = r.integer("circulation", "points", cfg.circulation_points);
    cfg.tol_circulation_rel = r.num("circulation", "tol_rel", cfg.tol_circulation_rel);
    cfg.tol_circulation_abs = r.num("circulation", "tol_abs", cfg.tol_circulation_abs);

    // [integral]
    r.touch_section("integral");
    cfg.integral.sigma = r.num("integral", "sigma", cfg.integral.sigma);
    cfg.integral.pulse_width = r.num("integral", "pulse_width", cfg.integral.pulse_width);
    cfg.integral.pulse_center = r.num("integral", "pulse_center", cfg.integral.pulse_center);
    cfg.integral.dt = r.num("integral", "dt", cfg.integral.dt);
    cfg.integral.slices = r.integer("integral", "slices", cfg.integral.slices);
    cfg.integral.tol = r.num("integral", "tol", cfg.integral.tol);

    // [two_time]
    r.touch_section("two_time");
    cfg.two_time.steps = r.integer("two_time", "steps", cfg.two_time.steps);
    cfg.two_time.dt = r.num("two_time", "dt", cfg.two_time.dt);
    cfg.two_time.tol = r.num("two_time", "tol", cfg.two_time.tol);
    cfg.two_time.modes = r.ints("two_time", "modes", cfg.two_time.modes);
    cfg.two_time.amplitude = r.num("two_time", "amplitude", cfg.two_time.amplitude);

    // [output]
    r.touch_section("output");
    cfg.out_dir = r.str("output", "directory", cfg.out_dir);
    const std::string fmt = r.str("output", "formats", "csv");
    if (fmt == "csv") {
        cfg.emit_fields = false;
    } else if (fmt == "csv fields" || fmt == "fields csv" || fmt == "fields") {
        cfg.emit_fields = true;
    } else {
        problems.push_back("[output] formats: 'csv' or 'csv fields'");
    }

    // cross-field validation
    if (cfg.has_residual_check() && cfg.t_end <= 0.0)
        problems.push_back("[run] t_end: required (positive) when residual checks are listed");
    if (cfg.has_check("dispersion") && cfg.initial.kind != PresetKind::uniform)
        problems.push_back("dispersion check needs the 'uniform' preset (uniform background)");
    if (cfg.has_check("circulation") && cfg.initial.kind != PresetKind::vortex)
        problems.push_back("circulation check needs the 'vortex' preset");

    r.report_unknown();

    if (!problems.empty()) {
        std::ostringstream os;
        os << "configuration problems (" << problems.size() << "):";
        for (const auto& p : problems) os << "\n  - " << p;
        throw ConfigError(os.str());
    }
    return cfg;
}

}  // namespace qlh
