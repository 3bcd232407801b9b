#pragma once

// Experiment configuration: a flat key=value file plus --key=value overrides.
// Unknown keys are errors.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "gevrey/csv.hpp"
#include "gevrey/error.hpp"
#include "gevrey/radius_bound.hpp"

namespace gevrey {

inline constexpr std::array<std::string_view, 7> experiment_ids{"lemmas", "shear-decay", "solve2d", "trajectories",
                                                                "patching", "bound-compare", "plot"};

struct ExperimentConfig {
    std::string id;
    std::string out;  // run directory; default <output root>/<id>
    std::uint64_t seed = 1;

    // grids and time stepping
    int n = 128;
    double dt = 1e-3;
    double T = 1.0;
    int sample_every = 10;
    int r = 5;
    double s = 1.0;
    double tau0 = 0.5;  // shear tau0, or the initial radius of random data
    std::string init = "random";  // solve2d: random | steady_shear
    int runs = 1;

    // lemmas
    int m_max = 8;
    int trials = 200;
    int ratio_m_max = 200;
    int ratio_ref_m_max = 50;

    // shear-decay
    double t_max = 50.0;
    double t_step = 1.0;
    int t0_grid = 1024;

    // trajectories / patching
    std::string flow = "shear";  // shear | solve2d
    int tracers = 16;
    int charts = 4;  // per side of the regular cover

    // bound-compare
    std::string source = "shear";  // shear | solve2d | trace
    std::string trace;             // stored trace CSV for source=trace
    double trace_dt = 0.25;        // shear trace spacing
    double Q0 = -1.0;              // required for source=trace
    bool calibrate = true;
    BoundParams bound;

    // plot
    std::string csv;
    std::string columns;
    bool logy = false;
    std::string svg = "plot.svg";

    using Slot = std::variant<std::string*, int*, double*, bool*, std::uint64_t*>;

    std::vector<std::pair<std::string, Slot>> slots() {
        return {{"id", &id},
                {"out", &out},
                {"seed", &seed},
                {"n", &n},
                {"dt", &dt},
                {"T", &T},
                {"sample_every", &sample_every},
                {"r", &r},
                {"s", &s},
                {"tau0", &tau0},
                {"init", &init},
                {"runs", &runs},
                {"m_max", &m_max},
                {"trials", &trials},
                {"ratio_m_max", &ratio_m_max},
                {"ratio_ref_m_max", &ratio_ref_m_max},
                {"t_max", &t_max},
                {"t_step", &t_step},
                {"t0_grid", &t0_grid},
                {"flow", &flow},
                {"tracers", &tracers},
                {"charts", &charts},
                {"source", &source},
                {"trace", &trace},
                {"trace_dt", &trace_dt},
                {"Q0", &Q0},
                {"calibrate", &calibrate},
                {"C0", &bound.C0},
                {"C", &bound.C},
                {"tau_star", &bound.tau_star},
                {"eps", &bound.eps},
                {"a_star", &bound.a_star},
                {"r_star", &bound.r_star},
                {"ode_dt", &bound.ode_dt},
                {"csv", &csv},
                {"columns", &columns},
                {"logy", &logy},
                {"svg", &svg}};
    }

    void set(const std::string& key, const std::string& value) {
        for (auto& [name, slot] : slots()) {
            if (name != key) continue;
            std::visit([&](auto* p) { parse_into(key, value, *p); }, slot);
            return;
        }
        fail(ErrorCode::Config, "unknown configuration key '" + key + "'");
    }

    /// key -> value text, in declaration order.
    std::vector<std::pair<std::string, std::string>> echo() {
        std::vector<std::pair<std::string, std::string>> out;
        for (auto& [name, slot] : slots())
            out.emplace_back(name, std::visit([](auto* p) { return show(*p); }, slot));
        return out;
    }

    void validate() const {
        require(std::find(experiment_ids.begin(), experiment_ids.end(), id) != experiment_ids.end(), ErrorCode::Config,
                "unknown experiment '" + id + "'");
        require(n >= 16 && (n & (n - 1)) == 0, ErrorCode::Config, "n must be a power of two >= 16");
        require(dt > 0 && T >= 0 && sample_every > 0 && r >= 0 && r <= 8 && s >= 1 && tau0 > 0, ErrorCode::Config,
                "grid/time parameters out of range");
        require(runs > 0 && m_max >= 0 && trials > 0 && ratio_ref_m_max > 0 && ratio_m_max >= ratio_ref_m_max,
                ErrorCode::Config, "counts must be positive");
        require(t_max >= 0 && t_step > 0 && t0_grid >= 16 && tracers > 0 && charts > 0 && trace_dt > 0,
                ErrorCode::Config, "experiment parameters out of range");
        require(init == "random" || init == "steady_shear", ErrorCode::Config, "init must be random or steady_shear");
        require(flow == "shear" || flow == "solve2d", ErrorCode::Config, "flow must be shear or solve2d");
        require(source == "shear" || source == "solve2d" || source == "trace", ErrorCode::Config,
                "source must be shear, solve2d or trace");
    }

private:
    static void parse_into(const std::string& key, const std::string& v, std::string& out) { out = v; }
    static void parse_into(const std::string& key, const std::string& v, bool& out) {
        if (v == "true" || v == "1") out = true;
        else if (v == "false" || v == "0") out = false;
        else fail(ErrorCode::Config, "bad boolean for " + key + ": '" + v + "'");
    }
    template <class T>
    static void parse_into(const std::string& key, const std::string& v, T& out) {
        const char* end = v.data() + v.size();
        T tmp{};
        const auto [ptr, ec] = std::from_chars(v.data(), end, tmp);
        require(ec == std::errc() && ptr == end, ErrorCode::Config, "bad value for " + key + ": '" + v + "'");
        out = tmp;
    }
    static std::string show(const std::string& v) { return v; }
    static std::string show(bool v) { return v ? "true" : "false"; }
    static std::string show(double v) { return format_double(v); }
    template <class T>
    static std::string show(T v) { return std::to_string(v); }
};

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

/// Applies `key = value` lines; '#' starts a comment.
inline void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    require(bool(in), ErrorCode::Io, "cannot open config " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        require(eq != std::string::npos, ErrorCode::Config, path + ":" + std::to_string(lineno) + ": expected key=value");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

/// Applies `--key=value` arguments.
inline void apply_overrides(ExperimentConfig& cfg, const std::vector<std::string>& args) {
    for (const auto& a : args) {
        require(a.rfind("--", 0) == 0 && a.find('=') != std::string::npos, ErrorCode::Config,
                "expected --key=value, got '" + a + "'");
        const auto eq = a.find('=');
        cfg.set(a.substr(2, eq - 2), a.substr(eq + 1));
    }
}

}  // namespace gevrey
