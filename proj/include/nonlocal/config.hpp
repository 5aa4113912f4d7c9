#pragma once

// Flat key-value run configuration with dotted section prefixes:
//   kernel.ell.variant = logpow
//   domain.h = 0.0625
// Lines starting with '#' are comments. Parse errors carry line numbers.

#include <fstream>
#include <map>
#include <sstream>

#include "domain.hpp"
#include "kernels.hpp"

namespace nonlocal {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::map<std::string, std::string> kv;

    bool has(const std::string& key) const { return kv.count(key) > 0; }
    std::string get(const std::string& key, const std::string& fallback) const {
        auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second;
    }
    std::string require(const std::string& key) const {
        auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError("missing config key: " + key);
        return it->second;
    }
    double get_num(const std::string& key, double fallback) const {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        return parse_num(key, it->second);
    }
    double require_num(const std::string& key) const { return parse_num(key, require(key)); }

    static double parse_num(const std::string& key, const std::string& raw) {
        try {
            std::size_t pos = 0;
            double v = std::stod(raw, &pos);
            if (pos != raw.size()) throw std::invalid_argument(raw);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + " has non-numeric value '" + raw + "'");
        }
    }

    static RunConfig parse(std::istream& in) {
        RunConfig cfg;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            auto trim = [](std::string s) {
                auto b = s.find_first_not_of(" \t\r");
                auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            std::string t = trim(line);
            if (t.empty()) continue;
            auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config parse error at line " + std::to_string(lineno) +
                                  ": expected key = value");
            std::string key = trim(t.substr(0, eq));
            std::string val = trim(t.substr(eq + 1));
            if (key.empty() || val.empty())
                throw ConfigError("config parse error at line " + std::to_string(lineno) +
                                  ": empty key or value");
            cfg.kv[key] = val;
        }
        return cfg;
    }

    static RunConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        return parse(in);
    }
};

inline KernelSpec make_kernel(const RunConfig& cfg) {
    int dim = int(cfg.get_num("kernel.dimension", 1));
    double rho = cfg.get_num("kernel.rho", 1.0);
    std::string ev = cfg.get("kernel.ell.variant", "constant");
    EllSpec ell;
    if (ev == "constant")
        ell = EllSpec::constant(rho, cfg.get_num("kernel.ell.c", 1.0));
    else if (ev == "logpow")
        ell = EllSpec::log_pow(rho, cfg.get_num("kernel.ell.beta", 1.0));
    else if (ev == "invloglog")
        ell = EllSpec::inv_log_log(rho);
    else
        throw ConfigError("unknown kernel.ell.variant '" + ev +
                          "' (expected constant|logpow|invloglog)");
    std::string tv = cfg.get("kernel.tail.variant", "zero");
    TailSpec tail;
    if (tv == "zero")
        tail = TailSpec::zero();
    else if (tv == "powerdecay")
        tail = TailSpec::power_decay(cfg.get_num("kernel.tail.alpha2", 0.5));
    else if (tv == "piecewisepower")
        tail = TailSpec::piecewise_power(cfg.get_num("kernel.tail.alpha1", 0.5),
                                         cfg.get_num("kernel.tail.alpha2", 0.5));
    else
        throw ConfigError("unknown kernel.tail.variant '" + tv +
                          "' (expected zero|powerdecay|piecewisepower)");
    KernelSpec k(dim, ell, tail);
    validate_kernel(k);
    return k;
}

inline ShapeSpec make_shape(const RunConfig& cfg, const std::string& prefix = "domain.") {
    std::string shape = cfg.get(prefix + "shape", "interval");
    if (shape == "interval")
        return ShapeSpec::interval(cfg.get_num(prefix + "a", -1.0), cfg.get_num(prefix + "b", 1.0));
    if (shape == "box")
        return ShapeSpec::box({cfg.get_num(prefix + "ax", -1.0), cfg.get_num(prefix + "ay", -1.0)},
                              {cfg.get_num(prefix + "bx", 1.0), cfg.get_num(prefix + "by", 1.0)});
    if (shape == "ball") return ShapeSpec::ball(cfg.get_num(prefix + "radius", 1.0));
    throw ConfigError("unknown " + prefix + "shape '" + shape + "' (expected interval|box|ball)");
}

inline Domain make_domain(const RunConfig& cfg) {
    double h = cfg.require_num("domain.h");
    double r_ext = cfg.get_num("domain.r_ext", cfg.get_num("kernel.rho", 1.0));
    return build_grid(make_shape(cfg), h, r_ext);
}

}  // namespace nonlocal
