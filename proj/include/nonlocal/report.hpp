#pragma once

// Orchestration of the full check battery for the `report` subcommand.
// Output is a canonical JSON document; identical configs produce
// byte-identical payloads.

#include <json.hpp>

#include "config.hpp"
#include "io.hpp"
#include "verify.hpp"

namespace nonlocal {

inline nlohmann::json check_summary_json(const CheckSummary& s) {
    nlohmann::json j;
    j["check"] = s.check;
    j["seeds"] = s.rows.size();
    j["min_ratio"] = s.min_ratio;
    j["pass_rate"] = s.pass_rate;
    j["pass"] = s.pass;
    return j;
}

inline std::vector<std::string> configured_checks(const RunConfig& cfg) {
    std::string raw = cfg.get("verify.checks", "");
    if (raw.empty()) return check_names();
    std::vector<std::string> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto b = item.find_first_not_of(" \t");
        auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        item = item.substr(b, e - b + 1);
        bool known = false;
        for (const auto& n : check_names()) known |= (n == item);
        if (!known) {
            std::string menu;
            for (const auto& n : check_names()) menu += (menu.empty() ? "" : ", ") + n;
            throw ConfigError("unknown check '" + item + "'; valid checks: " + menu);
        }
        out.push_back(item);
    }
    if (out.empty()) throw ConfigError("verify.checks lists no checks");
    return out;
}

inline nlohmann::json run_report(const RunConfig& cfg) {
    KernelSpec kernel = make_kernel(cfg);
    Domain dom = make_domain(cfg);
    FormMatrix form = assemble(dom, kernel);
    VerifyContext ctx(dom, form);
    int seeds = int(cfg.get_num("verify.seeds", 50));
    uint64_t master = uint64_t(cfg.get_num("verify.master_seed", 42));

    nlohmann::json out;
    out["kernel"] = {{"dimension", kernel.dim},
                     {"rho", kernel.rho()},
                     {"min_lambda", form.min_lambda()},
                     {"max_lambda", form.max_lambda()}};
    out["domain"] = {{"cells", dom.n_interior()},
                     {"shell_cells", dom.n_shell()},
                     {"h", dom.h},
                     {"measure", dom.measure()}};
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& name : configured_checks(cfg)) {
        try {
            checks.push_back(check_summary_json(run_check(name, ctx, seeds, master)));
        } catch (const std::domain_error& e) {
            nlohmann::json j;
            j["check"] = name;
            j["skipped"] = e.what();
            checks.push_back(j);
        }
    }
    out["checks"] = checks;
    return out;
}

}  // namespace nonlocal
