// Command-line front end: kernel tables, form assembly, eigenpairs,
// inequality checks, solvers, perimeter, rearrangement, and the aggregate
// report. Outputs are CSV (17 significant digits) and JSON; identical
// configurations produce byte-identical artifacts.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>

#include <nonlocal/config.hpp>
#include <nonlocal/io.hpp>
#include <nonlocal/report.hpp>
#include <nonlocal/solve.hpp>
#include <nonlocal/spectral.hpp>
#include <nonlocal/verify.hpp>

using namespace nonlocal;

namespace {

// artifacts are buffered and only land on disk after the computation is done
void emit(const std::string& path, const std::string& payload) {
    if (path.empty() || path == "-") {
        std::cout << payload;
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file: " + path);
    os << payload;
}

GridFunction load_values(const std::string& path, const Domain& d, bool with_shell) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open value file: " + path);
    std::vector<double> vals = read_value_csv(is);
    std::size_t want = d.n_interior() + (with_shell ? d.n_shell() : 0);
    if (vals.size() != want && vals.size() != d.n_interior())
        throw std::runtime_error("value file rows (" + std::to_string(vals.size()) +
                                 ") do not match the grid (" + std::to_string(want) + ")");
    GridFunction u(d, 0.0, vals.size() == d.n_interior());
    for (std::size_t i = 0; i < vals.size(); ++i) u.set_covered(i, vals[i]);
    return u;
}

nlohmann::json solve_report_json(const SolveReport& rep) {
    nlohmann::json j;
    j["residual"] = rep.residual;
    j["iterations"] = rep.iterations;
    for (auto& [k, v] : rep.norms) j[k] = v;
    if (!rep.note.empty()) j["note"] = rep.note;
    return j;
}

int run_kernel_table(const RunConfig& cfg, const std::string& out) {
    KernelSpec k = make_kernel(cfg);
    std::ostringstream os;
    CsvWriter w(os);
    w.row({"r", "M", "ell", "m_at_1_over_r"});
    for (int j = 0; j <= 8; ++j) {
        double r = k.rho() * std::pow(10.0, -0.5 * j);
        w.numeric_row({r, mass_M(k, r), k.ell_eff(r), multiplier_m(k, 1.0 / r)});
    }
    emit(out, os.str());
    return 0;
}

int run_kernel_sigma(const RunConfig& cfg, const std::string& out) {
    KernelSpec k = make_kernel(cfg);
    ScalingReport rep = scaling_sigma(k);
    std::ostringstream os;
    CsvWriter w(os);
    w.row({"lambda", "gamma"});
    w.numeric_row({1.0, 1.0});
    for (auto& [lam, g] : rep.gamma) w.numeric_row({lam, g});
    os << "sigma," << format_double(rep.sigma) << "\n";
    emit(out, os.str());
    return 0;
}

int run_assemble(const RunConfig& cfg, const std::string& out) {
    KernelSpec k = make_kernel(cfg);
    Domain d = make_domain(cfg);
    FormMatrix F = assemble(d, k);
    std::ostringstream os(std::ios::binary);
    write_form(os, F);
    emit(out, os.str());
    return 0;
}

int run_form_info(const std::string& in) {
    std::ifstream is(in, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open form file: " + in);
    LoadedForm lf = read_form(is, KernelSpec{});
    std::cout << "cells " << lf.domain->n_interior() << " shell " << lf.domain->n_shell()
              << " pairs " << lf.form.pairs.size() << "\n";
    std::cout << "lambda min " << format_double(lf.form.min_lambda()) << " max "
              << format_double(lf.form.max_lambda()) << "\n";
    std::cout << "tail bound " << (lf.form.tau_is_upper_bound ? "upper" : "exact") << "\n";
    return 0;
}

int run_eigen(const RunConfig& cfg, int k_count, const std::string& out,
              const std::string& vectors_dir) {
    KernelSpec k = make_kernel(cfg);
    Domain d = make_domain(cfg);
    FormMatrix F = assemble(d, k);
    auto dec = dirichlet_eigen(F, std::size_t(k_count));
    std::ostringstream os;
    CsvWriter w(os);
    w.row({"j", "lambda_j"});
    for (std::size_t j = 0; j < dec.eigenvalues.size(); ++j)
        w.numeric_row({double(j + 1), dec.eigenvalues[j]});
    emit(out, os.str());
    if (!vectors_dir.empty()) {
        std::filesystem::create_directories(vectors_dir);
        for (std::size_t j = 0; j < dec.eigenfunctions.size(); ++j) {
            std::ostringstream vs;
            write_grid_function_csv(vs, dec.eigenfunctions[j]);
            emit(vectors_dir + "/phi_" + std::to_string(j + 1) + ".csv", vs.str());
        }
    }
    return 0;
}

int run_eigen_berezin(const RunConfig& cfg) {
    KernelSpec k = make_kernel(cfg);
    Domain d = make_domain(cfg);
    FormMatrix F = assemble(d, k);
    auto dec = dirichlet_eigen(F, 1);
    BerezinReport rep = berezin_bound(k, d);
    double slack = dec.eigenvalues[0] / rep.bound - 1.0;
    std::cout << "bound " << format_double(rep.bound) << "\n";
    std::cout << "lambda1 " << format_double(dec.eigenvalues[0]) << "\n";
    std::cout << "slack " << format_double(slack) << "\n";
    std::cout << "growth_condition " << (rep.condition_ok ? "true" : "false") << "\n";
    return 0;
}

int run_verify(const RunConfig& cfg, std::string check, int seeds, const std::string& out,
               const std::string& summary_out) {
    KernelSpec k = make_kernel(cfg);
    Domain d = make_domain(cfg);
    FormMatrix F = assemble(d, k);
    VerifyContext ctx(d, F);
    if (check.empty()) check = cfg.get("verify.check", "poincare");
    bool known = false;
    for (const auto& n : check_names()) known |= (n == check);
    if (!known) {
        std::string menu;
        for (const auto& n : check_names()) menu += (menu.empty() ? "" : ", ") + n;
        throw std::runtime_error("unknown check '" + check + "'; valid checks: " + menu);
    }
    if (seeds <= 0) seeds = int(cfg.get_num("verify.seeds", 200));
    uint64_t master = uint64_t(cfg.get_num("verify.master_seed", 42));
    CheckSummary sum = run_check(check, ctx, seeds, master);
    std::ostringstream os;
    CsvWriter w(os);
    w.row({"seed", "lhs", "rhs", "ratio", "pass"});
    for (const auto& r : sum.rows) {
        os << r.seed << ',' << format_double(r.lhs) << ',' << format_double(r.rhs) << ','
           << format_double(r.ratio) << ',' << (r.pass ? "true" : "false") << '\n';
    }
    emit(out, os.str());
    if (!summary_out.empty()) emit(summary_out, check_summary_json(sum).dump(2) + "\n");
    else std::cerr << check_summary_json(sum).dump() << "\n";
    return 0;
}

GridFunction default_source(const RunConfig& cfg, const Domain& d, const std::string& mode) {
    std::string expr = cfg.get("solve.f", mode == "neumann" ? "odd" : "one");
    GridFunction f(d);
    if (expr == "one") {
        for (auto& v : f.interior) v = 1.0;
    } else if (expr == "odd") {
        for (std::size_t i = 0; i < d.n_interior(); ++i) f.interior[i] = d.interior_center(i)[0];
        double m = f.interior_mean();
        for (auto& v : f.interior) v -= m;
    } else {
        throw ConfigError("unknown solve.f '" + expr + "' (expected one|odd)");
    }
    return f;
}

int run_solve(const RunConfig& cfg, const std::string& mode, const std::string& f_csv,
              const std::string& g_csv, const std::string& out, const std::string& report_out,
              const std::string& h_sweep) {
    KernelSpec k = make_kernel(cfg);
    SolverOptions sopt;
    sopt.tol = cfg.get_num("solver.tol", 1e-10);
    sopt.max_iter = int(cfg.get_num("solver.max_iter", 20000));
    if (!(sopt.tol > 0) || sopt.max_iter <= 0)
        throw ConfigError("solver tolerances must be positive");

    if (mode == "dirichlet" && !h_sweep.empty()) {
        std::ostringstream os;
        CsvWriter w(os);
        w.row({"h", "lp_ratio_p2", "lorentz_ratio_p2", "lp_ratio_p4", "lorentz_ratio_p4"});
        std::stringstream ss(h_sweep);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            double h = RunConfig::parse_num("h-sweep", tok);
            Domain d = build_grid(make_shape(cfg), h, cfg.get_num("domain.r_ext", k.rho()));
            FormMatrix F = assemble(d, k);
            GridFunction f = default_source(cfg, d, mode);
            SolveReport rep = solve_dirichlet(F, f, sopt);
            LorentzWeight lw = lorentz_weight_from_kernel(k, d);
            auto s2 = smoothing_report(rep.solution, f, 2.0, lw);
            auto s4 = smoothing_report(rep.solution, f, 4.0, lw);
            w.numeric_row({h, s2.lp_ratio, s2.lorentz_ratio, s4.lp_ratio, s4.lorentz_ratio});
        }
        emit(out, os.str());
        return 0;
    }

    Domain d = make_domain(cfg);
    FormMatrix F = assemble(d, k);
    SolveReport rep;
    if (mode == "dirichlet") {
        GridFunction f = f_csv.empty() ? default_source(cfg, d, mode) : load_values(f_csv, d, false);
        rep = solve_dirichlet(F, f, sopt);
    } else if (mode == "nonhom") {
        GridFunction f = f_csv.empty() ? default_source(cfg, d, mode) : load_values(f_csv, d, false);
        GridFunction g = g_csv.empty() ? GridFunction(d, 1.0, false) : load_values(g_csv, d, true);
        rep = solve_dirichlet_nonhom(F, f, g, sopt);
    } else if (mode == "sublinear") {
        std::string kind = cfg.get("solve.reaction", "power");
        ReactionSpec rs = ReactionSpec::power(1.0, 0.5);
        if (kind == "constant")
            rs = ReactionSpec::constant(cfg.get_num("solve.c", 1.0));
        else if (kind == "superlinear")
            rs = ReactionSpec::superlinear(cfg.get_num("solve.c", 1.0),
                                           cfg.get_num("solve.sigma", 2.0));
        else if (kind == "power")
            rs = ReactionSpec::power(cfg.get_num("solve.c", 1.0),
                                     cfg.get_num("solve.sigma", 0.5));
        else
            throw ConfigError("unknown solve.reaction '" + kind +
                              "' (expected power|constant|superlinear)");
        rep = solve_sublinear(F, rs, sopt);
    } else if (mode == "neumann") {
        GridFunction f = f_csv.empty() ? default_source(cfg, d, mode) : load_values(f_csv, d, false);
        rep = solve_neumann(F, f, sopt);
    } else {
        throw std::runtime_error("unknown solve mode: " + mode);
    }
    std::ostringstream os;
    write_grid_function_csv(os, rep.solution, !rep.solution.zero_exterior);
    emit(out, os.str());
    if (!report_out.empty()) emit(report_out, solve_report_json(rep).dump(2) + "\n");
    return 0;
}

int run_pohozaev(const RunConfig& cfg) {
    KernelSpec k = make_kernel(cfg);
    Domain d = make_domain(cfg);
    FormMatrix F = assemble(d, k);
    SolverOptions sopt;
    sopt.tol = cfg.get_num("solver.tol", 1e-10);
    ReactionSpec rs = ReactionSpec::power(cfg.get_num("solve.c", 1.0),
                                          cfg.get_num("solve.sigma", 0.5));
    SolveReport rep = solve_sublinear(F, rs, sopt);
    PohozaevReport p = pohozaev_check(F, k, rep.solution, rs);
    std::cout << "lhs " << format_double(p.lhs) << "\n";
    std::cout << "rhs " << format_double(p.rhs) << "\n";
    std::cout << "sigma " << format_double(p.sigma) << "\n";
    std::cout << "p_star " << format_double(p.p_star) << "\n";
    std::cout << "pass " << (p.pass ? "true" : "false") << "\n";
    return p.pass ? 0 : 3;
}

int run_perimeter(const RunConfig& cfg) {
    KernelSpec k = make_kernel(cfg);
    Domain d = make_domain(cfg);
    FormMatrix F = assemble(d, k);
    ShapeSpec subset = cfg.has("perimeter.shape")
                           ? make_shape(cfg, "perimeter.")
                           : ShapeSpec::ball(cfg.get_num("perimeter.radius", 0.25));
    GridFunction ind = indicator(d, subset);
    double P = j_perimeter(F, ind);
    std::cout << "perimeter " << format_double(P) << "\n";
    double sigma = cfg.get_num("perimeter.modulus_exponent", 1.0);
    auto diag = boundary_modulus_diagnostic(
        k, [sigma](double s) { return std::pow(std::log(1.0 / s), -sigma); });
    std::cout << "boundary_integral "
              << (diag.boundary_integral_finite ? "finite" : "divergent") << " "
              << format_double(diag.boundary_integral) << "\n";
    return 0;
}

int run_rearrange(const RunConfig& cfg, const std::string& f_csv, const std::string& out) {
    Domain d = make_domain(cfg);
    if (f_csv.empty()) throw std::runtime_error("rearrange needs --f <csv>");
    GridFunction u = load_values(f_csv, d, false);
    Rearrangement re = rearrange(u);
    std::ostringstream os;
    write_grid_function_csv(os, re.star);
    emit(out, os.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonlocal: weakly singular kernel laboratory"};
    app.require_subcommand(1);

    std::string config_path, out = "-", in, vectors_dir, check, f_csv, g_csv, report_out,
                summary_out, h_sweep;
    int k_count = 6, seeds = 0;

    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration file");
    };

    auto* kernel = app.add_subcommand("kernel", "kernel functionals");
    auto* ktable = kernel->add_subcommand("table", "CSV of r, M, ell, m(1/r)");
    add_config(ktable);
    ktable->add_option("--out", out);
    auto* ksigma = kernel->add_subcommand("sigma", "dilation scaling exponent");
    add_config(ksigma);
    ksigma->add_option("--out", out);

    auto* asmb = app.add_subcommand("assemble", "assemble and store a form");
    add_config(asmb);
    asmb->add_option("--out", out)->required();

    auto* finfo = app.add_subcommand("form", "form container utilities");
    auto* finfo_info = finfo->add_subcommand("info", "print form statistics");
    finfo_info->add_option("--in", in)->required();

    auto* eig = app.add_subcommand("eigen", "Dirichlet eigenpairs");
    add_config(eig);
    eig->add_option("--k", k_count, "eigenpair count");
    eig->add_option("--out", out);
    eig->add_option("--vectors", vectors_dir, "directory for eigenfunction CSVs");
    auto* eigb = eig->add_subcommand("berezin", "first-eigenvalue lower bound");
    add_config(eigb);

    auto* ver = app.add_subcommand("verify", "run an inequality check over seeds");
    add_config(ver);
    ver->add_option("--check", check);
    ver->add_option("--seeds", seeds);
    ver->add_option("--out", out);
    ver->add_option("--summary", summary_out);

    auto* slv = app.add_subcommand("solve", "linear/nonlinear/Neumann solvers");
    std::string solve_mode;
    slv->add_option("mode", solve_mode, "dirichlet|nonhom|sublinear|neumann|pohozaev")
        ->required();
    add_config(slv);
    slv->add_option("--f", f_csv, "source CSV");
    slv->add_option("--g", g_csv, "exterior datum CSV (nonhom)");
    slv->add_option("--out", out);
    slv->add_option("--report", report_out, "JSON solve report path");
    slv->add_option("--h-sweep", h_sweep, "comma list of cell sizes (dirichlet smoothing)");

    auto* per = app.add_subcommand("perimeter", "nonlocal perimeter of a subset");
    add_config(per);

    auto* rear = app.add_subcommand("rearrange", "decreasing rearrangement of a grid function");
    add_config(rear);
    rear->add_option("--f", f_csv)->required();
    rear->add_option("--out", out);

    auto* rep = app.add_subcommand("report", "aggregate JSON over all checks");
    add_config(rep);
    rep->add_option("--out", out);

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
        if (ktable->parsed()) return run_kernel_table(cfg, out);
        if (ksigma->parsed()) return run_kernel_sigma(cfg, out);
        if (asmb->parsed()) return run_assemble(cfg, out);
        if (finfo_info->parsed()) return run_form_info(in);
        if (eigb->parsed()) return run_eigen_berezin(cfg);
        if (eig->parsed()) return run_eigen(cfg, k_count, out, vectors_dir);
        if (ver->parsed()) return run_verify(cfg, check, seeds, out, summary_out);
        if (slv->parsed()) {
            if (solve_mode == "pohozaev") return run_pohozaev(cfg);
            return run_solve(cfg, solve_mode, f_csv, g_csv, out, report_out, h_sweep);
        }
        if (per->parsed()) return run_perimeter(cfg);
        if (rear->parsed()) return run_rearrange(cfg, f_csv, out);
        if (rep->parsed()) {
            emit(out, run_report(cfg).dump(2) + "\n");
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
