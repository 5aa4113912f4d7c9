#pragma once

// Linear Dirichlet solver (homogeneous and nonhomogeneous exterior data),
// smoothing diagnostics, the sublinear fixed-point solver with its scaling
// inequality check, and the Neumann solver on interior plus shell unknowns.

#include <map>

#include "analysis.hpp"
#include "spectral.hpp"

namespace nonlocal {

struct SolveReport {
    GridFunction solution;
    double residual = 0.0;
    int iterations = 0;
    std::map<std::string, double> norms;
    std::string note;  // qualitative outcome for diagnostics-only modes
};

struct SolverOptions {
    double tol = 1e-10;  // relative residual target
    int max_iter = 20000;
};

namespace solve_detail {

// plain conjugate gradients on an abstract SPD operator
template <typename Apply>
inline std::pair<double, int> cg(const Apply& apply, const std::vector<double>& b,
                                 std::vector<double>& x, const SolverOptions& opt) {
    const std::size_t n = b.size();
    x.assign(n, 0.0);
    std::vector<double> r = b, p = b, Ap(n);
    double rr = std::inner_product(r.begin(), r.end(), r.begin(), 0.0);
    double b_norm = std::sqrt(rr);
    if (b_norm == 0.0) return {0.0, 0};
    int it = 0;
    while (it < opt.max_iter) {
        ++it;
        apply(p, Ap);
        double pAp = std::inner_product(p.begin(), p.end(), Ap.begin(), 0.0);
        double alpha = rr / pAp;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        double rr_new = std::inner_product(r.begin(), r.end(), r.begin(), 0.0);
        if (std::sqrt(rr_new) <= opt.tol * b_norm) return {std::sqrt(rr_new) / b_norm, it};
        double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
    throw std::runtime_error("conjugate gradients stalled, relative residual " +
                             std::to_string(std::sqrt(rr) / b_norm));
}

// stiffness action on interior vectors (zero exterior data)
inline void stiffness_apply(const FormMatrix& F, const std::vector<double>& u,
                            std::vector<double>& out) {
    const std::size_t n = F.dom->n_interior();
    const double hN = F.cell_measure();
    out.assign(n, 0.0);
    for (const auto& p : F.pairs) {
        if (p.j < n) {
            double diff = u[p.i] - u[p.j];
            out[p.i] += diff * p.w;
            out[p.j] -= diff * p.w;
        } else {
            out[p.i] += u[p.i] * p.w;
        }
    }
    for (std::size_t i = 0; i < n; ++i) out[i] += u[i] * F.tau[i] * hN;
}

}  // namespace solve_detail

// Galerkin rows of the form against interior indicators equal h^N f.
inline SolveReport solve_dirichlet(const FormMatrix& F, const GridFunction& f,
                                   const SolverOptions& opt = {}) {
    if (f.dom != F.dom) throw std::invalid_argument("data does not match the form");
    const std::size_t n = F.dom->n_interior();
    const double hN = F.cell_measure();
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = hN * f.interior[i];
    std::vector<double> x;
    auto apply = [&](const std::vector<double>& u, std::vector<double>& out) {
        solve_detail::stiffness_apply(F, u, out);
    };
    auto [res, it] = solve_detail::cg(apply, b, x, opt);
    SolveReport rep;
    rep.solution = GridFunction(*F.dom);
    rep.solution.interior = std::move(x);
    rep.residual = res;
    rep.iterations = it;
    rep.norms["f_l2"] = f.l2_norm();
    rep.norms["u_l2"] = rep.solution.l2_norm();
    return rep;
}

// Nonhomogeneous exterior data g: solve the zero-exterior problem for
// w = u - g with right side f - Lg, then add g back.
inline SolveReport solve_dirichlet_nonhom(const FormMatrix& F, const GridFunction& f,
                                          const GridFunction& g, const SolverOptions& opt = {}) {
    if (f.dom != F.dom || g.dom != F.dom)
        throw std::invalid_argument("data does not match the form");
    std::vector<double> Lg = apply_operator(F, g);
    GridFunction rhs(*F.dom);
    for (std::size_t i = 0; i < rhs.interior.size(); ++i)
        rhs.interior[i] = f.interior[i] - Lg[i];
    SolveReport rep = solve_dirichlet(F, rhs, opt);
    GridFunction u = g;
    u.zero_exterior = false;
    for (std::size_t i = 0; i < u.interior.size(); ++i)
        u.interior[i] += rep.solution.interior[i];
    rep.solution = std::move(u);
    rep.norms["u_l2"] = rep.solution.l2_norm();
    // maximum-principle spot check on sign-definite data
    bool nonneg = true;
    for (double v : f.interior) nonneg &= v >= 0;
    for (double v : g.interior) nonneg &= v >= 0;
    for (double v : g.shell) nonneg &= v >= 0;
    if (nonneg) {
        double mn = *std::min_element(rep.solution.interior.begin(),
                                      rep.solution.interior.end());
        if (mn < -1e-10)
            throw std::runtime_error("maximum principle violated, min value " +
                                     std::to_string(mn));
    }
    return rep;
}

struct SmoothingReport {
    double lp_ratio = 0.0;       // ||u||_p / ||f||_p
    double lorentz_ratio = 0.0;  // ||u||_{A,p} / ||f||_p
};

inline SmoothingReport smoothing_report(const GridFunction& u, const GridFunction& f, double p,
                                        const LorentzWeight& w) {
    SmoothingReport rep;
    double fp = f.lp_norm(p);
    if (fp == 0.0) return rep;
    rep.lp_ratio = u.lp_norm(p) / fp;
    rep.lorentz_ratio = lorentz_norm(u, w, p) / fp;
    return rep;
}

// ---------------------------------------------------------------------------
// Sublinear reaction.

struct ReactionSpec {
    enum Kind { power_law, constant_source } kind = power_law;
    double scale = 1.0;     // c > 0
    double exponent = 0.5;  // sigma in (0,1) sublinear; > 1 diagnostic mode

    bool sublinear() const { return kind == constant_source || exponent < 1.0; }

    double f(double t) const {
        if (kind == constant_source) return scale;
        return scale * std::pow(std::max(t, 0.0), exponent);
    }
    double antiderivative(double t) const {
        t = std::max(t, 0.0);
        if (kind == constant_source) return scale * t;
        return scale * std::pow(t, exponent + 1.0) / (exponent + 1.0);
    }

    static ReactionSpec power(double c, double sigma) {
        if (!(c > 0) || !(sigma > 0 && sigma < 1))
            throw std::invalid_argument("power reaction needs c > 0 and exponent in (0,1)");
        return {power_law, c, sigma};
    }
    // supercritical probe: no existence is claimed, the iteration runs for
    // its qualitative outcome only
    static ReactionSpec superlinear(double c, double p) {
        if (!(c > 0) || !(p > 1))
            throw std::invalid_argument("superlinear reaction needs c > 0 and exponent > 1");
        return {power_law, c, p};
    }
    static ReactionSpec constant(double c) {
        if (!(c > 0)) throw std::invalid_argument("constant reaction needs c > 0");
        return {constant_source, c, 0.0};
    }
};

namespace solve_detail {

inline GridFunction picard_sublinear(const FormMatrix& F, const ReactionSpec& rs,
                                     GridFunction u, const SolverOptions& opt,
                                     int& iterations) {
    const double damping = 0.5;
    const double step_tol = 1e-8;
    const int max_steps = 400;
    double prev_step = std::numeric_limits<double>::infinity();
    for (int k = 0; k < max_steps; ++k) {
        GridFunction fu(*F.dom);
        for (std::size_t i = 0; i < fu.interior.size(); ++i)
            fu.interior[i] = rs.f(std::max(u.interior[i], 0.0));
        GridFunction next = solve_dirichlet(F, fu, opt).solution;
        double step2 = 0;
        for (std::size_t i = 0; i < u.interior.size(); ++i) {
            double v = (1 - damping) * u.interior[i] + damping * next.interior[i];
            step2 += (v - u.interior[i]) * (v - u.interior[i]);
            u.interior[i] = v;
        }
        double step = std::sqrt(F.cell_measure() * step2);
        iterations = k + 1;
        if (step < step_tol) return u;
        if (k > 50 && step > 0.999 * prev_step)
            throw std::runtime_error("sublinear iteration stagnated, last step " +
                                     std::to_string(step));
        prev_step = step;
    }
    throw std::runtime_error("sublinear iteration exceeded step budget, last step " +
                             std::to_string(prev_step));
}

}  // namespace solve_detail

namespace solve_detail {

// superlinear reactions: run the damped iteration and classify the outcome
inline SolveReport superlinear_probe(const FormMatrix& F, const ReactionSpec& rs,
                                     const GridFunction& seed_state,
                                     const SolverOptions& opt) {
    SolveReport rep;
    GridFunction u = seed_state;
    double cap = 1e8 * (1.0 + u.max_abs());
    for (int k = 0; k < 400; ++k) {
        GridFunction fu(*F.dom);
        for (std::size_t i = 0; i < fu.interior.size(); ++i)
            fu.interior[i] = rs.f(std::max(u.interior[i], 0.0));
        GridFunction next = solve_dirichlet(F, fu, opt).solution;
        double step2 = 0;
        for (std::size_t i = 0; i < u.interior.size(); ++i) {
            double v = 0.5 * u.interior[i] + 0.5 * next.interior[i];
            step2 += (v - u.interior[i]) * (v - u.interior[i]);
            u.interior[i] = v;
        }
        rep.iterations = k + 1;
        if (u.max_abs() > cap) {
            rep.note = "iterates blow up";
            break;
        }
        if (u.max_abs() < 1e-12) {
            rep.note = "iterates collapse to zero";
            break;
        }
        if (std::sqrt(F.cell_measure() * step2) < 1e-8) {
            rep.note = "iteration settled";
            break;
        }
    }
    if (rep.note.empty()) rep.note = "no settling within the step budget";
    rep.solution = std::move(u);
    rep.norms["u_max"] = rep.solution.max_abs();
    return rep;
}

}  // namespace solve_detail

// Damped fixed-point iteration through the linear solver. Runs a from-below
// start (one linear solve of a small constant source) and a from-above start
// (large constant); uniqueness of the limit is asserted at 1e-6. Superlinear
// reactions skip the uniqueness contract and only report the qualitative
// outcome of the iteration.
inline SolveReport solve_sublinear(const FormMatrix& F, const ReactionSpec& rs,
                                   const SolverOptions& opt = {}) {
    const std::size_t n = F.dom->n_interior();
    const double hN = F.cell_measure();

    // profile of the resolvent applied to the unit source
    GridFunction ones(*F.dom, 1.0);
    GridFunction e = solve_dirichlet(F, ones, opt).solution;
    double e_min = *std::min_element(e.interior.begin(), e.interior.end());
    double e_max = *std::max_element(e.interior.begin(), e.interior.end());
    if (!(e_min > 0)) throw std::runtime_error("resolvent lost positivity");

    if (!rs.sublinear()) {
        GridFunction start(*F.dom);
        for (std::size_t i = 0; i < n; ++i) start.interior[i] = rs.scale * e.interior[i];
        return solve_detail::superlinear_probe(F, rs, start, opt);
    }

    SolveReport rep;
    int iters = 0;
    GridFunction low(*F.dom);
    if (rs.kind == ReactionSpec::constant_source) {
        for (std::size_t i = 0; i < n; ++i) low.interior[i] = rs.scale * e.interior[i];
        rep.solution = low;  // fixed point after one solve
        rep.iterations = 1;
    } else {
        // subsolution start: t0 with t0 <= f(t0) * min resolvent
        double t0 = std::pow(rs.scale * e_min, 1.0 / (1.0 - rs.exponent));
        for (std::size_t i = 0; i < n; ++i) low.interior[i] = rs.f(t0) * e.interior[i];
        GridFunction from_below = solve_detail::picard_sublinear(F, rs, low, opt, iters);
        rep.iterations = iters;

        double big = 10.0 * std::max(1.0, std::pow(rs.scale * e_max, 1.0 / (1.0 - rs.exponent)));
        GridFunction high(*F.dom, big);
        int iters2 = 0;
        GridFunction from_above = solve_detail::picard_sublinear(F, rs, high, opt, iters2);

        double diff2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double dd = from_below.interior[i] - from_above.interior[i];
            diff2 += dd * dd;
        }
        double diff = std::sqrt(hN * diff2);
        rep.norms["init_disagreement"] = diff;
        if (diff > 1e-6 * std::max(1.0, from_below.l2_norm()))
            throw std::runtime_error("sublinear limits disagree across initializations");
        rep.solution = std::move(from_below);
    }
    double mn = *std::min_element(rep.solution.interior.begin(), rep.solution.interior.end());
    rep.norms["min_value"] = mn;
    rep.norms["u_l2"] = rep.solution.l2_norm();
    return rep;
}

struct PohozaevReport {
    double lhs = 0.0;     // int u f(u)
    double rhs = 0.0;     // 2N/(N - sigma) int F(u)
    double sigma = 0.0;
    double p_star = 0.0;  // (N + sigma)/(N - sigma)
    bool pass = false;
};

inline PohozaevReport pohozaev_check(const FormMatrix& F, const KernelSpec& k,
                                     const GridFunction& u, const ReactionSpec& rs) {
    PohozaevReport rep;
    rep.sigma = scaling_sigma(k).sigma;
    const int N = k.dim;
    if (rep.sigma >= N)
        throw std::domain_error("supercritical scaling exceeds dimension");
    rep.p_star = (N + rep.sigma) / (N - rep.sigma);
    const double hN = F.cell_measure();
    for (double v : u.interior) {
        rep.lhs += hN * v * rs.f(v);
        rep.rhs += hN * rs.antiderivative(v);
    }
    rep.rhs *= 2.0 * N / (N - rep.sigma);
    rep.pass = rep.lhs <= rep.rhs * (1.0 + 5e-2);
    return rep;
}

// ---------------------------------------------------------------------------
// Neumann problem: unknowns on interior and shell cells, Galerkin rows over
// the truncated pair set, solved in the mean-zero subspace.

inline SolveReport solve_neumann(const FormMatrix& F, const GridFunction& f,
                                 const SolverOptions& opt = {}) {
    if (f.dom != F.dom) throw std::invalid_argument("data does not match the form");
    const std::size_t n_int = F.dom->n_interior();
    const std::size_t n_cov = F.dom->n_covered();
    const double hN = F.cell_measure();

    double f_sum = 0, f_abs = 0;
    for (double v : f.interior) {
        f_sum += hN * v;
        f_abs += hN * std::abs(v);
    }
    if (std::abs(f_sum) > 1e-10 * std::max(f_abs, 1e-300))
        throw std::invalid_argument("incompatible data: source must have zero mean");

    std::vector<double> b(n_cov, 0.0);
    for (std::size_t i = 0; i < n_int; ++i) b[i] = hN * f.interior[i];
    auto project = [&](std::vector<double>& v) {
        double m = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
        for (auto& x : v) x -= m;
    };
    project(b);
    auto apply = [&](const std::vector<double>& u, std::vector<double>& out) {
        out.assign(n_cov, 0.0);
        for (const auto& p : F.pairs) {
            double diff = u[p.i] - u[p.j];
            out[p.i] += diff * p.w;
            out[p.j] -= diff * p.w;
        }
        project(out);
    };
    std::vector<double> x;
    auto [res, it] = solve_detail::cg(apply, b, x, opt);

    SolveReport rep;
    rep.solution = GridFunction(*F.dom, 0.0, false);
    for (std::size_t i = 0; i < n_int; ++i) rep.solution.interior[i] = x[i];
    for (std::size_t i = n_int; i < n_cov; ++i) rep.solution.shell[i - n_int] = x[i];
    double mean = rep.solution.interior_mean();
    for (auto& v : rep.solution.interior) v -= mean;
    for (auto& v : rep.solution.shell) v -= mean;
    rep.residual = res;
    rep.iterations = it;
    rep.norms["u_l2"] = rep.solution.l2_norm();
    return rep;
}

struct TailProbe {
    double radius = 0.0;
    double sphere_mean = 0.0;      // reconstruction averaged over the probe sphere
    double max_point_dev = 0.0;    // worst single-point deviation, relative
    double deviation = 0.0;        // |sphere_mean - interior mean|, relative
};

struct NeumannTailReport {
    std::vector<TailProbe> probes;
    double interior_mean = 0.0;
    bool monotone = false;
};

namespace solve_detail {

// int_{C_j} K(x - y) dy by direct quadrature (x far from the cell)
inline double cell_kernel_mass(const KernelSpec& k, const Domain& d,
                               std::array<double, 2> x, std::size_t j) {
    auto c = d.interior_center(j);
    double h = d.h;
    if (k.dim == 1) {
        auto f = [&](double y) { return k.profile(std::abs(x[0] - y)); };
        return integrate_adaptive(f, c[0] - h / 2, c[0] + h / 2, 1e-10).value;
    }
    auto f = [&](double y0) {
        auto g = [&](double y1) { return k.profile(std::hypot(x[0] - y0, x[1] - y1)); };
        return integrate_adaptive(g, c[1] - h / 2, c[1] + h / 2, 1e-10).value;
    };
    return integrate_adaptive(f, c[0] - h / 2, c[0] + h / 2, 1e-10).value;
}

}  // namespace solve_detail

// Far-field reconstruction u(x) = sum_j u_j w_xj / sum_j w_xj at probe
// spheres |x| in {2,4,8} diam(Omega); with a power tail the values settle
// at the plain interior mean.
inline NeumannTailReport neumann_tail(const KernelSpec& k, const Domain& d,
                                      const GridFunction& u) {
    if (k.tail.variant == TailVariant::zero)
        throw std::domain_error("no stabilization limit: kernel has compact support");
    NeumannTailReport rep;
    rep.interior_mean = u.interior_mean();
    double scale = std::max(u.max_abs(), 1e-300);
    double diam = d.diameter();
    std::vector<std::array<double, 2>> dirs;
    if (d.dim == 1)
        dirs = {{{1, 0}}, {{-1, 0}}};
    else
        dirs = {{{1, 0}}, {{-1, 0}}, {{0, 1}}, {{0, -1}}};
    for (double mult : {2.0, 4.0, 8.0}) {
        TailProbe probe;
        probe.radius = mult * diam;
        double acc = 0.0;
        for (auto& e : dirs) {
            std::array<double, 2> x{{probe.radius * e[0], probe.radius * e[1]}};
            double num = 0, den = 0;
            for (std::size_t j = 0; j < d.n_interior(); ++j) {
                double w = solve_detail::cell_kernel_mass(k, d, x, j);
                num += u.interior[j] * w;
                den += w;
            }
            if (den <= 0)
                throw std::domain_error("no stabilization limit: probe sees no kernel mass");
            double val = num / den;
            acc += val;
            probe.max_point_dev =
                std::max(probe.max_point_dev, std::abs(val - rep.interior_mean) / scale);
        }
        probe.sphere_mean = acc / double(dirs.size());
        probe.deviation = std::abs(probe.sphere_mean - rep.interior_mean) / scale;
        rep.probes.push_back(probe);
    }
    rep.monotone = true;
    for (std::size_t i = 0; i + 1 < rep.probes.size(); ++i)
        if (rep.probes[i + 1].deviation > rep.probes[i].deviation * (1.0 + 1e-9) + 1e-12)
            rep.monotone = false;
    return rep;
}

}  // namespace nonlocal
