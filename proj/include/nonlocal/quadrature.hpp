#pragma once

// Adaptive panel quadrature built on a Gauss7/Kronrod15 pair, with
// geometric grading toward integrable endpoint singularities and
// asymptotic continuation for oscillatory tails.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace nonlocal {

struct QuadratureError : std::runtime_error {
    double achieved;
    QuadratureError(const std::string& what, double achieved_tol)
        : std::runtime_error(what), achieved(achieved_tol) {}
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
};

namespace detail {

// Kronrod 15 abscissae/weights on [-1,1]; Gauss 7 embedded at the odd nodes.
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <typename F>
inline QuadResult gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - half * kXgk[i]);
        fv[14 - i] = f(c + half * kXgk[i]);
    }
    fv[7] = f(c);
    double resk = kWgk[7] * fv[7];
    double resg = kWg[3] * fv[7];
    for (int i = 0; i < 7; ++i) resk += kWgk[i] * (fv[i] + fv[14 - i]);
    for (int i = 0; i < 3; ++i)
        resg += kWg[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
    QuadResult r;
    r.value = resk * half;
    r.error = std::abs((resk - resg) * half);
    // sharpen the raw |K-G| estimate the usual way
    r.error = std::pow(200.0 * r.error, 1.5) < r.error ? std::pow(200.0 * r.error, 1.5) : r.error;
    return r;
}

struct Panel {
    double a, b, value, error;
};

}  // namespace detail

// Globally adaptive quadrature over [a,b]; optional interior breakpoints
// become initial panel boundaries (for kink/jump alignment).
template <typename F>
inline QuadResult integrate_adaptive(const F& f, double a, double b,
                                     double rel_tol = 1e-10,
                                     double abs_tol = 0.0,
                                     const std::vector<double>& breakpoints = {},
                                     int max_panels = 4000) {
    QuadResult out;
    if (!(b > a)) return out;
    std::vector<double> edges{a};
    for (double x : breakpoints)
        if (x > a && x < b) edges.push_back(x);
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    std::vector<detail::Panel> panels;
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        auto r = detail::gk15(f, edges[i], edges[i + 1]);
        panels.push_back({edges[i], edges[i + 1], r.value, r.error});
    }
    auto totals = [&] {
        double v = 0, e = 0;
        for (auto& p : panels) { v += p.value; e += p.error; }
        return std::pair<double, double>(v, e);
    };
    // non-finite panels get split with top priority; once they shrink to a
    // few ulps they are dropped (an integrable singularity contributes
    // nothing over an ulp-wide sliver)
    auto priority = [](const detail::Panel& p) {
        return std::isfinite(p.error) && std::isfinite(p.value)
                   ? p.error
                   : std::numeric_limits<double>::infinity();
    };
    const int max_iters = 8 * max_panels;
    for (int iter = 0;; ++iter) {
        auto [v, e] = totals();
        double target = std::max(abs_tol, rel_tol * std::abs(v));
        if ((std::isfinite(e) && e <= target) || (int)panels.size() >= max_panels ||
            iter >= max_iters) {
            out.value = v;
            out.error = e;
            out.converged = std::isfinite(e) && e <= std::max(target, 1e-300);
            return out;
        }
        size_t worst = 0;
        for (size_t i = 1; i < panels.size(); ++i)
            if (priority(panels[i]) > priority(panels[worst])) worst = i;
        detail::Panel p = panels[worst];
        double m = 0.5 * (p.a + p.b);
        double ulp_width = 8.0 * std::numeric_limits<double>::epsilon() *
                           std::max({std::abs(p.a), std::abs(p.b), 1e-30});
        if (m <= p.a || m >= p.b || p.b - p.a <= ulp_width) {
            panels[worst].error = 0;
            if (!std::isfinite(panels[worst].value)) panels[worst].value = 0;
            continue;
        }
        auto rl = detail::gk15(f, p.a, m);
        auto rr = detail::gk15(f, m, p.b);
        panels[worst] = {p.a, m, rl.value, rl.error};
        panels.push_back({m, p.b, rr.value, rr.error});
    }
}

// Integral over (a,b] of a function with an integrable singularity at a.
// Panels shrink geometrically toward a (ratio 1/2); stops once a panel
// contributes less than rel_tol of the running total twice in a row.
template <typename F>
inline QuadResult integrate_graded_left(const F& f, double a, double b,
                                        double rel_tol = 1e-10,
                                        int max_levels = 64) {
    QuadResult out;
    if (!(b > a)) return out;
    double total = 0.0, err = 0.0;
    double hi = b;
    int small_streak = 0;
    double prev_panel = 0.0, last_panel = 0.0;
    for (int k = 0; k < max_levels; ++k) {
        double lo = a + (b - a) * std::ldexp(1.0, -(k + 1));
        if (lo >= hi) break;
        auto r = integrate_adaptive(f, lo, hi, rel_tol, 0.0, {}, 200);
        total += r.value;
        err += r.error;
        prev_panel = last_panel;
        last_panel = r.value;
        if (std::abs(r.value) < rel_tol * std::abs(total))
            ++small_streak;
        else
            small_streak = 0;
        if (small_streak >= 2) break;
        hi = lo;
    }
    // geometric extrapolation of the dropped levels
    if (prev_panel != 0.0 && last_panel != 0.0 && std::isfinite(last_panel)) {
        double q = last_panel / prev_panel;
        if (q > 0.0 && q < 0.97) {
            double rem = last_panel * q / (1.0 - q);
            total += rem;
            err += std::abs(rem) * 0.25;
        }
    }
    out.value = total;
    out.error = err;
    // level contributions that never decay signal a non-integrable endpoint
    out.converged =
        small_streak >= 2 || std::abs(last_panel) <= rel_tol * std::abs(total) ||
        (prev_panel != 0.0 && std::abs(last_panel) < 0.9 * std::abs(prev_panel));
    return out;
}

// Asymptotic tail  I(nu, phase) = \int_x^\infty u^{-nu} cos(u + phase) du
// by repeated integration by parts; valid for x >= ~25. The series is
// truncated at its smallest term.
inline double oscillatory_tail_cos(double x, double nu, double phase) {
    double sum = 0.0;
    double coeff = 1.0;
    double last = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 24; ++k) {
        double term = -coeff * std::pow(x, -nu) * std::sin(x + phase);
        if (std::abs(term) > last) break;  // asymptotic divergence sets in
        sum += term;
        last = std::abs(term);
        coeff *= nu;
        phase -= 0.5 * M_PI;
        nu += 1.0;
        if (last < 1e-300) break;
    }
    return sum;
}

}  // namespace nonlocal
