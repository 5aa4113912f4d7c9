#pragma once

// Rearrangement machinery and Lorentz-type norms with kernel-derived
// weights. The rearrangement target is the quasi-ball: the first n lattice
// cells ordered by center radius, which has exactly the measure of the
// source grid, so equimeasurability is exact at the discrete level.

#include <memory>
#include <numeric>

#include "forms.hpp"

namespace nonlocal {

// Distribution function mu(t) = |{ |u| > t }| of a grid function:
// piecewise constant, right continuous. values holds the distinct
// nonzero levels in decreasing order; measure_at[k] = mu(t) for
// t in [values[k+1], values[k]).
struct DistributionProfile {
    std::vector<double> values;
    std::vector<double> measure_at;
    double total_measure = 0.0;

    double mu(double t) const {
        if (t < 0) t = 0;
        double m = 0;
        for (std::size_t k = 0; k < values.size(); ++k)
            if (values[k] > t) m = measure_at[k];
        return m;
    }
};

inline DistributionProfile distribution_profile(const GridFunction& u) {
    DistributionProfile p;
    p.total_measure = u.dom->measure();
    std::vector<double> a;
    a.reserve(u.interior.size());
    for (double v : u.interior) a.push_back(std::abs(v));
    std::sort(a.begin(), a.end(), std::greater<double>());
    const double hN = u.dom->cell_measure();
    std::size_t i = 0;
    while (i < a.size() && a[i] > 0) {
        std::size_t j = i;
        while (j < a.size() && a[j] == a[i]) ++j;
        p.values.push_back(a[i]);
        p.measure_at.push_back(hN * double(j));  // measure of {|u| >= this level}
        i = j;
    }
    return p;
}

// Lattice cells of the centered quasi-ball with n cells, ordered by center
// radius (ties broken lexicographically).
inline std::vector<std::array<int, 2>> quasi_ball_cells(int dim, std::size_t n) {
    std::vector<std::array<int, 2>> cells;
    if (dim == 1) {
        int m = int(n) + 2;
        for (int i = -m; i < m; ++i) cells.push_back({{i, 0}});
    } else {
        int m = int(std::ceil(std::sqrt(double(n) / M_PI))) + 3;
        for (int i = -m; i < m; ++i)
            for (int j = -m; j < m; ++j) cells.push_back({{i, j}});
    }
    auto radius = [dim](const std::array<int, 2>& c) {
        double x = c[0] + 0.5, y = dim == 2 ? c[1] + 0.5 : 0.0;
        return std::hypot(x, y);
    };
    std::sort(cells.begin(), cells.end(), [&](const auto& a, const auto& b) {
        double ra = radius(a), rb = radius(b);
        if (ra != rb) return ra < rb;
        return a < b;
    });
    cells.resize(n);
    return cells;
}

struct Rearrangement {
    std::shared_ptr<Domain> domain;  // quasi-ball grid of equal measure
    GridFunction star;               // radially nonincreasing reassignment of |u|
    DistributionProfile profile;
};

inline Rearrangement rearrange(const GridFunction& u) {
    const Domain& d = *u.dom;
    Rearrangement out;
    out.profile = distribution_profile(u);
    auto cells = quasi_ball_cells(d.dim, d.n_interior());
    out.domain = std::make_shared<Domain>(
        build_grid(ShapeSpec::cell_union(std::move(cells), d.dim), d.h, d.r_ext));
    std::vector<double> vals;
    vals.reserve(u.interior.size());
    for (double v : u.interior) vals.push_back(std::abs(v));
    std::sort(vals.begin(), vals.end(), std::greater<double>());
    out.star = GridFunction(*out.domain);
    for (std::size_t i = 0; i < vals.size(); ++i) out.star.interior[i] = vals[i];
    return out;
}

// ---------------------------------------------------------------------------
// Lorentz-type norms.

// Weight A on [0, |Omega|]. The kernel-derived choice integrates the radial
// weight psi(x) = M(rho |x| / R) over ball slices; A(s) = s recovers the
// plain Lebesgue norm.
struct LorentzWeight {
    std::function<double(double)> A;
    std::function<double(double)> psi_radial;  // may be empty
    double R = 0.0;

    double operator()(double s) const { return A(s); }
};

inline LorentzWeight lebesgue_weight() {
    LorentzWeight w;
    w.A = [](double s) { return s; };
    return w;
}

inline LorentzWeight lorentz_weight_from_kernel(const KernelSpec& k, const Domain& d) {
    LorentzWeight w;
    const double rho = k.rho();
    const double omega = k.ball_measure();
    const double R = std::pow(d.measure() / omega, 1.0 / k.dim);
    const double eps = 1e-12 * rho;
    auto psi = [=](double r) {
        double arg = rho * r / R;
        arg = std::min(std::max(arg, eps), rho);
        return mass_M(k, arg);
    };
    w.psi_radial = psi;
    w.R = R;
    const int N = k.dim;
    w.A = [=](double s) {
        if (s <= 0) return 0.0;
        auto f = [&](double z) { return psi(std::pow(z / omega, 1.0 / N)); };
        return integrate_graded_left(f, 0.0, s, 1e-9).value;
    };
    return w;
}

// ||u||_{A,p}^p = p int_0^inf A(mu(t)) t^{p-1} dt, evaluated exactly on the
// piecewise constant distribution function.
inline double lorentz_norm(const GridFunction& u, const LorentzWeight& w, double p) {
    if (!(p >= 1)) throw std::domain_error("lorentz_norm requires p >= 1");
    DistributionProfile prof = distribution_profile(u);
    double acc = 0.0;
    for (std::size_t k = 0; k < prof.values.size(); ++k) {
        double hi = prof.values[k];
        double lo = k + 1 < prof.values.size() ? prof.values[k + 1] : 0.0;
        acc += w(prof.measure_at[k]) * (std::pow(hi, p) - std::pow(lo, p));
    }
    return std::pow(acc, 1.0 / p);
}

// Sharpness witness for the kernel weight: the radial profile
// v(s) = -psi'(s) / (s^{N-1} psi^nu(s)) sampled as u = v^{1/p} on a small
// ball. Its plain L^p norm stays bounded under refinement while the
// weighted norm grows.
inline GridFunction sharpness_witness(const KernelSpec& k, const Domain& d,
                                      const LorentzWeight& w, double p, double nu = 1.5,
                                      double ball_fraction = 0.5) {
    const int N = k.dim;
    const double rho = k.rho();
    const double R = w.R;
    double r0 = ball_fraction * R;
    GridFunction u(d);
    for (std::size_t i = 0; i < d.n_interior(); ++i) {
        auto x = d.interior_center(i);
        double r = N == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]);
        if (r >= r0 || r <= 0) continue;
        double arg = std::min(std::max(rho * r / R, 1e-12 * rho), rho * (1 - 1e-12));
        double psi = mass_M(k, arg);
        double dpsi = -k.ell_eff(arg) / arg * (rho / R);  // chain rule through M'
        double v = -dpsi / (std::pow(r, double(N - 1)) * std::pow(psi, nu));
        u.interior[i] = v > 0 ? std::pow(v, 1.0 / p) : 0.0;
    }
    return u;
}

}  // namespace nonlocal
