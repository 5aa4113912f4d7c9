#pragma once

// Independent oracles used by the tests. These deliberately avoid the
// library's computational paths: series special functions, brute-force
// double sums, midpoint tensor quadrature with Richardson extrapolation,
// and dense factorizations.

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <vector>

#include <nonlocal/forms.hpp>

namespace oracle {

// Cin(x) = int_0^x (1 - cos u)/u du = sum_{k>=1} (-1)^{k+1} x^{2k} / (2k (2k)!)
inline double cin(double x) {
    double sum = 0.0, term;
    double x2 = x * x;
    double fact = 1.0;  // (2k)!
    for (int k = 1; k <= 60; ++k) {
        fact *= (2.0 * k - 1.0) * (2.0 * k);
        term = std::pow(x2, k) / (2.0 * k * fact);
        sum += (k % 2 == 1) ? term : -term;
        if (term < 1e-18 * std::abs(sum) && k > 8) break;
    }
    return sum;
}

// gamma_E + ln x - Ci(x)
inline double euler_gamma() { return 0.57721566490153286; }

// Brute-force energy: ordered double sum over all covered pairs meeting the
// interior, plus the beyond-shell diagonal. Weight lookup from the pair list.
inline double brute_force_energy(const nonlocal::FormMatrix& F, const nonlocal::GridFunction& u,
                                 const nonlocal::GridFunction& v) {
    const std::size_t n_int = F.dom->n_interior();
    const std::size_t n_cov = F.dom->n_covered();
    std::map<std::pair<uint32_t, uint32_t>, double> w;
    for (auto& p : F.pairs) w[{p.i, p.j}] = p.w;
    auto get = [&](std::size_t a, std::size_t b) {
        if (a > b) std::swap(a, b);
        auto it = w.find({uint32_t(a), uint32_t(b)});
        return it == w.end() ? 0.0 : it->second;
    };
    double s = 0.0;
    for (std::size_t a = 0; a < n_cov; ++a)
        for (std::size_t b = 0; b < n_cov; ++b) {
            if (a == b) continue;
            if (a >= n_int && b >= n_int) continue;
            s += 0.5 * (u.covered(a) - u.covered(b)) * (v.covered(a) - v.covered(b)) * get(a, b);
        }
    const double hN = F.dom->cell_measure();
    for (std::size_t i = 0; i < n_int; ++i) s += u.interior[i] * v.interior[i] * F.tau[i] * hN;
    return s;
}

// Midpoint tensor quadrature for a 2D cell-pair weight over cells anchored
// at the origin and at (dx, dy); the midpoint error decays like O(1/n) for
// touching pairs, so callers Richardson-extrapolate.
inline double pair_weight_midpoint_2d(const nonlocal::KernelSpec& k, double h, double dx,
                                      double dy, int n) {
    double s = 0.0;
    double hh = h / n;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    double x0 = (a + 0.5) * hh, x1 = (b + 0.5) * hh;
                    double y0 = dx + (c + 0.5) * hh, y1 = dy + (d + 0.5) * hh;
                    s += k.profile(std::hypot(x0 - y0, x1 - y1));
                }
    return s * hh * hh * hh * hh;
}

// 1D version: cells [0,h] and [d, d+h]
inline double pair_weight_midpoint_1d(const nonlocal::KernelSpec& k, double h, double d, int n) {
    double s = 0.0;
    double hh = h / n;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            double x = (a + 0.5) * hh;
            double y = d + (b + 0.5) * hh;
            s += k.profile(std::abs(x - y));
        }
    return s * hh * hh;
}

// Dense stiffness matrix for direct-solve oracles.
inline Eigen::MatrixXd dense_stiffness(const nonlocal::FormMatrix& F) {
    const std::size_t n = F.dom->n_interior();
    const double hN = F.dom->cell_measure();
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    for (const auto& p : F.pairs) {
        if (p.j < n) {
            S(p.i, p.i) += p.w;
            S(p.j, p.j) += p.w;
            S(p.i, p.j) -= p.w;
            S(p.j, p.i) -= p.w;
        } else {
            S(p.i, p.i) += p.w;
        }
    }
    for (std::size_t i = 0; i < n; ++i) S(i, i) += F.tau[i] * hN;
    return S;
}

}  // namespace oracle
