#pragma once

// Radial Levy kernels K(z) = |z|^{-N} ell(|z|) near the origin with a
// configurable tail law, together with the scalar functionals derived
// from them: the mass function M, the Holder mass A, the continuity
// modulus, the Fourier multiplier m, its ball integral g, and the
// dilation scaling exponent sigma.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadrature.hpp"

namespace nonlocal {

enum class EllVariant { constant, log_pow, inv_log_log };

// Slowly varying profile ell on (0, rho). The inv_log_log variant uses
// log(2e rho/s) rather than log(2 rho/s) so the profile stays positive
// up to s = rho.
struct EllSpec {
    EllVariant variant = EllVariant::constant;
    double rho = 1.0;
    double scale = 1.0;  // constant value c
    double beta = 0.0;   // log_pow exponent, beta >= -1

    static EllSpec constant(double rho, double c = 1.0) {
        check_rho(rho);
        if (!(c > 0)) throw std::invalid_argument("ell constant must be positive");
        return {EllVariant::constant, rho, c, 0.0};
    }
    static EllSpec log_pow(double rho, double beta) {
        check_rho(rho);
        if (!(beta >= -1.0)) throw std::invalid_argument("log_pow requires beta >= -1");
        return {EllVariant::log_pow, rho, 1.0, beta};
    }
    static EllSpec inv_log_log(double rho) {
        check_rho(rho);
        return {EllVariant::inv_log_log, rho, 1.0, 0.0};
    }

    double operator()(double s) const {
        switch (variant) {
            case EllVariant::constant:
                return scale;
            case EllVariant::log_pow:
                return std::pow(std::log(2.0 * rho / s), beta);
            case EllVariant::inv_log_log: {
                double t = std::log(2.0 * M_E * rho / s);
                return 1.0 / (t * std::log(t));
            }
        }
        return 0.0;
    }

  private:
    static void check_rho(double rho) {
        if (!(rho > 0)) throw std::invalid_argument("rho must be positive");
    }
};

enum class TailVariant { zero, power_decay, piecewise_power };

struct TailSpec {
    TailVariant variant = TailVariant::zero;
    double alpha1 = 0.0;  // inner power exponent (piecewise_power only)
    double alpha2 = 0.0;  // decay exponent beyond rho

    static TailSpec zero() { return {TailVariant::zero, 0.0, 0.0}; }
    static TailSpec power_decay(double alpha2) {
        if (!(alpha2 > 0)) throw std::invalid_argument("tail exponent must be positive");
        return {TailVariant::power_decay, 0.0, alpha2};
    }
    static TailSpec piecewise_power(double alpha1, double alpha2) {
        if (!(alpha1 > 0 && alpha1 < 2))
            throw std::invalid_argument("inner power exponent must lie in (0,2)");
        if (!(alpha2 > 0)) throw std::invalid_argument("tail exponent must be positive");
        return {TailVariant::piecewise_power, alpha1, alpha2};
    }
};

// A translation-invariant radial kernel J(x,y) = K(x-y) in dimension 1 or 2.
// With the piecewise_power tail the whole profile is the pure power pair
// r^{-N-alpha1} / matched r^{-N-alpha2}; otherwise the interior profile is
// |z|^{-N} ell(|z|).
struct KernelSpec {
    int dim = 1;
    EllSpec ell;
    TailSpec tail;

    KernelSpec() = default;
    KernelSpec(int dim_, EllSpec ell_, TailSpec tail_) : dim(dim_), ell(ell_), tail(tail_) {
        if (dim != 1 && dim != 2) throw std::invalid_argument("dimension must be 1 or 2");
    }

    double rho() const { return ell.rho; }
    bool pure_power() const { return tail.variant == TailVariant::piecewise_power; }

    // s^N K(s) on (0, rho): the effective slowly-varying profile, or the
    // raw power s^{-alpha1} in the pure-power case.
    double ell_eff(double s) const {
        return pure_power() ? std::pow(s, -tail.alpha1) : ell(s);
    }

    double ell_at_rho() const { return ell_eff(rho()); }

    // Coefficient c in K(r) = c r^{-N-alpha2} for r > rho.
    double tail_coefficient() const {
        switch (tail.variant) {
            case TailVariant::zero:
                return 0.0;
            case TailVariant::power_decay:
                return ell(rho()) * std::pow(rho(), tail.alpha2);
            case TailVariant::piecewise_power:
                return std::pow(rho(), tail.alpha2 - tail.alpha1);
        }
        return 0.0;
    }

    // Radial profile K(r), r > 0.
    double profile(double r) const {
        if (r <= 0) return std::numeric_limits<double>::infinity();
        if (r < rho()) return ell_eff(r) * std::pow(r, -double(dim));
        if (tail.variant == TailVariant::zero) return 0.0;
        return tail_coefficient() * std::pow(r, -double(dim) - tail.alpha2);
    }

    double operator()(const std::array<double, 2>& z) const {
        double r = dim == 1 ? std::abs(z[0]) : std::hypot(z[0], z[1]);
        return profile(r);
    }

    // Surface measure of the unit sphere: 2 in 1D, 2*pi in 2D.
    double sphere_measure() const { return dim == 1 ? 2.0 : 2.0 * M_PI; }
    // Measure of the unit ball.
    double ball_measure() const { return dim == 1 ? 2.0 : M_PI; }
};

// ---------------------------------------------------------------------------
// Mass function M(r) = int_r^rho ell_eff(s)/s ds, closed form per variant.

inline double mass_M(const KernelSpec& k, double r) {
    const double rho = k.rho();
    if (!(r > 0) || r > rho * (1.0 + 1e-12))
        throw std::domain_error("mass_M requires 0 < r <= rho");
    r = std::min(r, rho);
    if (k.pure_power()) {
        double a = k.tail.alpha1;
        return (std::pow(r, -a) - std::pow(rho, -a)) / a;
    }
    switch (k.ell.variant) {
        case EllVariant::constant:
            return k.ell.scale * std::log(rho / r);
        case EllVariant::log_pow: {
            double b = k.ell.beta;
            double Lr = std::log(2.0 * rho / r), L0 = std::log(2.0);
            if (b == -1.0) return std::log(Lr / L0);
            return (std::pow(Lr, b + 1.0) - std::pow(L0, b + 1.0)) / (b + 1.0);
        }
        case EllVariant::inv_log_log: {
            auto lll = [](double t) { return std::log(std::log(t)); };
            return lll(std::log(2.0 * M_E * rho / r)) - lll(std::log(2.0 * M_E));
        }
    }
    return 0.0;
}

// Quadrature route for M, kept alongside the closed forms as a cross-check
// and as the fallback for profiles without an antiderivative.
inline double mass_M_quadrature(const KernelSpec& k, double r, double rel_tol = 1e-10) {
    const double rho = k.rho();
    if (!(r > 0) || r > rho * (1.0 + 1e-12))
        throw std::domain_error("mass_M requires 0 < r <= rho");
    r = std::min(r, rho);
    auto f = [&](double s) { return k.ell_eff(s) / s; };
    std::vector<double> brk;
    for (double x = r * 2; x < rho; x *= 2) brk.push_back(x);
    return integrate_adaptive(f, r, rho, rel_tol, 0.0, brk).value;
}

// Holder mass A(R) = int_0^R s^{nu-1} ell_eff(s) ds.
inline double holder_mass_A(const KernelSpec& k, double nu, double R, double rel_tol = 1e-10) {
    const double rho = k.rho();
    if (!(nu > 0 && nu < 1)) throw std::domain_error("holder_mass_A requires nu in (0,1)");
    if (!(R > 0) || R > rho * (1.0 + 1e-12))
        throw std::domain_error("holder_mass_A requires 0 < R <= rho");
    R = std::min(R, rho);
    if (k.pure_power()) {
        double e = nu - k.tail.alpha1;
        if (e <= 0) throw std::domain_error("holder mass diverges: nu <= alpha1");
        return std::pow(R, e) / e;
    }
    if (k.ell.variant == EllVariant::constant)
        return k.ell.scale * std::pow(R, nu) / nu;
    auto f = [&](double s) { return std::pow(s, nu - 1.0) * k.ell_eff(s); };
    return integrate_graded_left(f, 0.0, R, rel_tol).value;
}

// Continuity modulus: invert g(R) = (A(R)/M(R))^{1/nu} by bisection and
// return M at the preimage. Values of s outside the sampled range of g are
// clamped (flag reports it).
struct ModulusResult {
    double value = 0.0;
    bool clamped = false;
};

inline ModulusResult modulus_omega(const KernelSpec& k, double nu, double s) {
    const double rho = k.rho();
    auto g = [&](double R) {
        return std::pow(holder_mass_A(k, nu, R) / mass_M(k, R), 1.0 / nu);
    };
    // monotonicity guard on a coarse grid
    double prev = -1.0;
    for (int i = 1; i <= 16; ++i) {
        double R = rho * i / 17.0;
        double v = g(R);
        if (v <= prev) throw std::domain_error("modulus_omega: g is not strictly increasing");
        prev = v;
    }
    double lo = rho * 1e-13, hi = rho * (1.0 - 1e-13);
    ModulusResult out;
    if (s <= g(lo)) {
        out.value = mass_M(k, lo);
        out.clamped = true;
        return out;
    }
    if (s >= g(hi)) {
        out.value = mass_M(k, hi);
        out.clamped = true;
        return out;
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (g(mid) < s)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-15 * rho) break;
    }
    out.value = mass_M(k, 0.5 * (lo + hi));
    return out;
}

// ---------------------------------------------------------------------------
// Fourier multiplier m(xi) = int (1 - cos(z.xi)) K(z) dz, radial.

namespace detail {

// Numeric oscillation-aware integral of phi(r t) K(r) r^{N-1} over [a,b],
// with panels split at multiples of pi/t.
template <typename Phi>
inline double oscillatory_radial(const Phi& phi, const KernelSpec& k, double t,
                                 double a, double b, double rel_tol) {
    std::vector<double> brk;
    if (t > 0) {
        double step = M_PI / t;
        double start = std::ceil(a / step) * step;
        for (double x = start; x < b && brk.size() < 4096; x += step) brk.push_back(x);
    }
    for (double x = std::max(a, 1e-300) * 2; x < b; x *= 2) brk.push_back(x);
    auto f = [&](double r) {
        return phi(r * t) * k.profile(r) * std::pow(r, double(k.dim - 1));
    };
    auto res = integrate_adaptive(f, a, b, rel_tol, 0.0, brk, 8000);
    if (!res.converged)
        throw QuadratureError("multiplier quadrature did not converge", res.error);
    return res.value;
}

}  // namespace detail

// Tail kernel ring mass: sphere_measure * int_max(D,rho)^inf K(r) r^{N-1} dr
// plus, when D < rho, the interior contribution M(D).
inline double ring_mass(const KernelSpec& k, double D) {
    if (!(D > 0)) throw std::domain_error("ring_mass requires D > 0");
    const double rho = k.rho();
    double inner = D < rho ? mass_M(k, D) : 0.0;
    double outer = 0.0;
    if (k.tail.variant != TailVariant::zero) {
        double X = std::max(D, rho);
        outer = k.tail_coefficient() * std::pow(X, -k.tail.alpha2) / k.tail.alpha2;
    }
    return k.sphere_measure() * (inner + outer);
}

inline double multiplier_m(const KernelSpec& k, double xi_norm, double rel_tol = 1e-8) {
    const double t = std::abs(xi_norm);
    if (t == 0.0) return 0.0;
    const double rho = k.rho();
    const int N = k.dim;
    const double surf = k.sphere_measure();

    auto phi = [N](double u) {
        if (std::abs(u) < 1e-4) {
            // series avoids cancellation near zero
            double u2 = u * u;
            return N == 1 ? u2 / 2.0 * (1.0 - u2 / 12.0) : u2 / 4.0 * (1.0 - u2 / 16.0);
        }
        return N == 1 ? 1.0 - std::cos(u) : 1.0 - std::cyl_bessel_j(0.0, u);
    };

    // interior part, graded toward the singularity then oscillation-split
    double inner_cut = std::min(rho, 0.5 / t);
    auto f_sing = [&](double r) {
        return phi(r * t) * k.profile(r) * std::pow(r, double(N - 1));
    };
    double value = integrate_graded_left(f_sing, 0.0, inner_cut, rel_tol).value;
    if (inner_cut < rho)
        value += detail::oscillatory_radial(phi, k, t, inner_cut, rho, rel_tol);
    value *= surf;

    if (k.tail.variant == TailVariant::zero) return value;

    // finite stretch of the tail, then closed ring mass minus an asymptotic
    // oscillatory correction
    const double x0 = 40.0;
    double R0 = std::max(rho, x0 / t);
    if (R0 > rho)
        value += surf * detail::oscillatory_radial(phi, k, t, rho, R0, rel_tol);
    double ct = k.tail_coefficient();
    double alpha = k.tail.alpha2;
    value += surf * ct * std::pow(R0, -alpha) / alpha;  // plateau part of 1-phi
    double x = R0 * t;
    double osc;
    if (N == 1) {
        osc = ct * std::pow(t, alpha) * oscillatory_tail_cos(x, 1.0 + alpha, 0.0);
    } else {
        // two-term large-argument Bessel asymptotics
        osc = ct * std::pow(t, alpha) * std::sqrt(2.0 / M_PI) *
              (oscillatory_tail_cos(x, alpha + 1.5, -M_PI / 4.0) +
               0.125 * oscillatory_tail_cos(x, alpha + 2.5, -3.0 * M_PI / 4.0));
    }
    value -= surf * osc;
    return value;
}

inline double multiplier_m(const KernelSpec& k, const std::array<double, 2>& xi,
                           double rel_tol = 1e-8) {
    double t = k.dim == 1 ? std::abs(xi[0]) : std::hypot(xi[0], xi[1]);
    return multiplier_m(k, t, rel_tol);
}

// g(t) = int_{|xi|<=t} m(xi) dxi via radial reduction.
inline double spectral_mass_g(const KernelSpec& k, double t, double rel_tol = 1e-6) {
    if (t < 0) throw std::domain_error("spectral_mass_g requires t >= 0");
    if (t == 0) return 0.0;
    const int N = k.dim;
    double surf = k.sphere_measure();
    auto f = [&](double s) {
        return multiplier_m(k, s, 1e-8) * std::pow(s, double(N - 1));
    };
    return surf * integrate_adaptive(f, 0.0, t, rel_tol, 0.0, {t / 4, t / 2}).value;
}

// Samples the differential condition N g(t) <= t g'(t) on a log grid around
// t_star; g' by central differences.
struct SpectralMassCondition {
    std::vector<double> t;
    std::vector<double> g;
    std::vector<double> slack;  // t g'(t) - N g(t)
    bool ok = true;
};

inline SpectralMassCondition spectral_mass_condition(const KernelSpec& k, double t_lo,
                                                     double t_hi, int samples = 9) {
    SpectralMassCondition out;
    const double delta = 1e-3;
    for (int i = 0; i < samples; ++i) {
        double t = t_lo * std::pow(t_hi / t_lo, double(i) / (samples - 1));
        double gm = spectral_mass_g(k, t * (1 - delta));
        double gp = spectral_mass_g(k, t * (1 + delta));
        double g0 = 0.5 * (gm + gp);
        double dg = (gp - gm) / (2 * t * delta);
        double slack = t * dg - k.dim * g0;
        out.t.push_back(t);
        out.g.push_back(g0);
        out.slack.push_back(slack);
        if (slack < -1e-3 * std::abs(k.dim * g0)) out.ok = false;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dilation scaling: gamma(lambda) = lambda^{-N} sup_z K(z/lambda)/K(z) and
// its right derivative sigma at lambda = 1.

struct ScalingReport {
    std::vector<std::pair<double, double>> gamma;  // (lambda, gamma(lambda))
    double sigma = 0.0;
};

inline double scaling_gamma(const KernelSpec& k, double lambda) {
    const double rho = k.rho();
    double sup = 0.0;
    const int per_decade = 64;
    const double lo = 1e-6 * rho, hi = 1e3 * rho;
    const int n = int(per_decade * std::log10(hi / lo)) + 1;
    std::vector<double> samples;
    samples.reserve(n + 4);
    for (int i = 0; i <= n; ++i) samples.push_back(lo * std::pow(hi / lo, double(i) / n));
    // the support edge is where a compact kernel escapes itself
    samples.push_back(rho * (1.0 + 1e-9));
    samples.push_back(rho * std::sqrt(lambda));
    samples.push_back(rho * lambda * (1.0 - 1e-9));
    for (double z : samples) {
        double denom = k.profile(z);
        double numer = k.profile(z / lambda);
        if (denom <= 0.0) {
            if (numer > 0.0)
                throw std::domain_error("gamma infinite: kernel support grows under dilation");
            continue;
        }
        sup = std::max(sup, numer / denom);
    }
    return std::pow(lambda, -double(k.dim)) * sup;
}

inline ScalingReport scaling_sigma(const KernelSpec& k) {
    ScalingReport out;
    const double h = 1e-3;
    for (double step : {h, 2 * h, 4 * h})
        out.gamma.emplace_back(1.0 + step, scaling_gamma(k, 1.0 + step));
    double d1 = (out.gamma[0].second - 1.0) / h;
    double d2 = (out.gamma[1].second - 1.0) / (2 * h);
    out.sigma = 2.0 * d1 - d2;  // one Richardson level, one-sided
    return out;
}

// ---------------------------------------------------------------------------
// Admissibility checks.

// Levy moment int min(1,|z|^2) K(z) dz by quadrature.
inline double levy_moment(const KernelSpec& k) {
    auto f = [&](double r) {
        return std::min(1.0, r * r) * k.profile(r) * std::pow(r, double(k.dim - 1));
    };
    double cut = std::min(1.0, k.rho());
    double v = integrate_graded_left(f, 0.0, cut, 1e-9).value;
    // bounded remainder: out to a finite radius, then closed tail
    double far = std::max({1.0, k.rho(), 8.0});
    v += integrate_adaptive(f, cut, far, 1e-9, 0.0, {k.rho()}).value;
    if (k.tail.variant != TailVariant::zero)
        v += k.tail_coefficient() * std::pow(far, -k.tail.alpha2) / k.tail.alpha2;
    return k.sphere_measure() * v;
}

// Runs the sampling checks: positivity, slow variation (skipped for the
// pure-power family), Levy integrability, divergence of M at the origin.
inline void validate_kernel(const KernelSpec& k, double slow_variation_tol = 0.05) {
    const double rho = k.rho();
    for (int i = 1; i <= 64; ++i) {
        double s = rho * i / 65.0;
        if (!(k.ell_eff(s) > 0.0))
            throw std::domain_error("kernel profile must be positive on (0,rho)");
    }
    if (!k.pure_power()) {
        for (double lambda : {0.5, 2.0}) {
            double ratio = k.ell(lambda * rho * std::pow(2.0, -40)) / k.ell(rho * std::pow(2.0, -40));
            if (std::abs(ratio - 1.0) > slow_variation_tol)
                throw std::domain_error("profile is not slowly varying at the origin");
        }
    }
    double moment = levy_moment(k);
    if (!std::isfinite(moment)) throw std::domain_error("Levy moment diverges");
    double prev = mass_M(k, rho * 0.5);
    for (int j = 2; j <= 40; ++j) {
        double cur = mass_M(k, rho * std::pow(2.0, -j));
        if (!(cur > prev)) throw std::domain_error("mass function fails to diverge at 0");
        prev = cur;
    }
}

// Empirical lower-bound constant inf m(xi)/M(1/|xi|) over a frequency range.
inline double multiplier_mass_ratio_inf(const KernelSpec& k, double xi_lo = 2.0,
                                        double xi_hi = 100.0, int samples = 25) {
    double inf = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        double xi = xi_lo * std::pow(xi_hi / xi_lo, double(i) / (samples - 1));
        double arg = std::min(1.0 / xi, k.rho());
        inf = std::min(inf, multiplier_m(k, xi) / mass_M(k, arg));
    }
    return inf;
}

inline bool ell_nonincreasing(const KernelSpec& k, int samples = 256) {
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= samples; ++i) {
        double s = k.rho() * i / double(samples + 1);
        double v = k.ell_eff(s);
        if (v > prev * (1.0 + 1e-12)) return false;
        prev = v;
    }
    return true;
}

}  // namespace nonlocal
