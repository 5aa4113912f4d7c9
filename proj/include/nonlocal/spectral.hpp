#pragma once

// Dirichlet eigenpairs of the discrete form, spectral calculus, and the
// Berezin-type lower bound for the first eigenvalue.

#include <Eigen/Dense>

#include "forms.hpp"

namespace nonlocal {

struct SpectralDecomposition {
    const FormMatrix* form = nullptr;
    std::vector<double> eigenvalues;          // ascending
    std::vector<GridFunction> eigenfunctions; // zero-exterior, h^N sum phi^2 = 1
    bool full() const {
        return form && eigenvalues.size() == form->dom->n_interior();
    }
};

namespace spectral_detail {

inline Eigen::MatrixXd stiffness_matrix(const FormMatrix& F) {
    const std::size_t n = F.dom->n_interior();
    const double hN = F.cell_measure();
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    for (const auto& p : F.pairs) {
        if (p.j < n) {
            S(p.i, p.i) += p.w;
            S(p.j, p.j) += p.w;
            S(p.i, p.j) -= p.w;
            S(p.j, p.i) -= p.w;
        }
    }
    for (std::size_t i = 0; i < n; ++i) S(i, i) += F.lambda[i] * hN;
    return S;
}

// Deterministic sign: the first component of near-maximal magnitude is made
// positive. For the signless ground state this also gives sum(phi_1) >= 0.
inline void orient(GridFunction& phi) {
    double mx = 0;
    for (double v : phi.interior) mx = std::max(mx, std::abs(v));
    if (mx == 0) return;
    for (double v : phi.interior) {
        if (std::abs(v) >= mx * (1.0 - 1e-9)) {
            if (v < 0)
                for (auto& w : phi.interior) w = -w;
            return;
        }
    }
}

}  // namespace spectral_detail

struct EigenOptions {
    std::size_t dense_threshold = 2000;
    int lanczos_steps = 0;  // 0: automatic
    double residual_tol = 1e-9;
};

// Generalized symmetric eigenproblem S phi = lambda h^N phi. Dense
// decomposition up to the threshold, shift-invert Lanczos with full
// reorthogonalization above it.
inline SpectralDecomposition dirichlet_eigen(const FormMatrix& F, std::size_t k,
                                             const EigenOptions& opt = {}) {
    const std::size_t n = F.dom->n_interior();
    if (k < 1 || k > n) throw std::invalid_argument("eigenpair count must lie in [1, n]");
    const double hN = F.cell_measure();
    Eigen::MatrixXd S = spectral_detail::stiffness_matrix(F);

    SpectralDecomposition dec;
    dec.form = &F;

    auto store = [&](double lam, const Eigen::VectorXd& v) {
        GridFunction phi(*F.dom);
        double scale = 1.0 / std::sqrt(hN);
        for (std::size_t i = 0; i < n; ++i) phi.interior[i] = v(i) * scale;
        spectral_detail::orient(phi);
        dec.eigenvalues.push_back(lam);
        dec.eigenfunctions.push_back(std::move(phi));
    };

    if (n <= opt.dense_threshold) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S / hN);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("dense eigendecomposition failed");
        for (std::size_t j = 0; j < k; ++j) store(es.eigenvalues()(j), es.eigenvectors().col(j));
        return dec;
    }

    // shift-invert Lanczos about zero: largest eigenvalues of S^{-1}
    Eigen::LDLT<Eigen::MatrixXd> fac(S);
    if (fac.info() != Eigen::Success) throw std::runtime_error("stiffness factorization failed");
    int m = opt.lanczos_steps > 0 ? opt.lanczos_steps
                                  : int(std::min<std::size_t>(n, std::max<std::size_t>(2 * k + 20, 40)));
    Eigen::MatrixXd V(n, m);
    Eigen::VectorXd alpha(m), beta(m);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized();
    Eigen::VectorXd v_prev = Eigen::VectorXd::Zero(n);
    double b_prev = 0.0;
    int steps = 0;
    for (int j = 0; j < m; ++j) {
        V.col(j) = v;
        Eigen::VectorXd w = fac.solve(v);
        alpha(j) = v.dot(w);
        w -= alpha(j) * v + b_prev * v_prev;
        w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);  // full reorth
        double b = w.norm();
        steps = j + 1;
        if (b < 1e-14) break;
        beta(j) = b;
        v_prev = v;
        v = w / b;
        b_prev = b;
    }
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(steps, steps);
    for (int j = 0; j < steps; ++j) {
        T(j, j) = alpha(j);
        if (j + 1 < steps) T(j, j + 1) = T(j + 1, j) = beta(j);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ts(T);
    // largest Ritz values of S^{-1} give the smallest eigenvalues of S
    std::vector<std::pair<double, int>> order;
    for (int j = 0; j < steps; ++j) order.emplace_back(ts.eigenvalues()(j), j);
    std::sort(order.begin(), order.end(),
              [](auto a, auto b) { return a.first > b.first; });
    if (order.size() < k) throw std::runtime_error("Lanczos space exhausted before k pairs");
    for (std::size_t j = 0; j < k; ++j) {
        double theta = order[j].first;
        if (theta <= 0) throw std::runtime_error("shift-invert produced nonpositive Ritz value");
        Eigen::VectorXd y = V.leftCols(steps) * ts.eigenvectors().col(order[j].second);
        y.normalize();
        double lam = 1.0 / theta / hN;
        double res = (S * y / hN - lam * y).norm();
        if (res > opt.residual_tol * std::max(1.0, lam))
            throw std::runtime_error("Lanczos iteration did not converge, residual " +
                                     std::to_string(res));
        store(lam, y);
    }
    // ascending order
    for (std::size_t a = 0; a + 1 < dec.eigenvalues.size(); ++a)
        for (std::size_t b = a + 1; b < dec.eigenvalues.size(); ++b)
            if (dec.eigenvalues[b] < dec.eigenvalues[a]) {
                std::swap(dec.eigenvalues[a], dec.eigenvalues[b]);
                std::swap(dec.eigenfunctions[a], dec.eigenfunctions[b]);
            }
    return dec;
}

enum class SpectralPower { one, half };

// Sum over modes of lambda_j^p u_j phi_j; requires the full decomposition.
inline GridFunction spectral_apply(const SpectralDecomposition& dec, const GridFunction& u,
                                   SpectralPower power) {
    if (!dec.full()) throw std::invalid_argument("spectral_apply needs the full decomposition");
    if (!u.zero_exterior) throw std::invalid_argument("spectral_apply needs zero-exterior data");
    GridFunction out(*dec.form->dom);
    for (std::size_t j = 0; j < dec.eigenvalues.size(); ++j) {
        double cj = u.dot(dec.eigenfunctions[j]);
        double f = power == SpectralPower::one ? dec.eigenvalues[j]
                                               : std::sqrt(dec.eigenvalues[j]);
        for (std::size_t i = 0; i < out.interior.size(); ++i)
            out.interior[i] += f * cj * dec.eigenfunctions[j].interior[i];
    }
    return out;
}

inline double hstar_norm(const SpectralDecomposition& dec, const GridFunction& v) {
    if (!dec.full()) throw std::invalid_argument("hstar_norm needs the full decomposition");
    double s = 0;
    for (std::size_t j = 0; j < dec.eigenvalues.size(); ++j) {
        double cj = v.dot(dec.eigenfunctions[j]);
        s += cj * cj / dec.eigenvalues[j];
    }
    return std::sqrt(s);
}

// Energy through the spectral side: sum lambda_j u_j v_j.
inline double spectral_energy(const SpectralDecomposition& dec, const GridFunction& u,
                              const GridFunction& v) {
    if (!dec.full()) throw std::invalid_argument("spectral_energy needs the full decomposition");
    double s = 0;
    for (std::size_t j = 0; j < dec.eigenvalues.size(); ++j)
        s += dec.eigenvalues[j] * u.dot(dec.eigenfunctions[j]) * v.dot(dec.eigenfunctions[j]);
    return s;
}

// Smallest generalized eigenvalue of the form against a diagonal weight
// mass: inf_u E(u,u) / sum_i u_i^2 w_i h^N. Used for Hardy-type constants.
inline double weighted_rayleigh_infimum(const FormMatrix& F,
                                        const std::vector<double>& weight_density) {
    const std::size_t n = F.dom->n_interior();
    if (weight_density.size() != n) throw std::invalid_argument("weight size mismatch");
    const double hN = F.cell_measure();
    Eigen::MatrixXd S = spectral_detail::stiffness_matrix(F);
    Eigen::VectorXd d(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(weight_density[i] > 0)) throw std::invalid_argument("weight must be positive");
        d(i) = 1.0 / std::sqrt(weight_density[i] * hN);
    }
    Eigen::MatrixXd A = d.asDiagonal() * S * d.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    if (es.info() != Eigen::Success) throw std::runtime_error("weighted eigenproblem failed");
    return es.eigenvalues()(0);
}

struct BerezinReport {
    double bound = 0.0;
    double t_star = 0.0;
    bool condition_ok = false;
    SpectralMassCondition condition;
};

// lambda_1 >= |Omega| (2 pi)^{-N} g(2 pi / (omega_N |Omega|)^{1/N}), valid
// when the profile is nonincreasing and g satisfies N g(t) <= t g'(t).
inline BerezinReport berezin_bound(const KernelSpec& k, const Domain& d) {
    if (!ell_nonincreasing(k))
        throw std::domain_error("hypothesis violated: kernel profile must be nonincreasing");
    BerezinReport rep;
    const int N = k.dim;
    double vol = d.measure();
    rep.t_star = 2.0 * M_PI / std::pow(k.ball_measure() * vol, 1.0 / N);
    rep.bound = vol / std::pow(2.0 * M_PI, N) * spectral_mass_g(k, rep.t_star);
    rep.condition = spectral_mass_condition(k, rep.t_star / 8.0, rep.t_star * 8.0);
    rep.condition_ok = rep.condition.ok;
    return rep;
}

}  // namespace nonlocal
