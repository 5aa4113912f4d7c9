#include <catch2/catch_amalgamated.hpp>

#include <nonlocal/forms.hpp>
#include <nonlocal/rng.hpp>

#include "oracles.hpp"

using namespace nonlocal;

namespace {
KernelSpec unit_kernel() { return KernelSpec(1, EllSpec::constant(1.0), TailSpec::zero()); }
}  // namespace

TEST_CASE("assembly preconditions") {
    KernelSpec k = unit_kernel();
    CHECK_THROWS_WITH(assemble(build_grid(ShapeSpec::interval(-1, 1), 0.25, 0.5), k),
                      Catch::Matchers::ContainsSubstring("r_ext"));
    KernelSpec steep(1, EllSpec{}, TailSpec::piecewise_power(1.2, 0.5));
    CHECK_THROWS_WITH(assemble(build_grid(ShapeSpec::interval(-1, 1), 0.25, 1.25), steep),
                      Catch::Matchers::ContainsSubstring("infinite energy"));
    KernelSpec k2(2, EllSpec::constant(0.5), TailSpec::zero());
    CHECK_THROWS_AS(assemble(build_grid(ShapeSpec::interval(-1, 1), 0.25, 1.0), k2),
                    std::invalid_argument);  // dimension mismatch
}

TEST_CASE("pointwise operator rejects non-smooth data") {
    KernelSpec k = unit_kernel();
    auto step = [](std::array<double, 2> y) { return y[0] >= 0.0 ? 1.0 : 0.0; };
    CHECK_THROWS_AS(apply_L(k, step, {0.0, 0.0}), QuadratureError);
}

TEST_CASE("adjacent pair weight closed form") {
    KernelSpec k = unit_kernel();
    for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
        double w = assemble_detail::pair_weight(k, 1, h, h, 0.0, 1e-10);
        CHECK(w == Catch::Approx(2.0 * h * std::log(2.0)).epsilon(1e-8));
    }
}

TEST_CASE("1d pair weights match midpoint oracle") {
    KernelSpec k(1, EllSpec::log_pow(1.0, 1.0), TailSpec::power_decay(0.5));
    double h = 0.25;
    for (double d : {2 * h, 5 * h}) {
        // oracle cells [0,h] and [d,d+h] sit at center distance d
        double w = assemble_detail::pair_weight(k, 1, h, d, 0.0, 1e-10);
        double o2 = oracle::pair_weight_midpoint_1d(k, h, d, 128);
        double o3 = oracle::pair_weight_midpoint_1d(k, h, d, 256);
        double extrap = o3 + (o3 - o2);
        CHECK(w == Catch::Approx(extrap).epsilon(5e-4));
    }
}

TEST_CASE("2d pair weights match midpoint oracle") {
    KernelSpec k(2, EllSpec::constant(0.5), TailSpec::power_decay(0.5));
    double h = 0.25;
    struct Probe {
        double dx, dy;
    } probes[] = {{h, 0.0}, {h, h}, {4 * h, 2 * h}};
    for (auto [dx, dy] : probes) {
        // oracle cells are anchored at the origin and at (dx, dy)
        double w = assemble_detail::pair_weight(k, 2, h, dx, dy, 1e-9);
        double c1 = oracle::pair_weight_midpoint_2d(k, h, dx, dy, 32);
        double c2 = oracle::pair_weight_midpoint_2d(k, h, dx, dy, 64);
        double extrap = c2 + (c2 - c1);  // O(1/n) Richardson
        CHECK(w == Catch::Approx(extrap).epsilon(2e-3));
    }
}

TEST_CASE("assembly is deterministic across thread counts") {
    Domain d = build_grid(ShapeSpec::interval(-1, 1), 0.125, 1.125);
    KernelSpec k(1, EllSpec::log_pow(1.0, 1.0), TailSpec::power_decay(0.5));
    AssembleOptions one, many;
    one.threads = 1;
    many.threads = 4;
    FormMatrix A = assemble(d, k, one);
    FormMatrix B = assemble(d, k, many);
    REQUIRE(A.pairs.size() == B.pairs.size());
    for (std::size_t q = 0; q < A.pairs.size(); ++q) CHECK(A.pairs[q].w == B.pairs[q].w);
    for (std::size_t i = 0; i < A.lambda.size(); ++i) CHECK(A.lambda[i] == B.lambda[i]);
}

TEST_CASE("assembled energy equals brute force on small grids") {
    Domain d = build_grid(ShapeSpec::interval(-1, 1), 0.125, 1.0 + 0.125);
    KernelSpec k = unit_kernel();
    FormMatrix F = assemble(d, k);
    for (int seed = 0; seed < 5; ++seed) {
        GridFunction u = random_grid_function(d, 7, "bf", seed);
        GridFunction v = random_grid_function(d, 7, "bf", 100 + seed);
        double lhs = energy(F, u, v);
        double rhs = oracle::brute_force_energy(F, u, v);
        CHECK(lhs == Catch::Approx(rhs).margin(1e-12 * std::max(1.0, std::abs(rhs))));
        CHECK(energy(F, u, v) == Catch::Approx(energy(F, v, u)).epsilon(1e-14));
    }
}

TEST_CASE("exterior mass profile on the unit interval") {
    KernelSpec k = unit_kernel();
    double h = 1.0 / 16;
    Domain d = build_grid(ShapeSpec::interval(-1, 1), h, 1.0 + h);
    FormMatrix F = assemble(d, k);
    // Lambda(x) = -log(1 - |x|)
    for (std::size_t i = 0; i < d.n_interior(); ++i) {
        double x = d.interior_center(i)[0];
        double want = -std::log(1.0 - std::abs(x));
        CHECK(F.lambda[i] == Catch::Approx(want).epsilon(3 * h));
        CHECK(F.lambda[i] > 0.0);
    }
    // cell nearest x = 0.5
    std::size_t best = 0;
    for (std::size_t i = 0; i < d.n_interior(); ++i)
        if (std::abs(d.interior_center(i)[0] - 0.5) <
            std::abs(d.interior_center(best)[0] - 0.5))
            best = i;
    CHECK(F.lambda[best] == Catch::Approx(std::log(2.0)).margin(2 * h));

    // boundary-mass comparison: Lambda >= c M(1 - |x|) with positive c
    double inf = 1e300;
    for (std::size_t i = 0; i < d.n_interior(); ++i) {
        double x = std::abs(d.interior_center(i)[0]);
        if (1.0 - x <= 0.9)
            inf = std::min(inf, F.lambda[i] / mass_M(k, 1.0 - x));
    }
    CHECK(inf > 0.5);
}

TEST_CASE("power-tail exterior mass matches reference quadrature") {
    // cell average of  T(1-x) + T(1+x),  T(D) = int_D^inf K, at 25 digits
    KernelSpec k(1, EllSpec::constant(1.0), TailSpec::power_decay(0.5));
    double h = 1.0 / 16;
    Domain d = build_grid(ShapeSpec::interval(-1, 1), h, 1.0 + h);
    FormMatrix F = assemble(d, k);
    auto lambda_at = [&](double x0) {
        for (std::size_t i = 0; i < d.n_interior(); ++i)
            if (std::abs(d.interior_center(i)[0] - x0) < 1e-12) return F.lambda[i];
        throw std::runtime_error("no such cell");
    };
    CHECK(lambda_at(0.46875) == Catch::Approx(4.283467255710681).epsilon(1e-8));
    CHECK(lambda_at(-0.28125) == Catch::Approx(4.097592764866023).epsilon(1e-8));
}

TEST_CASE("energy identities") {
    double h = 0.125;
    Domain d = build_grid(ShapeSpec::interval(-1, 1), h, 1.0 + h);
    KernelSpec k = unit_kernel();
    FormMatrix F = assemble(d, k);
    const double hN = d.cell_measure();

    // constants on interior and shell have zero full energy
    GridFunction c(d, 3.0, false);
    CHECK(energy(F, c, c) == Catch::Approx(0.0).margin(1e-13));

    // full = censored + sum Lambda u^2 h^N for zero-exterior u
    GridFunction chi = indicator(d, ShapeSpec::interval(-1, 1));
    double lam_term = 0;
    for (std::size_t i = 0; i < d.n_interior(); ++i)
        lam_term += F.lambda[i] * hN * chi.interior[i] * chi.interior[i];
    CHECK(energy(F, chi, chi) ==
          Catch::Approx(energy(F, chi, chi, FormKind::censored) + lam_term).epsilon(1e-12));

    for (int seed = 0; seed < 10; ++seed) {
        GridFunction u = random_grid_function(d, 11, "identity", seed);
        double lam_u = 0;
        for (std::size_t i = 0; i < d.n_interior(); ++i)
            lam_u += F.lambda[i] * hN * u.interior[i] * u.interior[i];
        CHECK(energy(F, u, u) ==
              Catch::Approx(energy(F, u, u, FormKind::censored) + lam_u).epsilon(1e-11));
        // positive definiteness with the exterior-mass constant
        double l2 = 0;
        for (double v : u.interior) l2 += v * v;
        CHECK(energy(F, u, u) >= F.min_lambda() * hN * l2 * (1.0 - 1e-12));
    }

    // global form requires zero-exterior input
    CHECK_THROWS_AS(energy(F, c, c, FormKind::global_form), std::invalid_argument);
}

TEST_CASE("operator rows are the adjoint of the form") {
    double h = 0.25;
    Domain d = build_grid(ShapeSpec::interval(-1, 1), h, 1.0 + h);
    KernelSpec k(1, EllSpec::constant(1.0), TailSpec::power_decay(0.5));
    FormMatrix F = assemble(d, k);
    const double hN = d.cell_measure();
    for (int seed = 0; seed < 5; ++seed) {
        GridFunction u(d, 0.0, false), v(d, 0.0, false);
        StreamRng r1(3, "rows", seed);
        for (std::size_t i = 0; i < d.n_covered(); ++i) u.set_covered(i, r1.normal());
        for (std::size_t i = 0; i < d.n_covered(); ++i) v.set_covered(i, r1.normal());
        auto Lu = apply_operator(F, u);
        auto Nu = apply_exterior_operator(F, u);
        double lhs = 0;
        for (std::size_t i = 0; i < d.n_interior(); ++i) lhs += Lu[i] * v.interior[i] * hN;
        for (std::size_t i = 0; i < d.n_shell(); ++i) lhs += Nu[i] * v.shell[i] * hN;
        CHECK(lhs == Catch::Approx(energy(F, u, v)).epsilon(1e-11));
    }

    // constants are harmonic for both rows when the tail vanishes
    Domain dz = build_grid(ShapeSpec::interval(-1, 1), h, 1.0 + h);
    FormMatrix Fz = assemble(dz, unit_kernel());
    GridFunction ones(dz, 1.0, false);
    for (double v : apply_operator(Fz, ones)) CHECK(v == Catch::Approx(0.0).margin(1e-13));
    for (double v : apply_exterior_operator(Fz, ones))
        CHECK(v == Catch::Approx(0.0).margin(1e-13));

    // zero interior, unit shell: exterior rows are positive sums
    GridFunction step(dz, 0.0, false);
    for (auto& s : step.shell) s = 1.0;
    auto Ns = apply_exterior_operator(Fz, step);
    bool some_positive = false;
    for (double v : Ns) {
        CHECK(v >= 0.0);
        some_positive |= v > 0;
    }
    CHECK(some_positive);

    // 3-cell brute force for the exterior operator
    Domain d3 = build_grid(ShapeSpec::interval(0, 0.75), 0.25, 0.5);
    KernelSpec k3(1, EllSpec::constant(0.5), TailSpec::zero());
    FormMatrix F3 = assemble(d3, k3);
    GridFunction w3(d3, 0.0, false);
    StreamRng r3(5, "three", 0);
    for (std::size_t i = 0; i < d3.n_covered(); ++i) w3.set_covered(i, r3.normal());
    auto N3 = apply_exterior_operator(F3, w3);
    std::map<std::pair<uint32_t, uint32_t>, double> wmap;
    for (auto& p : F3.pairs) wmap[{p.i, p.j}] = p.w;
    for (std::size_t s = 0; s < d3.n_shell(); ++s) {
        double acc = 0;
        uint32_t j = uint32_t(d3.n_interior() + s);
        for (uint32_t i = 0; i < d3.n_interior(); ++i) {
            auto it = wmap.find({i, j});
            if (it != wmap.end())
                acc += (w3.covered(j) - w3.covered(i)) * it->second;
        }
        CHECK(N3[s] == Catch::Approx(acc / d3.cell_measure()).margin(1e-13));
    }
}

TEST_CASE("pointwise operator on smooth functions") {
    KernelSpec k = unit_kernel();
    // constants annihilate
    double lc = apply_L(k, [](std::array<double, 2>) { return 4.2; }, {0.1, 0.0});
    CHECK(lc == Catch::Approx(0.0).margin(1e-10));
    // odd functions at the origin annihilate
    double lo = apply_L(k, [](std::array<double, 2> y) { return y[0]; }, {0.0, 0.0});
    CHECK(lo == Catch::Approx(0.0).margin(1e-10));
    // principal-value radius does not matter
    auto f = [](std::array<double, 2> y) { return std::cos(y[0]); };
    ApplyLOptions o1, o2;
    o1.r_pv = 0.05;
    o2.r_pv = 0.2;
    CHECK(apply_L(k, f, {0.3, 0.0}, o1) ==
          Catch::Approx(apply_L(k, f, {0.3, 0.0}, o2)).epsilon(1e-7));

    // indicator observed from outside: L 1_E(x) = -int_E K(x - y) dy
    double a = 0.25, x = 0.7;
    auto ind = [a](std::array<double, 2> y) { return std::abs(y[0]) < a ? 1.0 : 0.0; };
    ApplyLOptions oi;
    oi.r_pv = 0.1;
    oi.radial_breakpoints = {x - a, x + a};
    double got = apply_L(k, ind, {x, 0.0}, oi);
    double want = -integrate_adaptive([&](double y) { return k.profile(x - y); }, -a, a, 1e-12,
                                      0.0, {0.0})
                       .value;
    CHECK(got == Catch::Approx(want).epsilon(1e-6));
}

TEST_CASE("hardy witness") {
    KernelSpec k = unit_kernel();
    // the mass-function lower bound kicks in near the origin; the witness
    // is still slightly negative at |x| = 0.1 for this kernel (checked
    // against 30-digit reference quadrature), so the ratio is probed on
    // the asymptotic side
    CHECK(hardy_witness(k, {1e-1, 0.0}) ==
          Catch::Approx(-0.0431475773334).margin(1e-6));
    double prev = 0;
    for (double x : {1e-2, 1e-3, 1e-4}) {
        double Wv = hardy_witness(k, {x, 0.0});
        CHECK(Wv / mass_M(k, x) > 0.5);
        CHECK(Wv > prev);  // divergence toward the origin
        prev = Wv;
    }
    CHECK(hardy_witness(k, {1e-2, 0.0}) ==
          Catch::Approx(3.69616199626814).epsilon(1e-6));
    // dyadic divergence along |x| = 2^-j
    prev = 0;
    for (int j = 7; j <= 14; ++j) {
        double Wv = hardy_witness(k, {std::pow(2.0, -j), 0.0});
        CHECK(Wv > prev);
        prev = Wv;
    }
    // radial invariance in 2D
    KernelSpec k2(2, EllSpec::constant(1.0), TailSpec::zero());
    double wa = hardy_witness(k2, {0.05, 0.0});
    double wb = hardy_witness(k2, {0.03, 0.04});
    CHECK(wa == Catch::Approx(wb).epsilon(1e-4));
    CHECK_THROWS_AS(hardy_witness(k, {0.5, 0.0}), std::domain_error);
}

TEST_CASE("perimeter") {
    double h = 1.0 / 16;
    KernelSpec k = unit_kernel();
    Domain d = build_grid(ShapeSpec::interval(-1, 1), h, 1.0 + h);
    FormMatrix F = assemble(d, k);

    GridFunction empty = indicator(d, ShapeSpec::ball(1e-9));
    CHECK(j_perimeter(F, empty) == 0.0);

    // E = (-1/4, 1/4): closed double integral of K over E x E^c
    GridFunction mid = indicator(d, ShapeSpec::interval(-0.25, 0.25));
    double got = j_perimeter(F, mid);
    auto inner = [&](double x) {
        auto f = [&](double y) { return k.profile(std::abs(x - y)); };
        double left = integrate_graded_left([&](double t) { return f(-0.25 - t); }, 0.0, 1.5,
                                            1e-10)
                          .value;
        double right = integrate_graded_left([&](double t) { return f(0.25 + t); }, 0.0, 1.5,
                                             1e-10)
                           .value;
        return left + right;
    };
    double want = integrate_adaptive([&](double x) { return inner(x); }, -0.25, 0.25, 1e-8).value;
    CHECK(got == Catch::Approx(want).epsilon(6 * h));

    GridFunction outside = indicator(d, ShapeSpec::interval(0.5, 1.5));
    CHECK_THROWS_AS(j_perimeter(F, outside), std::invalid_argument);

    // boundary modulus diagnostic: log^{-sigma} modulus against log^{-1} profile
    KernelSpec weak(1, EllSpec::log_pow(1.0, -1.0), TailSpec::zero());
    auto fin = boundary_modulus_diagnostic(
        weak, [](double s) { return std::pow(std::log(1.0 / s), -1.0); });
    CHECK(fin.boundary_integral_finite);
    auto div = boundary_modulus_diagnostic(weak, [](double) { return 1.0; });
    CHECK_FALSE(div.boundary_integral_finite);
}

TEST_CASE("stroock-varopoulos holds pair by pair") {
    double h = 0.125;
    Domain d = build_grid(ShapeSpec::interval(-1, 1), h, 1.0 + h);
    FormMatrix F = assemble(d, unit_kernel());
    for (int seed = 0; seed < 20; ++seed) {
        GridFunction u = random_grid_function(d, 99, "sv", seed);
        for (double p : {2.0, 3.0, 4.0}) {
            double cphi = 2.0 * std::sqrt(p - 1.0) / p;
            GridFunction Phi(d), Fu(d);
            for (std::size_t i = 0; i < u.interior.size(); ++i) {
                double t = u.interior[i];
                Phi.interior[i] = cphi * std::pow(std::abs(t), p / 2.0);
                Fu.interior[i] = std::pow(std::abs(t), p - 2.0) * t;
            }
            CHECK(energy(F, Fu, u) >= energy(F, Phi, Phi) * (1.0 - 1e-12));
        }
    }
}
