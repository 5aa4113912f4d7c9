#pragma once

// Uniform Cartesian discretization of a bounded open set in 1D or 2D,
// plus a truncated exterior shell of lattice cells. Cell membership is
// decided by the cell center; enumeration is lexicographic in the
// integer coordinates, so rebuilding with equal inputs reproduces the
// identical cell ordering.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace nonlocal {

enum class ShapeKind { interval, box, ball, cell_union };

struct ShapeSpec {
    ShapeKind kind = ShapeKind::interval;
    double a = -1.0, b = 1.0;                      // interval bounds
    std::array<double, 2> lo{{0, 0}}, hi{{0, 0}};  // box corners
    double radius = 1.0;                           // ball about the origin
    std::vector<std::array<int, 2>> cells;         // explicit lattice cells (cell_union)

    static ShapeSpec interval(double a, double b) {
        if (!(b > a)) throw std::invalid_argument("interval requires a < b");
        ShapeSpec s;
        s.kind = ShapeKind::interval;
        s.a = a;
        s.b = b;
        return s;
    }
    static ShapeSpec box(std::array<double, 2> lo, std::array<double, 2> hi) {
        if (!(hi[0] > lo[0] && hi[1] > lo[1]))
            throw std::invalid_argument("box requires lo < hi componentwise");
        ShapeSpec s;
        s.kind = ShapeKind::box;
        s.lo = lo;
        s.hi = hi;
        return s;
    }
    static ShapeSpec ball(double radius) {
        if (!(radius > 0)) throw std::invalid_argument("ball requires positive radius");
        ShapeSpec s;
        s.kind = ShapeKind::ball;
        s.radius = radius;
        return s;
    }
    static ShapeSpec cell_union(std::vector<std::array<int, 2>> cells, int dim = 2) {
        ShapeSpec s;
        s.kind = ShapeKind::cell_union;
        s.cells = std::move(cells);
        s.union_dim = dim;
        return s;
    }

    int union_dim = 2;
    int dim() const {
        if (kind == ShapeKind::cell_union) return union_dim;
        return kind == ShapeKind::interval ? 1 : 2;
    }
};

struct Domain {
    int dim = 1;
    double h = 0.1;
    double r_ext = 1.0;
    ShapeSpec shape;
    std::array<double, 2> anchor{{0, 0}};
    std::vector<std::array<int, 2>> interior;
    std::vector<std::array<int, 2>> shell;

    std::array<double, 2> center(const std::array<int, 2>& c) const {
        return {anchor[0] + (c[0] + 0.5) * h,
                dim == 2 ? anchor[1] + (c[1] + 0.5) * h : 0.0};
    }
    std::array<double, 2> interior_center(std::size_t i) const { return center(interior[i]); }
    std::array<double, 2> shell_center(std::size_t i) const { return center(shell[i]); }

    double cell_measure() const { return dim == 1 ? h : h * h; }
    double measure() const { return cell_measure() * double(interior.size()); }
    std::size_t n_interior() const { return interior.size(); }
    std::size_t n_shell() const { return shell.size(); }
    std::size_t n_covered() const { return interior.size() + shell.size(); }

    // covered-cell accessor: interior first, then shell
    std::array<double, 2> covered_center(std::size_t i) const {
        return i < interior.size() ? interior_center(i) : shell_center(i - interior.size());
    }

    double diameter() const;
    double sup_norm() const;  // sup_{x in Omega} |x| over cell centers
};

namespace shape_detail {

inline bool contains(const ShapeSpec& s, const std::array<double, 2>& x,
                     double h, const std::array<double, 2>& anchor) {
    switch (s.kind) {
        case ShapeKind::interval:
            return x[0] > s.a && x[0] < s.b;
        case ShapeKind::box:
            return x[0] > s.lo[0] && x[0] < s.hi[0] && x[1] > s.lo[1] && x[1] < s.hi[1];
        case ShapeKind::ball:
            return std::hypot(x[0], x[1]) < s.radius;
        case ShapeKind::cell_union:
            for (auto& c : s.cells) {
                double cx = anchor[0] + (c[0] + 0.5) * h;
                double cy = anchor[1] + (c[1] + 0.5) * h;
                if (std::abs(x[0] - cx) <= 0.5 * h && std::abs(x[1] - cy) <= 0.5 * h)
                    return true;
            }
            return false;
    }
    return false;
}

// distance from an exterior point to the closed set
inline double dist_to_set(const ShapeSpec& s, const std::array<double, 2>& x,
                          double h, const std::array<double, 2>& anchor) {
    switch (s.kind) {
        case ShapeKind::interval:
            return std::max({s.a - x[0], x[0] - s.b, 0.0});
        case ShapeKind::box: {
            double dx = std::max({s.lo[0] - x[0], x[0] - s.hi[0], 0.0});
            double dy = std::max({s.lo[1] - x[1], x[1] - s.hi[1], 0.0});
            return std::hypot(dx, dy);
        }
        case ShapeKind::ball:
            return std::max(0.0, std::hypot(x[0], x[1]) - s.radius);
        case ShapeKind::cell_union: {
            double best = std::numeric_limits<double>::infinity();
            for (auto& c : s.cells) {
                double cx = anchor[0] + (c[0] + 0.5) * h;
                double cy = anchor[1] + (c[1] + 0.5) * h;
                double dx = std::max(std::abs(x[0] - cx) - 0.5 * h, 0.0);
                double dy = std::max(std::abs(x[1] - cy) - 0.5 * h, 0.0);
                best = std::min(best, std::hypot(dx, dy));
            }
            return best;
        }
    }
    return 0.0;
}

// distance from an interior point to the boundary
inline double dist_to_boundary(const ShapeSpec& s, const std::array<double, 2>& x,
                               double h, const std::array<double, 2>& anchor) {
    switch (s.kind) {
        case ShapeKind::interval:
            return std::min(x[0] - s.a, s.b - x[0]);
        case ShapeKind::box:
            return std::min(std::min(x[0] - s.lo[0], s.hi[0] - x[0]),
                            std::min(x[1] - s.lo[1], s.hi[1] - x[1]));
        case ShapeKind::ball:
            return s.radius - std::hypot(x[0], x[1]);
        case ShapeKind::cell_union: {
            // nearest lattice cell outside the union; the scan widens
            // until the answer is certified
            double best = std::numeric_limits<double>::infinity();
            int span = 2;
            while (true) {
                bool found = false;
                int ix = int(std::floor((x[0] - anchor[0]) / h));
                int iy = int(std::floor((x[1] - anchor[1]) / h));
                for (int dx = -span; dx <= span; ++dx)
                    for (int dy = -span; dy <= span; ++dy) {
                        std::array<int, 2> cand{{ix + dx, iy + dy}};
                        bool inside = false;
                        for (auto& c : s.cells)
                            if (c == cand) { inside = true; break; }
                        if (inside) continue;
                        double cx = anchor[0] + (cand[0] + 0.5) * h;
                        double cy = anchor[1] + (cand[1] + 0.5) * h;
                        double ddx = std::max(std::abs(x[0] - cx) - 0.5 * h, 0.0);
                        double ddy = std::max(std::abs(x[1] - cy) - 0.5 * h, 0.0);
                        best = std::min(best, std::hypot(ddx, ddy));
                        found = true;
                    }
                if (found && best <= (span - 1) * h) break;
                ++span;
                if (span > 1024) break;
            }
            return best;
        }
    }
    return 0.0;
}

inline std::array<double, 2> bounding_lo(const ShapeSpec& s, double h) {
    switch (s.kind) {
        case ShapeKind::interval:
            return {s.a, 0.0};
        case ShapeKind::box:
            return s.lo;
        case ShapeKind::ball:
            return {-s.radius, -s.radius};
        case ShapeKind::cell_union: {
            // anchored at the origin by construction
            (void)h;
            return {0.0, 0.0};
        }
    }
    return {0, 0};
}

inline std::array<double, 2> extent(const ShapeSpec& s) {
    switch (s.kind) {
        case ShapeKind::interval:
            return {s.b - s.a, 0.0};
        case ShapeKind::box:
            return {s.hi[0] - s.lo[0], s.hi[1] - s.lo[1]};
        case ShapeKind::ball:
            return {2 * s.radius, 2 * s.radius};
        case ShapeKind::cell_union:
            return {0.0, 0.0};  // handled from the explicit list
    }
    return {0, 0};
}

}  // namespace shape_detail

inline double Domain::diameter() const {
    double lo0 = 1e300, hi0 = -1e300, lo1 = 1e300, hi1 = -1e300;
    for (auto& c : interior) {
        auto x = center(c);
        lo0 = std::min(lo0, x[0] - 0.5 * h);
        hi0 = std::max(hi0, x[0] + 0.5 * h);
        lo1 = std::min(lo1, x[1] - 0.5 * h);
        hi1 = std::max(hi1, x[1] + 0.5 * h);
    }
    return dim == 1 ? hi0 - lo0 : std::hypot(hi0 - lo0, hi1 - lo1);
}

inline double Domain::sup_norm() const {
    double r = 0;
    for (auto& c : interior) {
        auto x = center(c);
        r = std::max(r, dim == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]));
    }
    return r;
}

inline Domain build_grid(const ShapeSpec& shape, double h, double r_ext) {
    if (!(h > 0)) throw std::invalid_argument("cell size must be positive");
    if (!(r_ext > 0)) throw std::invalid_argument("shell width must be positive");
    Domain d;
    d.dim = shape.dim();
    d.h = h;
    d.r_ext = r_ext;
    d.shape = shape;

    if (shape.kind == ShapeKind::cell_union) {
        d.anchor = {0.0, 0.0};
        d.interior = shape.cells;
    } else {
        d.anchor = shape_detail::bounding_lo(shape, h);
        auto ext = shape_detail::extent(shape);
        int nx = int(std::ceil(ext[0] / h));
        int ny = d.dim == 2 ? int(std::ceil(ext[1] / h)) : 1;
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j) {
                std::array<int, 2> c{{i, d.dim == 2 ? j : 0}};
                if (shape_detail::contains(shape, d.center(c), h, d.anchor))
                    d.interior.push_back(c);
            }
    }
    if (d.interior.size() < 2) throw std::runtime_error("grid too coarse");

    // shell: exterior lattice cells whose centers lie within r_ext of Omega
    int pad = int(std::ceil(r_ext / h)) + 1;
    int ilo = 1 << 30, ihi = -(1 << 30), jlo = 1 << 30, jhi = -(1 << 30);
    for (auto& c : d.interior) {
        ilo = std::min(ilo, c[0]);
        ihi = std::max(ihi, c[0]);
        jlo = std::min(jlo, c[1]);
        jhi = std::max(jhi, c[1]);
    }
    for (int i = ilo - pad; i <= ihi + pad; ++i) {
        int j0 = d.dim == 2 ? jlo - pad : 0;
        int j1 = d.dim == 2 ? jhi + pad : 0;
        for (int j = j0; j <= j1; ++j) {
            std::array<int, 2> c{{i, j}};
            auto x = d.center(c);
            if (shape_detail::contains(shape, x, h, d.anchor)) continue;
            if (shape_detail::dist_to_set(shape, x, h, d.anchor) <= r_ext)
                d.shell.push_back(c);
        }
    }
    return d;
}

// One real value per interior cell and per shell cell. The zero_exterior
// flag marks membership in the zero-outside class; it forces the shell
// values to be exactly zero.
struct GridFunction {
    const Domain* dom = nullptr;
    std::vector<double> interior;
    std::vector<double> shell;
    bool zero_exterior = true;

    GridFunction() = default;
    explicit GridFunction(const Domain& d, double fill = 0.0, bool zero_ext = true)
        : dom(&d),
          interior(d.n_interior(), fill),
          shell(d.n_shell(), zero_ext ? 0.0 : fill),
          zero_exterior(zero_ext) {}

    double covered(std::size_t i) const {
        return i < interior.size() ? interior[i] : shell[i - interior.size()];
    }
    void set_covered(std::size_t i, double v) {
        if (i < interior.size())
            interior[i] = v;
        else
            shell[i - interior.size()] = v;
    }

    template <typename F>
    static double eval_at(const F& f, const std::array<double, 2>& x) {
        if constexpr (std::is_invocable_v<F, double, double>)
            return f(x[0], x[1]);
        else
            return f(x[0]);
    }

    template <typename F>
    static GridFunction sample(const Domain& d, const F& f, bool include_shell = false) {
        GridFunction u(d, 0.0, !include_shell);
        for (std::size_t i = 0; i < d.n_interior(); ++i)
            u.interior[i] = eval_at(f, d.interior_center(i));
        if (include_shell)
            for (std::size_t i = 0; i < d.n_shell(); ++i)
                u.shell[i] = eval_at(f, d.shell_center(i));
        return u;
    }

    double lp_norm(double p) const {
        double s = 0;
        for (double v : interior) s += std::pow(std::abs(v), p);
        return std::pow(dom->cell_measure() * s, 1.0 / p);
    }
    double l2_norm() const {
        double s = 0;
        for (double v : interior) s += v * v;
        return std::sqrt(dom->cell_measure() * s);
    }
    double dot(const GridFunction& other) const {
        double s = 0;
        for (std::size_t i = 0; i < interior.size(); ++i) s += interior[i] * other.interior[i];
        return dom->cell_measure() * s;
    }
    double interior_mean() const {
        double s = 0;
        for (double v : interior) s += v;
        return s / double(interior.size());
    }
    double max_abs() const {
        double s = 0;
        for (double v : interior) s = std::max(s, std::abs(v));
        for (double v : shell) s = std::max(s, std::abs(v));
        return s;
    }
};

inline void require_same_domain(const GridFunction& u, const GridFunction& v) {
    if (u.dom != v.dom) throw std::invalid_argument("grid functions live on different domains");
}

// Indicator of a subset described by another shape; cells are marked by
// their centers. zero_exterior is set when no shell cell is marked.
inline GridFunction indicator(const Domain& d, const ShapeSpec& subset) {
    GridFunction u(d, 0.0, false);
    bool shell_hit = false;
    for (std::size_t i = 0; i < d.n_interior(); ++i)
        if (shape_detail::contains(subset, d.interior_center(i), d.h, d.anchor))
            u.interior[i] = 1.0;
    for (std::size_t i = 0; i < d.n_shell(); ++i)
        if (shape_detail::contains(subset, d.shell_center(i), d.h, d.anchor)) {
            u.shell[i] = 1.0;
            shell_hit = true;
        }
    u.zero_exterior = !shell_hit;
    return u;
}

// Distance from each cell center to the boundary of Omega (positive on
// interior cells, with the exterior distance reported on shell cells).
inline GridFunction boundary_distance(const Domain& d) {
    GridFunction u(d, 0.0, false);
    for (std::size_t i = 0; i < d.n_interior(); ++i)
        u.interior[i] =
            shape_detail::dist_to_boundary(d.shape, d.interior_center(i), d.h, d.anchor);
    for (std::size_t i = 0; i < d.n_shell(); ++i)
        u.shell[i] = shape_detail::dist_to_set(d.shape, d.shell_center(i), d.h, d.anchor);
    u.zero_exterior = false;
    return u;
}

}  // namespace nonlocal
