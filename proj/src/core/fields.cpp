#include "fields.hpp"

#include <cmath>

namespace nsctrl {

void ScalarField::check_finite(const char* what) const {
    for (int j = 0; j < grid->ny; ++j)
        for (int i = 0; i < grid->nx; ++i)
            if (grid->inside(i, j) && !std::isfinite(at(i, j)))
                throw SolverError(std::string(what) + ": non-finite scalar value");
}

void VectorField::check_finite(const char* what) const {
    for (int j = 0; j < grid->ny; ++j)
        for (int i = 0; i < grid->nx; ++i)
            if (grid->inside(i, j)) {
                const Vec2 u = at(i, j);
                if (!std::isfinite(u.x) || !std::isfinite(u.y))
                    throw SolverError(std::string(what) + ": non-finite vector value");
            }
}

void require_same_grid(const Grid& a, const Grid& b) {
    if (&a == &b) return;
    if (a.nx != b.nx || a.ny != b.ny || a.hx != b.hx || a.hy != b.hy || a.x0 != b.x0 ||
        a.y0 != b.y0)
        throw DataError("fields live on mismatched grids");
}

namespace {

// One-dimensional derivative of a masked row: centered where both neighbours
// exist, second-order one-sided otherwise, first-order as a last resort.
template <class Get, class In>
double deriv1d(Get value, In inside, int i, int n, double h) {
    const bool has_m = i - 1 >= 0 && inside(i - 1);
    const bool has_p = i + 1 < n && inside(i + 1);
    if (has_m && has_p) return (value(i + 1) - value(i - 1)) / (2.0 * h);
    if (has_p) {
        if (i + 2 < n && inside(i + 2))
            return (-1.5 * value(i) + 2.0 * value(i + 1) - 0.5 * value(i + 2)) / h;
        return (value(i + 1) - value(i)) / h;
    }
    if (has_m) {
        if (i - 2 >= 0 && inside(i - 2))
            return (1.5 * value(i) - 2.0 * value(i - 1) + 0.5 * value(i - 2)) / h;
        return (value(i) - value(i - 1)) / h;
    }
    return 0.0;
}

template <class Get>
double ddx(const Grid& g, Get value, int i, int j) {
    return deriv1d([&](int a) { return value(a, j); }, [&](int a) { return g.inside(a, j); }, i,
                   g.nx, g.hx);
}

template <class Get>
double ddy(const Grid& g, Get value, int i, int j) {
    return deriv1d([&](int a) { return value(i, a); }, [&](int a) { return g.inside(i, a); }, j,
                   g.ny, g.hy);
}

} // namespace

VectorField grad(const ScalarField& s) {
    const Grid& g = *s.grid;
    VectorField out(s.grid, s.units);
    auto val = [&](int i, int j) { return s.at(i, j); };
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            out.set(i, j, {ddx(g, val, i, j), ddy(g, val, i, j)});
        }
    out.check_finite("grad");
    return out;
}

ScalarField div(const VectorField& vf) {
    const Grid& g = *vf.grid;
    ScalarField out(vf.grid, 0.0, vf.units);
    auto vx = [&](int i, int j) { return vf.x[g.idx(i, j)]; };
    auto vy = [&](int i, int j) { return vf.y[g.idx(i, j)]; };
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            out.at(i, j) = ddx(g, vx, i, j) + ddy(g, vy, i, j);
        }
    out.check_finite("div");
    return out;
}

ScalarField curl2d(const VectorField& vf) {
    const Grid& g = *vf.grid;
    ScalarField out(vf.grid, 0.0, vf.units);
    auto vx = [&](int i, int j) { return vf.x[g.idx(i, j)]; };
    auto vy = [&](int i, int j) { return vf.y[g.idx(i, j)]; };
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            out.at(i, j) = ddx(g, vy, i, j) - ddy(g, vx, i, j);
        }
    out.check_finite("curl2d");
    return out;
}

double l2_norm(const ScalarField& s) {
    const Grid& g = *s.grid;
    double acc = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j)) acc += util::sqr(s.at(i, j));
    return std::sqrt(acc * g.cell_area());
}

double l2_norm(const VectorField& vf) {
    const Grid& g = *vf.grid;
    double acc = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j)) {
                const Vec2 u = vf.at(i, j);
                acc += u.x * u.x + u.y * u.y;
            }
    return std::sqrt(acc * g.cell_area());
}

double linf_norm(const ScalarField& s) {
    const Grid& g = *s.grid;
    double m = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j)) m = std::max(m, std::abs(s.at(i, j)));
    return m;
}

double linf_norm(const VectorField& vf) {
    const Grid& g = *vf.grid;
    double m = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j)) m = std::max(m, vf.at(i, j).norm());
    return m;
}

namespace {

// Nearest inside cell in row j starting from column i, searching both ways.
int nearest_inside_col(const Grid& g, int i, int j) {
    if (g.inside(i, j)) return i;
    for (int d = 1; d < g.nx; ++d) {
        if (g.inside(i - d, j)) return i - d;
        if (g.inside(i + d, j)) return i + d;
    }
    return -1;
}

template <class Get>
double sample_impl(const Grid& g, Get value, double px, double py, int order, bool limited) {
    // Fractional cell-center coordinates, clamped to the sample range.
    double fi = (px - g.x0) / g.hx - 0.5;
    double fj = (py - g.y0) / g.hy - 0.5;
    fi = std::clamp(fi, 0.0, double(g.nx - 1));
    fj = std::clamp(fj, 0.0, double(g.ny - 1));
    const int pts = order + 1;
    int i0 = std::clamp(int(std::floor(fi)) - order / 2, 0, g.nx - pts);
    int j0 = std::clamp(int(std::floor(fj)) - order / 2, 0, g.ny - pts);

    double rows[6];
    for (int b = 0; b < pts; ++b) {
        const int j = j0 + b;
        double cols[6];
        for (int a = 0; a < pts; ++a) {
            int i = i0 + a;
            if (!g.inside(i, j)) {
                const int alt = nearest_inside_col(g, i, j);
                i = (alt >= 0) ? alt : i;
            }
            cols[a] = value(i, j);
        }
        rows[b] = util::interp_uniform(cols, pts, double(i0), 1.0, fi, order, cols[0]);
    }
    double out = util::interp_uniform(rows, pts, double(j0), 1.0, fj, order, rows[0]);
    if (limited) {
        const int ic = std::clamp(int(std::floor(fi)), 0, g.nx - 2);
        const int jc = std::clamp(int(std::floor(fj)), 0, g.ny - 2);
        double lo = 1e300, hi = -1e300;
        for (int b = 0; b < 2; ++b)
            for (int a = 0; a < 2; ++a) {
                int i = ic + a, j = jc + b;
                if (!g.inside(i, j)) {
                    const int alt = nearest_inside_col(g, i, j);
                    if (alt < 0) continue;
                    i = alt;
                }
                lo = std::min(lo, value(i, j));
                hi = std::max(hi, value(i, j));
            }
        if (lo <= hi) out = std::clamp(out, lo, hi);
    }
    return out;
}

} // namespace

double sample_scalar(const ScalarField& s, double px, double py, int order, bool limited) {
    return sample_impl(*s.grid, [&](int i, int j) { return s.at(i, j); }, px, py, order, limited);
}

Vec2 sample_vector(const VectorField& vf, double px, double py, int order, bool limited) {
    const Grid& g = *vf.grid;
    return {sample_impl(g, [&](int i, int j) { return vf.x[g.idx(i, j)]; }, px, py, order, limited),
            sample_impl(g, [&](int i, int j) { return vf.y[g.idx(i, j)]; }, px, py, order, limited)};
}

} // namespace nsctrl
