#pragma once

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace nsctrl {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double a) const { return {x * a, y * a}; }
    Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
};

inline Vec2 operator*(double a, const Vec2& v) { return {a * v.x, a * v.y}; }

namespace util {

inline double sqr(double x) { return x * x; }

/// Quintic smoothstep on [0,1]; clamped outside.
inline double smoothstep5(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

/// In-place Thomas solve of a tridiagonal system. `lo`/`di`/`up` are the
/// sub/main/super diagonals (lo[0] and up[n-1] unused); rhs is overwritten
/// with the solution. Scratch must have size >= n.
inline void tridiag_solve(const double* lo, const double* di, const double* up, double* rhs,
                          double* scratch, int n) {
    scratch[0] = up[0] / di[0];
    rhs[0] = rhs[0] / di[0];
    for (int i = 1; i < n; ++i) {
        const double m = 1.0 / (di[i] - lo[i] * scratch[i - 1]);
        scratch[i] = up[i] * m;
        rhs[i] = (rhs[i] - lo[i] * rhs[i - 1]) * m;
    }
    for (int i = n - 2; i >= 0; --i) rhs[i] -= scratch[i] * rhs[i + 1];
}

/// Lagrange interpolation on a uniform grid v[0..n-1] with origin x0 and
/// spacing dx. Points outside [x0, x0+(n-1)dx] return `fill`. Stencils are
/// clamped near the edges so the order degrades gracefully there.
/// `order` is the polynomial degree: 1, 3 or 5.
inline double interp_uniform(const double* v, int n, double x0, double dx, double x, int order,
                             double fill) {
    const double s = (x - x0) / dx;
    if (s < -1e-12 || s > n - 1 + 1e-12) return fill;
    const double sc = std::clamp(s, 0.0, double(n - 1));
    const int pts = order + 1;
    int i0 = int(std::floor(sc)) - order / 2;
    i0 = std::clamp(i0, 0, n - pts);
    double result = 0.0;
    for (int a = 0; a < pts; ++a) {
        double w = 1.0;
        for (int b = 0; b < pts; ++b) {
            if (b == a) continue;
            w *= (sc - (i0 + b)) / double(a - b);
        }
        result += w * v[i0 + a];
    }
    return result;
}

/// Same, clamping the result to the local data range (monotone limiter).
inline double interp_uniform_limited(const double* v, int n, double x0, double dx, double x,
                                     int order, double fill) {
    const double s = (x - x0) / dx;
    if (s < -1e-12 || s > n - 1 + 1e-12) return fill;
    const double raw = interp_uniform(v, n, x0, dx, x, order, fill);
    const int i = std::clamp(int(std::floor(std::clamp(s, 0.0, double(n - 1)))), 0, n - 2);
    const double lo = std::min(v[i], v[i + 1]);
    const double hi = std::max(v[i], v[i + 1]);
    return std::clamp(raw, lo, hi);
}

/// Composite trapezoid with uniform spacing.
inline double trapezoid(const double* v, int n, double dx) {
    if (n < 2) return 0.0;
    double s = 0.5 * (v[0] + v[n - 1]);
    for (int i = 1; i < n - 1; ++i) s += v[i];
    return s * dx;
}

/// Trapezoid at spacing dx refined against spacing 2dx (Richardson step).
/// Returns the extrapolated value; *err_estimate gets |T(dx)-T(2dx)|/3.
/// Requires odd n (even interval count).
inline double trapezoid_refined(const double* v, int n, double dx, double* err_estimate) {
    const double fine = trapezoid(v, n, dx);
    double coarse = 0.5 * (v[0] + v[n - 1]);
    for (int i = 2; i < n - 1; i += 2) coarse += v[i];
    coarse *= 2.0 * dx;
    const double diff = (fine - coarse) / 3.0;
    if (err_estimate) *err_estimate = std::abs(diff);
    return fine + diff;
}

/// Least-squares slope of log(val) against log(t) over t in [t_lo, t_hi].
/// Returns the slope; *residual gets the RMS misfit of the linear model.
inline double fit_loglog_slope(const std::vector<double>& t, const std::vector<double>& val,
                               double t_lo, double t_hi, double* residual) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi || val[i] <= 0.0) continue;
        const double lx = std::log(t[i]);
        const double ly = std::log(val[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m < 2) throw RangeError("log-log fit window contains fewer than two samples");
    const double denom = m * sxx - sx * sx;
    const double slope = (m * sxy - sx * sy) / denom;
    const double icept = (sy - slope * sx) / m;
    if (residual) {
        double rr = 0;
        for (size_t i = 0; i < t.size(); ++i) {
            if (t[i] < t_lo || t[i] > t_hi || val[i] <= 0.0) continue;
            rr += sqr(std::log(val[i]) - (icept + slope * std::log(t[i])));
        }
        *residual = std::sqrt(rr / m);
    }
    return slope;
}

/// Shortest round-trippable decimal representation (deterministic CSV output).
inline std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/// FNV-1a over a string; used for deterministic run ids.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace util
} // namespace nsctrl
