#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "core/geometry.hpp"
#include "core/poisson.hpp"

#include <cmath>
#include <random>

using namespace nsctrl;

namespace {
constexpr double kPi = 3.14159265358979323846;

DomainSpec rect_spec(int n) {
    DomainSpec s;
    s.length = 2.0;
    s.nx = n;
    s.ny = n;
    return s;
}

DomainSpec disk_spec(int n) {
    DomainSpec s;
    s.kind = DomainKind::disk;
    s.nx = n;
    s.ny = n;
    s.collar_width = 0.3;
    s.chi_support = 0.22;
    return s;
}

ScalarField fill_scalar(const Domain& dom, double (*fn)(double, double)) {
    ScalarField s(dom.grid);
    const Grid& g = *dom.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j)) s.at(i, j) = fn(g.cx(i), g.cy(j));
    return s;
}

// Max over cells whose full centered stencil stays inside the mask.
template <class Fn>
double interior_max(const Domain& dom, int margin, Fn cell_value) {
    const Grid& g = *dom.grid;
    double worst = 0.0;
    for (int j = margin; j < g.ny - margin; ++j)
        for (int i = margin; i < g.nx - margin; ++i) {
            bool ok = true;
            for (int dj = -margin; dj <= margin && ok; ++dj)
                for (int di = -margin; di <= margin && ok; ++di)
                    ok = g.inside(i + di, j + dj);
            if (ok) worst = std::max(worst, std::abs(cell_value(i, j)));
        }
    return worst;
}

} // namespace

TEST_CASE("gradient of a linear field is exact") {
    const Domain dom = build_domain(rect_spec(32));
    const ScalarField s = fill_scalar(dom, [](double x, double) { return x; });
    const VectorField g = grad(s);
    const Grid& gr = *dom.grid;
    for (int j = 0; j < gr.ny; ++j)
        for (int i = 0; i < gr.nx; ++i) {
            CHECK(g.x[gr.idx(i, j)] == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(std::abs(g.y[gr.idx(i, j)]) <= 1e-12);
        }
}

TEST_CASE("curl of a rigid rotation is two") {
    const Domain dom = build_domain(rect_spec(32));
    VectorField v(dom.grid);
    const Grid& g = *dom.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) v.set(i, j, {-g.cy(j), g.cx(i)});
    const ScalarField w = curl2d(v);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) CHECK(w.at(i, j) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("manufactured Laplacian converges at second order") {
    auto err_at = [](int n) {
        const Domain dom = build_domain(rect_spec(n));
        const ScalarField s =
            fill_scalar(dom, [](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); });
        const ScalarField lap = div(grad(s));
        return interior_max(dom, 2, [&](int i, int j) {
            return lap.at(i, j) + 2.0 * kPi * kPi * s.at(i, j);
        });
    };
    const double e32 = err_at(32);
    const double e64 = err_at(64);
    CHECK(e64 < e32);
    const double order = std::log2(e32 / e64);
    CHECK(order > 1.6);
    CHECK(order < 2.6);
}

TEST_CASE("Neumann solve reproduces the linear harmonic potential") {
    const Domain dom = build_domain(rect_spec(64));
    const ScalarField zero(dom.grid);
    const BoundaryField flux = dom.boundary_from([](const BoundaryFace& f) {
        if (f.wall == wall_right) return 1.0;
        if (f.wall == wall_left) return -1.0;
        return 0.0;
    });
    const ScalarField s = solve_neumann_poisson(dom, zero, flux);
    CHECK(dom.poisson->residual_inf_neumann(s, zero, flux) <= 1e-8);
    // Oracle: x minus its mean (the mean of cell centers is L/2 = 1).
    const Grid& g = *dom.grid;
    double worst = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            worst = std::max(worst, std::abs(s.at(i, j) - (g.cx(i) - 1.0)));
    CHECK(worst <= 1e-9);
}

TEST_CASE("zero Neumann data yields the zero field") {
    const Domain dom = build_domain(rect_spec(32));
    const ScalarField s = solve_neumann_poisson(dom, ScalarField(dom.grid), dom.boundary_zeros());
    CHECK(linf_norm(s) <= 1e-12);
}

TEST_CASE("disk Neumann solve matches the harmonic polynomial") {
    auto solve_err = [](int n) {
        const Domain dom = build_domain(disk_spec(n));
        // Boundary data of s = x^2 - y^2 projected on the staircase faces.
        const BoundaryField flux = dom.boundary_from([](const BoundaryFace& f) {
            return 2.0 * f.mid.x * f.face_normal.x - 2.0 * f.mid.y * f.face_normal.y;
        });
        BoundaryField balanced = flux;
        double net = 0.0, perim = 0.0;
        for (size_t k = 0; k < flux.v.size(); ++k) {
            net += flux.v[k] * dom.faces[k].len;
            perim += dom.faces[k].len;
        }
        for (auto& v : balanced.v) v -= net / perim;
        const ScalarField zero(dom.grid);
        const ScalarField s = solve_neumann_poisson(dom, zero, balanced);
        CHECK(dom.poisson->residual_inf_neumann(s, zero, balanced) <= 1e-8);

        const Grid& g = *dom.grid;
        double mean = 0.0;
        int cnt = 0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (g.inside(i, j)) {
                    mean += g.cx(i) * g.cx(i) - g.cy(j) * g.cy(j);
                    ++cnt;
                }
        mean /= cnt;
        double err2 = 0.0, ref2 = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (g.inside(i, j)) {
                    const double exact = g.cx(i) * g.cx(i) - g.cy(j) * g.cy(j) - mean;
                    err2 += (s.at(i, j) - exact) * (s.at(i, j) - exact);
                    ref2 += exact * exact;
                }
        return std::sqrt(err2 / ref2);
    };
    CHECK(solve_err(64) < 1e-9);  // five-point stencil is exact on quadratics
    CHECK(solve_err(96) < 1e-9);
}

TEST_CASE("incompatible Neumann data is an error, small defects are repaired") {
    const Domain dom = build_domain(rect_spec(32));
    ScalarField rhs(dom.grid);
    for (auto& v : rhs.v) v = 1.0; // integral 2 against zero flux
    CHECK_THROWS_AS(solve_neumann_poisson(dom, rhs, dom.boundary_zeros()), DataError);

    for (auto& v : rhs.v) v = 1e-12;
    CHECK_NOTHROW(solve_neumann_poisson(dom, rhs, dom.boundary_zeros()));
}

TEST_CASE("mismatched grids are rejected") {
    const Domain a = build_domain(rect_spec(32));
    const Domain b = build_domain(rect_spec(16));
    CHECK_THROWS_AS(solve_neumann_poisson(a, ScalarField(b.grid), a.boundary_zeros()), DataError);
}

TEST_CASE("projection removes the gradient part of a Helmholtz sum") {
    const Domain dom = build_domain(rect_spec(64));
    const Grid& g = *dom.grid;
    VectorField v(dom.grid);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) v.set(i, j, {std::sin(kPi * g.cy(j)) + g.cx(i), 0.0});
    const BoundaryField targets = projection_targets(dom, v, SigmaMode::free_trace);
    const VectorField u = leray_project(dom, v, targets, 1e-10);
    CHECK(linf_norm(fv_divergence(dom, u, targets)) <= 1e-9);
    // The quadratic correction is resolved exactly: the result is the
    // divergence-free part plus the harmonic field (1,0).
    double worst = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const Vec2 got = u.at(i, j);
            worst = std::max(worst, std::abs(got.x - (std::sin(kPi * g.cy(j)) + 1.0)));
            worst = std::max(worst, std::abs(got.y));
        }
    CHECK(worst <= 1e-9);
}

TEST_CASE("projection is idempotent") {
    const Domain dom = build_domain(rect_spec(48));
    const Grid& g = *dom.grid;
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    VectorField v(dom.grid);
    for (int m = 1; m <= 3; ++m) {
        const double ax = amp(rng), ay = amp(rng);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double x = g.cx(i), y = g.cy(j);
                v.x[g.idx(i, j)] += ax * std::sin(kPi * m * x / 2.0) * std::cos(kPi * m * y);
                v.y[g.idx(i, j)] += ay * std::cos(kPi * m * x / 2.0) * std::sin(kPi * m * y);
            }
    }
    const BoundaryField targets = projection_targets(dom, v, SigmaMode::free_trace);
    const VectorField once = leray_project(dom, v, targets, 1e-10);
    const VectorField twice = leray_project(dom, once, targets, 1e-10);
    double diff = 0.0;
    for (size_t k = 0; k < once.x.size(); ++k) {
        diff = std::max(diff, std::abs(once.x[k] - twice.x[k]));
        diff = std::max(diff, std::abs(once.y[k] - twice.y[k]));
    }
    CHECK(diff <= 1e-8);
}

TEST_CASE("projected random smooth fields are discretely divergence-free") {
    const Domain dom = build_domain(rect_spec(48));
    const Grid& g = *dom.grid;
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        VectorField v(dom.grid);
        for (int m = 1; m <= 3; ++m) {
            const double ax = amp(rng), bx = amp(rng), ay = amp(rng), by = amp(rng);
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    const double x = g.cx(i), y = g.cy(j);
                    v.x[g.idx(i, j)] +=
                        ax * std::sin(0.5 * kPi * m * x + bx) * std::cos(kPi * m * y + bx);
                    v.y[g.idx(i, j)] +=
                        ay * std::cos(0.5 * kPi * m * x + by) * std::sin(kPi * m * y + by);
                }
        }
        const BoundaryField targets = projection_targets(dom, v, SigmaMode::free_trace);
        const VectorField u = leray_project(dom, v, targets, 1e-8);
        CHECK(linf_norm(fv_divergence(dom, u, targets)) <= 1e-8);
    }
}

TEST_CASE("vorticity inversion: zero data gives zero flow") {
    const Domain dom = build_domain(rect_spec(32));
    const VectorField u = velocity_from_vorticity(dom, ScalarField(dom.grid), dom.boundary_zeros());
    CHECK(linf_norm(u) <= 1e-12);
}

TEST_CASE("vorticity inversion: rigid rotation on the disk") {
    const Domain dom = build_domain(disk_spec(96));
    ScalarField om(dom.grid);
    for (auto& v : om.v) v = 2.0;
    const VectorField u = velocity_from_vorticity(dom, om, dom.boundary_zeros());
    const Grid& g = *dom.grid;
    double worst = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            if (dom.phi_at(g.cx(i), g.cy(j)) < 0.15) continue; // staircase collar excluded
            const Vec2 got = u.at(i, j);
            worst = std::max(worst, std::abs(got.x + g.cy(j)));
            worst = std::max(worst, std::abs(got.y - g.cx(i)));
        }
    CHECK(worst <= 0.02);
}

TEST_CASE("vorticity inversion: uniform conveyor flow on the rectangle") {
    const Domain dom = build_domain(rect_spec(48));
    const BoundaryField trace = dom.boundary_from([](const BoundaryFace& f) {
        if (f.wall == wall_right) return 1.0;
        if (f.wall == wall_left) return -1.0;
        return 0.0;
    });
    const VectorField u = velocity_from_vorticity(dom, ScalarField(dom.grid), trace);
    const Grid& g = *dom.grid;
    double worst = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const Vec2 got = u.at(i, j);
            worst = std::max(worst, std::abs(got.x - 1.0));
            worst = std::max(worst, std::abs(got.y));
        }
    CHECK(worst <= 1e-9);
}

TEST_CASE("vorticity inversion reproduces manufactured vorticity at second order") {
    auto err_at = [](int n) {
        const Domain dom = build_domain(rect_spec(n));
        const ScalarField om = fill_scalar(
            dom, [](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); });
        const VectorField u = velocity_from_vorticity(dom, om, dom.boundary_zeros());
        const ScalarField back = curl2d(u);
        return interior_max(dom, 2, [&](int i, int j) { return back.at(i, j) - om.at(i, j); });
    };
    const double e32 = err_at(32);
    const double e64 = err_at(64);
    const double order = std::log2(e32 / e64);
    CHECK(order > 1.5);
}

TEST_CASE("vorticity inversion rejects net boundary flux") {
    const Domain dom = build_domain(rect_spec(32));
    const BoundaryField trace = dom.boundary_from([](const BoundaryFace& f) {
        return f.wall == wall_right ? 1.0 : 0.0;
    });
    CHECK_THROWS_AS(velocity_from_vorticity(dom, ScalarField(dom.grid), trace), DataError);
}
