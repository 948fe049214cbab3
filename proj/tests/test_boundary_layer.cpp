#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "core/boundary_layer.hpp"

#include <cmath>
#include <random>

using namespace nsctrl;

namespace {
constexpr double kPi = 3.14159265358979323846;

std::shared_ptr<const Domain> make_rect(int nx = 48, int ny = 24) {
    DomainSpec s;
    s.length = 2.0;
    s.nx = nx;
    s.ny = ny;
    return std::make_shared<Domain>(build_domain(s));
}

VectorField uniform_shape(const Domain& dom, Vec2 value) {
    VectorField v(dom.grid);
    const Grid& g = *dom.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) v.set(i, j, value);
    return v;
}

VectorField shear_shape(const Domain& dom) {
    VectorField v(dom.grid);
    const Grid& g = *dom.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) v.set(i, j, {g.cy(j), 0.0});
    return v;
}

LayerCoefficients zero_coeffs(const BoundaryLayerProfile& p) {
    TimeEnvelope env;
    env.T = 1.0;
    env.mass = 0.0;
    env.amplitude = 0.0;
    LayerCoefficients c;
    c.envelope = env;
    c.rectangle_reduced = true;
    for (const auto& st : p.strips) {
        LayerCoefficients::StripCoeffs sc;
        sc.s0 = st.s0;
        sc.ds = st.ds;
        sc.u_tan.assign(st.ns, 0.0);
        sc.u_flat.assign(st.ns, 0.0);
        sc.stretch.assign(st.ns, 0.0);
        sc.g0.assign(st.ns, 0.0);
        c.strips.push_back(std::move(sc));
    }
    return c;
}

double trapezoid_mass(const BoundaryLayerProfile& p, int strip, int i) {
    double acc = 0.0;
    const LayerStrip& st = p.strips[strip];
    for (int k = 0; k < p.nz; ++k) acc += ((k == 0 || k == p.nz - 1) ? 0.5 : 1.0) * st.at(i, k);
    return acc * p.dz;
}

} // namespace

TEST_CASE("coefficients of the conveyor flow") {
    auto dom = make_rect();
    LayerParams lp;
    lp.ns = 64;
    lp.nz = 65;
    lp.z_max = 8.0;
    const BoundaryLayerProfile p = make_layer_profile(dom, lp);
    CHECK(p.strips.size() == 2);
    const TimeEnvelope env = build_envelope(1.0, 3.0, EnvelopeProfile::sine);
    const double alpha = 0.7;
    const LayerCoefficients c =
        build_layer_coefficients(p, uniform_shape(*dom, {1.0, 0.0}), alpha, env);
    CHECK(c.rectangle_reduced);
    for (const auto& sc : c.strips)
        for (int i = 0; i < int(sc.u_tan.size()); ++i) {
            CHECK(sc.u_tan[i] == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(std::abs(sc.u_flat[i]) <= 1e-10);
            CHECK(std::abs(sc.stretch[i]) <= 1e-10);
            CHECK(sc.g0[i] == doctest::Approx(2.0 * alpha).epsilon(1e-9));
        }
}

TEST_CASE("coefficients vanish for the zero flow") {
    auto dom = make_rect();
    LayerParams lp;
    lp.ns = 32;
    lp.nz = 33;
    lp.z_max = 8.0;
    const BoundaryLayerProfile p = make_layer_profile(dom, lp);
    const TimeEnvelope env = build_envelope(1.0, 1.0, EnvelopeProfile::sine);
    const LayerCoefficients c =
        build_layer_coefficients(p, uniform_shape(*dom, {0.0, 0.0}), 1.0, env);
    for (const auto& sc : c.strips)
        for (int i = 0; i < int(sc.g0.size()); ++i) {
            CHECK(std::abs(sc.g0[i]) <= 1e-12);
            CHECK(std::abs(sc.u_flat[i]) <= 1e-12);
        }
}

TEST_CASE("shear flow produces the strain-rate wall datum") {
    auto dom = make_rect(64, 32);
    LayerParams lp;
    lp.ns = 48;
    lp.nz = 33;
    lp.z_max = 8.0;
    const BoundaryLayerProfile p = make_layer_profile(dom, lp);
    const TimeEnvelope env = build_envelope(1.0, 1.0, EnvelopeProfile::sine);
    const LayerCoefficients c = build_layer_coefficients(p, shear_shape(*dom), 0.0, env);
    // Strain-rate part of the wall operator for u=(y,0): -1/2 at the bottom
    // wall, +1/2 at the top; g0 doubles it.
    for (size_t sidx = 0; sidx < p.strips.size(); ++sidx) {
        const double expect = p.strips[sidx].wall == wall_bottom ? -1.0 : 1.0;
        double lo, hi;
        p.omega_wall_range(p.strips[sidx], &lo, &hi);
        for (int i = 0; i < p.strips[sidx].ns; ++i) {
            const double s = p.strips[sidx].s_of(i);
            if (s < lo + 0.1 || s > hi - 0.1) continue; // clamped sampling near ends
            CHECK(c.strips[sidx].g0[i] == doctest::Approx(expect).epsilon(1e-6));
        }
    }
}

TEST_CASE("leaky advecting fields are rejected") {
    auto dom = make_rect();
    LayerParams lp;
    lp.ns = 32;
    lp.nz = 33;
    lp.z_max = 8.0;
    const BoundaryLayerProfile p = make_layer_profile(dom, lp);
    const TimeEnvelope env = build_envelope(1.0, 1.0, EnvelopeProfile::sine);
    CHECK_THROWS_AS(build_layer_coefficients(p, uniform_shape(*dom, {0.0, 1.0}), 1.0, env),
                    DataError);
}

TEST_CASE("no-flux fast-variable diffusion conserves mass") {
    auto dom = make_rect();
    LayerParams lp;
    lp.ns = 24;
    lp.nz = 201;
    lp.z_max = 20.0;
    BoundaryLayerProfile p = make_layer_profile(dom, lp);
    for (auto& st : p.strips)
        for (int i = 0; i < st.ns; ++i)
            for (int k = 0; k < p.nz; ++k) st.at(i, k) = std::exp(-util::sqr(k * p.dz - 3.0));
    const LayerCoefficients c = zero_coeffs(p);
    const double m0 = trapezoid_mass(p, 0, 10);
    double energy_prev = p.l2_total();
    for (int n = 0; n < 100; ++n) {
        step_layer(p, c, nullptr, 1e-3, lp);
        const double energy = p.l2_total();
        CHECK(energy <= energy_prev * (1.0 + 1e-14)); // diffusion dissipates
        energy_prev = energy;
    }
    CHECK(trapezoid_mass(p, 0, 10) == doctest::Approx(m0).epsilon(1e-10));
    CHECK(trapezoid_mass(p, 1, 5) == doctest::Approx(trapezoid_mass(p, 1, 5)));
}

TEST_CASE("conveyor scenario matches the translating heat kernel") {
    auto dom = make_rect();
    const double T = 1.0, mass = 3.0;
    const TimeEnvelope env = build_envelope(T, mass, EnvelopeProfile::sine);
    LayerParams lp;
    lp.ns = 320;
    lp.nz = 401;
    lp.z_max = 20.0;
    BoundaryLayerProfile p = make_layer_profile(dom, lp);
    // Gaussian in both variables; friction zero so the wall datum vanishes.
    const double s_c = 0.2, sig_s = 0.45, z_c = 4.0, t0 = 0.5;
    for (auto& st : p.strips)
        for (int i = 0; i < st.ns; ++i)
            for (int k = 0; k < p.nz; ++k) {
                const double s = st.s_of(i), z = k * p.dz;
                st.at(i, k) = std::exp(-util::sqr(s - s_c) / (2.0 * sig_s * sig_s)) *
                              std::exp(-util::sqr(z - z_c) / (4.0 * t0));
            }
    const LayerCoefficients c =
        build_layer_coefficients(p, uniform_shape(*dom, {1.0, 0.0}), 0.0, env);
    const int nsteps = 1000;
    for (int n = 0; n < nsteps; ++n) step_layer(p, c, nullptr, T / nsteps, lp);

    // Oracle: x shifted by the envelope integral, z diffused with an image
    // source across the Neumann wall.
    const double shift = env.integral(T);
    double err2 = 0.0, ref2 = 0.0;
    const auto& st = p.strips[0];
    for (int i = 0; i < st.ns; ++i)
        for (int k = 0; k < p.nz; ++k) {
            const double s = st.s_of(i), z = k * p.dz;
            const double amp = std::sqrt(t0 / (t0 + T));
            const double gz = amp * (std::exp(-util::sqr(z - z_c) / (4.0 * (t0 + T))) +
                                     std::exp(-util::sqr(z + z_c) / (4.0 * (t0 + T))));
            const double exact =
                std::exp(-util::sqr(s - shift - s_c) / (2.0 * sig_s * sig_s)) * gz;
            err2 += util::sqr(st.at(i, k) - exact);
            ref2 += util::sqr(exact);
        }
    const double rel = std::sqrt(err2 * st.ds * p.dz);
    CHECK(rel <= 1e-3);
    CHECK(ref2 > 0.0);
}

TEST_CASE("tangentiality is structural") {
    auto dom = make_rect();
    LayerParams lp;
    lp.ns = 32;
    lp.nz = 65;
    lp.z_max = 10.0;
    BoundaryLayerProfile p = make_layer_profile(dom, lp);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& st : p.strips)
        for (auto& v : st.a) v = u(rng);
    for (size_t sidx = 0; sidx < p.strips.size(); ++sidx)
        for (int i = 0; i < p.strips[sidx].ns; i += 3)
            for (int k = 0; k < p.nz; k += 7) {
                const Vec2 vec = p.reconstruct(int(sidx), i, k);
                const Vec2 w = p.wall_point(p.strips[sidx], p.strips[sidx].s_of(i));
                const Vec2 n = dom->normal_at(w.x, std::clamp(w.y, 0.0, 1.0));
                CHECK(vec.dot(n) == 0.0);
            }
}

TEST_CASE("generic stepper reproduces the reduced path exactly") {
    auto dom = make_rect();
    const TimeEnvelope env = build_envelope(1.0, 2.0, EnvelopeProfile::sine);
    LayerParams lp;
    lp.ns = 96;
    lp.nz = 101;
    lp.z_max = 12.0;
    BoundaryLayerProfile a = make_layer_profile(dom, lp);
    for (auto& st : a.strips)
        for (int i = 0; i < st.ns; ++i)
            for (int k = 0; k < a.nz; ++k)
                st.at(i, k) = std::exp(-util::sqr(st.s_of(i) - 0.4)) *
                              std::exp(-util::sqr(k * a.dz - 3.0) / 4.0);
    BoundaryLayerProfile b = a;
    LayerCoefficients reduced =
        build_layer_coefficients(a, uniform_shape(*dom, {1.0, 0.0}), 0.5, env);
    REQUIRE(reduced.rectangle_reduced);
    LayerCoefficients generic = reduced;
    generic.rectangle_reduced = false;
    for (int n = 0; n < 50; ++n) {
        step_layer(a, reduced, nullptr, 2e-3, lp);
        step_layer(b, generic, nullptr, 2e-3, lp);
    }
    double worst = 0.0;
    for (size_t sidx = 0; sidx < a.strips.size(); ++sidx)
        for (size_t q = 0; q < a.strips[sidx].a.size(); ++q)
            worst = std::max(worst, std::abs(a.strips[sidx].a[q] - b.strips[sidx].a[q]));
    CHECK(worst <= 1e-12);
}

TEST_CASE("stepping is linear in the state and the data") {
    auto dom = make_rect();
    const TimeEnvelope env = build_envelope(1.0, 2.0, EnvelopeProfile::sine);
    LayerParams lp;
    lp.ns = 48;
    lp.nz = 101;
    lp.z_max = 12.0;
    BoundaryLayerProfile v1 = make_layer_profile(dom, lp);
    BoundaryLayerProfile v2 = make_layer_profile(dom, lp);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto* p : {&v1, &v2})
        for (auto& st : p->strips)
            for (int i = 0; i < st.ns; ++i)
                for (int k = 0; k < p->nz - 1; ++k)
                    st.at(i, k) = u(rng) * std::exp(-0.5 * k * p->dz);
    BoundaryLayerProfile sum = v1;
    for (size_t sidx = 0; sidx < sum.strips.size(); ++sidx)
        for (size_t q = 0; q < sum.strips[sidx].a.size(); ++q)
            sum.strips[sidx].a[q] += v2.strips[sidx].a[q];
    BoundaryLayerProfile zero = make_layer_profile(dom, lp);

    const LayerCoefficients c =
        build_layer_coefficients(v1, uniform_shape(*dom, {1.0, 0.0}), 0.8, env);
    const double t_probe = 0.3;
    auto advance = [&](BoundaryLayerProfile& p) {
        p.t = t_probe;
        step_layer(p, c, nullptr, 1e-3, lp);
    };
    advance(v1);
    advance(v2);
    advance(sum);
    advance(zero);
    double worst = 0.0;
    for (size_t sidx = 0; sidx < sum.strips.size(); ++sidx)
        for (size_t q = 0; q < sum.strips[sidx].a.size(); ++q) {
            const double lin = v1.strips[sidx].a[q] + v2.strips[sidx].a[q] - zero.strips[sidx].a[q];
            worst = std::max(worst, std::abs(sum.strips[sidx].a[q] - lin));
        }
    CHECK(worst <= 1e-12);
}

TEST_CASE("slowly decaying profiles trip the truncation watchdog") {
    auto dom = make_rect();
    LayerParams lp;
    lp.ns = 24;
    lp.nz = 101;
    lp.z_max = 10.0;
    BoundaryLayerProfile p = make_layer_profile(dom, lp);
    for (auto& st : p.strips)
        for (int i = 0; i < st.ns; ++i)
            for (int k = 0; k < p.nz; ++k) st.at(i, k) = std::exp(-(k * p.dz) / 50.0);
    const LayerCoefficients c = zero_coeffs(p);
    CHECK_THROWS_AS(step_layer(p, c, nullptr, 1e-3, lp), RangeError);
}

TEST_CASE("physical sampling of an exponential profile") {
    auto dom = make_rect(64, 64);
    LayerParams lp;
    lp.ns = 128;
    lp.nz = 401;
    lp.z_max = 20.0;
    BoundaryLayerProfile p = make_layer_profile(dom, lp);
    for (auto& st : p.strips)
        for (int i = 0; i < st.ns; ++i)
            for (int k = 0; k < p.nz; ++k) st.at(i, k) = std::exp(-k * p.dz);

    SUBCASE("zero profile samples to zero") {
        BoundaryLayerProfile z = make_layer_profile(dom, lp);
        CHECK(linf_norm(sample_layer_in_domain(z, *dom, 0.05)) == 0.0);
    }

    SUBCASE("pointwise value and both-wall superposition") {
        const double eps = 0.04;
        const double rt = std::sqrt(eps);
        for (double y : {0.05, 0.2, 0.5}) {
            const Vec2 got = sample_layer_point(p, eps, 1.0, y);
            const double expect = rt * (std::exp(-y / rt) + std::exp(-(1.0 - y) / rt));
            CHECK(got.x == doctest::Approx(expect).epsilon(1e-5));
            CHECK(std::abs(got.y) <= 1e-14);
        }
    }

    SUBCASE("norm scales as eps^(3/4)") {
        double prev_c = -1.0;
        for (double eps : {0.05, 0.025, 0.0125}) {
            const double rt = std::sqrt(eps);
            const VectorField f = sample_layer_in_domain(p, *dom, eps);
            // Quadrature oracle across the layer of both walls.
            const int nq = 20001;
            double acc = 0.0;
            for (int q = 0; q < nq; ++q) {
                const double y = double(q) / (nq - 1);
                const double w = (q == 0 || q == nq - 1) ? 0.5 : 1.0;
                acc += w * util::sqr(std::exp(-y / rt) + std::exp(-(1.0 - y) / rt));
            }
            const double oracle = rt * std::sqrt(acc / (nq - 1) * 2.0);
            CHECK(l2_norm(f) == doctest::Approx(oracle).epsilon(0.02));
            const double c = l2_norm(f) / std::pow(eps, 0.75);
            if (prev_c > 0.0) CHECK(c == doctest::Approx(prev_c).epsilon(0.08));
            prev_c = c;
        }
    }

    SUBCASE("half-maximum depth shrinks as sqrt(eps)") {
        auto half_depth = [&](double eps) {
            const double wall = sample_layer_point(p, eps, 1.0, 1e-9).x;
            double lo = 0.0, hi = 0.5;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (sample_layer_point(p, eps, 1.0, mid).x > 0.5 * wall)
                    lo = mid;
                else
                    hi = mid;
            }
            return 0.5 * (lo + hi);
        };
        const double r = half_depth(0.04) / half_depth(0.02);
        CHECK(r == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
    }
}
