#include "boundary_layer.hpp"

#include "io.hpp"

#include <cmath>

namespace nsctrl {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Vec2 BoundaryLayerProfile::wall_point(const LayerStrip& strip, double s) const {
    if (domain->spec.kind == DomainKind::rectangle)
        return {s, strip.wall == wall_bottom ? 0.0 : 1.0};
    return {std::cos(s), std::sin(s)}; // s is the boundary angle on the disk
}

Vec2 BoundaryLayerProfile::tangent(const LayerStrip& strip, double s) const {
    if (domain->spec.kind == DomainKind::rectangle) return {1.0, 0.0};
    return {-std::sin(s), std::cos(s)};
}

Vec2 BoundaryLayerProfile::inward(const LayerStrip& strip, double s) const {
    if (domain->spec.kind == DomainKind::rectangle)
        return {0.0, strip.wall == wall_bottom ? 1.0 : -1.0};
    return {-std::cos(s), -std::sin(s)};
}

void BoundaryLayerProfile::omega_wall_range(const LayerStrip& strip, double* lo, double* hi) const {
    if (domain->spec.kind == DomainKind::rectangle) {
        *lo = 0.0;
        *hi = domain->spec.length;
    } else {
        *lo = domain->spec.sigma_theta0;
        *hi = 2.0 * kPi - domain->spec.sigma_theta0;
    }
}

Vec2 BoundaryLayerProfile::reconstruct(int strip, int i, int k) const {
    const LayerStrip& st = strips[strip];
    return st.at(i, k) * tangent(st, st.s_of(i));
}

double BoundaryLayerProfile::tail_max() const {
    double worst = 0.0;
    for (const auto& st : strips)
        for (int i = 0; i < st.ns; ++i) worst = std::max(worst, std::abs(st.at(i, nz - 2)));
    return worst;
}

double BoundaryLayerProfile::l2_total() const {
    double acc = 0.0;
    for (const auto& st : strips) {
        for (int k = 0; k < nz; ++k) {
            const double wz = (k == 0 || k == nz - 1) ? 0.5 : 1.0;
            for (int i = 0; i < st.ns; ++i) {
                const double ws = (i == 0 || i == st.ns - 1) ? 0.5 : 1.0;
                acc += wz * ws * st.at(i, k) * st.at(i, k);
            }
        }
    }
    return std::sqrt(acc * dz * (strips.empty() ? 0.0 : strips[0].ds));
}

double BoundaryLayerProfile::l2_omega_wall() const {
    double acc = 0.0;
    for (const auto& st : strips) {
        double strip_acc = 0.0;
        double lo, hi;
        omega_wall_range(st, &lo, &hi);
        for (int i = 0; i < st.ns; ++i) {
            const double s = st.s_of(i);
            if (s < lo || s > hi) continue;
            for (int k = 0; k < nz; ++k) {
                const double wz = (k == 0 || k == nz - 1) ? 0.5 : 1.0;
                strip_acc += wz * st.at(i, k) * st.at(i, k);
            }
        }
        acc += strip_acc * st.ds * dz;
    }
    return std::sqrt(acc);
}

double BoundaryLayerProfile::sample(int strip, double s, double z) const {
    const LayerStrip& st = strips[strip];
    if (z < 0.0 || z > z_max) return 0.0;
    const double si = (s - st.s0) / st.ds;
    if (si < 0.0 || si > st.ns - 1) return 0.0;
    const double zi = z / dz;
    // Bicubic in (s,z) with clamped stencils; data layout is z-major.
    const int i0 = std::clamp(int(si) - 1, 0, st.ns - 4);
    const int k0 = std::clamp(int(zi) - 1, 0, nz - 4);
    double rows[4];
    for (int b = 0; b < 4; ++b) {
        double vals[4];
        for (int a = 0; a < 4; ++a) vals[a] = st.at(i0 + a, k0 + b);
        rows[b] = util::interp_uniform(vals, 4, double(i0), 1.0, si, 3, 0.0);
    }
    return util::interp_uniform(rows, 4, double(k0), 1.0, zi, 3, 0.0);
}

void BoundaryLayerProfile::checkpoint(const std::string& path) const {
    for (size_t sidx = 0; sidx < strips.size(); ++sidx) {
        const auto& st = strips[sidx];
        dump_write(path + ".strip" + std::to_string(sidx), {std::int64_t(nz), std::int64_t(st.ns)},
                   st.a.data());
    }
}

BoundaryLayerProfile make_layer_profile(std::shared_ptr<const Domain> domain,
                                        const LayerParams& params) {
    if (params.nz < 9 || params.ns < 9) throw ConfigError("layer grid too coarse");
    if (params.z_max <= 0.0) throw ConfigError("z_max must be positive");
    BoundaryLayerProfile p;
    p.domain = domain;
    p.z_max = params.z_max;
    p.nz = params.nz | 1; // odd sample count
    p.dz = params.z_max / (p.nz - 1);
    p.decay_tol = params.decay_tol;

    const auto& spec = domain->spec;
    if (spec.kind == DomainKind::rectangle) {
        const double lo = spec.sigma_left ? -spec.kitchen_depth : 0.0;
        const double hi = spec.length + (spec.sigma_right ? spec.kitchen_depth : 0.0);
        for (int wall : {wall_bottom, wall_top}) {
            LayerStrip st;
            st.wall = wall;
            st.s0 = lo;
            st.ns = params.ns;
            st.ds = (hi - lo) / (params.ns - 1);
            st.a.assign(size_t(st.ns) * p.nz, 0.0);
            p.strips.push_back(std::move(st));
        }
    } else {
        const double ext = std::min(spec.kitchen_depth, spec.sigma_theta0);
        LayerStrip st;
        st.wall = 0;
        st.s0 = spec.sigma_theta0 - ext;
        st.ns = params.ns;
        st.ds = (2.0 * kPi - 2.0 * spec.sigma_theta0 + 2.0 * ext) / (params.ns - 1);
        st.a.assign(size_t(st.ns) * p.nz, 0.0);
        p.strips.push_back(std::move(st));
    }
    return p;
}

LayerCoefficients build_layer_coefficients(const BoundaryLayerProfile& grid_template,
                                           const VectorField& u0_shape, double friction_alpha,
                                           const TimeEnvelope& envelope) {
    const Domain& dom = *grid_template.domain;
    const Grid& g = *dom.grid;
    LayerCoefficients out;
    out.envelope = envelope;
    out.friction_alpha = friction_alpha;

    const double delta = 1.5 * std::max(g.hx, g.hy);
    double max_normal_flow = 0.0;
    double max_shape = 1e-30;

    for (const auto& st : grid_template.strips) {
        LayerCoefficients::StripCoeffs sc;
        sc.s0 = st.s0;
        sc.ds = st.ds;
        sc.u_tan.resize(st.ns);
        sc.u_flat.resize(st.ns);
        sc.stretch.resize(st.ns);
        sc.g0.resize(st.ns);
        for (int i = 0; i < st.ns; ++i) {
            const double s = st.s_of(i);
            const Vec2 w = grid_template.wall_point(st, s);
            const Vec2 tau = grid_template.tangent(st, s);
            const Vec2 m = grid_template.inward(st, s);
            const Vec2 n = -1.0 * m;

            const Vec2 u_wall = sample_vector(u0_shape, w.x, w.y, 1);
            const Vec2 u_in1 = sample_vector(u0_shape, w.x + delta * m.x, w.y + delta * m.y, 1);
            const Vec2 u_in2 =
                sample_vector(u0_shape, w.x + 2.0 * delta * m.x, w.y + 2.0 * delta * m.y, 1);
            max_shape = std::max(max_shape, u_wall.norm());

            sc.u_tan[i] = u_wall.dot(tau);
            // Taylor-safe flat coefficient: -(u.n)/phi by a one-sided quotient.
            sc.u_flat[i] = -u_in1.dot(n) / delta;

            // Wall-parallel derivatives by sampling along the tangent.
            const double hpar = st.ds;
            const Vec2 up = sample_vector(u0_shape, w.x + hpar * tau.x, w.y + hpar * tau.y, 1);
            const Vec2 um = sample_vector(u0_shape, w.x - hpar * tau.x, w.y - hpar * tau.y, 1);
            const Vec2 dudt{(up.x - um.x) / (2.0 * hpar), (up.y - um.y) / (2.0 * hpar)};
            sc.stretch[i] = dudt.dot(tau);

            // One-sided normal derivative of the tangential component.
            const double ut0 = u_wall.dot(tau);
            const double ut1 = u_in1.dot(tau);
            const double ut2 = u_in2.dot(tau);
            const double dn_ut = (1.5 * ut0 - 2.0 * ut1 + 0.5 * ut2) / delta; // along outward n
            const double dt_un = dudt.dot(n);
            const double rate_of_strain = 0.5 * (dn_ut + dt_un);
            double g = 2.0 * (rate_of_strain + friction_alpha * ut0);

            // The cutoff in the wall datum is free on the kitchen extension:
            // ramp it to zero at the strip ends so content entering through
            // the inflow edge is consistent with a vanishing datum (no
            // transported kink). The physical wall is never touched.
            {
                double wall_lo, wall_hi;
                grid_template.omega_wall_range(st, &wall_lo, &wall_hi);
                const double s_end = st.s0 + (st.ns - 1) * st.ds;
                const double wlo = 0.6 * std::max(1e-12, wall_lo - st.s0);
                const double whi = 0.6 * std::max(1e-12, s_end - wall_hi);
                if (s < wall_lo && wlo > 1e-9)
                    g *= util::smoothstep5((s - st.s0) / wlo);
                else if (s > wall_hi && whi > 1e-9)
                    g *= util::smoothstep5((s_end - s) / whi);
            }
            sc.g0[i] = g;

            // Impermeability check on the physical wall only.
            double lo, hi;
            grid_template.omega_wall_range(st, &lo, &hi);
            if (s >= lo && s <= hi) max_normal_flow = std::max(max_normal_flow, std::abs(u_wall.dot(n)));
        }
        out.strips.push_back(std::move(sc));
    }
    if (max_normal_flow > 1e-4 * std::max(1.0, max_shape))
        throw DataError("advecting field leaks through the uncontrolled wall (max normal " +
                        std::to_string(max_normal_flow) + ")");

    // Detect the reduced scenario: uniform unit advection, no drift/stretch.
    out.rectangle_reduced = dom.spec.kind == DomainKind::rectangle;
    for (const auto& sc : out.strips)
        for (int i = 0; i < int(sc.u_tan.size()); ++i)
            if (std::abs(sc.u_flat[i]) > 1e-10 || std::abs(sc.stretch[i]) > 1e-10 ||
                std::abs(sc.u_tan[i] - sc.u_tan[0]) > 1e-10)
                out.rectangle_reduced = false;
    return out;
}

void step_layer(BoundaryLayerProfile& profile, const LayerCoefficients& coeffs,
                const KitchenSourceFn* source, double dt, const LayerParams& params) {
    if (dt <= 0.0) throw ConfigError("step_layer requires a positive time step");
    if (coeffs.strips.size() != profile.strips.size())
        throw DataError("layer coefficients do not match the profile strips");
    const double t0 = profile.t;
    const double t1 = t0 + dt;
    const double t_mid = t0 + 0.5 * dt;
    const double dH = coeffs.shift(t0, t1);
    const int nz = profile.nz;
    const double dz = profile.dz;
    const double lam = dt / (dz * dz);

    std::vector<double> foot, row, col(nz), lo(nz), di(nz), up(nz), scratch(nz);
    for (size_t sidx = 0; sidx < profile.strips.size(); ++sidx) {
        LayerStrip& st = profile.strips[sidx];
        const auto& sc = coeffs.strips[sidx];
        const int ns = st.ns;

        // Wall advection: all z-rows share the foot points.
        if (dH != 0.0) {
            row.resize(ns);
            if (coeffs.rectangle_reduced && !params.limiter) {
                // Uniform shift: one Lagrange stencil serves every point.
                const double shift = dH * sc.u_tan[0] / st.ds;
                const int order = params.interp_order;
                const int pts = order + 1;
                const int ishift = int(std::floor(shift));
                const double frac = shift - ishift;
                const int off = ishift + 1 + order / 2;
                const double xc = 1.0 + order / 2 - frac; // foot in stencil coordinates
                double w[6];
                for (int a = 0; a < pts; ++a) {
                    double acc = 1.0;
                    for (int b = 0; b < pts; ++b)
                        if (b != a) acc *= (xc - b) / double(a - b);
                    w[a] = acc;
                }
                for (int k = 0; k < nz; ++k) {
                    double* zrow = &st.a[size_t(k) * ns];
                    for (int i = 0; i < ns; ++i) {
                        const int base = i - off;
                        if (base < 0 || base + pts > ns) {
                            const double foot_s = st.s_of(i) - dH * sc.u_tan[0];
                            row[i] = util::interp_uniform(zrow, ns, st.s0, st.ds, foot_s, order, 0.0);
                        } else {
                            double acc = 0.0;
                            for (int a = 0; a < pts; ++a) acc += w[a] * zrow[base + a];
                            row[i] = acc;
                        }
                    }
                    for (int i = 0; i < ns; ++i) zrow[i] = row[i];
                }
            } else {
                foot.resize(ns);
                for (int i = 0; i < ns; ++i) {
                    if (coeffs.rectangle_reduced) {
                        foot[i] = st.s_of(i) - dH * sc.u_tan[0];
                    } else {
                        // Midpoint rule on ds/dH = u_tan(s).
                        const double s = st.s_of(i);
                        const double k1 =
                            util::interp_uniform(sc.u_tan.data(), ns, st.s0, st.ds, s, 3, 0.0);
                        const double smid = s - 0.5 * dH * k1;
                        const double k2 =
                            util::interp_uniform(sc.u_tan.data(), ns, st.s0, st.ds, smid, 3, 0.0);
                        foot[i] = s - dH * k2;
                    }
                }
                for (int k = 0; k < nz; ++k) {
                    double* zrow = &st.a[size_t(k) * ns];
                    for (int i = 0; i < ns; ++i)
                        row[i] = params.limiter
                                     ? util::interp_uniform_limited(
                                           zrow, ns, st.s0, st.ds, foot[i],
                                           std::min(params.interp_order, 3), 0.0)
                                     : util::interp_uniform(zrow, ns, st.s0, st.ds, foot[i],
                                                            params.interp_order, 0.0);
                    for (int i = 0; i < ns; ++i) zrow[i] = row[i];
                }
            }
        }

        for (int i = 0; i < ns; ++i) {
            // Fast-variable drift, exact in the separable envelope.
            const double drift = sc.u_flat[i] * dH;
            if (drift != 0.0) {
                for (int k = 0; k < nz; ++k) col[k] = st.at(i, k);
                const double f = std::exp(-drift);
                for (int k = 0; k < nz; ++k) {
                    const double zf = (k * dz) * f;
                    st.at(i, k) = params.limiter
                                      ? util::interp_uniform_limited(col.data(), nz, 0.0, dz, zf,
                                                                     std::min(params.interp_order, 3), 0.0)
                                      : util::interp_uniform(col.data(), nz, 0.0, dz, zf,
                                                             params.interp_order, 0.0);
                }
            }
            // Stretching, exact integrating factor.
            if (sc.stretch[i] != 0.0) {
                const double f = std::exp(-sc.stretch[i] * dH);
                for (int k = 0; k < nz; ++k) st.at(i, k) *= f;
            }
            // Theta-scheme fast-variable diffusion with the Neumann wall
            // datum. The trapezoidal variant keeps the discrete moment laws
            // second order in time.
            const double th = params.theta;
            const double g_new = coeffs.eta(t1) * sc.g0[i];
            const double g_old = coeffs.eta(t0) * sc.g0[i];
            const double s = st.s_of(i);
            for (int k = 0; k < nz - 1; ++k) {
                const double zeta = source ? (*source)(t_mid, int(sidx), s, k * dz) : 0.0;
                const double am = (k > 0) ? st.at(i, k - 1) : 0.0;
                const double ap = st.at(i, k + 1);
                double lap_explicit;
                if (k == 0)
                    lap_explicit = 2.0 * (ap - st.at(i, k)) - 2.0 * dz * g_old;
                else
                    lap_explicit = am - 2.0 * st.at(i, k) + ap;
                col[k] = st.at(i, k) + (1.0 - th) * lam * lap_explicit + dt * zeta;
                lo[k] = -th * lam;
                di[k] = 1.0 + 2.0 * th * lam;
                up[k] = -th * lam;
            }
            col[0] -= 2.0 * th * dt * g_new / dz;
            up[0] = -2.0 * th * lam;
            util::tridiag_solve(lo.data(), di.data(), up.data(), col.data(), scratch.data(),
                                nz - 1);
            for (int k = 0; k < nz - 1; ++k) st.at(i, k) = col[k];
            st.at(i, nz - 1) = 0.0;
        }
    }
    profile.t = t1;
    if (profile.tail_max() > profile.decay_tol)
        throw RangeError("layer amplitude " + std::to_string(profile.tail_max()) +
                         " at the fast-variable truncation: increase z_max");
}

double conveyor_step_dt(const LayerCoefficients& coeffs, double t, double ds, double dt_max) {
    const double u = coeffs.strips.empty() ? 1.0 : std::abs(coeffs.strips[0].u_tan[0]);
    if (u < 1e-12) return dt_max;
    const double target = ds / u;
    if (coeffs.shift(t, t + dt_max) >= target) {
        // Bisection on the envelope integral; it is monotone in dt.
        double lo = 0.0, hi = dt_max;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (coeffs.shift(t, t + mid) < target)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }
    return dt_max;
}

void evolve_layer_synced(BoundaryLayerProfile& profile, const LayerCoefficients& coeffs,
                         const KitchenSourceFn* source, double t_end, const LayerParams& params,
                         double dt_max) {
    const double ds = profile.strips.empty() ? 0.0 : profile.strips[0].ds;
    while (profile.t < t_end - 1e-12) {
        double dt = conveyor_step_dt(coeffs, profile.t, ds, dt_max);
        dt = std::min(dt, t_end - profile.t);
        step_layer(profile, coeffs, source, dt, params);
    }
}

VectorField sample_layer_in_domain(const BoundaryLayerProfile& profile, const Domain& domain,
                                   double eps) {
    if (eps <= 0.0) throw ConfigError("sample_layer_in_domain requires eps > 0");
    const Grid& g = *domain.grid;
    VectorField out(domain.grid);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            const Vec2 val = sample_layer_point(profile, eps, g.cx(i), g.cy(j));
            out.set(i, j, val);
        }
    out.check_finite("sample_layer_in_domain");
    return out;
}

Vec2 sample_layer_point(const BoundaryLayerProfile& profile, double eps, double x, double y) {
    const double rt_eps = std::sqrt(eps);
    Vec2 acc{0.0, 0.0};
    const Domain& dom = *profile.domain;
    for (size_t sidx = 0; sidx < profile.strips.size(); ++sidx) {
        const LayerStrip& st = profile.strips[sidx];
        double s, dist;
        if (dom.spec.kind == DomainKind::rectangle) {
            s = x;
            dist = (st.wall == wall_bottom) ? y : 1.0 - y;
        } else {
            s = std::atan2(y, x);
            if (s < st.s0) s += 2.0 * kPi; // strip spans the branch cut
            dist = 1.0 - std::sqrt(x * x + y * y);
        }
        if (dist < 0.0) continue;
        const double z = dist / rt_eps;
        const double a = profile.sample(int(sidx), s, z);
        if (a != 0.0) acc += (rt_eps * a) * profile.tangent(st, s);
    }
    return acc;
}

} // namespace nsctrl
