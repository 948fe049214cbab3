#include "euler_stage.hpp"

#include "io.hpp"

#include <cmath>

namespace nsctrl {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Normalized bump profile exp(-1/(tau(1-tau))) on (0,1) and its integral,
// tabulated once at high resolution.
struct BumpTable {
    std::vector<double> cum;
    double total = 0.0;
    static constexpr int kSamples = 4096;

    BumpTable() {
        cum.resize(kSamples + 1, 0.0);
        double acc = 0.0;
        double prev = 0.0;
        for (int i = 1; i <= kSamples; ++i) {
            const double tau = double(i) / kSamples;
            const double cur = value(tau);
            acc += 0.5 * (prev + cur) / kSamples;
            cum[i] = acc;
            prev = cur;
        }
        total = acc;
    }
    static double value(double tau) {
        if (tau <= 0.0 || tau >= 1.0) return 0.0;
        return std::exp(-1.0 / (tau * (1.0 - tau)));
    }
    double integral(double tau) const {
        if (tau <= 0.0) return 0.0;
        if (tau >= 1.0) return total;
        const double s = tau * kSamples;
        const int i = std::min(int(s), kSamples - 1);
        const double f = s - i;
        return cum[i] + f * (cum[i + 1] - cum[i]);
    }
};

const BumpTable& bump_table() {
    static const BumpTable table;
    return table;
}

} // namespace

double TimeEnvelope::eta(double t) const {
    if (t <= 0.0 || t >= T) return 0.0;
    if (profile == EnvelopeProfile::sine) return amplitude * std::sin(kPi * t / T);
    return amplitude * BumpTable::value(t / T);
}

double TimeEnvelope::eta_dot(double t) const {
    if (t <= 0.0 || t >= T) return 0.0;
    if (profile == EnvelopeProfile::sine) return amplitude * kPi / T * std::cos(kPi * t / T);
    const double tau = t / T;
    const double q = tau * (1.0 - tau);
    return amplitude * BumpTable::value(tau) * (1.0 - 2.0 * tau) / (q * q) / T;
}

double TimeEnvelope::integral(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= T) return mass;
    if (profile == EnvelopeProfile::sine)
        return amplitude * T / kPi * (1.0 - std::cos(kPi * t / T));
    return amplitude * T * bump_table().integral(t / T);
}

TimeEnvelope build_envelope(double T, double mass, EnvelopeProfile profile) {
    if (T <= 0.0) throw ConfigError("envelope horizon T must be positive");
    if (mass <= 0.0) throw ConfigError("envelope mass must be positive");
    TimeEnvelope env;
    env.T = T;
    env.mass = mass;
    env.profile = profile;
    if (profile == EnvelopeProfile::sine)
        env.amplitude = mass * kPi / (2.0 * T);
    else
        env.amplitude = mass / (T * bump_table().total);
    return env;
}

VectorField PotentialFlow::u0_at(double t) const {
    VectorField out(domain->grid);
    const double e = envelope.eta(t);
    if (e != 0.0)
        for (size_t k = 0; k < out.x.size(); ++k) {
            out.x[k] = e * alpha_grad.x[k];
            out.y[k] = e * alpha_grad.y[k];
        }
    return out;
}

ScalarField PotentialFlow::p0_at(double t) const {
    ScalarField out(domain->grid);
    const double e = envelope.eta(t);
    const double ed = envelope.eta_dot(t);
    for (size_t k = 0; k < out.v.size(); ++k) {
        const double g2 = alpha_grad.x[k] * alpha_grad.x[k] + alpha_grad.y[k] * alpha_grad.y[k];
        out.v[k] = -(ed * alpha_pot.v[k] + 0.5 * e * e * g2);
    }
    return out;
}

Vec2 PotentialFlow::shape_point(double x, double y) const {
    return sample_vector(alpha_grad, x, y, 3);
}

Vec2 PotentialFlow::u0_point(double t, double x, double y) const {
    const double e = envelope.eta(t);
    if (e == 0.0) return {0.0, 0.0};
    return e * shape_point(x, y);
}

PotentialFlow build_potential_flow(std::shared_ptr<const Domain> domain,
                                   const TimeEnvelope& envelope,
                                   const BoundaryField& sigma_flux) {
    const auto& faces = domain->faces;
    if (sigma_flux.v.size() != faces.size())
        throw DataError("flux profile does not match boundary faces");
    double net = 0.0, sig_len = 0.0, scale = 0.0;
    for (size_t fi = 0; fi < faces.size(); ++fi) {
        if (faces[fi].tag == BoundaryTag::controlled) {
            net += sigma_flux.v[fi] * faces[fi].len;
            sig_len += faces[fi].len;
            scale = std::max(scale, std::abs(sigma_flux.v[fi]));
        } else if (sigma_flux.v[fi] != 0.0) {
            throw DataError("flux profile must vanish on the uncontrolled wall");
        }
    }
    if (std::abs(net) > 1e-8 * std::max(1.0, scale) * std::max(1.0, sig_len))
        throw DataError("outlet flux profile has nonzero net flux " + std::to_string(net));

    // Remove the residual quadrature net exactly so the Neumann data is clean.
    BoundaryField flux = sigma_flux;
    if (sig_len > 0.0)
        for (size_t fi = 0; fi < faces.size(); ++fi)
            if (faces[fi].tag == BoundaryTag::controlled) flux.v[fi] -= net / sig_len;

    PotentialFlow pf;
    pf.domain = domain;
    pf.envelope = envelope;
    ScalarField zero(domain->grid);
    pf.alpha_pot = domain->poisson->solve_neumann(zero, flux);
    const double res = domain->poisson->residual_inf_neumann(pf.alpha_pot, zero, flux);
    if (res > 1e-8 * std::max(1.0, linf_norm(pf.alpha_pot)))
        throw SolverError("harmonic potential residual " + std::to_string(res));
    pf.alpha_grad = grad(pf.alpha_pot);
    return pf;
}

BoundaryField make_conveyor_flux(const Domain& domain) {
    if (domain.spec.kind == DomainKind::rectangle) {
        const bool both = domain.spec.sigma_left && domain.spec.sigma_right;
        return domain.boundary_from([&](const BoundaryFace& f) -> double {
            if (f.tag != BoundaryTag::controlled) return 0.0;
            if (both) return f.wall == wall_right ? 1.0 : -1.0;
            // Single controlled wall: vertical dipole, inflow below, outflow above.
            return std::sin(2.0 * kPi * f.mid.y) * (f.wall == wall_right ? 1.0 : -1.0);
        });
    }
    const double th0 = domain.spec.sigma_theta0;
    return domain.boundary_from([&](const BoundaryFace& f) -> double {
        if (f.tag != BoundaryTag::controlled) return 0.0;
        const double th = std::atan2(f.mid.y, f.mid.x);
        const double radial = -std::sin(kPi * th / th0);
        return radial * f.true_normal.dot(f.face_normal);
    });
}

void FlushReport::to_csv(const std::string& path) const {
    CsvWriter csv(path, {"seed_x", "seed_y", "exit_time", "exit_speed"});
    for (const auto& s : samples)
        csv.row({s.seed.x, s.seed.y, s.exited ? s.exit_time : -1.0, s.exited ? s.exit_speed : 0.0});
    csv.close();
}

namespace {

// True when a boundary point belongs to the controlled part.
bool on_sigma(const Domain& dom, Vec2 p) {
    if (dom.spec.kind == DomainKind::disk)
        return std::abs(std::atan2(p.y, p.x)) < dom.spec.sigma_theta0;
    const double L = dom.spec.length;
    const double d[4] = {p.y, 1.0 - p.y, p.x, L - p.x};
    int best = 0;
    for (int w = 1; w < 4; ++w)
        if (std::abs(d[w]) < std::abs(d[best])) best = w;
    return dom.has_sigma(best);
}

} // namespace

FlushReport trace_flow(const PotentialFlow& pf, const std::vector<Vec2>& seeds, double T,
                       double dt) {
    const Domain& dom = *pf.domain;
    if (dt <= 0.0) throw ConfigError("trace_flow requires a positive time step");
    FlushReport report;
    report.samples.reserve(seeds.size());
    for (const Vec2& seed : seeds) {
        if (dom.phi_at(seed.x, seed.y) < -1e-12)
            throw DataError("flush seed lies outside the domain");
        FlushSample sample;
        sample.seed = seed;
        Vec2 x = seed;
        double t = 0.0;
        while (t < T && !sample.exited) {
            const double h = std::min(dt, T - t);
            auto vel = [&](double tt, Vec2 p) { return pf.u0_point(tt, p.x, p.y); };
            const Vec2 k1 = vel(t, x);
            const Vec2 k2 = vel(t + 0.5 * h, x + 0.5 * h * k1);
            const Vec2 k3 = vel(t + 0.5 * h, x + 0.5 * h * k2);
            const Vec2 k4 = vel(t + h, x + h * k3);
            const Vec2 xn = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            const double phi_old = dom.phi_at(x.x, x.y);
            const double phi_new = dom.phi_at(xn.x, xn.y);
            if (phi_new < 0.0) {
                const double frac = phi_old > 0.0 ? phi_old / (phi_old - phi_new) : 0.0;
                const Vec2 cross = x + frac * (xn - x);
                if (on_sigma(dom, cross)) {
                    double tc = t + frac * h;
                    const Vec2 n = dom.normal_at(cross.x, cross.y);
                    double speed = pf.u0_point(tc, cross.x, cross.y).dot(n);
                    if (speed <= 0.0) {
                        // Degenerate crossing while the envelope is still off
                        // (seed sitting on the outlet): the effective exit is
                        // at the end of the step.
                        tc = t + h;
                        speed = pf.u0_point(tc, cross.x, cross.y).dot(n);
                    }
                    sample.exited = speed > 0.0;
                    sample.exit_time = tc;
                    sample.exit_speed = speed;
                    break;
                }
                if (!dom.inside_extended(xn.x, xn.y) &&
                    std::abs(phi_new) > 0.05 * dom.spec.collar_width)
                    throw GeometryError("particle escaped through the uncontrolled wall");
                // Numerical graze of the impermeable wall: nudge back inside.
                const Vec2 n = dom.normal_at(xn.x, xn.y);
                x = xn - (std::abs(phi_new) + 1e-12) * n;
            } else {
                x = xn;
            }
            t += h;
        }
        report.samples.push_back(sample);
    }
    report.flushed = !report.samples.empty();
    for (const auto& s : report.samples) {
        if (!s.exited)
            report.flushed = false;
        else
            report.worst_exit_time = std::max(report.worst_exit_time, s.exit_time);
    }
    return report;
}

std::vector<Vec2> seed_lattice(const Domain& domain, int per_side) {
    const Grid& g = *domain.grid;
    std::vector<Vec2> seeds;
    const double margin = 1.5 * std::max(g.hx, g.hy);
    const double x_lo = g.x0, x_hi = g.x0 + g.nx * g.hx;
    const double y_lo = g.y0, y_hi = g.y0 + g.ny * g.hy;
    for (int j = 0; j < per_side; ++j)
        for (int i = 0; i < per_side; ++i) {
            const Vec2 p{x_lo + (i + 0.5) * (x_hi - x_lo) / per_side,
                         y_lo + (j + 0.5) * (y_hi - y_lo) / per_side};
            if (domain.phi_at(p.x, p.y) > margin) seeds.push_back(p);
        }
    return seeds;
}

VectorField U1Solution::u1_at(double t) const {
    const Grid& g = *domain->grid;
    VectorField out(domain->grid);
    if (times.empty()) return out;
    if (t >= times.back())
        return (t <= times.back() + 1e-12) ? velocity.back() : out; // zero after the active phase
    if (t <= times.front()) return velocity.front();
    size_t hi = 1;
    while (hi < times.size() && times[hi] < t) ++hi;
    const size_t lo = hi - 1;
    const double w = (t - times[lo]) / (times[hi] - times[lo]);
    for (int k = 0; k < g.size(); ++k) {
        out.x[k] = (1.0 - w) * velocity[lo].x[k] + w * velocity[hi].x[k];
        out.y[k] = (1.0 - w) * velocity[lo].y[k] + w * velocity[hi].y[k];
    }
    return out;
}

Vec2 U1Solution::u1_point(double t, double x, double y) const {
    if (times.empty() || t > times.back() + 1e-14) return {0.0, 0.0};
    if (t <= times.front()) return sample_vector(velocity.front(), x, y, 1);
    size_t hi = 1;
    while (hi < times.size() && times[hi] < t) ++hi;
    if (hi >= times.size()) return sample_vector(velocity.back(), x, y, 1);
    const size_t lo = hi - 1;
    const double w = (t - times[lo]) / (times[hi] - times[lo]);
    const Vec2 a = sample_vector(velocity[lo], x, y, 1);
    const Vec2 b = sample_vector(velocity[hi], x, y, 1);
    return {(1.0 - w) * a.x + w * b.x, (1.0 - w) * a.y + w * b.y};
}

namespace {

// Semi-Lagrangian foot point for transport along the potential flow.
Vec2 foot_point(const PotentialFlow& pf, double t_new, double dt, Vec2 x) {
    auto vel = [&](double s, Vec2 p) { return pf.u0_point(t_new - s, p.x, p.y); };
    const Vec2 k1 = vel(0.0, x);
    const Vec2 k2 = vel(0.5 * dt, x - 0.5 * dt * k1);
    const Vec2 k3 = vel(0.5 * dt, x - 0.5 * dt * k2);
    const Vec2 k4 = vel(dt, x - dt * k3);
    return x - (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Vorticity lookup at a foot point: inflow value beyond the outlet, clamped
// sample along impermeable walls.
double omega_at_foot(const Domain& dom, const ScalarField& om, Vec2 foot, int order, bool limiter,
                     double inflow) {
    if (dom.phi_at(foot.x, foot.y) < 0.0) {
        if (on_sigma(dom, foot)) return inflow;
        // Graze of the impermeable wall: sample at the clamped position.
    }
    double v;
    if (limiter)
        v = sample_scalar(om, foot.x, foot.y, std::min(order, 3), true);
    else
        v = sample_scalar(om, foot.x, foot.y, order, false);
    return v;
}

} // namespace

U1Solution solve_u1_from_vorticity(std::shared_ptr<const Domain> domain, const PotentialFlow& pf,
                                   const ScalarField& omega0, double T, const U1Options& opts) {
    const Grid& g = *domain->grid;
    require_same_grid(g, *omega0.grid);
    U1Solution sol;
    sol.domain = domain;
    sol.max_abs_omega0 = linf_norm(omega0);
    sol.max_abs_omega_seen = sol.max_abs_omega0;

    const int n_steps = std::max(1, int(std::ceil(T / opts.dt)));
    const double dt = T / n_steps;
    const int n_ckpt = std::max(1, opts.checkpoints);
    const BoundaryField zero_trace = domain->boundary_zeros();

    ScalarField om = omega0;
    ScalarField om_new(domain->grid);
    sol.times.push_back(0.0);
    sol.velocity.push_back(velocity_from_vorticity(*domain, om, zero_trace));

    int next_ckpt = 1;
    for (int step = 1; step <= n_steps; ++step) {
        const double t_new = step * dt;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                if (!g.inside(i, j)) continue;
                const Vec2 foot = foot_point(pf, t_new, dt, {g.cx(i), g.cy(j)});
                om_new.at(i, j) = omega_at_foot(*domain, om, foot, opts.interp_order, opts.limiter,
                                                opts.inflow_vorticity);
            }
        std::swap(om.v, om_new.v);
        sol.max_abs_omega_seen = std::max(sol.max_abs_omega_seen, linf_norm(om));
        while (next_ckpt <= n_ckpt && t_new + 1e-12 >= T * next_ckpt / n_ckpt) {
            sol.times.push_back(t_new);
            sol.velocity.push_back(velocity_from_vorticity(*domain, om, zero_trace));
            ++next_ckpt;
        }
    }
    if (sol.times.back() < T) {
        sol.times.push_back(T);
        sol.velocity.push_back(velocity_from_vorticity(*domain, om, zero_trace));
    }
    sol.omega_final = om;
    return sol;
}

U1Solution solve_u1(std::shared_ptr<const Domain> domain, const PotentialFlow& pf,
                    const VectorField& u_star, double T, const U1Options& opts) {
    const ScalarField divu = div(u_star);
    const double tol = 1e-6 * std::max(1.0, linf_norm(u_star));
    // Divergence is checked away from the staircase cells, where the centered
    // operator is only first order.
    double worst = 0.0;
    const Grid& g = *domain->grid;
    for (int j = 1; j + 1 < g.ny; ++j)
        for (int i = 1; i + 1 < g.nx; ++i)
            if (g.inside(i, j) && g.inside(i + 1, j) && g.inside(i - 1, j) && g.inside(i, j + 1) &&
                g.inside(i, j - 1))
                worst = std::max(worst, std::abs(divu.at(i, j)));
    if (worst > tol)
        throw DataError("solve_u1: initial field is not divergence-free (max " +
                        std::to_string(worst) + ")");
    return solve_u1_from_vorticity(domain, pf, curl2d(u_star), T, opts);
}

double verify_null(const VectorField& u1_final) { return l2_norm(u1_final); }

} // namespace nsctrl
