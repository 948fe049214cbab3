#include "wpd.hpp"

#include "io.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cmath>

namespace nsctrl {

namespace {
constexpr double kPi = 3.14159265358979323846;

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// Composite Simpson of fn over [a,b] with n (odd) samples.
template <class Fn>
double simpson(Fn fn, double a, double b, int n) {
    if (n % 2 == 0) ++n;
    const double h = (b - a) / (n - 1);
    double acc = fn(a) + fn(b);
    for (int i = 1; i < n - 1; ++i) acc += fn(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

} // namespace

double MomentVector::max_abs_on_wall(const BoundaryLayerProfile& profile, int k) const {
    double worst = 0.0;
    for (size_t sidx = 0; sidx < profile.strips.size(); ++sidx) {
        const LayerStrip& st = profile.strips[sidx];
        double lo, hi;
        profile.omega_wall_range(st, &lo, &hi);
        for (int i = 0; i < st.ns; ++i) {
            const double s = st.s_of(i);
            if (s < lo || s > hi) continue;
            worst = std::max(worst, std::abs(m[sidx][k][i]));
        }
    }
    return worst;
}

MomentVector compute_moments(const BoundaryLayerProfile& profile, int K) {
    if (K < 0) throw ConfigError("moment order must be non-negative");
    const int nz = profile.nz;
    const double dz = profile.dz;
    const double tail = profile.tail_max();
    const double tail_bound = tail * std::pow(profile.z_max, K + 1);
    if (tail_bound > 1e-2)
        throw RangeError("weighted moment tail " + std::to_string(tail_bound) +
                         " is not negligible: raise z_max or lower K");
    MomentVector out;
    out.K = K;
    out.m.resize(profile.strips.size());
    std::vector<std::vector<double>> zk(K + 1, std::vector<double>(nz, 1.0));
    for (int k = 1; k <= K; ++k)
        for (int q = 0; q < nz; ++q) zk[k][q] = zk[k - 1][q] * (q * dz);
    std::vector<double> col(nz);
    for (size_t sidx = 0; sidx < profile.strips.size(); ++sidx) {
        const LayerStrip& st = profile.strips[sidx];
        out.m[sidx].assign(K + 1, std::vector<double>(st.ns, 0.0));
        for (int i = 0; i < st.ns; ++i) {
            for (int k = 0; k <= K; ++k) {
                for (int q = 0; q < nz; ++q) col[q] = zk[k][q] * st.at(i, q);
                double err = 0.0;
                util::trapezoid_refined(col.data(), nz, dz, &err);
                // The discrete layer flow conserves exactly the trapezoid
                // functionals, so they are the moments of record; the
                // refinement difference is kept as the quadrature error bar.
                out.m[sidx][k][i] = util::trapezoid(col.data(), nz, dz);
                out.quad_error_bound = std::max(out.quad_error_bound, err + tail_bound);
            }
        }
    }
    return out;
}

MomentOde::MomentOde(const LayerCoefficients& coeffs, const KitchenSourceFn* zeta, int K,
                     double z_max, int nz_quadrature)
    : coeffs_(coeffs), K_(K), z_max_(z_max), nzq_(nz_quadrature | 1) {
    if (!coeffs.rectangle_reduced)
        throw UnsupportedScenarioError(
            "moment transport is validated for the reduced conveyor coefficients only");
    if (K < 0) throw ConfigError("moment order must be non-negative");
    u_tan_ = coeffs.strips.empty() ? 1.0 : coeffs.strips[0].u_tan[0];
    if (zeta) zeta_ = *zeta;
}

double MomentOde::characteristic_position(double sigma_end, double t_end, double t) const {
    return sigma_end - u_tan_ * (coeffs_.envelope.integral(t_end) - coeffs_.envelope.integral(t));
}

double MomentOde::g_at(int strip, double t, double s) const {
    const auto& sc = coeffs_.strips[strip];
    const double sc_clamped = std::clamp(s, sc.s0, sc.s0 + (int(sc.g0.size()) - 1) * sc.ds);
    const double g = util::interp_uniform(sc.g0.data(), int(sc.g0.size()), sc.s0, sc.ds,
                                          sc_clamped, 3, 0.0);
    return coeffs_.eta(t) * g;
}

double MomentOde::zeta_moment(int strip, int k, double t, double s) const {
    if (!zeta_) return 0.0;
    const auto& fn = *zeta_;
    return simpson(
        [&](double z) { return (k == 0 ? 1.0 : std::pow(z, k)) * fn(t, strip, s, z); }, 0.0,
        z_max_, nzq_);
}

void MomentOde::rhs(int strip, double t, double s, const std::vector<double>& m, double trace,
                    std::vector<double>* out) const {
    out->assign(K_ + 1, 0.0);
    (*out)[0] = -g_at(strip, t, s) + zeta_moment(strip, 0, t, s);
    if (K_ >= 1) (*out)[1] = trace + zeta_moment(strip, 1, t, s);
    for (int k = 2; k <= K_; ++k)
        (*out)[k] = k * (k - 1) * m[k - 2] + zeta_moment(strip, k, t, s);
}

std::vector<double> MomentOde::integrate(int strip, double sigma_end, double t0, double t1,
                                         const std::vector<double>& m_init,
                                         const std::function<double(double)>* trace_fn,
                                         int nsteps) const {
    std::vector<double> m = m_init;
    m.resize(K_ + 1, 0.0);
    const double dt = (t1 - t0) / nsteps;
    std::vector<double> k1, k2, k3, k4, tmp(K_ + 1);
    for (int n = 0; n < nsteps; ++n) {
        const double t = t0 + n * dt;
        auto eval = [&](double tt, const std::vector<double>& mm, std::vector<double>* kk) {
            const double s = characteristic_position(sigma_end, t1, tt);
            const double tr = trace_fn ? (*trace_fn)(tt) : 0.0;
            rhs(strip, tt, s, mm, tr, kk);
        };
        eval(t, m, &k1);
        for (int q = 0; q <= K_; ++q) tmp[q] = m[q] + 0.5 * dt * k1[q];
        eval(t + 0.5 * dt, tmp, &k2);
        for (int q = 0; q <= K_; ++q) tmp[q] = m[q] + 0.5 * dt * k2[q];
        eval(t + 0.5 * dt, tmp, &k3);
        for (int q = 0; q <= K_; ++q) tmp[q] = m[q] + dt * k3[q];
        eval(t + dt, tmp, &k4);
        for (int q = 0; q <= K_; ++q)
            m[q] += dt / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
    }
    return m;
}

MomentOde moment_dynamics(const LayerCoefficients& coeffs, const KitchenSourceFn* zeta, int K) {
    return MomentOde(coeffs, zeta, K, 20.0, 801);
}

namespace {

// Normalized bump on (lo, hi).
struct SupportBump {
    double lo, hi, inv_norm;
    SupportBump(double l, double h) : lo(l), hi(h) {
        const double raw = simpson([](double tau) { return shape(tau); }, 0.0, 1.0, 2001);
        inv_norm = 1.0 / (raw * (hi - lo));
    }
    static double shape(double tau) {
        if (tau <= 0.0 || tau >= 1.0) return 0.0;
        return std::exp(-1.0 / (tau * (1.0 - tau)));
    }
    double operator()(double s) const {
        if (s <= lo || s >= hi) return 0.0;
        return shape((s - lo) / (hi - lo)) * inv_norm;
    }
};

// Wall trace of the Neumann-heat-evolved basis profile z^q e^-z, tabulated
// over the elapsed time, plus its running integral.
struct TraceKernel {
    std::vector<double> tau, T, G;

    TraceKernel(int q, double horizon) {
        const int n = 1024;
        tau.resize(n);
        T.resize(n);
        G.resize(n);
        for (int i = 0; i < n; ++i) {
            tau[i] = horizon * i / (n - 1);
            T[i] = trace_value(q, tau[i]);
        }
        G[0] = 0.0;
        for (int i = 1; i < n; ++i)
            G[i] = G[i - 1] + 0.5 * (T[i - 1] + T[i]) * (tau[i] - tau[i - 1]);
    }
    static double trace_value(int q, double t) {
        if (t < 1e-6) return q == 0 ? 1.0 : 0.0;
        const double c = 1.0 / std::sqrt(kPi * t);
        return simpson(
            [&](double y) { return c * std::exp(-y * y / (4.0 * t)) * std::pow(y, q) * std::exp(-y); },
            0.0, 40.0, 4001);
    }
    double g_of(double t) const {
        if (t <= 0.0) return 0.0;
        const double step = tau[1] - tau[0];
        const double si = std::min(t / step, double(tau.size() - 1));
        const int i = std::min(int(si), int(tau.size()) - 2);
        const double f = si - i;
        return G[i] + f * (G[i + 1] - G[i]);
    }
};

} // namespace

double KitchenControl::eval(double t, int strip, double s, double z) const {
    if (c.empty()) return 0.0;
    if (s <= support_lo || s >= support_hi) return 0.0;
    const double eta = envelope.eta(t);
    if (eta == 0.0) return 0.0;
    const double tau = (s - support_lo) / (support_hi - support_lo);
    const double bump_s = std::exp(-1.0 / (tau * (1.0 - tau))) * bump_inv_norm;
    const double sigma = s + u_tan * (envelope.mass - envelope.integral(t));
    const double sigma_rel = sigma - sigma0[strip];
    if (sigma_rel < 0.0 || sigma_rel > (nsigma[strip] - 1) * dsigma[strip]) return 0.0;
    double acc = 0.0;
    double zp = 1.0;
    for (size_t j = 0; j < basis_pow.size(); ++j) {
        const double cj = util::interp_uniform(c[strip][j].data(), nsigma[strip], 0.0,
                                               dsigma[strip], sigma_rel, 3, 0.0);
        acc += cj * zp;
        zp *= z;
    }
    return eta * bump_s * acc * std::exp(-z);
}

KitchenSourceFn KitchenControl::as_fn() const {
    const KitchenControl copy = *this;
    return [copy](double t, int strip, double s, double z) { return copy.eval(t, strip, s, z); };
}

bool KitchenControl::is_zero() const {
    for (const auto& strip : c)
        for (const auto& cj : strip)
            for (double v : cj)
                if (v != 0.0) return false;
    return true;
}

double KitchenControl::l2_cost() const {
    // Injection coefficients integrated over the wall: a scale for comparing
    // designs, not a physical energy.
    double acc = 0.0;
    for (size_t strip = 0; strip < c.size(); ++strip)
        for (size_t j = 0; j < c[strip].size(); ++j)
            for (int i = 0; i < nsigma[strip]; ++i)
                acc += c[strip][j][i] * c[strip][j][i] * dsigma[strip];
    return std::sqrt(acc);
}

void KitchenControl::checkpoint(const std::string& path) const {
    for (size_t strip = 0; strip < c.size(); ++strip)
        for (size_t j = 0; j < c[strip].size(); ++j)
            dump_write(path + ".strip" + std::to_string(strip) + ".basis" + std::to_string(j),
                       {std::int64_t(nsigma[strip])}, c[strip][j].data());
}

namespace {

// Evolve a fresh layer under the coefficients (and optional source) to T,
// with cell-synchronized conveyor steps (exact shifts, no transport smear).
BoundaryLayerProfile evolve_layer(const BoundaryLayerProfile& grid_template,
                                  const LayerCoefficients& coeffs, const KitchenSourceFn* source,
                                  double T, const LayerParams& layer_params, double dt_max) {
    BoundaryLayerProfile p = grid_template;
    for (auto& st : p.strips) std::fill(st.a.begin(), st.a.end(), 0.0);
    p.t = 0.0;
    evolve_layer_synced(p, coeffs, source, T, layer_params, dt_max);
    return p;
}

} // namespace

KitchenControl design_kitchen_control(const BoundaryLayerProfile& grid_template,
                                      const LayerCoefficients& coeffs, double T, int K,
                                      const LayerParams& layer_params, const WpdParams& params) {
    if (K < 0 || K > params.K_max)
        throw ConfigError("moment order K=" + std::to_string(K) + " outside the supported range 0.." +
                          std::to_string(params.K_max));
    if (!coeffs.rectangle_reduced)
        throw UnsupportedScenarioError("kitchen design requires the reduced conveyor scenario");
    const Domain& dom = *grid_template.domain;
    if (!dom.spec.sigma_left)
        throw UnsupportedScenarioError("kitchen design needs the upstream outlet wall controlled");
    if (!(params.support_lo < params.support_hi && params.support_hi < 0.0))
        throw ConfigError("kitchen support must satisfy lo < hi < 0");
    for (const auto& st : grid_template.strips)
        if (params.support_lo <= st.s0)
            throw ConfigError("kitchen support extends beyond the conveyor strip");

    const double u_tan = coeffs.strips[0].u_tan[0];
    if (u_tan <= 0.0)
        throw UnsupportedScenarioError("kitchen design assumes a positive conveyor direction");
    const TimeEnvelope& env = coeffs.envelope;
    const double sweep = u_tan * env.mass;
    const double L = dom.spec.length;
    // Every wall position must see the full source sweep; the fade region
    // past the wall extends only as far as the partial sweep reaches.
    if (sweep + params.support_lo < L) {
        const double covered = sweep + params.support_lo;
        throw InfeasibleError("conveyor mass covers wall positions up to " +
                              std::to_string(covered) + " < " + std::to_string(L) +
                              ": raise the envelope mass");
    }
    const double fade_end = std::min(L + 0.8, sweep + params.support_hi - 0.15);
    if (fade_end < L + 0.1)
        throw InfeasibleError("no room for the downstream fade: raise the envelope mass");

    KitchenControl ctl;
    ctl.support_lo = params.support_lo;
    ctl.support_hi = params.support_hi;
    ctl.K = K;
    ctl.T = T;
    ctl.envelope = env;
    ctl.u_tan = u_tan;
    for (int j = 0; j <= K; ++j) ctl.basis_pow.push_back(j);
    const int nb = K + 1;

    const SupportBump bump(params.support_lo, params.support_hi);
    ctl.bump_inv_norm = bump.inv_norm;
    std::vector<TraceKernel> kernels;
    if (K >= 1)
        for (int j = 0; j <= K; ++j) kernels.emplace_back(j, T);

    // Reference moments of the uncontrolled layer.
    const BoundaryLayerProfile ref =
        evolve_layer(grid_template, coeffs, nullptr, T, layer_params, params.design_dt);
    MomentVector m_ref = compute_moments(ref, K);

    // Response matrix per wall position: injected coefficient -> final moment.
    auto response = [&](double sigma, Eigen::MatrixXd* A) {
        A->setZero(nb, nb);
        // Quadratures of eta(t) b(s_sigma(t)) weighted by 1, (T-t), G_j(T-t).
        const int nt = 2001;
        double w0 = 0.0, j_acc = 0.0;
        std::vector<double> gw(nb, 0.0);
        const double h = T / (nt - 1);
        for (int n = 0; n < nt; ++n) {
            const double t = n * h;
            const double s = sigma - u_tan * (env.mass - env.integral(t));
            const double w = env.eta(t) * bump(s) * ((n == 0 || n == nt - 1) ? 0.5 : 1.0) * h;
            if (w == 0.0) continue;
            w0 += w;
            j_acc += w * (T - t);
            if (K >= 1)
                for (int j = 0; j < nb; ++j) gw[j] += w * kernels[j].g_of(T - t);
        }
        for (int j = 0; j < nb; ++j) {
            (*A)(0, j) = factorial(ctl.basis_pow[j]) * w0;
            if (K >= 1) (*A)(1, j) = factorial(ctl.basis_pow[j] + 1) * w0 + gw[j];
            if (K >= 2) (*A)(2, j) = factorial(ctl.basis_pow[j] + 2) * w0 + 2.0 * factorial(ctl.basis_pow[j]) * j_acc;
        }
    };

    // Smooth taper of the targets beyond the physical wall. Gentle fades keep
    // the injected field benign for the wall advection.
    auto taper = [&](double sigma) {
        const double f = params.feather;
        if (sigma < -f || sigma > fade_end) return 0.0;
        if (sigma < 0.0) return util::smoothstep5((sigma + f) / f);
        if (sigma > L) return util::smoothstep5((fade_end - sigma) / (fade_end - L));
        return 1.0;
    };

    // Initial design and tables.
    ctl.c.resize(grid_template.strips.size());
    ctl.sigma0.resize(grid_template.strips.size());
    ctl.dsigma.resize(grid_template.strips.size());
    ctl.nsigma.resize(grid_template.strips.size());
    Eigen::MatrixXd A(nb, nb);
    Eigen::VectorXd R(nb);
    for (size_t sidx = 0; sidx < grid_template.strips.size(); ++sidx) {
        const LayerStrip& st = grid_template.strips[sidx];
        ctl.sigma0[sidx] = st.s0;
        ctl.dsigma[sidx] = st.ds;
        ctl.nsigma[sidx] = st.ns;
        ctl.c[sidx].assign(nb, std::vector<double>(st.ns, 0.0));
        for (int i = 0; i < st.ns; ++i) {
            const double sigma = st.s_of(i);
            const double tp = taper(sigma);
            if (tp == 0.0) continue;
            response(sigma, &A);
            if (std::abs(A.determinant()) < 1e-12)
                throw InfeasibleError("singular injection basis at wall position " +
                                      std::to_string(sigma));
            for (int k = 0; k < nb; ++k) R[k] = -m_ref.m[sidx][k][i];
            const Eigen::VectorXd cvec = A.partialPivLu().solve(R);
            for (int j = 0; j < nb; ++j) ctl.c[sidx][j][i] = tp * cvec[j];
        }
    }

    // Polish against the full layer evolution: damped per-position Newton
    // corrections from the response model.
    for (int polish = 0; polish < params.max_polish; ++polish) {
        const KitchenSourceFn fn = ctl.as_fn();
        const BoundaryLayerProfile sim =
            evolve_layer(grid_template, coeffs, &fn, T, layer_params, params.design_dt);
        const MomentVector m_sim = compute_moments(sim, K);
        double worst = 0.0;
        for (int k = 0; k <= K; ++k) worst = std::max(worst, m_sim.max_abs_on_wall(sim, k));
        if (std::getenv("NSCTRL_DESIGN_TRACE"))
            std::fprintf(stderr, "design polish %d: residual %.3e\n", polish, worst);
        if (worst < 0.5 * params.tol_moment) break;
        for (size_t sidx = 0; sidx < grid_template.strips.size(); ++sidx) {
            const LayerStrip& st = grid_template.strips[sidx];
            for (int i = 0; i < st.ns; ++i) {
                const double tp = taper(st.s_of(i));
                if (tp == 0.0) continue;
                response(st.s_of(i), &A);
                for (int k = 0; k < nb; ++k) R[k] = m_sim.m[sidx][k][i];
                const Eigen::VectorXd delta = A.partialPivLu().solve(R);
                for (int j = 0; j < nb; ++j) ctl.c[sidx][j][i] -= 0.75 * tp * delta[j];
            }
        }
    }
    return ctl;
}

DecayReport relax_heat(const BoundaryLayerProfile& v_bar, double duration,
                       const std::vector<double>& sample_times,
                       const std::vector<double>& snapshot_times, const RelaxParams& params) {
    if (duration <= 0.0) throw ConfigError("relaxation duration must be positive");
    // Regrid onto the (larger) relaxation fast-variable range.
    // Extend the fast-variable range by zero padding at the source spacing:
    // node values are copied exactly, so the trapezoid moments carried by the
    // discrete flow are preserved bit for bit.
    BoundaryLayerProfile p;
    p.domain = v_bar.domain;
    p.t = v_bar.t;
    p.dz = v_bar.dz;
    p.nz = std::max(v_bar.nz, int(std::ceil(params.z_max / v_bar.dz)) + 1) | 1;
    p.z_max = (p.nz - 1) * p.dz;
    p.decay_tol = params.decay_tol;
    for (size_t sidx = 0; sidx < v_bar.strips.size(); ++sidx) {
        LayerStrip st;
        st.wall = v_bar.strips[sidx].wall;
        st.s0 = v_bar.strips[sidx].s0;
        st.ds = v_bar.strips[sidx].ds;
        st.ns = v_bar.strips[sidx].ns;
        st.a.assign(size_t(st.ns) * p.nz, 0.0);
        for (int k = 0; k < v_bar.nz && k < p.nz; ++k)
            for (int i = 0; i < st.ns; ++i)
                st.a[size_t(k) * st.ns + i] = v_bar.strips[sidx].at(i, k);
        p.strips.push_back(std::move(st));
    }

    // Event times, all relative to the start of the relaxation.
    std::vector<double> events;
    for (double t : sample_times)
        if (t > 0.0 && t <= duration + 1e-9) events.push_back(t);
    for (double t : snapshot_times)
        if (t > 0.0 && t <= duration + 1e-9) events.push_back(t);
    events.push_back(duration);
    std::sort(events.begin(), events.end());

    DecayReport report;
    report.fit_lo = params.fit_lo;
    report.fit_hi = params.fit_hi;
    report.moments.assign(params.K + 1, {});

    auto record = [&](double t_rel) {
        report.times.push_back(t_rel);
        report.l2z.push_back(p.l2_omega_wall());
        const MomentVector mv = compute_moments(p, params.K);
        for (int k = 0; k <= params.K; ++k)
            report.moments[k].push_back(mv.max_abs_on_wall(p, k));
    };
    auto want_snapshot = [&](double t_rel) {
        for (double t : snapshot_times)
            if (std::abs(t - t_rel) <= 1e-9 * std::max(1.0, t)) return true;
        return false;
    };

    const int nz = p.nz;
    std::vector<double> lo(nz), di(nz), up(nz), col(nz), scratch(nz);
    double t_rel = 0.0;
    record(0.0);
    if (want_snapshot(0.0)) report.snapshots.emplace_back(p.t, p);
    size_t next_event = 0;
    while (t_rel < duration - 1e-12) {
        while (next_event < events.size() && events[next_event] <= t_rel + 1e-12) ++next_event;
        const double target = next_event < events.size() ? events[next_event] : duration;
        double dt = std::max(params.dt0, t_rel / params.dt_growth_time);
        dt = std::min(dt, target - t_rel);
        const double lam = dt / (p.dz * p.dz);
        for (auto& st : p.strips) {
            for (int i = 0; i < st.ns; ++i) {
                for (int k = 0; k < nz - 1; ++k) {
                    col[k] = st.at(i, k);
                    lo[k] = -lam;
                    di[k] = 1.0 + 2.0 * lam;
                    up[k] = -lam;
                }
                up[0] = -2.0 * lam;
                util::tridiag_solve(lo.data(), di.data(), up.data(), col.data(), scratch.data(),
                                    nz - 1);
                for (int k = 0; k < nz - 1; ++k) st.at(i, k) = col[k];
                st.at(i, nz - 1) = 0.0;
            }
        }
        t_rel += dt;
        p.t += dt;
        if (p.tail_max() > p.decay_tol)
            throw RangeError("relaxation amplitude reached the fast-variable truncation: raise z_max");
        if (next_event < events.size() && std::abs(t_rel - events[next_event]) <= 1e-12) {
            bool is_sample = std::abs(t_rel - duration) <= 1e-12;
            for (double t : sample_times)
                if (std::abs(t - t_rel) <= 1e-9 * std::max(1.0, t)) is_sample = true;
            if (is_sample) record(t_rel);
            if (want_snapshot(t_rel)) report.snapshots.emplace_back(p.t, p);
        }
    }
    int positive = 0;
    for (size_t q = 0; q < report.times.size(); ++q)
        if (report.times[q] >= params.fit_lo && report.times[q] <= std::min(params.fit_hi, duration) &&
            report.l2z[q] > 0.0)
            ++positive;
    if (positive >= 2) {
        double resid = 0.0;
        report.slope = util::fit_loglog_slope(report.times, report.l2z, params.fit_lo,
                                              std::min(params.fit_hi, duration), &resid);
        report.slope_residual = resid;
    }
    return report;
}

const BoundaryLayerProfile& DecayReport::snapshot_at(double t) const {
    for (const auto& [ts, prof] : snapshots)
        if (std::abs(ts - t) <= 1e-6 * std::max(1.0, std::abs(t))) return prof;
    throw RangeError("no relaxation snapshot stored at t = " + std::to_string(t));
}

double scaled_layer_norm(const DecayReport& report, const Domain& domain, double eps, double T) {
    if (eps <= 0.0) throw ConfigError("scaled_layer_norm requires eps > 0");
    const BoundaryLayerProfile& prof = report.snapshot_at(T / eps);
    return l2_norm(sample_layer_in_domain(prof, domain, eps));
}

void DecayReport::to_csv(const std::string& path) const {
    std::vector<std::string> cols = {"t", "l2z"};
    for (size_t k = 0; k < moments.size(); ++k) cols.push_back("m" + std::to_string(k));
    cols.push_back("in_fit_window");
    CsvWriter csv(path, cols);
    for (size_t n = 0; n < times.size(); ++n) {
        std::vector<double> row = {times[n], l2z[n]};
        for (const auto& mk : moments) row.push_back(mk[n]);
        row.push_back(times[n] >= fit_lo && times[n] <= fit_hi ? 1.0 : 0.0);
        csv.row(row);
    }
    csv.close();
}

} // namespace nsctrl
