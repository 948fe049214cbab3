#pragma once

#include "geometry.hpp"
#include "poisson.hpp"

#include <memory>
#include <vector>

namespace nsctrl {

enum class EnvelopeProfile { bump, sine };

/// Smooth amplitude eta(t) on [0,T] with eta(0)=eta(T)=0 and a prescribed
/// time integral ("conveyor mass"). Clamped to exactly zero outside (0,T).
struct TimeEnvelope {
    double T = 1.0;
    double mass = 0.0;
    EnvelopeProfile profile = EnvelopeProfile::sine;
    double amplitude = 0.0;

    double eta(double t) const;
    double eta_dot(double t) const;
    /// Running integral of eta from 0 to t; H(T) == mass.
    double integral(double t) const;
};

TimeEnvelope build_envelope(double T, double mass, EnvelopeProfile profile);

/// Potential conveyor flow u0(t,x) = eta(t) grad(alpha), alpha harmonic with
/// zero flux through the uncontrolled wall.
struct PotentialFlow {
    std::shared_ptr<const Domain> domain;
    TimeEnvelope envelope;
    ScalarField alpha_pot;
    VectorField alpha_grad;

    VectorField u0_at(double t) const;
    ScalarField p0_at(double t) const;
    Vec2 u0_point(double t, double x, double y) const;
    Vec2 shape_point(double x, double y) const; // grad(alpha) sampled off-grid
};

PotentialFlow build_potential_flow(std::shared_ptr<const Domain> domain,
                                   const TimeEnvelope& envelope,
                                   const BoundaryField& sigma_flux);

/// Canonical outlet flux profiles: the rectangle conveyor (unit horizontal
/// flow when both vertical walls are controlled) and a zero-net dipole on
/// the disk arc.
BoundaryField make_conveyor_flux(const Domain& domain);

struct FlushSample {
    Vec2 seed;
    bool exited = false;
    double exit_time = 0.0;
    double exit_speed = 0.0;
};

struct FlushReport {
    std::vector<FlushSample> samples;
    bool flushed = false;
    double worst_exit_time = 0.0;

    void to_csv(const std::string& path) const;
};

/// Integrates seed particles along u0 with RK4 and records the first outlet
/// crossing. A particle leaving the extended domain without crossing the
/// outlet is a geometry error.
FlushReport trace_flow(const PotentialFlow& pf, const std::vector<Vec2>& seeds, double T,
                       double dt);

/// Regular lattice of interior seed points, margin cells away from the wall.
std::vector<Vec2> seed_lattice(const Domain& domain, int per_side);

struct U1Options {
    double dt = 2.5e-3;
    int interp_order = 5;    // vorticity interpolation degree (1, 3 or 5)
    bool limiter = false;    // clamp interpolated vorticity to local range
    int checkpoints = 64;    // stored velocity reconstructions across [0,T]
    double inflow_vorticity = 0.0;
};

/// Linearized transport solution: vorticity advected along u0, velocity
/// recovered from vorticity with zero prescribed normal trace.
struct U1Solution {
    std::shared_ptr<const Domain> domain;
    std::vector<double> times;          // checkpoint times, ascending
    std::vector<VectorField> velocity;  // reconstructed u1 at checkpoint times
    ScalarField omega_final;
    double max_abs_omega0 = 0.0;
    double max_abs_omega_seen = 0.0;

    /// Piecewise-linear interpolation between checkpoints; zero after T.
    VectorField u1_at(double t) const;
    Vec2 u1_point(double t, double x, double y) const;
};

U1Solution solve_u1(std::shared_ptr<const Domain> domain, const PotentialFlow& pf,
                    const VectorField& u_star, double T, const U1Options& opts = {});

/// Same entry point fed directly with initial vorticity (the velocity field
/// u_star is implied by the zero-trace reconstruction).
U1Solution solve_u1_from_vorticity(std::shared_ptr<const Domain> domain, const PotentialFlow& pf,
                                   const ScalarField& omega0, double T,
                                   const U1Options& opts = {});

/// L2 norm of the final linearized field.
double verify_null(const VectorField& u1_final);

} // namespace nsctrl
