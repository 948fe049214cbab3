#pragma once

#include "euler_stage.hpp"
#include "geometry.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace nsctrl {

struct LayerParams {
    double z_max = 22.0;  // fast-variable truncation
    int nz = 441;         // samples in z (odd, so refinement estimates work)
    int ns = 256;         // samples along each wall strip
    double decay_tol = 1e-8;
    int interp_order = 5; // semi-Lagrangian interpolation degree
    bool limiter = false;
    double theta = 0.5;   // fast-variable diffusion scheme; 1 = backward Euler
};

/// One wall strip of the corrector: the tangential amplitude a(s,z) with the
/// full vector reconstructed as a * tangent(s). Data layout is z-major:
/// a[k*ns + i] for s-index i, z-index k.
struct LayerStrip {
    int wall = 0;
    double s0 = 0.0, ds = 0.0;
    int ns = 0;
    std::vector<double> a;

    double at(int i, int k) const { return a[size_t(k) * ns + i]; }
    double& at(int i, int k) { return a[size_t(k) * ns + i]; }
    double s_of(int i) const { return s0 + i * ds; }
};

/// Corrector profile on all uncontrolled-wall strips of the extended domain.
/// Tangentiality is structural: only the tangential amplitude is stored.
struct BoundaryLayerProfile {
    std::shared_ptr<const Domain> domain;
    double t = 0.0;
    double z_max = 20.0;
    int nz = 0;
    double dz = 0.0;
    double decay_tol = 1e-8;
    std::vector<LayerStrip> strips;

    Vec2 wall_point(const LayerStrip& strip, double s) const;
    Vec2 tangent(const LayerStrip& strip, double s) const;
    Vec2 inward(const LayerStrip& strip, double s) const;
    /// Wall-coordinate interval lying on the physical domain's boundary.
    void omega_wall_range(const LayerStrip& strip, double* lo, double* hi) const;

    Vec2 reconstruct(int strip, int i, int k) const;
    double tail_max() const; // amplitude on the row below the z truncation
    double l2_total() const;
    /// L2(s,z) over the physical wall portion only (kitchen excluded).
    double l2_omega_wall() const;

    /// Profile interpolated at arbitrary (s, z); zero beyond the grid.
    double sample(int strip, double s, double z) const;

    void checkpoint(const std::string& path) const;
};

/// Builds the zero profile with strips along every uncontrolled wall,
/// extended across the outlet by the kitchen depth.
BoundaryLayerProfile make_layer_profile(std::shared_ptr<const Domain> domain,
                                        const LayerParams& params);

/// Advection/forcing coefficients of the layer equation. The potential flow
/// is separable, so every coefficient is eta(t) times a static profile.
struct LayerCoefficients {
    struct StripCoeffs {
        double s0 = 0.0, ds = 0.0;   // sampling grid along the strip
        std::vector<double> u_tan;   // wall-parallel advection factor
        std::vector<double> u_flat;  // fast-variable drift factor
        std::vector<double> stretch; // zeroth-order amplification factor
        std::vector<double> g0;      // wall Neumann data factor
    };
    std::vector<StripCoeffs> strips;
    TimeEnvelope envelope;
    double friction_alpha = 0.0;
    bool rectangle_reduced = false; // uniform advection, no drift, no stretching

    double eta(double t) const { return envelope.eta(t); }
    double shift(double t0, double t1) const { return envelope.integral(t1) - envelope.integral(t0); }
};

/// Samples the advecting field along the strips and assembles the layer
/// coefficients. The static shape must satisfy shape.n = 0 on the
/// uncontrolled wall; beyond the grid the wall values extend constantly.
LayerCoefficients build_layer_coefficients(const BoundaryLayerProfile& grid_template,
                                           const VectorField& u0_shape, double friction_alpha,
                                           const TimeEnvelope& envelope);

/// Tangential source in the layer equation, per (t, strip, s, z).
using KitchenSourceFn = std::function<double(double, int, double, double)>;

/// One time step: explicit semi-Lagrangian wall advection and fast-variable
/// drift, exact integrating factor for the stretching term, then implicit
/// fast-variable diffusion with the Neumann wall condition.
void step_layer(BoundaryLayerProfile& profile, const LayerCoefficients& coeffs,
                const KitchenSourceFn* source, double dt, const LayerParams& params);

/// Time step from t that advances the reduced conveyor by exactly one grid
/// cell (capped at dt_max): the wall advection then degenerates to an exact
/// shift with no interpolation error.
double conveyor_step_dt(const LayerCoefficients& coeffs, double t, double ds, double dt_max);

/// Drives step_layer with cell-synchronized steps until t_end.
void evolve_layer_synced(BoundaryLayerProfile& profile, const LayerCoefficients& coeffs,
                         const KitchenSourceFn* source, double t_end, const LayerParams& params,
                         double dt_max = 0.02);

/// Physical-space corrector at scale eps: sqrt(eps) a(t, s(x), d(x)/sqrt(eps))
/// times the wall tangent, summed over strips, zero beyond the resolved
/// fast-variable range.
VectorField sample_layer_in_domain(const BoundaryLayerProfile& profile, const Domain& domain,
                                   double eps);

/// Corrector vector at an arbitrary physical point (used for outlet traces).
Vec2 sample_layer_point(const BoundaryLayerProfile& profile, double eps, double x, double y);

} // namespace nsctrl
