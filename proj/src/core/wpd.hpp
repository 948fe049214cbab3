#pragma once

#include "boundary_layer.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace nsctrl {

/// Fast-variable moments m_k(s) = int z^k a(s,z) dz per strip, k = 0..K.
/// Quadrature is trapezoid with one Richardson refinement; the refinement
/// difference is recorded as the error estimate.
struct MomentVector {
    int K = 0;
    std::vector<std::vector<std::vector<double>>> m; // [strip][k][s-index]
    double quad_error_bound = 0.0;

    double max_abs_on_wall(const BoundaryLayerProfile& profile, int k) const;
};

MomentVector compute_moments(const BoundaryLayerProfile& profile, int K);

/// Transport ODEs for the moments along the conveyor characteristics,
/// valid for the reduced (uniform-advection) coefficient class.
class MomentOde {
public:
    MomentOde(const LayerCoefficients& coeffs, const KitchenSourceFn* zeta, int K, double z_max,
              int nz_quadrature);

    /// Wall position at time t of the characteristic that ends at sigma_end
    /// at time t_end.
    double characteristic_position(double sigma_end, double t_end, double t) const;

    /// Instantaneous right-hand sides at (t, s) for the moment stack m_0..m_K;
    /// `trace` supplies the wall-trace closure entering dm1/dt (0 if null).
    void rhs(int strip, double t, double s, const std::vector<double>& m, double trace,
             std::vector<double>* out) const;

    /// RK4 integration along a characteristic from t0 to t1.
    std::vector<double> integrate(int strip, double sigma_end, double t0, double t1,
                                  const std::vector<double>& m_init,
                                  const std::function<double(double)>* trace_fn,
                                  int nsteps) const;

    int order() const { return K_; }

private:
    LayerCoefficients coeffs_;
    std::optional<KitchenSourceFn> zeta_;
    int K_;
    double u_tan_;
    double z_max_;
    int nzq_;

    double g_at(int strip, double t, double s) const;
    double zeta_moment(int strip, int k, double t, double s) const;
};

/// Builds the moment transport model; scenarios outside the reduced
/// coefficient class are rejected.
MomentOde moment_dynamics(const LayerCoefficients& coeffs, const KitchenSourceFn* zeta, int K);

struct WpdParams {
    double support_lo = -0.7; // kitchen source interval, strictly outside the wall
    double support_hi = -0.2;
    int K_max = 2;
    double tol_moment = 1e-6;
    double design_dt = 0.02; // step cap; stepping is cell-synchronized below it
    int max_polish = 8;
    double feather = 0.35; // upstream taper width of the targets
};

/// Compactly supported kitchen source: eta(t) b(s) sum_j c_j(sigma) z^j e^-z,
/// where sigma is the wall position the local characteristic reaches at the
/// design horizon.
struct KitchenControl {
    double support_lo = 0.0, support_hi = 0.0;
    int K = 0;
    double T = 0.0;
    TimeEnvelope envelope;
    double u_tan = 1.0;
    double bump_inv_norm = 0.0;
    std::vector<int> basis_pow; // consecutive exponents starting at zero
    // Per strip, per basis member: coefficient table on the strip s-grid.
    std::vector<std::vector<std::vector<double>>> c;
    std::vector<double> sigma0, dsigma;
    std::vector<int> nsigma;

    double eval(double t, int strip, double s, double z) const;
    KitchenSourceFn as_fn() const;
    /// Squared L2 of the injected source over (t, s, z), a cost diagnostic.
    double l2_cost() const;
    bool is_zero() const;
    void checkpoint(const std::string& path) const;
};

/// Designs the kitchen source so the wall moments m_0..m_K vanish at T,
/// verified and polished against the full layer evolution.
KitchenControl design_kitchen_control(const BoundaryLayerProfile& grid_template,
                                      const LayerCoefficients& coeffs, double T, int K,
                                      const LayerParams& layer_params, const WpdParams& params);

struct RelaxParams {
    double z_max = 80.0; // extended truncation; spacing is inherited from the state
    double dt0 = 5e-3;
    double dt_growth_time = 30.0; // dt ~ t / dt_growth_time once t is large
    double fit_lo = 10.0;
    double fit_hi = 1000.0;
    int K = 2;
    double decay_tol = 1e-7;
};

/// Free-heat relaxation record: wall norms, moment trajectories, the fitted
/// decay exponent, and profile snapshots at requested times.
struct DecayReport {
    std::vector<double> times;
    std::vector<double> l2z;                  // L2(s,z) over the physical wall
    std::vector<std::vector<double>> moments; // [k][sample] wall-max moment magnitude
    double slope = 0.0;
    double slope_residual = 0.0;
    double fit_lo = 0.0, fit_hi = 0.0;
    std::vector<std::pair<double, BoundaryLayerProfile>> snapshots;

    void to_csv(const std::string& path) const;
    const BoundaryLayerProfile& snapshot_at(double t) const;
};

/// Evolves the pure fast-variable heat equation from the given state for
/// `duration`, sampling norms/moments at `sample_times` and storing full
/// snapshots at `snapshot_times` (both relative to the start).
DecayReport relax_heat(const BoundaryLayerProfile& v_bar, double duration,
                       const std::vector<double>& sample_times,
                       const std::vector<double>& snapshot_times, const RelaxParams& params);

/// Physical-space norm of the scaled layer at the horizon T/eps, read from
/// the relaxation snapshots.
double scaled_layer_norm(const DecayReport& report, const Domain& domain, double eps, double T);

} // namespace nsctrl
