#pragma once

#include "geometry.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <memory>
#include <mutex>
#include <vector>

namespace nsctrl {

/// Compact five-point solvers on a masked grid, factored once per domain.
/// Boundary conditions are applied per boundary face:
///   - neumann: prescribed flux, singular system pinned at one cell and
///     returned with zero mean; small compatibility defects are repaired by
///     subtracting the mean from the right-hand side, larger ones are errors.
///   - dirichlet: face values imposed through second-order ghosts.
///   - sigma_grounded: homogeneous Dirichlet on controlled faces, prescribed
///     flux elsewhere (no null space as soon as a controlled face exists).
class PoissonSolver {
public:
    PoissonSolver(std::shared_ptr<const Grid> grid, const std::vector<BoundaryFace>& faces);

    ScalarField solve_neumann(const ScalarField& rhs, const BoundaryField& flux,
                              double tol_compat = 1e-10) const;
    ScalarField solve_dirichlet(const ScalarField& rhs, const BoundaryField& values) const;

    /// Solves the composite projection operator (face-averaged divergence of
    /// the centered cell gradient) exactly; rhs must sum to zero.
    ScalarField solve_projection(const ScalarField& rhs) const;

    /// Max-norm finite-volume residual |lap(s) - rhs| of a candidate solution
    /// under the prescribed-flux (Neumann) boundary treatment.
    double residual_inf_neumann(const ScalarField& s, const ScalarField& rhs,
                                const BoundaryField& flux) const;

    /// Compressed row indexing shared with other solvers on the same mask.
    const std::vector<int>& cells() const { return cells_; }     // row -> grid index
    const std::vector<int>& row_of() const { return row_of_; }   // grid index -> row or -1
    int rows() const { return int(cells_.size()); }
    bool has_sigma_faces() const { return has_sigma_; }

private:
    struct Stencil;
    std::shared_ptr<const Grid> grid_;
    std::vector<BoundaryFace> faces_;
    std::vector<int> cells_, row_of_;
    std::vector<std::vector<int>> cell_faces_; // row -> face indices
    bool has_sigma_ = false;

    // Factorizations are built on first use; the once-flags keep lazy
    // construction safe under concurrent readers of an immutable Domain.
    mutable std::once_flag neumann_flag_, dirichlet_flag_, projection_flag_;
    mutable Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> neumann_, dirichlet_;
    mutable Eigen::SparseLU<Eigen::SparseMatrix<double>> projection_;

    void assemble(Eigen::SparseMatrix<double>& m, bool dirichlet_all) const;
    void assemble_projection(Eigen::SparseMatrix<double>& m) const;
    void ensure_neumann() const;
    void ensure_dirichlet() const;
    void ensure_projection() const;
};

/// Harmonic-style Neumann solve on the domain grid (zero-mean result).
ScalarField solve_neumann_poisson(const Domain& domain, const ScalarField& rhs,
                                  const BoundaryField& flux, double tol_compat = 1e-10);

enum class SigmaMode {
    free_trace, // controlled faces keep the field's own trace, balanced to zero net flux
    wall        // controlled faces treated like the uncontrolled wall (flux target zero)
};

/// Normal-trace targets for the projection: zero on uncontrolled faces; on
/// controlled faces either zero (wall) or the extrapolated trace of v with
/// the net flux spread uniformly so the targets balance exactly.
BoundaryField projection_targets(const Domain& domain, const VectorField& v, SigmaMode mode);

/// Finite-volume divergence: interior faces average adjacent cells, boundary
/// faces carry the prescribed targets. Summed over cells it telescopes to the
/// net target flux, so balanced targets give exactly compatible data.
ScalarField fv_divergence(const Domain& domain, const VectorField& v,
                          const BoundaryField& targets);

/// Projection: returns v - grad(q) with the finite-volume divergence against
/// `targets` solved to machine level (the composite operator is factored
/// exactly). Targets must balance to zero net flux.
VectorField leray_project(const Domain& domain, const VectorField& v,
                          const BoundaryField& targets, double tol = 1e-8);
VectorField leray_project(const Domain& domain, const VectorField& v,
                          SigmaMode mode = SigmaMode::free_trace, double tol = 1e-8);

/// Stream-function reconstruction of a divergence-free field from vorticity
/// and a prescribed normal trace (counterclockwise circulation must vanish).
VectorField velocity_from_vorticity(const Domain& domain, const ScalarField& omega,
                                    const BoundaryField& normal_trace);

} // namespace nsctrl
