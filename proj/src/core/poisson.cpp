#include "poisson.hpp"

#include <cmath>

namespace nsctrl {

namespace {

// Face index relative to its owner cell: which neighbour is missing.
int face_dir(const Grid& g, const BoundaryFace& f) {
    if (f.face_normal.x > 0.5) return 0;  // +x
    if (f.face_normal.x < -0.5) return 1; // -x
    if (f.face_normal.y > 0.5) return 2;  // +y
    return 3;                             // -y
}

} // namespace

PoissonSolver::PoissonSolver(std::shared_ptr<const Grid> grid,
                             const std::vector<BoundaryFace>& faces)
    : grid_(std::move(grid)), faces_(faces) {
    const Grid& g = *grid_;
    row_of_.assign(g.size(), -1);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.inside(i, j)) {
                row_of_[g.idx(i, j)] = int(cells_.size());
                cells_.push_back(g.idx(i, j));
            }
    cell_faces_.assign(cells_.size(), {});
    for (size_t fi = 0; fi < faces_.size(); ++fi) {
        const auto& f = faces_[fi];
        const int r = row_of_[g.idx(f.ci, f.cj)];
        cell_faces_[r].push_back(int(fi));
        if (f.tag == BoundaryTag::controlled) has_sigma_ = true;
    }

}

void PoissonSolver::ensure_neumann() const {
    std::call_once(neumann_flag_, [this] {
        Eigen::SparseMatrix<double> m;
        assemble(m, false);
        // Symmetric pin of the first cell removes the constant null space.
        for (int k = 0; k < m.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
                if (it.row() == 0 || it.col() == 0)
                    it.valueRef() = (it.row() == it.col()) ? 1.0 : 0.0;
        m.prune(0.0);
        neumann_.compute(m);
        if (neumann_.info() != Eigen::Success)
            throw SolverError("Neumann Laplacian factorization failed");
    });
}

void PoissonSolver::ensure_dirichlet() const {
    std::call_once(dirichlet_flag_, [this] {
        Eigen::SparseMatrix<double> m;
        assemble(m, true);
        dirichlet_.compute(m);
        if (dirichlet_.info() != Eigen::Success)
            throw SolverError("Dirichlet Laplacian factorization failed");
    });
}

void PoissonSolver::ensure_projection() const {
    std::call_once(projection_flag_, [this] {
        Eigen::SparseMatrix<double> m;
        assemble_projection(m);
        projection_.compute(m);
        if (projection_.info() != Eigen::Success)
            throw SolverError("projection operator factorization failed");
    });
}

void PoissonSolver::assemble(Eigen::SparseMatrix<double>& m, bool dirichlet_all) const {
    const Grid& g = *grid_;
    const int n = rows();
    const double wx = 1.0 / (g.hx * g.hx);
    const double wy = 1.0 / (g.hy * g.hy);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(size_t(n) * 5);
    for (int r = 0; r < n; ++r) {
        const int k = cells_[r];
        const int i = k % g.nx;
        const int j = k / g.nx;
        double diag = 0.0;
        auto couple = [&](int ii, int jj, double w) {
            diag += w;
            trip.emplace_back(r, row_of_[g.idx(ii, jj)], -w);
        };
        if (g.inside(i + 1, j)) couple(i + 1, j, wx);
        if (g.inside(i - 1, j)) couple(i - 1, j, wx);
        if (g.inside(i, j + 1)) couple(i, j + 1, wy);
        if (g.inside(i, j - 1)) couple(i, j - 1, wy);
        if (dirichlet_all)
            for (int fi : cell_faces_[r]) {
                const int d = face_dir(g, faces_[fi]);
                diag += 2.0 * (d < 2 ? wx : wy);
            }
        trip.emplace_back(r, r, diag);
    }
    m.resize(n, n);
    m.setFromTriplets(trip.begin(), trip.end());
}

void PoissonSolver::assemble_projection(Eigen::SparseMatrix<double>& m) const {
    const Grid& g = *grid_;
    const int n = rows();
    // Centered gradient stencil of a cell along one axis, one-sided at mask
    // edges, accumulated into a dense local row.
    auto grad_stencil = [&](int i, int j, bool xdir, std::vector<std::pair<int, double>>& out) {
        const double h = xdir ? g.hx : g.hy;
        auto in = [&](int a) { return xdir ? g.inside(a, j) : g.inside(i, a); };
        auto id = [&](int a) { return xdir ? g.idx(a, j) : g.idx(i, a); };
        const int c = xdir ? i : j;
        const bool hm = in(c - 1), hp = in(c + 1);
        if (hm && hp) {
            out.emplace_back(id(c + 1), 0.5 / h);
            out.emplace_back(id(c - 1), -0.5 / h);
        } else if (hp && in(c + 2)) {
            out.emplace_back(id(c), -1.5 / h);
            out.emplace_back(id(c + 1), 2.0 / h);
            out.emplace_back(id(c + 2), -0.5 / h);
        } else if (hp) {
            out.emplace_back(id(c + 1), 1.0 / h);
            out.emplace_back(id(c), -1.0 / h);
        } else if (hm && in(c - 2)) {
            out.emplace_back(id(c), 1.5 / h);
            out.emplace_back(id(c - 1), -2.0 / h);
            out.emplace_back(id(c - 2), 0.5 / h);
        } else if (hm) {
            out.emplace_back(id(c), 1.0 / h);
            out.emplace_back(id(c - 1), -1.0 / h);
        }
    };
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<std::pair<int, double>> stencil;
    for (int r = 0; r < n; ++r) {
        const int k = cells_[r];
        const int i = k % g.nx;
        const int j = k / g.nx;
        const struct {
            int di, dj;
        } sides[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (const auto& s : sides) {
            const int ii = i + s.di, jj = j + s.dj;
            if (!g.inside(ii, jj)) continue; // boundary faces carry targets only
            const bool xdir = s.di != 0;
            const double sign = (s.di + s.dj) > 0 ? 1.0 : -1.0;
            const double w = 0.5 * sign * (xdir ? g.hy : g.hx) / g.cell_area();
            stencil.clear();
            grad_stencil(i, j, xdir, stencil);
            grad_stencil(ii, jj, xdir, stencil);
            for (const auto& [c, v] : stencil) trip.emplace_back(r, row_of_[c], w * v);
        }
    }
    m.resize(n, n);
    m.setFromTriplets(trip.begin(), trip.end());
    // Pin the first cell; the operator annihilates constants.
    for (int k = 0; k < m.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
            if (it.row() == 0) it.valueRef() = (it.col() == 0) ? 1.0 : 0.0;
    m.prune(0.0);
}

ScalarField PoissonSolver::solve_projection(const ScalarField& rhs) const {
    ensure_projection();
    require_same_grid(*grid_, *rhs.grid);
    Eigen::VectorXd b(rows());
    for (int r = 0; r < rows(); ++r) b[r] = rhs.v[cells_[r]];
    b[0] = 0.0;
    Eigen::VectorXd q = projection_.solve(b);
    if (projection_.info() != Eigen::Success) throw SolverError("projection solve failed");
    ScalarField out(rhs.grid);
    for (int r = 0; r < rows(); ++r) out.v[cells_[r]] = q[r];
    out.check_finite("solve_projection");
    return out;
}

ScalarField PoissonSolver::solve_neumann(const ScalarField& rhs, const BoundaryField& flux,
                                         double tol_compat) const {
    ensure_neumann();
    const Grid& g = *grid_;
    require_same_grid(g, *rhs.grid);
    if (flux.v.size() != faces_.size()) throw DataError("flux data does not match boundary faces");

    const double area = g.cell_area();
    double int_rhs = 0.0;
    for (int k : cells_) int_rhs += rhs.v[k] * area;
    double int_flux = 0.0;
    for (size_t fi = 0; fi < faces_.size(); ++fi) int_flux += flux.v[fi] * faces_[fi].len;
    const double defect = int_rhs - int_flux;
    const double scale = std::max({1.0, std::abs(int_rhs), std::abs(int_flux)});
    if (std::abs(defect) > tol_compat * scale)
        throw DataError("incompatible Neumann data: |rhs integral - boundary flux| = " +
                        std::to_string(std::abs(defect)));
    const double domain_area = area * rows();
    const double mean_correction = defect / domain_area;

    Eigen::VectorXd b(rows());
    for (int r = 0; r < rows(); ++r) b[r] = -(rhs.v[cells_[r]] - mean_correction);
    for (size_t fi = 0; fi < faces_.size(); ++fi) {
        const auto& f = faces_[fi];
        b[row_of_[g.idx(f.ci, f.cj)]] += flux.v[fi] * f.len / area;
    }
    b[0] = 0.0; // pinned cell
    Eigen::VectorXd s = neumann_.solve(b);
    if (neumann_.info() != Eigen::Success) throw SolverError("Neumann solve failed");
    s.array() -= s.mean();

    ScalarField out(rhs.grid, 0.0, rhs.units);
    for (int r = 0; r < rows(); ++r) out.v[cells_[r]] = s[r];
    out.check_finite("solve_neumann");
    return out;
}

ScalarField PoissonSolver::solve_dirichlet(const ScalarField& rhs,
                                           const BoundaryField& values) const {
    ensure_dirichlet();
    const Grid& g = *grid_;
    require_same_grid(g, *rhs.grid);
    if (values.v.size() != faces_.size())
        throw DataError("boundary values do not match boundary faces");
    const double wx = 1.0 / (g.hx * g.hx);
    const double wy = 1.0 / (g.hy * g.hy);
    Eigen::VectorXd b(rows());
    for (int r = 0; r < rows(); ++r) b[r] = -rhs.v[cells_[r]];
    for (size_t fi = 0; fi < faces_.size(); ++fi) {
        const auto& f = faces_[fi];
        const int d = face_dir(g, f);
        b[row_of_[g.idx(f.ci, f.cj)]] += 2.0 * values.v[fi] * (d < 2 ? wx : wy);
    }
    Eigen::VectorXd s = dirichlet_.solve(b);
    if (dirichlet_.info() != Eigen::Success) throw SolverError("Dirichlet solve failed");
    ScalarField out(rhs.grid, 0.0, rhs.units);
    for (int r = 0; r < rows(); ++r) out.v[cells_[r]] = s[r];
    out.check_finite("solve_dirichlet");
    return out;
}

double PoissonSolver::residual_inf_neumann(const ScalarField& s, const ScalarField& rhs,
                                           const BoundaryField& flux) const {
    const Grid& g = *grid_;
    const double wx = 1.0 / (g.hx * g.hx);
    const double wy = 1.0 / (g.hy * g.hy);
    const double area = g.cell_area();
    double worst = 0.0;
    for (int r = 0; r < rows(); ++r) {
        const int k = cells_[r];
        const int i = k % g.nx;
        const int j = k / g.nx;
        double lap = 0.0;
        if (g.inside(i + 1, j)) lap += (s.at(i + 1, j) - s.at(i, j)) * wx;
        if (g.inside(i - 1, j)) lap += (s.at(i - 1, j) - s.at(i, j)) * wx;
        if (g.inside(i, j + 1)) lap += (s.at(i, j + 1) - s.at(i, j)) * wy;
        if (g.inside(i, j - 1)) lap += (s.at(i, j - 1) - s.at(i, j)) * wy;
        for (int fi : cell_faces_[r]) lap += flux.v[fi] * faces_[fi].len / area;
        worst = std::max(worst, std::abs(lap - rhs.v[k]));
    }
    return worst;
}

ScalarField solve_neumann_poisson(const Domain& domain, const ScalarField& rhs,
                                  const BoundaryField& flux, double tol_compat) {
    return domain.poisson->solve_neumann(rhs, flux, tol_compat);
}

BoundaryField projection_targets(const Domain& domain, const VectorField& v, SigmaMode mode) {
    BoundaryField targets = domain.boundary_zeros();
    if (mode == SigmaMode::wall) return targets;
    const Grid& g = *v.grid;
    double net = 0.0, sig_len = 0.0;
    for (size_t fi = 0; fi < domain.faces.size(); ++fi) {
        const auto& f = domain.faces[fi];
        if (f.tag != BoundaryTag::controlled) continue;
        const int di = int(f.face_normal.x), dj = int(f.face_normal.y);
        const Vec2 u0 = v.at(f.ci, f.cj);
        Vec2 u1 = u0;
        if (g.inside(f.ci - di, f.cj - dj)) u1 = v.at(f.ci - di, f.cj - dj);
        targets.v[fi] = (1.5 * u0 - 0.5 * u1).dot(f.face_normal);
        net += targets.v[fi] * f.len;
        sig_len += f.len;
    }
    if (sig_len > 0.0)
        for (size_t fi = 0; fi < domain.faces.size(); ++fi)
            if (domain.faces[fi].tag == BoundaryTag::controlled) targets.v[fi] -= net / sig_len;
    return targets;
}

ScalarField fv_divergence(const Domain& domain, const VectorField& v,
                          const BoundaryField& targets) {
    const Grid& g = *v.grid;
    require_same_grid(*domain.grid, g);
    if (targets.v.size() != domain.faces.size())
        throw DataError("divergence targets do not match boundary faces");
    ScalarField out(v.grid);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            double acc = 0.0;
            if (g.inside(i + 1, j)) acc += 0.5 * (v.x[g.idx(i + 1, j)] + v.x[g.idx(i, j)]) * g.hy;
            if (g.inside(i - 1, j)) acc -= 0.5 * (v.x[g.idx(i - 1, j)] + v.x[g.idx(i, j)]) * g.hy;
            if (g.inside(i, j + 1)) acc += 0.5 * (v.y[g.idx(i, j + 1)] + v.y[g.idx(i, j)]) * g.hx;
            if (g.inside(i, j - 1)) acc -= 0.5 * (v.y[g.idx(i, j - 1)] + v.y[g.idx(i, j)]) * g.hx;
            out.at(i, j) = acc / g.cell_area();
        }
    for (size_t fi = 0; fi < domain.faces.size(); ++fi) {
        const auto& f = domain.faces[fi];
        out.at(f.ci, f.cj) += targets.v[fi] * f.len / g.cell_area();
    }
    return out;
}

VectorField leray_project(const Domain& domain, const VectorField& v,
                          const BoundaryField& targets, double tol) {
    const Grid& g = *v.grid;
    require_same_grid(*domain.grid, g);
    v.check_finite("leray_project input");
    VectorField u = v;
    // The composite operator is factored exactly, so one pass reaches the
    // contract; a second pass only mops up rounding.
    for (int pass = 0; pass < 3; ++pass) {
        ScalarField rhs = fv_divergence(domain, u, targets);
        if (linf_norm(rhs) <= tol) break;
        const ScalarField q = domain.poisson->solve_projection(rhs);
        const VectorField gq = grad(q);
        for (size_t k = 0; k < u.x.size(); ++k) {
            u.x[k] -= gq.x[k];
            u.y[k] -= gq.y[k];
        }
    }
    u.check_finite("leray_project");
    return u;
}

VectorField leray_project(const Domain& domain, const VectorField& v, SigmaMode mode, double tol) {
    return leray_project(domain, v, projection_targets(domain, v, mode), tol);
}

VectorField velocity_from_vorticity(const Domain& domain, const ScalarField& omega,
                                    const BoundaryField& normal_trace) {
    const Grid& g = *domain.grid;
    require_same_grid(g, *omega.grid);
    const auto& faces = domain.faces;
    if (normal_trace.v.size() != faces.size())
        throw DataError("normal trace does not match boundary faces");

    double net = 0.0, perim = 0.0;
    for (size_t fi = 0; fi < faces.size(); ++fi) {
        net += normal_trace.v[fi] * faces[fi].len;
        perim += faces[fi].len;
    }
    const double scale = std::max(1.0, linf_norm(omega));
    if (std::abs(net) > 1e-8 * scale * std::max(1.0, perim))
        throw DataError("velocity_from_vorticity: nonzero net boundary flux " +
                        std::to_string(net));

    // Stream function boundary values: cumulative counterclockwise integral of
    // the normal trace, with the closure defect spread along the arclength.
    BoundaryField psi_b = domain.boundary_zeros();
    double run = 0.0;
    for (size_t fi = 0; fi < faces.size(); ++fi) {
        const double seg = normal_trace.v[fi] * faces[fi].len;
        psi_b.v[fi] = run + 0.5 * seg;
        run += seg;
    }
    if (perim > 0.0)
        for (size_t fi = 0; fi < faces.size(); ++fi)
            psi_b.v[fi] -= run * (faces[fi].arc / perim);

    ScalarField rhs(omega.grid);
    for (size_t k = 0; k < rhs.v.size(); ++k) rhs.v[k] = -omega.v[k];
    ScalarField psi = domain.poisson->solve_dirichlet(rhs, psi_b);

    // Ghost-aware centered gradient so the trace enters the wall derivative.
    // Ghost slots: 0:+x 1:-x 2:+y 3:-y per cell.
    std::vector<double> ghost(size_t(g.size()) * 4, 0.0);
    std::vector<std::uint8_t> has_ghost(size_t(g.size()) * 4, 0);
    for (size_t fi = 0; fi < faces.size(); ++fi) {
        const auto& f = faces[fi];
        const int k = g.idx(f.ci, f.cj);
        int slot = 3;
        if (f.face_normal.x > 0.5) slot = 0;
        else if (f.face_normal.x < -0.5) slot = 1;
        else if (f.face_normal.y > 0.5) slot = 2;
        ghost[size_t(k) * 4 + slot] = 2.0 * psi_b.v[fi] - psi.v[k];
        has_ghost[size_t(k) * 4 + slot] = 1;
    }
    const VectorField one_sided = grad(psi);
    VectorField u(omega.grid);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            const int k = g.idx(i, j);
            auto side = [&](int ii, int jj, int slot, double* val) {
                if (g.inside(ii, jj)) {
                    *val = psi.at(ii, jj);
                    return true;
                }
                if (has_ghost[size_t(k) * 4 + slot]) {
                    *val = ghost[size_t(k) * 4 + slot];
                    return true;
                }
                return false;
            };
            double sp, sm;
            double dpsidx = one_sided.x[k];
            double dpsidy = one_sided.y[k];
            if (side(i + 1, j, 0, &sp) && side(i - 1, j, 1, &sm)) dpsidx = (sp - sm) / (2.0 * g.hx);
            if (side(i, j + 1, 2, &sp) && side(i, j - 1, 3, &sm)) dpsidy = (sp - sm) / (2.0 * g.hy);
            u.set(i, j, {dpsidy, -dpsidx});
        }
    u.check_finite("velocity_from_vorticity");
    return u;
}

double BoundaryField::sum_weighted(const std::vector<BoundaryFace>& faces) const {
    double s = 0.0;
    for (size_t fi = 0; fi < faces.size(); ++fi) s += v[fi] * faces[fi].len;
    return s;
}

} // namespace nsctrl
