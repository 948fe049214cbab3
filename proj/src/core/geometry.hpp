#pragma once

#include "fields.hpp"

#include <memory>
#include <vector>

namespace nsctrl {

class PoissonSolver;

enum class DomainKind { rectangle, disk };
enum class BoundaryTag { controlled, uncontrolled };

/// Rectangle walls; the disk uses wall id 0 for its single boundary loop.
enum Wall : int { wall_bottom = 0, wall_top = 1, wall_left = 2, wall_right = 3 };

struct DomainSpec {
    DomainKind kind = DomainKind::rectangle;
    double length = 2.0; // rectangle horizontal extent; height is 1. Disk radius is 1.
    bool sigma_left = true;
    bool sigma_right = true;
    double sigma_theta0 = 0.7853981633974483; // disk: controlled arc is |theta| < theta0
    double kitchen_depth = 1.0;               // extension of the outer domain across the outlet
    int nx = 128;
    int ny = 64;
    double collar_width = 0.2; // |phi| equals wall distance within this collar
    double chi_support = 0.15; // cutoff chi vanishes beyond this distance

    void validate() const;
};

/// One cell face on the staircase boundary, in counterclockwise loop order.
struct BoundaryFace {
    int ci = 0, cj = 0;        // inside cell owning the face
    Vec2 mid;                  // face midpoint
    Vec2 face_normal;          // outward, axis-aligned
    Vec2 true_normal;          // analytic outward normal at the midpoint
    double len = 0.0;          // face length
    double arc = 0.0;          // cumulative counterclockwise arclength at the midpoint
    BoundaryTag tag = BoundaryTag::uncontrolled;
    int wall = 0;              // Wall enum for the rectangle, 0 for the disk
};

/// Boundary data stored per boundary face, aligned with Domain::faces.
struct BoundaryField {
    std::vector<double> v;

    double sum_weighted(const std::vector<BoundaryFace>& faces) const;
};

/// Immutable geometric context: level set, extended normal, cutoff, tagged
/// boundary faces and the cached Poisson factorizations for this grid.
struct Domain {
    DomainSpec spec;
    std::shared_ptr<const Grid> grid;
    ScalarField phi;     // sampled level set (positive inside)
    VectorField normal;  // sampled extended outward normal
    ScalarField chi;     // sampled cutoff
    std::vector<BoundaryFace> faces;
    std::shared_ptr<const PoissonSolver> poisson;

    // Analytic evaluators, valid on the extended domain as well.
    double phi_at(double x, double y) const;
    Vec2 normal_at(double x, double y) const;
    double chi_at(double x, double y) const;
    bool inside(double x, double y) const { return phi_at(x, y) > 0.0; }
    bool inside_extended(double x, double y) const;

    double sigma_length() const;
    bool has_sigma(int wall) const;

    BoundaryField boundary_zeros() const { return BoundaryField{std::vector<double>(faces.size(), 0.0)}; }

    template <class Fn>
    BoundaryField boundary_from(Fn fn) const {
        BoundaryField b;
        b.v.reserve(faces.size());
        for (const auto& f : faces) b.v.push_back(fn(f));
        return b;
    }
};

Domain build_domain(const DomainSpec& spec);

/// vec minus its component along the extended normal at `point`.
Vec2 tangential_part(Vec2 vec, Vec2 point, const Domain& domain);

} // namespace nsctrl
