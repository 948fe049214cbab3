#include "geometry.hpp"

#include "poisson.hpp"

#include <algorithm>
#include <cmath>

namespace nsctrl {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void DomainSpec::validate() const {
    if (nx < 8 || ny < 8) throw ConfigError("grid resolution must be at least 8 cells per side");
    if (kitchen_depth <= 0.0) throw ConfigError("kitchen_depth must be positive");
    if (collar_width <= 0.0) throw ConfigError("collar_width must be positive");
    if (chi_support <= 0.0 || chi_support > collar_width + 1e-12)
        throw ConfigError("chi_support must lie in (0, collar_width]");
    if (kind == DomainKind::rectangle) {
        if (length <= 0.0) throw ConfigError("rectangle length must be positive");
        if (!sigma_left && !sigma_right)
            throw ConfigError("controlled boundary is empty: enable at least one vertical wall");
        if (collar_width >= 0.5 * std::min(length, 1.0))
            throw ConfigError("collar_width must be below half the smallest side");
    } else {
        if (sigma_theta0 <= 0.0 || sigma_theta0 >= kPi)
            throw ConfigError("disk arc half-angle must lie in (0, pi)");
        if (collar_width >= 0.5) throw ConfigError("collar_width must be below half the radius");
    }
}

double Domain::phi_at(double x, double y) const {
    if (spec.kind == DomainKind::disk) return 1.0 - std::sqrt(x * x + y * y);
    // Signed distance to the box [0,L]x[0,1], positive inside.
    const double qx = std::abs(x - 0.5 * spec.length) - 0.5 * spec.length;
    const double qy = std::abs(y - 0.5) - 0.5;
    const double outside = std::sqrt(util::sqr(std::max(qx, 0.0)) + util::sqr(std::max(qy, 0.0)));
    const double inside = std::min(std::max(qx, qy), 0.0);
    return -(outside + inside);
}

Vec2 Domain::normal_at(double x, double y) const {
    if (spec.kind == DomainKind::disk) {
        const double r = std::sqrt(x * x + y * y);
        if (r < 1e-14) return {1.0, 0.0};
        return {x / r, y / r};
    }
    // Outward normal of the nearest wall, constant along distance-gradient
    // lines. Deterministic tie-break order: bottom, top, left, right.
    const double L = spec.length;
    const double d[4] = {y, 1.0 - y, x, L - x};
    const Vec2 n[4] = {{0.0, -1.0}, {0.0, 1.0}, {-1.0, 0.0}, {1.0, 0.0}};
    int best = 0;
    for (int w = 1; w < 4; ++w)
        if (d[w] < d[best]) best = w;
    return n[best];
}

double Domain::chi_at(double x, double y) const {
    const double dist = std::abs(phi_at(x, y));
    const double plateau = 0.4 * spec.chi_support;
    if (dist <= plateau) return 1.0;
    if (dist >= spec.chi_support) return 0.0;
    return 1.0 - util::smoothstep5((dist - plateau) / (spec.chi_support - plateau));
}

bool Domain::inside_extended(double x, double y) const {
    if (inside(x, y)) return true;
    const double d = spec.kitchen_depth;
    if (spec.kind == DomainKind::rectangle) {
        if (y < 0.0 || y > 1.0) return false;
        if (spec.sigma_left && x >= -d && x < 0.0) return true;
        if (spec.sigma_right && x > spec.length && x <= spec.length + d) return true;
        return false;
    }
    const double r = std::sqrt(x * x + y * y);
    const double th = std::atan2(y, x);
    return r <= 1.0 + d && std::abs(th) < spec.sigma_theta0;
}

double Domain::sigma_length() const {
    if (spec.kind == DomainKind::disk) return 2.0 * spec.sigma_theta0;
    return (spec.sigma_left ? 1.0 : 0.0) + (spec.sigma_right ? 1.0 : 0.0);
}

bool Domain::has_sigma(int wall) const {
    if (spec.kind == DomainKind::disk) return false;
    return (wall == wall_left && spec.sigma_left) || (wall == wall_right && spec.sigma_right);
}

namespace {

void build_rectangle_faces(Domain& dom) {
    const Grid& g = *dom.grid;
    const DomainSpec& spec = dom.spec;
    auto tag_of = [&](int wall) {
        const bool controlled = (wall == wall_left && spec.sigma_left) ||
                                (wall == wall_right && spec.sigma_right);
        return controlled ? BoundaryTag::controlled : BoundaryTag::uncontrolled;
    };
    double arc = 0.0;
    auto push = [&](int ci, int cj, Vec2 mid, Vec2 n, double len, int wall) {
        BoundaryFace f;
        f.ci = ci;
        f.cj = cj;
        f.mid = mid;
        f.face_normal = n;
        f.true_normal = n;
        f.len = len;
        f.arc = arc + 0.5 * len;
        f.tag = tag_of(wall);
        f.wall = wall;
        dom.faces.push_back(f);
        arc += len;
    };
    // Counterclockwise loop: bottom, right, top, left.
    for (int i = 0; i < g.nx; ++i)
        push(i, 0, {g.cx(i), 0.0}, {0.0, -1.0}, g.hx, wall_bottom);
    for (int j = 0; j < g.ny; ++j)
        push(g.nx - 1, j, {spec.length, g.cy(j)}, {1.0, 0.0}, g.hy, wall_right);
    for (int i = g.nx - 1; i >= 0; --i)
        push(i, g.ny - 1, {g.cx(i), 1.0}, {0.0, 1.0}, g.hx, wall_top);
    for (int j = g.ny - 1; j >= 0; --j)
        push(0, j, {0.0, g.cy(j)}, {-1.0, 0.0}, g.hy, wall_left);
}

void build_disk_faces(Domain& dom) {
    const Grid& g = *dom.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            const struct {
                int di, dj;
                Vec2 n;
            } sides[4] = {{1, 0, {1, 0}}, {-1, 0, {-1, 0}}, {0, 1, {0, 1}}, {0, -1, {0, -1}}};
            for (const auto& s : sides) {
                if (g.inside(i + s.di, j + s.dj)) continue;
                BoundaryFace f;
                f.ci = i;
                f.cj = j;
                f.mid = {g.cx(i) + 0.5 * s.di * g.hx, g.cy(j) + 0.5 * s.dj * g.hy};
                f.face_normal = s.n;
                f.true_normal = dom.normal_at(f.mid.x, f.mid.y);
                f.len = (s.di != 0) ? g.hy : g.hx;
                const double th = std::atan2(f.mid.y, f.mid.x);
                f.tag = (std::abs(th) < dom.spec.sigma_theta0) ? BoundaryTag::controlled
                                                               : BoundaryTag::uncontrolled;
                f.wall = 0;
                dom.faces.push_back(f);
            }
        }
    // Counterclockwise loop order by midpoint angle (the staircase loop of a
    // star-shaped domain is monotone in angle up to face-level ties).
    std::sort(dom.faces.begin(), dom.faces.end(), [](const BoundaryFace& a, const BoundaryFace& b) {
        const double ta = std::atan2(a.mid.y, a.mid.x);
        const double tb = std::atan2(b.mid.y, b.mid.x);
        if (ta != tb) return ta < tb;
        return std::atan2(a.face_normal.y, a.face_normal.x) < std::atan2(b.face_normal.y, b.face_normal.x);
    });
    double arc = 0.0;
    for (auto& f : dom.faces) {
        f.arc = arc + 0.5 * f.len;
        arc += f.len;
    }
}

} // namespace

Domain build_domain(const DomainSpec& spec) {
    spec.validate();
    Domain dom;
    dom.spec = spec;
    if (spec.kind == DomainKind::rectangle) {
        dom.grid = Grid::make(0.0, 0.0, spec.length / spec.nx, 1.0 / spec.ny, spec.nx, spec.ny);
    } else {
        auto g = Grid::make(-1.0, -1.0, 2.0 / spec.nx, 2.0 / spec.ny, spec.nx, spec.ny);
        auto mutable_grid = std::const_pointer_cast<Grid>(g);
        for (int j = 0; j < spec.ny; ++j)
            for (int i = 0; i < spec.nx; ++i) {
                const double x = g->cx(i), y = g->cy(j);
                mutable_grid->mask[g->idx(i, j)] = (x * x + y * y < 1.0) ? 1 : 0;
            }
        dom.grid = g;
    }

    dom.phi = ScalarField(dom.grid, 0.0, "length");
    dom.chi = ScalarField(dom.grid);
    dom.normal = VectorField(dom.grid);
    const Grid& g = *dom.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.inside(i, j)) continue;
            const double x = g.cx(i), y = g.cy(j);
            dom.phi.at(i, j) = dom.phi_at(x, y);
            dom.chi.at(i, j) = dom.chi_at(x, y);
            dom.normal.set(i, j, dom.normal_at(x, y));
        }

    if (spec.kind == DomainKind::rectangle)
        build_rectangle_faces(dom);
    else
        build_disk_faces(dom);
    if (dom.faces.empty()) throw ConfigError("domain has no boundary faces");
    bool any_sigma = false;
    for (const auto& f : dom.faces) any_sigma |= (f.tag == BoundaryTag::controlled);
    if (!any_sigma) throw ConfigError("controlled boundary is empty on the discrete grid");

    dom.poisson = std::make_shared<PoissonSolver>(dom.grid, dom.faces);
    return dom;
}

Vec2 tangential_part(Vec2 vec, Vec2 point, const Domain& domain) {
    const double phi = domain.phi_at(point.x, point.y);
    if (phi <= 0.0 && std::abs(phi) > domain.spec.collar_width)
        throw GeometryError("tangential_part: point outside the domain and its normal collar");
    const Vec2 n = domain.normal_at(point.x, point.y);
    const double vn = vec.dot(n);
    return vec - vn * n;
}

} // namespace nsctrl
