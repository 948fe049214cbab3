#pragma once

#include "errors.hpp"
#include "util.hpp"

#include <memory>
#include <string>
#include <vector>

namespace nsctrl {

/// Cell-centered Cartesian grid with an inside/outside mask.
/// Cell (i,j) has its center at (x0 + (i+1/2)hx, y0 + (j+1/2)hy).
struct Grid {
    double x0 = 0.0, y0 = 0.0;
    double hx = 0.0, hy = 0.0;
    int nx = 0, ny = 0;
    std::vector<std::uint8_t> mask; // 1 = inside the computational domain

    int size() const { return nx * ny; }
    int idx(int i, int j) const { return j * nx + i; }
    bool inside(int i, int j) const {
        return i >= 0 && i < nx && j >= 0 && j < ny && mask[idx(i, j)] != 0;
    }
    double cx(int i) const { return x0 + (i + 0.5) * hx; }
    double cy(int j) const { return y0 + (j + 0.5) * hy; }
    double cell_area() const { return hx * hy; }

    static std::shared_ptr<const Grid> make(double x0, double y0, double hx, double hy, int nx,
                                            int ny) {
        auto g = std::make_shared<Grid>();
        g->x0 = x0;
        g->y0 = y0;
        g->hx = hx;
        g->hy = hy;
        g->nx = nx;
        g->ny = ny;
        g->mask.assign(size_t(nx) * ny, 1);
        return g;
    }
};

struct ScalarField {
    std::shared_ptr<const Grid> grid;
    std::vector<double> v;
    std::string units;

    ScalarField() = default;
    explicit ScalarField(std::shared_ptr<const Grid> g, double fill = 0.0, std::string u = "")
        : grid(std::move(g)), v(size_t(grid->size()), fill), units(std::move(u)) {}

    double& at(int i, int j) { return v[grid->idx(i, j)]; }
    double at(int i, int j) const { return v[grid->idx(i, j)]; }

    void check_finite(const char* what) const;
};

struct VectorField {
    std::shared_ptr<const Grid> grid;
    std::vector<double> x, y;
    std::string units;

    VectorField() = default;
    explicit VectorField(std::shared_ptr<const Grid> g, std::string u = "")
        : grid(std::move(g)),
          x(size_t(grid->size()), 0.0),
          y(size_t(grid->size()), 0.0),
          units(std::move(u)) {}

    Vec2 at(int i, int j) const {
        const int k = grid->idx(i, j);
        return {x[k], y[k]};
    }
    void set(int i, int j, Vec2 val) {
        const int k = grid->idx(i, j);
        x[k] = val.x;
        y[k] = val.y;
    }

    void check_finite(const char* what) const;
};

void require_same_grid(const Grid& a, const Grid& b);

/// Centered second-order differences in the interior, one-sided at mask edges.
VectorField grad(const ScalarField& s);
ScalarField div(const VectorField& vf);
ScalarField curl2d(const VectorField& vf);

/// L2 norm over inside cells, with the cell-area measure.
double l2_norm(const ScalarField& s);
double l2_norm(const VectorField& vf);
double linf_norm(const ScalarField& s);
double linf_norm(const VectorField& vf);

/// Bilinear / bicubic sampling at a physical point. Stencil cells outside the
/// mask are substituted by the nearest inside value along the stencil row.
/// `order` is 1 (bilinear) or 3 (bicubic). `limited` clamps to the bilinear
/// cell's data range.
double sample_scalar(const ScalarField& s, double px, double py, int order, bool limited = false);
Vec2 sample_vector(const VectorField& vf, double px, double py, int order, bool limited = false);

} // namespace nsctrl
