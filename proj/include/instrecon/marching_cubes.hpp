#pragma once

#include <functional>
#include <vector>

#include "instrecon/mesh.hpp"

namespace instrecon {

/// Scalars at the corners of a regular lattice spanning `box`; x varies
/// fastest: values[(z * ny + y) * nx + x].
struct ScalarGrid {
    int nx = 0;
    int ny = 0;
    int nz = 0;
    Aabb box;
    std::vector<double> values;

    ScalarGrid() = default;
    ScalarGrid(int nx_, int ny_, int nz_, const Aabb& box_);

    Vec3 spacing() const;
    Vec3 position(int x, int y, int z) const;
    double& at(int x, int y, int z) { return values[(static_cast<std::size_t>(z) * ny + y) * nx + x]; }
    double at(int x, int y, int z) const { return values[(static_cast<std::size_t>(z) * ny + y) * nx + x]; }

    /// Throws InvalidConfig (resolution < 2, wrong size, non-finite values).
    void validate() const;
};

/// Evaluates f at every lattice point (x fastest).
ScalarGrid sample_grid(const Aabb& box, int resolution, const std::function<double(const Vec3&)>& f);

/// Lattice positions in grid order, for batched evaluation.
std::vector<Vec3> grid_points(const Aabb& box, int resolution);

/// Surface where the field crosses `iso`, oriented with normals pointing
/// toward lower values (out of an occupancy field). Vertices shared between
/// cells are welded; vertex order follows the z-y-x cell scan.
TriMesh marching_cubes(const ScalarGrid& grid, double iso = 0.5);

}  // namespace instrecon
