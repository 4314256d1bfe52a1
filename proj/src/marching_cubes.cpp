#include "instrecon/marching_cubes.hpp"

#include <cmath>
#include <unordered_map>

#include "mc_tables.hpp"

namespace instrecon {
namespace {

constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
constexpr int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                              {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

}  // namespace

ScalarGrid::ScalarGrid(int nx_, int ny_, int nz_, const Aabb& box_)
    : nx(nx_), ny(ny_), nz(nz_), box(box_), values(static_cast<std::size_t>(nx_) * ny_ * nz_, 0.0)
{
}

Vec3 ScalarGrid::spacing() const
{
    return box.extent().cwiseQuotient(Vec3(nx - 1, ny - 1, nz - 1));
}

Vec3 ScalarGrid::position(int x, int y, int z) const
{
    const Vec3 e = box.extent();
    return {box.min.x() + e.x() * x / (nx - 1), box.min.y() + e.y() * y / (ny - 1), box.min.z() + e.z() * z / (nz - 1)};
}

void ScalarGrid::validate() const
{
    if (nx < 2 || ny < 2 || nz < 2) throw Error(ErrorCode::InvalidConfig, "recon-metrics", "grid resolution must be at least 2");
    if (values.size() != static_cast<std::size_t>(nx) * ny * nz)
        throw Error(ErrorCode::InvalidConfig, "recon-metrics", "grid value count does not match its resolution");
    if (!box.valid()) throw Error(ErrorCode::InvalidConfig, "recon-metrics", "grid box is empty");
    for (double v : values)
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidConfig, "recon-metrics", "grid values must be finite");
}

std::vector<Vec3> grid_points(const Aabb& box, int resolution)
{
    ScalarGrid g(resolution, resolution, resolution, box);
    std::vector<Vec3> out;
    out.reserve(g.values.size());
    for (int z = 0; z < resolution; ++z)
        for (int y = 0; y < resolution; ++y)
            for (int x = 0; x < resolution; ++x) out.push_back(g.position(x, y, z));
    return out;
}

ScalarGrid sample_grid(const Aabb& box, int resolution, const std::function<double(const Vec3&)>& f)
{
    ScalarGrid g(resolution, resolution, resolution, box);
    g.validate();
    for (int z = 0; z < resolution; ++z)
        for (int y = 0; y < resolution; ++y)
            for (int x = 0; x < resolution; ++x) g.at(x, y, z) = f(g.position(x, y, z));
    return g;
}

TriMesh marching_cubes(const ScalarGrid& grid, double iso)
{
    grid.validate();
    TriMesh mesh;
    // Key: lower lattice corner index * 3 + axis.
    std::unordered_map<std::uint64_t, std::uint32_t> welded;
    auto lattice = [&](int x, int y, int z) {
        return (static_cast<std::uint64_t>(z) * grid.ny + y) * grid.nx + x;
    };
    auto edge_vertex = [&](int x, int y, int z, int e) {
        int a[3], b[3];
        for (int k = 0; k < 3; ++k) {
            a[k] = kCorner[kEdge[e][0]][k];
            b[k] = kCorner[kEdge[e][1]][k];
        }
        // Interpolate from the lower corner so both neighbouring cells agree bitwise.
        if (a[0] + a[1] + a[2] > b[0] + b[1] + b[2]) std::swap(a, b);
        const int axis = b[0] != a[0] ? 0 : (b[1] != a[1] ? 1 : 2);
        const int ax = x + a[0], ay = y + a[1], az = z + a[2];
        const std::uint64_t key = lattice(ax, ay, az) * 3 + axis;
        auto it = welded.find(key);
        if (it != welded.end()) return it->second;
        const int bx = x + b[0], by = y + b[1], bz = z + b[2];
        const double va = grid.at(ax, ay, az);
        const double vb = grid.at(bx, by, bz);
        const double t = (iso - va) / (vb - va);
        const Vec3 pa = grid.position(ax, ay, az);
        const Vec3 pb = grid.position(bx, by, bz);
        const auto id = static_cast<std::uint32_t>(mesh.vertices.size());
        mesh.vertices.push_back(pa + t * (pb - pa));
        welded.emplace(key, id);
        return id;
    };

    for (int z = 0; z + 1 < grid.nz; ++z)
        for (int y = 0; y + 1 < grid.ny; ++y)
            for (int x = 0; x + 1 < grid.nx; ++x) {
                unsigned index = 0;
                for (int c = 0; c < 8; ++c)
                    if (grid.at(x + kCorner[c][0], y + kCorner[c][1], z + kCorner[c][2]) <= iso) index |= 1u << c;
                if (detail::kMcEdgeTable[index] == 0) continue;
                const auto& tri = detail::kMcTriTable[index];
                for (int i = 0; tri[i] != -1; i += 3) {
                    const std::uint32_t v0 = edge_vertex(x, y, z, tri[i]);
                    const std::uint32_t v1 = edge_vertex(x, y, z, tri[i + 1]);
                    const std::uint32_t v2 = edge_vertex(x, y, z, tri[i + 2]);
                    if (v0 == v1 || v1 == v2 || v2 == v0) continue;
                    mesh.faces.push_back({v0, v1, v2});
                }
            }
    return mesh;
}

}  // namespace instrecon
