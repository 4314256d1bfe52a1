#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "instrecon/mesh.hpp"

namespace instrecon {

struct LoadedMesh {
    TriMesh mesh;
    std::vector<float> label_conf;      // empty unless the file had `label_conf`
    std::size_t dropped_degenerate = 0;  // faces removed at load time
};

/// Wavefront OBJ (v / f records; polygons fan-triangulated; labels not stored).
LoadedMesh read_obj(const std::filesystem::path& path);
void write_obj(const std::filesystem::path& path, const TriMesh& mesh);

/// PLY, binary little-endian or ASCII on read; binary little-endian on write.
/// Vertex labels travel as the int property `instance_id`; an optional float
/// `label_conf` per vertex is written when provided.
LoadedMesh read_ply(const std::filesystem::path& path);
void write_ply(const std::filesystem::path& path, const TriMesh& mesh, const std::vector<float>* label_conf = nullptr);

/// Dispatches on the file extension (.obj / .ply).
LoadedMesh read_mesh(const std::filesystem::path& path);
void write_mesh(const std::filesystem::path& path, const TriMesh& mesh);

}  // namespace instrecon
