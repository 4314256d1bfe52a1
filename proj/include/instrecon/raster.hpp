#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

#include "instrecon/camera.hpp"
#include "instrecon/mesh.hpp"

namespace instrecon {

/// Row-major per-pixel map.
template <class T>
struct PixelMap {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    PixelMap() = default;
    PixelMap(int w, int h, T fill) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
    T& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    const T& at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// Euclidean distance from the camera center to the nearest surface along each
/// pixel ray; +inf where nothing is hit.
using DepthMap = PixelMap<double>;

/// Instance id of the front-most face; kBackground where nothing is hit.
using LabelMap = PixelMap<std::int32_t>;
inline constexpr std::int32_t kBackground = -1;

/// Single-channel intensity image in [0, 1].
using Image = PixelMap<float>;

inline constexpr std::uint32_t kNoFace = std::numeric_limits<std::uint32_t>::max();

/// Z-buffered visibility: front-most face index and its ray distance per pixel.
struct FaceBuffer {
    DepthMap depth;
    PixelMap<std::uint32_t> face;
};

/// Perspective-correct z-buffer rasterization of every triangle fully in front
/// of the camera; pixels are sampled at their centers.
FaceBuffer rasterize(const Camera& cam, const TriMesh& mesh);

DepthMap render_depth(const Camera& cam, const TriMesh& mesh);

/// Throws MissingLabels when the mesh has no vertex labels.
LabelMap render_labels(const Camera& cam, const TriMesh& mesh);

/// Test-harness stand-in for a photograph: per-instance albedo times a
/// headlight Lambert term. Unlabeled meshes render with a neutral albedo.
Image render_intensity(const Camera& cam, const TriMesh& mesh);

/// Raw little-endian dumps with a JSON sidecar (<path>.json) giving shape and dtype.
void write_depth_map(const std::filesystem::path& path, const DepthMap& depth);   // float32
DepthMap read_depth_map(const std::filesystem::path& path);
void write_label_map(const std::filesystem::path& path, const LabelMap& labels);  // int32
LabelMap read_label_map(const std::filesystem::path& path);

}  // namespace instrecon
