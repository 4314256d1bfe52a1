#pragma once

#include <span>
#include <vector>

#include "instrecon/camera.hpp"
#include "instrecon/raster.hpp"

namespace instrecon {

/// Per-view multi-channel feature images sharing one resolution and channel
/// count. Storage is [view][y][x][channel].
struct FeatureGrid {
    int views = 0;
    int channels = 0;
    int width = 0;
    int height = 0;
    std::vector<double> data;

    const double* at(int view, int x, int y) const
    {
        return data.data() + ((static_cast<std::size_t>(view) * height + y) * width + x) * channels;
    }
};

/// Fixed image pyramid: channel l is the image box-filtered with a
/// (2^(l+1) - 1)-pixel window, for l < levels. Throws ShapeMismatch when the
/// images differ in size.
FeatureGrid build_feature_grid(std::span<const Image> images, int levels);

/// Stacks the channels of `b` after those of `a`. Throws ShapeMismatch.
FeatureGrid concat_channels(const FeatureGrid& a, const FeatureGrid& b);

/// (min(d, far) - offset) / scale per pixel; pixels that miss read (far - offset) / scale.
Image depth_image(const DepthMap& depth, double far, double offset, double scale);

/// Bilinear interpolation of the four neighbouring feature vectors; pixels
/// outside the image are clamped to the border.
std::vector<double> sample_feature(const FeatureGrid& grid, int view, const Vec2& pixel);

/// Writes the same result into `out` (length grid.channels).
void sample_feature_into(const FeatureGrid& grid, int view, const Vec2& pixel, double* out);

/// [sin(2^k pi d), cos(2^k pi d)] blocks for k < n_freq, each block ordered
/// x, y, z. Throws NonUnitDirection when |d| differs from 1 by more than 1e-6.
std::vector<double> positional_embed(const Vec3& d, int n_freq);

/// Everything the field needs to turn a 3D point into network inputs.
struct FieldContext {
    std::vector<Camera> cameras;
    FeatureGrid features;
    double scene_diagonal = 1.0;       // depth normalizer
    std::vector<double> ref_distance;  // per camera, subtracted from depths (empty: 0)
    int n_freq = 2;

    double reference(int view) const
    {
        return ref_distance.empty() ? 0.0 : ref_distance[static_cast<std::size_t>(view)];
    }

    int view_input_dim() const { return features.channels + 1 + 6 * n_freq; }
    int views() const { return static_cast<int>(cameras.size()); }
};

/// Per-view inputs for one point: pixel feature F(x), camera distance z(X)
/// relative to the view's reference and scaled by the scene diagonal, and the
/// embedding of the viewing direction d(x).
struct FieldQuery {
    Vec3 X = Vec3::Zero();
    std::vector<std::vector<double>> features;
    std::vector<double> depths;
    std::vector<std::vector<double>> embeddings;

    int views() const { return static_cast<int>(depths.size()); }
    /// Concatenated per-view rows [F, z, embed], views x view_dim.
    std::vector<double> flatten() const;
};

/// Renders `scene` (labels give the albedo when present) from every camera and
/// stacks `levels`-level intensity and depth pyramids. Depths are taken
/// relative to each camera's distance to the scene AABB center.
FieldContext make_field_context(const std::vector<Camera>& cameras, const TriMesh& scene, int levels, int n_freq);

FieldQuery make_query(const FieldContext& ctx, const Vec3& X);

/// Flattened per-view inputs for a batch, laid out [point][view][dim].
std::vector<double> assemble_inputs(const FieldContext& ctx, std::span<const Vec3> points);

}  // namespace instrecon
