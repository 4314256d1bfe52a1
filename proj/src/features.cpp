#include "instrecon/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace instrecon {

FeatureGrid build_feature_grid(std::span<const Image> images, int levels)
{
    if (images.empty() || levels < 1) {
        throw Error(ErrorCode::InvalidConfig, "field", "feature grid needs images and at least one level");
    }
    FeatureGrid grid;
    grid.views = static_cast<int>(images.size());
    grid.channels = levels;
    grid.width = images.front().width;
    grid.height = images.front().height;
    grid.data.assign(static_cast<std::size_t>(grid.views) * grid.width * grid.height * levels, 0.0);

    const int w = grid.width;
    const int h = grid.height;
    std::vector<double> integral(static_cast<std::size_t>(w + 1) * (h + 1));
    auto I = [&](int x, int y) -> double& { return integral[static_cast<std::size_t>(y) * (w + 1) + x]; };

    for (int v = 0; v < grid.views; ++v) {
        const Image& img = images[static_cast<std::size_t>(v)];
        if (img.width != w || img.height != h) {
            throw Error(ErrorCode::ShapeMismatch, "field", "all views must share one image size");
        }
        std::fill(integral.begin(), integral.end(), 0.0);
        for (int y = 0; y < h; ++y) {
            double row = 0.0;
            for (int x = 0; x < w; ++x) {
                row += img.at(x, y);
                I(x + 1, y + 1) = I(x + 1, y) + row;
            }
        }
        for (int l = 0; l < levels; ++l) {
            const int r = (1 << l) - 1;
            for (int y = 0; y < h; ++y) {
                const int ya = std::max(0, y - r);
                const int yb = std::min(h - 1, y + r);
                for (int x = 0; x < w; ++x) {
                    const int xa = std::max(0, x - r);
                    const int xb = std::min(w - 1, x + r);
                    const double sum = I(xb + 1, yb + 1) - I(xa, yb + 1) - I(xb + 1, ya) + I(xa, ya);
                    const double count = static_cast<double>((xb - xa + 1) * (yb - ya + 1));
                    grid.data[((static_cast<std::size_t>(v) * h + y) * w + x) * levels + l] = sum / count;
                }
            }
        }
    }
    return grid;
}

void sample_feature_into(const FeatureGrid& grid, int view, const Vec2& pixel, double* out)
{
    const double px = std::clamp(pixel.x(), 0.0, static_cast<double>(grid.width - 1));
    const double py = std::clamp(pixel.y(), 0.0, static_cast<double>(grid.height - 1));
    const int x0 = static_cast<int>(std::floor(px));
    const int y0 = static_cast<int>(std::floor(py));
    const int x1 = std::min(x0 + 1, grid.width - 1);
    const int y1 = std::min(y0 + 1, grid.height - 1);
    const double fx = px - x0;
    const double fy = py - y0;
    const double* f00 = grid.at(view, x0, y0);
    const double* f10 = grid.at(view, x1, y0);
    const double* f01 = grid.at(view, x0, y1);
    const double* f11 = grid.at(view, x1, y1);
    for (int c = 0; c < grid.channels; ++c) {
        const double top = (1.0 - fx) * f00[c] + fx * f10[c];
        const double bottom = (1.0 - fx) * f01[c] + fx * f11[c];
        out[c] = (1.0 - fy) * top + fy * bottom;
    }
}

std::vector<double> sample_feature(const FeatureGrid& grid, int view, const Vec2& pixel)
{
    std::vector<double> out(static_cast<std::size_t>(grid.channels));
    sample_feature_into(grid, view, pixel, out.data());
    return out;
}

std::vector<double> positional_embed(const Vec3& d, int n_freq)
{
    if (std::abs(d.norm() - 1.0) > 1e-6) {
        throw Error(ErrorCode::NonUnitDirection, "field", "view direction must be unit length");
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(6 * std::max(n_freq, 0)));
    for (int k = 0; k < n_freq; ++k) {
        const double scale = std::ldexp(std::numbers::pi, k);
        for (int j = 0; j < 3; ++j) {
            out.push_back(std::sin(scale * d[j]));
        }
        for (int j = 0; j < 3; ++j) {
            out.push_back(std::cos(scale * d[j]));
        }
    }
    return out;
}

std::vector<double> FieldQuery::flatten() const
{
    std::vector<double> out;
    for (int v = 0; v < views(); ++v) {
        const auto i = static_cast<std::size_t>(v);
        out.insert(out.end(), features[i].begin(), features[i].end());
        out.push_back(depths[i]);
        out.insert(out.end(), embeddings[i].begin(), embeddings[i].end());
    }
    return out;
}

FeatureGrid concat_channels(const FeatureGrid& a, const FeatureGrid& b)
{
    if (a.views != b.views || a.width != b.width || a.height != b.height) {
        throw Error(ErrorCode::ShapeMismatch, "field", "feature grids differ in views or size");
    }
    FeatureGrid out;
    out.views = a.views;
    out.width = a.width;
    out.height = a.height;
    out.channels = a.channels + b.channels;
    const std::size_t pixels = static_cast<std::size_t>(a.views) * a.width * a.height;
    out.data.reserve(pixels * out.channels);
    for (std::size_t p = 0; p < pixels; ++p) {
        const auto* pa = a.data.data() + p * a.channels;
        const auto* pb = b.data.data() + p * b.channels;
        out.data.insert(out.data.end(), pa, pa + a.channels);
        out.data.insert(out.data.end(), pb, pb + b.channels);
    }
    return out;
}

Image depth_image(const DepthMap& depth, double far, double offset, double scale)
{
    Image img(depth.width, depth.height, 0.0f);
    for (std::size_t i = 0; i < depth.data.size(); ++i) {
        img.data[i] = static_cast<float>((std::min(depth.data[i], far) - offset) / scale);
    }
    return img;
}

FieldContext make_field_context(const std::vector<Camera>& cameras, const TriMesh& scene, int levels, int n_freq)
{
    if (cameras.empty()) {
        throw Error(ErrorCode::RigMismatch, "field", "field context needs at least one camera");
    }
    const Aabb box = scene.bounds();
    FieldContext ctx;
    ctx.cameras = cameras;
    ctx.scene_diagonal = box.diagonal();
    ctx.n_freq = n_freq;
    std::vector<Image> shade;
    std::vector<Image> range;
    for (const Camera& cam : cameras) {
        shade.push_back(render_intensity(cam, scene));
        const double ref = (cam.center() - box.center()).norm();
        ctx.ref_distance.push_back(ref);
        range.push_back(depth_image(render_depth(cam, scene), ref + ctx.scene_diagonal, ref, ctx.scene_diagonal));
    }
    ctx.features = concat_channels(build_feature_grid(shade, levels), build_feature_grid(range, levels));
    return ctx;
}

FieldQuery make_query(const FieldContext& ctx, const Vec3& X)
{
    FieldQuery q;
    q.X = X;
    for (int v = 0; v < ctx.views(); ++v) {
        const Camera& cam = ctx.cameras[static_cast<std::size_t>(v)];
        const Projection proj = project(cam, X);
        q.features.push_back(sample_feature(ctx.features, v, proj.pixel));
        q.depths.push_back((proj.cam_distance - ctx.reference(v)) / ctx.scene_diagonal);
        q.embeddings.push_back(positional_embed((X - cam.center()).normalized(), ctx.n_freq));
    }
    return q;
}

std::vector<double> assemble_inputs(const FieldContext& ctx, std::span<const Vec3> points)
{
    const auto dim = static_cast<std::size_t>(ctx.view_input_dim());
    const auto views = static_cast<std::size_t>(ctx.views());
    std::vector<double> out(points.size() * views * dim);
    std::vector<Vec3> centers;
    for (const Camera& cam : ctx.cameras) {
        centers.push_back(cam.center());
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t v = 0; v < views; ++v) {
            double* row = out.data() + (i * views + v) * dim;
            const Projection proj = project(ctx.cameras[v], points[i]);
            sample_feature_into(ctx.features, static_cast<int>(v), proj.pixel, row);
            row[ctx.features.channels] = (proj.cam_distance - ctx.reference(static_cast<int>(v))) / ctx.scene_diagonal;
            const auto emb = positional_embed((points[i] - centers[v]).normalized(), ctx.n_freq);
            std::copy(emb.begin(), emb.end(), row + ctx.features.channels + 1);
        }
    }
    return out;
}

}  // namespace instrecon
