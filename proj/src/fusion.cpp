#include "instrecon/fusion.hpp"

#include <cmath>
#include <map>

namespace instrecon {
namespace {

constexpr const char* kModule = "fusion-label";

// Nearest pixel of a projection, or false when outside the image or behind the camera.
bool nearest_pixel(const Camera& cam, const Vec3& X, int& px, int& py, double& cam_distance)
{
    if (cam.to_camera(X).z() <= 0.0) return false;
    const Projection p = project(cam, X);
    px = static_cast<int>(std::lround(p.pixel.x()));
    py = static_cast<int>(std::lround(p.pixel.y()));
    cam_distance = p.cam_distance;
    return px >= 0 && py >= 0 && px < cam.width && py < cam.height;
}

}  // namespace

void FusionConfig::validate() const
{
    if (n_views < 1) throw Error(ErrorCode::InvalidConfig, kModule, "n_views must be at least 1");
    if (!std::isfinite(delta)) throw Error(ErrorCode::InvalidConfig, kModule, "delta must be finite");
}

double FusionConfig::resolved_delta(const TriMesh& mesh) const
{
    return delta > 0.0 ? delta : 0.01 * mesh.bounds().diagonal();
}

std::vector<bool> visibility_mask(const TriMesh& mesh, const Camera& cam, const DepthMap& depth, double delta)
{
    std::vector<bool> out(mesh.vertices.size(), false);
    for (std::size_t k = 0; k < mesh.vertices.size(); ++k) {
        int px = 0, py = 0;
        double c = 0.0;
        if (!nearest_pixel(cam, mesh.vertices[k], px, py, c) || !depth.contains(px, py)) continue;
        out[k] = std::abs(depth.at(px, py) - c) < delta;
    }
    return out;
}

FusionResult label_vertices(const TriMesh& mesh, const std::vector<Camera>& cams, const std::vector<DepthMap>& depths,
                            const std::vector<LabelMap>& labels2d, const FusionConfig& cfg)
{
    cfg.validate();
    if (cams.size() != depths.size() || cams.size() != labels2d.size())
        throw Error(ErrorCode::RigMismatch, kModule, "cameras, depth maps and label maps differ in count");
    if (mesh.vertices.empty()) throw Error(ErrorCode::EmptyMesh, kModule, "mesh has no vertices");
    const double delta = cfg.resolved_delta(mesh);
    const std::size_t n = mesh.vertices.size();

    FusionResult r;
    r.labels.assign(n, kUnlabeled);
    r.confidence.assign(n, 0.0f);
    r.evidence.assign(n, 0);
    std::vector<std::map<std::int32_t, int>> votes(n);
    for (std::size_t i = 0; i < cams.size(); ++i) {
        const auto visible = visibility_mask(mesh, cams[i], depths[i], delta);
        for (std::size_t k = 0; k < n; ++k) {
            if (!visible[k]) continue;
            int px = 0, py = 0;
            double c = 0.0;
            nearest_pixel(cams[i], mesh.vertices[k], px, py, c);
            if (!labels2d[i].contains(px, py)) continue;
            const std::int32_t l = labels2d[i].at(px, py);
            if (l == kBackground) continue;
            ++votes[k][l];
            ++r.evidence[k];
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (votes[k].empty()) continue;
        int best = -1;
        std::int32_t label = kUnlabeled;
        bool tie = false;
        for (const auto& [l, count] : votes[k]) {  // ascending label order
            if (count > best) {
                best = count;
                label = l;
                tie = false;
            } else if (count == best) {
                tie = true;
            }
        }
        r.labels[k] = (tie && cfg.tie_break == TieBreak::Unlabeled) ? kUnlabeled : label;
        r.confidence[k] = static_cast<float>(best) / static_cast<float>(r.evidence[k]);
    }
    return r;
}

FusionResult relabel_from_renders(const TriMesh& mesh, const std::vector<Camera>& cams, const FusionConfig& cfg)
{
    std::vector<DepthMap> depths;
    std::vector<LabelMap> labels;
    for (const Camera& cam : cams) {
        const FaceBuffer fb = rasterize(cam, mesh);
        depths.push_back(fb.depth);
        labels.push_back(render_labels(cam, mesh));
    }
    return label_vertices(mesh, cams, depths, labels, cfg);
}

}  // namespace instrecon
