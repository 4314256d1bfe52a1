#include "instrecon/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "instrecon/bvh.hpp"
#include "instrecon/sampling.hpp"

namespace instrecon {
namespace {

constexpr const char* kModule = "recon-metrics";

void require_points(std::span<const Vec3> s, const char* what)
{
    if (s.empty()) throw Error(ErrorCode::EmptySet, kModule, std::string(what) + " point set is empty");
}

}  // namespace

double cd_one_directional(std::span<const Vec3> a, std::span<const Vec3> b)
{
    require_points(a, "source");
    require_points(b, "target");
    const PointTree tree(b);
    double sum = 0.0;
    for (const Vec3& p : a) sum += std::sqrt(tree.nearest(p).sq_distance);
    return sum / static_cast<double>(a.size());
}

double cd_one_directional(std::span<const Vec3> a, const TriMesh& b)
{
    require_points(a, "source");
    if (b.empty()) throw Error(ErrorCode::EmptyMesh, kModule, "target mesh is empty");
    const MeshQuery q(b);
    double sum = 0.0;
    for (const Vec3& p : a) sum += q.nearest_surface_distance(p);
    return sum / static_cast<double>(a.size());
}

double chamfer(std::span<const Vec3> a, std::span<const Vec3> b)
{
    return 0.5 * (cd_one_directional(a, b) + cd_one_directional(b, a));
}

double p2s(const TriMesh& pred, const TriMesh& gt, std::size_t n_samples, std::uint64_t seed)
{
    if (pred.empty() || gt.empty()) throw Error(ErrorCode::EmptyMesh, kModule, "p2s needs two non-empty meshes");
    const auto samples = sample_surface(pred, n_samples, seed);
    return cd_one_directional(samples, gt);
}

OverlapEstimate mesh_iou_and_volume(const TriMesh& a, const TriMesh& b, std::size_t n_samples, std::uint64_t seed)
{
    if (!is_watertight(a) || !is_watertight(b))
        throw Error(ErrorCode::NonWatertight, kModule, "overlap estimation needs watertight meshes");
    OverlapEstimate est;
    est.samples = n_samples;
    Aabb box;
    if (!a.empty()) box.expand(a.bounds());
    if (!b.empty()) box.expand(b.bounds());
    if (a.empty() || b.empty() || n_samples == 0) return est;

    const MeshQuery qa(a);
    const MeshQuery qb(b);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t in_a = 0, in_b = 0, both = 0, either = 0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double ux = unit(rng);
        const double uy = unit(rng);
        const double uz = unit(rng);
        const Vec3 p = box.min + Vec3(ux, uy, uz).cwiseProduct(box.extent());
        const bool ia = qa.inside(p);
        const bool ib = qb.inside(p);
        in_a += ia;
        in_b += ib;
        both += ia && ib;
        either += ia || ib;
    }
    const double n = static_cast<double>(n_samples);
    const double vol = box.volume();
    const double p_both = static_cast<double>(both) / n;
    est.intersection_volume = p_both * vol;
    est.intersection_stderr = vol * std::sqrt(p_both * (1.0 - p_both) / n);
    est.volume_a = vol * static_cast<double>(in_a) / n;
    est.volume_b = vol * static_cast<double>(in_b) / n;
    if (either > 0) {
        est.iou = static_cast<double>(both) / static_cast<double>(either);
        est.iou_stderr = std::sqrt(est.iou * (1.0 - est.iou) / static_cast<double>(either));
    }
    return est;
}

TriMesh extract_part(const TriMesh& mesh, std::int32_t label)
{
    if (!mesh.has_labels()) throw Error(ErrorCode::MissingLabels, kModule, "mesh carries no vertex labels");
    TriMesh out;
    std::vector<std::int64_t> remap(mesh.vertices.size(), -1);
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        if (face_label(mesh, f) != label) continue;
        Face nf{};
        for (int k = 0; k < 3; ++k) {
            const auto v = mesh.faces[f][static_cast<std::size_t>(k)];
            if (remap[v] < 0) {
                remap[v] = static_cast<std::int64_t>(out.vertices.size());
                out.vertices.push_back(mesh.vertices[v]);
                out.vertex_labels.push_back(mesh.vertex_labels[v]);
            }
            nf[static_cast<std::size_t>(k)] = static_cast<std::uint32_t>(remap[v]);
        }
        out.faces.push_back(nf);
    }
    return out;
}

MetricReport evaluate(const TriMesh& pred_human, const TriMesh& pred_object, const TriMesh& gt, const EvalConfig& cfg)
{
    if (!gt.has_labels()) throw Error(ErrorCode::MissingLabels, kModule, "ground-truth mesh needs instance labels");
    if (pred_human.empty() || pred_object.empty())
        throw Error(ErrorCode::EmptyMesh, kModule, "both predicted instances must be non-empty");
    constexpr double kCm = 100.0;
    const TriMesh pred = merge(pred_human, pred_object);
    const auto pred_pts = sample_surface(pred, cfg.surface_samples, cfg.seed);
    const auto gt_pts = sample_surface(gt, cfg.surface_samples, cfg.seed + 1);

    MetricReport r;
    r.chamfer_cm = kCm * chamfer(pred_pts, gt_pts);
    r.p2s_cm = kCm * cd_one_directional(pred_pts, gt);
    const TriMesh gt_h = extract_part(gt, kHumanLabel);
    const TriMesh gt_o = extract_part(gt, kObjectLabel);
    if (gt_h.empty() || gt_o.empty())
        throw Error(ErrorCode::MissingLabels, kModule, "ground truth lacks a human or object part");
    r.cd1_human_cm = kCm * cd_one_directional(sample_surface(gt_h, cfg.surface_samples, cfg.seed + 2), pred_human);
    r.cd1_object_cm = kCm * cd_one_directional(sample_surface(gt_o, cfg.surface_samples, cfg.seed + 3), pred_object);
    const auto ov = mesh_iou_and_volume(pred_human, pred_object, cfg.volume_samples, cfg.seed + 4);
    r.iou_percent = 100.0 * ov.iou;
    r.iou_stderr_percent = 100.0 * ov.iou_stderr;
    r.intersection_volume_m3 = ov.intersection_volume;
    r.intersection_stderr_m3 = ov.intersection_stderr;
    return r;
}

nlohmann::json MetricReport::to_json() const
{
    return {{"chamfer_cm", chamfer_cm},
            {"p2s_cm", p2s_cm},
            {"cd1_human_cm", cd1_human_cm},
            {"cd1_object_cm", cd1_object_cm},
            {"iou_percent", iou_percent},
            {"iou_stderr_percent", iou_stderr_percent},
            {"intersection_volume_m3", intersection_volume_m3},
            {"intersection_stderr_m3", intersection_stderr_m3}};
}

std::string MetricReport::table() const
{
    std::ostringstream os;
    os << std::left << std::setw(24) << "metric" << std::right << std::setw(14) << "value" << '\n';
    auto row = [&](const char* name, double v) {
        os << std::left << std::setw(24) << name << std::right << std::setw(14) << std::setprecision(6) << v << '\n';
    };
    row("Chamfer (cm)", chamfer_cm);
    row("P2S (cm)", p2s_cm);
    row("1D-CD human (cm)", cd1_human_cm);
    row("1D-CD object (cm)", cd1_object_cm);
    row("IoU (%)", iou_percent);
    row("Volume (m^3)", intersection_volume_m3);
    return os.str();
}

}  // namespace instrecon
