#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "instrecon/mesh.hpp"

namespace instrecon {

/// 0.5 * (mean_a min_b |a - b| + mean_b min_a |a - b|). Throws EmptySet.
double chamfer(std::span<const Vec3> a, std::span<const Vec3> b);

/// mean_a min_b |a - b|. Throws EmptySet.
double cd_one_directional(std::span<const Vec3> a, std::span<const Vec3> b);

/// mean_a of the distance from a to the surface of b. Throws EmptySet, EmptyMesh.
double cd_one_directional(std::span<const Vec3> a, const TriMesh& b);

/// Mean distance from n area-weighted samples of pred to the surface of gt.
/// Throws EmptyMesh.
double p2s(const TriMesh& pred, const TriMesh& gt, std::size_t n_samples, std::uint64_t seed);

struct OverlapEstimate {
    double iou = 0.0;  // fraction in [0, 1]
    double iou_stderr = 0.0;
    double intersection_volume = 0.0;
    double intersection_stderr = 0.0;
    double volume_a = 0.0;
    double volume_b = 0.0;
    std::size_t samples = 0;
};

/// Monte Carlo over the union AABB with inside(). Empty meshes contribute no
/// volume. Throws NonWatertight.
OverlapEstimate mesh_iou_and_volume(const TriMesh& a, const TriMesh& b, std::size_t n_samples, std::uint64_t seed);

/// Faces whose majority vertex label equals `label`, re-indexed.
TriMesh extract_part(const TriMesh& mesh, std::int32_t label);

struct EvalConfig {
    std::size_t surface_samples = 10000;
    std::size_t volume_samples = 200000;
    std::uint64_t seed = 0;
};

/// Distances in cm (inputs in meters), volume in m^3.
struct MetricReport {
    double chamfer_cm = 0.0;
    double p2s_cm = 0.0;
    double cd1_human_cm = 0.0;
    double cd1_object_cm = 0.0;
    double iou_percent = 0.0;
    double iou_stderr_percent = 0.0;
    double intersection_volume_m3 = 0.0;
    double intersection_stderr_m3 = 0.0;

    nlohmann::json to_json() const;
    /// Aligned plain-text table, one row per metric.
    std::string table() const;
};

/// Chamfer and P2S of the merged prediction against gt, 1D-CD from each
/// labeled gt part to its predicted instance, and the overlap of the two
/// predicted instances. Throws MissingLabels when gt is unlabeled.
MetricReport evaluate(const TriMesh& pred_human, const TriMesh& pred_object, const TriMesh& gt, const EvalConfig& cfg);

}  // namespace instrecon
