#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include <json.hpp>

#include "instrecon/sampling.hpp"
#include "instrecon/skinning.hpp"

namespace instrecon {

/// Random rigid-plus-scale placement of the object relative to the human.
/// The object turns and scales about its own AABB center, then shifts.
struct PlacementSpec {
    Vec3 translation_min = Vec3::Constant(-0.1);
    Vec3 translation_max = Vec3::Constant(0.1);
    Vec3 rotation_axis = Vec3::UnitY();
    double angle_min = -3.141592653589793;
    double angle_max = 3.141592653589793;
    double scale_min = 0.9;
    double scale_max = 1.1;
    bool allow_penetration = true;
    double max_overlap_fraction = 1.0;  // of the object volume
    std::uint64_t seed = 0;
    std::size_t samples = 6000;
    SamplingConfig sampling;
    int max_attempts = 100;

    /// Throws InvalidConfig.
    void validate() const;
};

nlohmann::json to_json(const PlacementSpec& spec);
PlacementSpec placement_spec_from_json(const nlohmann::json& j);

/// X' = scale * R * (X - pivot) + pivot + translation.
struct Placement {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();
    double scale = 1.0;
    Vec3 pivot = Vec3::Zero();
};

TriMesh apply_placement(const TriMesh& mesh, const Placement& placement);

struct ComposedScene {
    TriMesh human;   // labeled kHumanLabel
    TriMesh object;  // placed, labeled kObjectLabel
    Placement placement;
    SampleSet samples;
    std::uint64_t seed = 0;

    /// Both parts merged, labels kept.
    TriMesh merged() const { return merge(human, object); }
};

/// Occupancy labels from inside() against each part. A watertight human gives
/// SyntheticInstance samples; otherwise only the object channel is emitted
/// (SyntheticObjectOnly). Throws NonWatertight when the object is open.
SampleSet label_instances(std::vector<Vec3> points, const TriMesh& human, const TriMesh& object);

/// Union-only labels: inside() of either part.
SampleSet label_union(std::vector<Vec3> points, const TriMesh& human, const TriMesh& object);

/// Draws points over both parts (see sample_points) and labels them per instance.
SampleSet sample_scene(const TriMesh& human, const TriMesh& object, std::size_t n, const SamplingConfig& cfg,
                       std::uint64_t seed, bool union_only);

/// Samples a placement within the spec ranges and labels samples. Placements
/// violating the penetration rules are redrawn up to max_attempts times,
/// then PlacementFailed.
ComposedScene compose_scene(const TriMesh& human, const TriMesh& object, const PlacementSpec& spec);

/// Same, with the placement given.
ComposedScene compose_fixed(const TriMesh& human, const TriMesh& object, const Placement& placement,
                            std::size_t samples, const SamplingConfig& cfg, std::uint64_t seed);

/// Fraction of the object volume also inside the human (Monte Carlo over the
/// object AABB, fixed seed). Zero when the boxes are disjoint.
double overlap_fraction(const TriMesh& human, const TriMesh& object, std::size_t samples, std::uint64_t seed);

/// Height of the chair seat plane: the 75th percentile height of a regular
/// grid of interior points, or the top of the lowest three AABB quarters
/// when the chair is open.
double seat_height(const TriMesh& chair);

/// Vertical translation moving the chair seat to the hip vertex height.
Vec3 seat_height_align(std::size_t hip_vertex, const TriMesh& human, const TriMesh& chair);

/// Scene directory layout: scene.json, human.ply, object.ply, samples.*.
struct SceneManifest {
    std::string human_source;
    std::string object_source;
    std::optional<Pose> human_pose;
    Placement placement;
    std::uint64_t seed = 0;
    std::string material = "rigid";
    SampleSource source = SampleSource::SyntheticInstance;
};

nlohmann::json to_json(const SceneManifest& m);
SceneManifest scene_manifest_from_json(const nlohmann::json& j);

void write_scene(const std::filesystem::path& dir, const ComposedScene& scene, const SceneManifest& manifest);

struct LoadedScene {
    SceneManifest manifest;
    TriMesh human;
    TriMesh object;
};
LoadedScene read_scene(const std::filesystem::path& dir);

}  // namespace instrecon
