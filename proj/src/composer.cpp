#include "instrecon/composer.hpp"

#include <algorithm>
#include <random>

#include "instrecon/bvh.hpp"
#include "instrecon/mesh_io.hpp"
#include "instrecon/raw_io.hpp"

namespace instrecon {
namespace {

constexpr const char* kModule = "composer";
constexpr int kSceneVersion = 1;

nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }
Vec3 json_vec(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

nlohmann::json placement_json(const Placement& p)
{
    nlohmann::json rot = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) rot.push_back({p.rotation(r, 0), p.rotation(r, 1), p.rotation(r, 2)});
    return {{"rotation", rot}, {"translation", vec_json(p.translation)}, {"scale", p.scale}, {"pivot", vec_json(p.pivot)}};
}

Placement json_placement(const nlohmann::json& j)
{
    Placement p;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) p.rotation(r, c) = j.at("rotation").at(r).at(c).get<double>();
    p.translation = json_vec(j.at("translation"));
    p.scale = j.at("scale").get<double>();
    p.pivot = json_vec(j.at("pivot"));
    return p;
}

std::vector<std::uint8_t> occupancy(const MeshQuery& q, const std::vector<Vec3>& points)
{
    std::vector<std::uint8_t> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = q.inside(points[i]) ? 1 : 0;
    return out;
}

}  // namespace

void PlacementSpec::validate() const
{
    if (!((translation_min.array() <= translation_max.array()).all()))
        throw Error(ErrorCode::InvalidConfig, kModule, "translation range is inverted");
    if (!(angle_min <= angle_max)) throw Error(ErrorCode::InvalidConfig, kModule, "rotation range is inverted");
    if (!(scale_min > 0.0 && scale_min <= scale_max))
        throw Error(ErrorCode::InvalidConfig, kModule, "scale interval must be positive");
    if (std::abs(rotation_axis.norm() - 1.0) > 1e-6)
        throw Error(ErrorCode::InvalidConfig, kModule, "rotation axis must be a unit vector");
    if (!(max_overlap_fraction >= 0.0 && max_overlap_fraction <= 1.0))
        throw Error(ErrorCode::InvalidConfig, kModule, "max_overlap_fraction must lie in [0, 1]");
    if (samples == 0 || max_attempts < 1) throw Error(ErrorCode::InvalidConfig, kModule, "samples and max_attempts must be positive");
}

nlohmann::json to_json(const PlacementSpec& s)
{
    return {{"translation_min", vec_json(s.translation_min)},
            {"translation_max", vec_json(s.translation_max)},
            {"rotation_axis", vec_json(s.rotation_axis)},
            {"angle_min", s.angle_min},
            {"angle_max", s.angle_max},
            {"scale_min", s.scale_min},
            {"scale_max", s.scale_max},
            {"allow_penetration", s.allow_penetration},
            {"max_overlap_fraction", s.max_overlap_fraction},
            {"seed", s.seed},
            {"samples", s.samples},
            {"sigma", s.sampling.sigma},
            {"bbox_pad", s.sampling.bbox_pad},
            {"surface_fraction", s.sampling.surface_fraction},
            {"max_attempts", s.max_attempts}};
}

PlacementSpec placement_spec_from_json(const nlohmann::json& j)
{
    PlacementSpec s;
    try {
        if (j.contains("translation_min")) s.translation_min = json_vec(j["translation_min"]);
        if (j.contains("translation_max")) s.translation_max = json_vec(j["translation_max"]);
        if (j.contains("rotation_axis")) s.rotation_axis = json_vec(j["rotation_axis"]);
        s.angle_min = j.value("angle_min", s.angle_min);
        s.angle_max = j.value("angle_max", s.angle_max);
        s.scale_min = j.value("scale_min", s.scale_min);
        s.scale_max = j.value("scale_max", s.scale_max);
        s.allow_penetration = j.value("allow_penetration", s.allow_penetration);
        s.max_overlap_fraction = j.value("max_overlap_fraction", s.max_overlap_fraction);
        s.seed = j.value("seed", s.seed);
        s.samples = j.value("samples", s.samples);
        s.sampling.sigma = j.value("sigma", s.sampling.sigma);
        s.sampling.bbox_pad = j.value("bbox_pad", s.sampling.bbox_pad);
        s.sampling.surface_fraction = j.value("surface_fraction", s.sampling.surface_fraction);
        s.max_attempts = j.value("max_attempts", s.max_attempts);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, kModule, std::string("placement spec: ") + e.what());
    }
    s.validate();
    return s;
}

TriMesh apply_placement(const TriMesh& mesh, const Placement& p)
{
    const Vec3 shift = p.pivot + p.translation - p.scale * (p.rotation * p.pivot);
    return transform(mesh, p.rotation, shift, p.scale);
}

SampleSet label_instances(std::vector<Vec3> points, const TriMesh& human, const TriMesh& object)
{
    const MeshQuery obj(object);
    if (!obj.watertight()) throw Error(ErrorCode::NonWatertight, kModule, "object mesh must be watertight");
    const MeshQuery hum(human);
    SampleSet s;
    s.occ_object = occupancy(obj, points);
    if (hum.watertight()) {
        s.source = SampleSource::SyntheticInstance;
        s.occ_human = occupancy(hum, points);
        s.occ_union.resize(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) s.occ_union[i] = std::max(s.occ_human[i], s.occ_object[i]);
    } else {
        s.source = SampleSource::SyntheticObjectOnly;
    }
    s.points = std::move(points);
    return s;
}

SampleSet label_union(std::vector<Vec3> points, const TriMesh& human, const TriMesh& object)
{
    const MeshQuery hum(human);
    const MeshQuery obj(object);
    if (!hum.watertight() || !obj.watertight())
        throw Error(ErrorCode::NonWatertight, kModule, "union ground truth needs watertight parts");
    SampleSet s;
    s.source = SampleSource::RealUnion;
    s.occ_union.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        s.occ_union[i] = (hum.inside(points[i]) || obj.inside(points[i])) ? 1 : 0;
    s.points = std::move(points);
    return s;
}

SampleSet sample_scene(const TriMesh& human, const TriMesh& object, std::size_t n, const SamplingConfig& cfg,
                       std::uint64_t seed, bool union_only)
{
    auto points = sample_points(merge(human, object), n, cfg, seed).points;
    return union_only ? label_union(std::move(points), human, object)
                      : label_instances(std::move(points), human, object);
}

double overlap_fraction(const TriMesh& human, const TriMesh& object, std::size_t samples, std::uint64_t seed)
{
    const Aabb ob = object.bounds();
    const Aabb hb = human.bounds();
    if ((ob.max.array() < hb.min.array()).any() || (hb.max.array() < ob.min.array()).any()) return 0.0;
    const MeshQuery obj(object);
    const MeshQuery hum(human);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t in_obj = 0, in_both = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double ux = unit(rng);
        const double uy = unit(rng);
        const double uz = unit(rng);
        const Vec3 p = ob.min + Vec3(ux, uy, uz).cwiseProduct(ob.extent());
        if (!obj.inside(p)) continue;
        ++in_obj;
        if (hum.inside(p)) ++in_both;
    }
    return in_obj == 0 ? 0.0 : static_cast<double>(in_both) / static_cast<double>(in_obj);
}

ComposedScene compose_fixed(const TriMesh& human, const TriMesh& object, const Placement& placement,
                            std::size_t samples, const SamplingConfig& cfg, std::uint64_t seed)
{
    ComposedScene scene;
    scene.human = human;
    set_labels(scene.human, kHumanLabel);
    scene.object = apply_placement(object, placement);
    set_labels(scene.object, kObjectLabel);
    scene.placement = placement;
    scene.seed = seed;
    scene.samples = sample_scene(scene.human, scene.object, samples, cfg, seed, false);
    return scene;
}

ComposedScene compose_scene(const TriMesh& human, const TriMesh& object, const PlacementSpec& spec)
{
    spec.validate();
    if (!is_watertight(object)) throw Error(ErrorCode::NonWatertight, kModule, "object mesh must be watertight");
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Vec3 pivot = object.bounds().center();
    const bool check_overlap = !spec.allow_penetration || spec.max_overlap_fraction < 1.0;
    if (check_overlap && !is_watertight(human))
        throw Error(ErrorCode::NonWatertight, kModule, "penetration limits need a watertight human");

    for (int attempt = 0; attempt < spec.max_attempts; ++attempt) {
        Placement p;
        p.pivot = pivot;
        for (int a = 0; a < 3; ++a) {
            const double u = unit(rng);
            p.translation[a] = spec.translation_min[a] + u * (spec.translation_max[a] - spec.translation_min[a]);
        }
        const double angle = spec.angle_min + unit(rng) * (spec.angle_max - spec.angle_min);
        p.rotation = axis_angle(angle * spec.rotation_axis);
        p.scale = spec.scale_min + unit(rng) * (spec.scale_max - spec.scale_min);
        if (check_overlap) {
            const TriMesh placed = apply_placement(object, p);
            const double frac = overlap_fraction(human, placed, 20000, spec.seed + 1);
            const double limit = spec.allow_penetration ? spec.max_overlap_fraction : 0.0;
            if (frac > limit) continue;
        }
        return compose_fixed(human, object, p, spec.samples, spec.sampling, spec.seed);
    }
    throw Error(ErrorCode::PlacementFailed, kModule,
                "no placement within the penetration limits after " + std::to_string(spec.max_attempts) + " attempts");
}

double seat_height(const TriMesh& chair)
{
    const Aabb box = chair.bounds();
    if (!box.valid()) throw Error(ErrorCode::EmptyMesh, kModule, "chair mesh is empty");
    const double fallback = box.min.y() + 0.75 * box.extent().y();
    if (!is_watertight(chair)) return fallback;
    const MeshQuery q(chair);
    constexpr int kGrid = 24;
    std::vector<double> heights;
    for (int i = 0; i < kGrid; ++i)
        for (int j = 0; j < kGrid; ++j)
            for (int k = 0; k < kGrid; ++k) {
                const Vec3 u((i + 0.5) / kGrid, (j + 0.5) / kGrid, (k + 0.5) / kGrid);
                const Vec3 p = box.min + u.cwiseProduct(box.extent());
                if (q.inside(p)) heights.push_back(p.y());
            }
    if (heights.empty()) return fallback;
    std::sort(heights.begin(), heights.end());
    return heights[static_cast<std::size_t>(0.75 * static_cast<double>(heights.size() - 1))];
}

Vec3 seat_height_align(std::size_t hip_vertex, const TriMesh& human, const TriMesh& chair)
{
    if (hip_vertex >= human.vertices.size())
        throw Error(ErrorCode::InvalidConfig, kModule, "hip vertex index out of range");
    return {0.0, human.vertices[hip_vertex].y() - seat_height(chair), 0.0};
}

nlohmann::json to_json(const SceneManifest& m)
{
    nlohmann::json j;
    j["format"] = "instrecon-scene";
    j["version"] = kSceneVersion;
    j["human_source"] = m.human_source;
    j["object_source"] = m.object_source;
    if (m.human_pose) {
        nlohmann::json rots = nlohmann::json::array();
        for (const Vec3& r : m.human_pose->rotations) rots.push_back(vec_json(r));
        j["human_pose"] = {{"rotations", rots}, {"translation", vec_json(m.human_pose->translation)}};
    }
    j["placement"] = placement_json(m.placement);
    j["seed"] = m.seed;
    j["material"] = m.material;
    j["source"] = to_string(m.source);
    return j;
}

SceneManifest scene_manifest_from_json(const nlohmann::json& j)
{
    if (j.value("format", "") != "instrecon-scene" || j.value("version", 0) != kSceneVersion)
        throw Error(ErrorCode::Io, kModule, "unsupported scene manifest");
    SceneManifest m;
    try {
        m.human_source = j.value("human_source", "");
        m.object_source = j.value("object_source", "");
        if (j.contains("human_pose")) {
            Pose p;
            for (const auto& r : j["human_pose"].at("rotations")) p.rotations.push_back(json_vec(r));
            p.translation = json_vec(j["human_pose"].at("translation"));
            m.human_pose = p;
        }
        m.placement = json_placement(j.at("placement"));
        m.seed = j.value("seed", std::uint64_t{0});
        m.material = j.value("material", "rigid");
        m.source = sample_source_from_string(j.value("source", "synthetic_instance"));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Io, kModule, std::string("scene manifest: ") + e.what());
    }
    return m;
}

void write_scene(const std::filesystem::path& dir, const ComposedScene& scene, const SceneManifest& manifest)
{
    std::filesystem::create_directories(dir);
    write_ply(dir / "human.ply", scene.human);
    write_ply(dir / "object.ply", scene.object);
    write_sample_set(dir / "samples", scene.samples);
    raw::write_json(dir / "scene.json", to_json(manifest));
}

LoadedScene read_scene(const std::filesystem::path& dir)
{
    LoadedScene s;
    s.manifest = scene_manifest_from_json(raw::read_json(dir / "scene.json"));
    s.human = read_ply(dir / "human.ply").mesh;
    s.object = read_ply(dir / "object.ply").mesh;
    return s;
}

}  // namespace instrecon
