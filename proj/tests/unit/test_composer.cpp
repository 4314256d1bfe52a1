#include <doctest.h>

#include <random>

#include "instrecon/bvh.hpp"
#include "instrecon/composer.hpp"
#include "support/toy.hpp"

using namespace instrecon;

namespace {

std::vector<Vec3> uniform_points(const Aabb& box, std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<Vec3> pts(n);
    for (Vec3& p : pts) p = box.min + Vec3(u(rng), u(rng), u(rng)).cwiseProduct(box.extent());
    return pts;
}

}  // namespace

TEST_CASE("disjoint parts never label a point twice")
{
    const TriMesh human = make_icosphere(0.3, 3);
    const TriMesh object = make_box(Vec3(0.5, -0.2, -0.2), Vec3(0.9, 0.2, 0.2));
    const SampleSet s = sample_scene(human, object, 20000, {}, 3, false);
    s.validate();
    CHECK(s.source == SampleSource::SyntheticInstance);
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(!(s.occ_human[i] && s.occ_object[i]));
        CHECK(s.occ_union[i] == (s.occ_human[i] | s.occ_object[i]));
    }
}

TEST_CASE("half-overlapping cubes: co-occupancy ratio")
{
    const TriMesh a = make_box(Vec3(0, 0, 0), Vec3(1, 1, 1));
    const TriMesh b = make_box(Vec3(0.5, 0, 0), Vec3(1.5, 1, 1));
    const SampleSet s = label_instances(uniform_points(Aabb{Vec3(0, 0, 0), Vec3(1.5, 1, 1)}, 100000, 5), a, b);
    std::size_t both = 0, any = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        both += s.occ_human[i] && s.occ_object[i];
        any += s.occ_union[i];
    }
    // Intersection over union is 1/3; binomial standard error about 0.0015.
    CHECK(std::abs(static_cast<double>(both) / static_cast<double>(any) - 1.0 / 3.0) < 0.01);
    CHECK(overlap_fraction(a, b, 100000, 2) == doctest::Approx(0.5).epsilon(0.03));
    CHECK(overlap_fraction(a, make_box(Vec3(2, 0, 0), Vec3(3, 1, 1)), 1000, 2) == 0.0);
}

TEST_CASE("union labels are the OR of per-part inside tests")
{
    const TriMesh human = make_icosphere(0.4, 3);
    const TriMesh object = make_box(Vec3(0.2, -0.2, -0.2), Vec3(0.7, 0.2, 0.2));
    const auto pts = uniform_points(Aabb{Vec3(-0.5, -0.5, -0.5), Vec3(0.8, 0.5, 0.5)}, 5000, 9);
    const SampleSet u = label_union(pts, human, object);
    CHECK(u.source == SampleSource::RealUnion);
    CHECK(!u.has_human());
    CHECK(!u.has_object());
    const MeshQuery qh(human), qo(object);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(u.occ_union[i] == (qh.inside(pts[i]) || qo.inside(pts[i])));
}

TEST_CASE("open human gives object-only samples")
{
    TriMesh human = make_icosphere(0.4, 2);
    human.faces.pop_back();
    const TriMesh object = make_box(Vec3(0.5, -0.2, -0.2), Vec3(0.9, 0.2, 0.2));
    const SampleSet s = sample_scene(human, object, 1000, {}, 1, false);
    s.validate();
    CHECK(s.source == SampleSource::SyntheticObjectOnly);
    CHECK(!s.has_human());
    CHECK(s.has_object());
    try {
        (void)sample_scene(object, human, 100, {}, 1, false);
        FAIL("expected NonWatertight");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonWatertight);
    }
}

TEST_CASE("seat alignment moves the chair vertically to the hip")
{
    const SkinnedTemplate body = make_capsule_body();
    const std::size_t hip = hip_vertex_index(body);
    const double hip_y = body.rest_mesh.vertices[hip].y();
    const TriMesh chair = make_box(Vec3(-0.2, 0.0, -0.2), Vec3(0.2, 0.5, 0.2));
    const double seat = seat_height(chair);
    CHECK(seat > 0.3);
    CHECK(seat < 0.45);

    const Vec3 t = seat_height_align(hip, body.rest_mesh, chair);
    CHECK(t.x() == 0.0);
    CHECK(t.z() == 0.0);
    CHECK(t.y() == doctest::Approx(hip_y - seat).epsilon(1e-12));

    const TriMesh aligned = transform(chair, Mat3::Identity(), t, 1.0);
    CHECK(std::abs(seat_height_align(hip, body.rest_mesh, aligned).y()) < 1e-12);
    const TriMesh lowered = transform(aligned, Mat3::Identity(), Vec3(0, -0.3, 0), 1.0);
    CHECK(seat_height_align(hip, body.rest_mesh, lowered).y() == doctest::Approx(0.3).epsilon(1e-12));

    TriMesh open = chair;
    open.faces.pop_back();
    CHECK(seat_height(open) == doctest::Approx(0.375));
    CHECK_THROWS_AS(seat_height_align(body.rest_mesh.vertices.size(), body.rest_mesh, chair), Error);
}

TEST_CASE("composition is deterministic for a seed and honours penetration limits")
{
    const TriMesh human = make_icosphere(0.35, 3);
    const TriMesh object = make_box(Vec3(0.3, -0.15, -0.15), Vec3(0.6, 0.15, 0.15));
    PlacementSpec spec;
    spec.seed = 11;
    spec.samples = 2000;
    spec.translation_min = Vec3(-0.2, -0.1, -0.1);
    spec.translation_max = Vec3(0.4, 0.1, 0.1);
    const ComposedScene a = compose_scene(human, object, spec);
    const ComposedScene b = compose_scene(human, object, spec);
    CHECK(a.samples.points == b.samples.points);
    CHECK(a.samples.occ_human == b.samples.occ_human);
    CHECK(a.object.vertices == b.object.vertices);
    for (std::size_t v = 0; v < a.object.vertices.size(); ++v) CHECK(a.object.vertex_labels[v] == kObjectLabel);
    for (std::size_t v = 0; v < a.human.vertices.size(); ++v) CHECK(a.human.vertex_labels[v] == kHumanLabel);

    spec.allow_penetration = false;
    const ComposedScene c = compose_scene(human, object, spec);
    CHECK(overlap_fraction(human, c.object, 20000, 5) < 0.01);

    spec.translation_min = Vec3(-0.3, 0, 0);
    spec.translation_max = Vec3(-0.3, 0, 0);
    spec.scale_min = spec.scale_max = 1.0;
    spec.max_attempts = 5;
    try {
        (void)compose_scene(human, object, spec);
        FAIL("expected PlacementFailed");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::PlacementFailed);
    }

    TriMesh open = object;
    open.faces.pop_back();
    CHECK_THROWS_AS(compose_scene(human, open, PlacementSpec{}), Error);
    PlacementSpec bad;
    bad.max_overlap_fraction = 2.0;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("placement applies about the pivot")
{
    const TriMesh box = make_box(Vec3(0, 0, 0), Vec3(2, 2, 2));
    Placement p;
    p.pivot = Vec3(1, 1, 1);
    p.scale = 0.5;
    p.translation = Vec3(1, 0, 0);
    const Aabb b = apply_placement(box, p).bounds();
    CHECK((b.min - Vec3(1.5, 0.5, 0.5)).norm() < 1e-12);
    CHECK((b.max - Vec3(2.5, 1.5, 1.5)).norm() < 1e-12);
}

TEST_CASE("scene directories round trip")
{
    const auto dir = toy::scratch("composer_scene");
    toy::write_scene(dir / "s", toy::Layout{}, SampleSource::RealUnion, "soft", 4);
    const LoadedScene loaded = read_scene(dir / "s");
    CHECK(loaded.manifest.material == "soft");
    CHECK(loaded.manifest.seed == 4u);
    CHECK(loaded.manifest.source == SampleSource::RealUnion);
    CHECK(is_watertight(loaded.human));
    CHECK(is_watertight(loaded.object));

    SceneManifest m;
    m.human_source = "body";
    m.human_pose = Pose::identity(2);
    m.human_pose->rotations[1] = Vec3(0.1, 0.2, 0.3);
    m.placement.scale = 1.25;
    const SceneManifest back = scene_manifest_from_json(to_json(m));
    REQUIRE(back.human_pose.has_value());
    CHECK(back.human_pose->rotations[1] == m.human_pose->rotations[1]);
    CHECK(back.placement.scale == 1.25);
    CHECK_THROWS_AS(scene_manifest_from_json(nlohmann::json{{"format", "other"}}), Error);

    const PlacementSpec spec = placement_spec_from_json(to_json(PlacementSpec{}));
    CHECK(spec.samples == PlacementSpec{}.samples);
    CHECK(spec.translation_max == PlacementSpec{}.translation_max);
}
