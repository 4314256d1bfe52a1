#include <doctest.h>

#include "instrecon/fusion.hpp"

using namespace instrecon;

namespace {

TriMesh labeled_sphere(std::int32_t label, double radius = 0.5, const Vec3& c = Vec3::Zero())
{
    TriMesh m = make_icosphere(radius, 3, c);
    set_labels(m, label);
    return m;
}

const IntrinsicsSpec kIntr{128, 128, 40.0};

}  // namespace

TEST_CASE("visibility: near side seen, far side hidden")
{
    const TriMesh m = labeled_sphere(kHumanLabel);
    const Camera cam = look_at(Vec3(0, 0, 3), Vec3::Zero(), kIntr);
    const DepthMap depth = render_depth(cam, m);
    const auto vis = visibility_mask(m, cam, depth, 0.01);
    std::size_t seen = 0;
    for (std::size_t k = 0; k < m.vertices.size(); ++k) {
        const double z = m.vertices[k].z();
        if (z > 0.45) CHECK(vis[k]);
        if (z < 0.0) CHECK(!vis[k]);
        seen += vis[k];
    }
    // A camera at distance d sees the cap (1 - r/d) / 2 of the sphere; grazing
    // vertices near its rim fail the depth test at nearest-pixel resolution.
    const double frac = static_cast<double>(seen) / static_cast<double>(m.vertices.size());
    CHECK(frac > 0.2);
    CHECK(frac < (1.0 - 0.5 / 3.0) / 2.0);
}

TEST_CASE("visibility grows with the depth tolerance")
{
    const TriMesh m = labeled_sphere(kHumanLabel);
    const Camera cam = look_at(Vec3(2, 1, 2), Vec3::Zero(), kIntr);
    const DepthMap depth = render_depth(cam, m);
    std::size_t prev = 0;
    for (double delta : {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0}) {
        std::size_t n = 0;
        for (bool v : visibility_mask(m, cam, depth, delta)) n += v;
        CHECK(n >= prev);
        prev = n;
    }
}

TEST_CASE("single view: seen vertices take the rendered label")
{
    const TriMesh m = labeled_sphere(kObjectLabel);
    const std::vector<Camera> cams{look_at(Vec3(3, 0, 0), Vec3::Zero(), kIntr)};
    const FusionResult r = relabel_from_renders(m, cams, {});
    std::size_t labeled = 0;
    for (std::size_t k = 0; k < m.vertices.size(); ++k) {
        if (m.vertices[k].x() < 0.0) {
            CHECK(r.labels[k] == kUnlabeled);
            CHECK(r.evidence[k] == 0);
            CHECK(r.confidence[k] == 0.0f);
        }
        if (r.labels[k] != kUnlabeled) {
            CHECK(r.labels[k] == kObjectLabel);
            CHECK(r.confidence[k] == 1.0f);
            ++labeled;
        }
    }
    CHECK(labeled > m.vertices.size() / 4);
}

TEST_CASE("majority vote and ties")
{
    const TriMesh m = labeled_sphere(kHumanLabel);
    const Camera cam = look_at(Vec3(0, 0, 3), Vec3::Zero(), kIntr);
    const DepthMap depth = render_depth(cam, m);
    const LabelMap zero(128, 128, 0), one(128, 128, 1);

    const FusionResult r = label_vertices(m, {cam, cam, cam}, {depth, depth, depth}, {zero, zero, one}, {});
    const FusionResult t = label_vertices(m, {cam, cam}, {depth, depth}, {one, zero}, {});
    FusionConfig strict;
    strict.tie_break = TieBreak::Unlabeled;
    const FusionResult u = label_vertices(m, {cam, cam}, {depth, depth}, {one, zero}, strict);
    for (std::size_t k = 0; k < m.vertices.size(); ++k) {
        if (r.evidence[k] == 0) continue;
        CHECK(r.labels[k] == 0);
        CHECK(r.evidence[k] == 3);
        CHECK(r.confidence[k] == doctest::Approx(2.0 / 3.0));
        CHECK(t.labels[k] == 0);
        CHECK(u.labels[k] == kUnlabeled);
    }
}

TEST_CASE("fusion input errors")
{
    const TriMesh m = labeled_sphere(kHumanLabel);
    const Camera cam = look_at(Vec3(0, 0, 3), Vec3::Zero(), kIntr);
    const DepthMap depth = render_depth(cam, m);
    try {
        (void)label_vertices(m, {cam, cam}, {depth}, {LabelMap(128, 128, 0)}, {});
        FAIL("expected RigMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RigMismatch);
    }
    CHECK_THROWS_AS(label_vertices(TriMesh{}, {cam}, {depth}, {LabelMap(128, 128, 0)}, {}), Error);
    FusionConfig bad;
    bad.n_views = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    CHECK(FusionConfig{}.resolved_delta(m) == doctest::Approx(0.01 * m.bounds().diagonal()));
}

TEST_CASE("two separated spheres relabel from an orbit")
{
    const TriMesh scene = merge(labeled_sphere(kHumanLabel, 0.3, Vec3(-0.5, 0, 0)), labeled_sphere(kObjectLabel, 0.3, Vec3(0.5, 0, 0)));
    const auto cams = rig_sphere(16, 3.0, Vec3::Zero(), kIntr);
    const FusionResult r = relabel_from_renders(scene, cams, {});
    std::size_t right = 0, wrong = 0;
    for (std::size_t k = 0; k < scene.vertices.size(); ++k) {
        if (r.labels[k] == kUnlabeled) continue;
        (r.labels[k] == scene.vertex_labels[k] ? right : wrong) += 1;
    }
    CHECK(wrong == 0);
    CHECK(right > scene.vertices.size() * 9 / 10);
}
