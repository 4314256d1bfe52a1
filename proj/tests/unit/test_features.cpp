#include <doctest.h>

#include <cmath>
#include <random>

#include "instrecon/features.hpp"

using namespace instrecon;

namespace {

Image ramp(int w, int h)
{
    Image img(w, h, 0.0f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img.at(x, y) = static_cast<float>(0.01 * x + 0.001 * y);
    return img;
}

}  // namespace

TEST_CASE("pyramid level 0 is the image and coarser levels are box means")
{
    const std::vector<Image> imgs{ramp(9, 7)};
    const FeatureGrid g = build_feature_grid(imgs, 3);
    CHECK(g.channels == 3);
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 9; ++x) CHECK(g.at(0, x, y)[0] == static_cast<double>(imgs[0].at(x, y)));
    // Level 1: 3x3 box around (4, 3).
    double sum = 0.0;
    for (int y = 2; y <= 4; ++y)
        for (int x = 3; x <= 5; ++x) sum += imgs[0].at(x, y);
    CHECK(g.at(0, 4, 3)[1] == doctest::Approx(sum / 9.0).epsilon(1e-12));
}

TEST_CASE("bilinear sampling: nodes, midpoints and constants")
{
    const std::vector<Image> imgs{ramp(8, 8), Image(8, 8, 0.25f)};
    const FeatureGrid g = build_feature_grid(imgs, 2);
    const auto node = sample_feature(g, 0, Vec2(3, 5));
    CHECK(node[0] == g.at(0, 3, 5)[0]);
    CHECK(node[1] == g.at(0, 3, 5)[1]);
    const auto mid = sample_feature(g, 0, Vec2(3.5, 5));
    CHECK(mid[0] == doctest::Approx(0.5 * (g.at(0, 3, 5)[0] + g.at(0, 4, 5)[0])).epsilon(1e-14));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-2, 10);
    for (int i = 0; i < 50; ++i) {
        const auto c = sample_feature(g, 1, Vec2(u(rng), u(rng)));
        CHECK(c[0] == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(c[1] == doctest::Approx(0.25).epsilon(1e-12));
    }
}

TEST_CASE("grids need matching sizes")
{
    const std::vector<Image> imgs{ramp(8, 8), ramp(8, 9)};
    CHECK_THROWS_AS(build_feature_grid(imgs, 2), Error);
    CHECK_THROWS_AS(build_feature_grid(std::vector<Image>{}, 2), Error);
}

TEST_CASE("positional embedding")
{
    const auto e = positional_embed(Vec3(1, 0, 0), 1);
    REQUIRE(e.size() == 6);
    const double expect[6] = {0, 0, 0, -1, 1, 1};
    for (int i = 0; i < 6; ++i) CHECK(std::abs(e[static_cast<std::size_t>(i)] - expect[i]) < 1e-15);
    CHECK(positional_embed(Vec3(0, 1, 0), 0).empty());
    for (int n = 0; n < 5; ++n) CHECK(positional_embed(Vec3(0, 0, 1), n).size() == static_cast<std::size_t>(6 * n));
    try {
        (void)positional_embed(Vec3(1, 1, 0), 2);
        FAIL("expected NonUnitDirection");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonUnitDirection);
    }
}

TEST_CASE("batched inputs equal per-query rows")
{
    const TriMesh scene = make_icosphere(0.5, 2);
    const auto cams = rig_circle(3, 2.0, 0.1, Vec3::Zero(), {32, 32, 40});
    const FieldContext ctx = make_field_context(cams, scene, 2, 2);
    CHECK(ctx.view_input_dim() == 4 + 1 + 12);
    std::vector<Vec3> pts{Vec3(0.1, 0.2, 0.0), Vec3(-0.3, 0.0, 0.2)};
    const auto rows = assemble_inputs(ctx, pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto q = make_query(ctx, pts[i]).flatten();
        REQUIRE(q.size() == static_cast<std::size_t>(3 * ctx.view_input_dim()));
        for (std::size_t k = 0; k < q.size(); ++k) CHECK(rows[i * q.size() + k] == q[k]);
    }
    // Depth input is centered on the scene: the center projects to zero.
    const auto q0 = make_query(ctx, scene.bounds().center());
    for (double z : q0.depths) CHECK(std::abs(z) < 1e-12);
}
