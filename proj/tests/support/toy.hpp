#pragma once

// Toy sphere "human" + box "object" scenes for training tests.

#include <filesystem>
#include <string>
#include <vector>

#include "instrecon/composer.hpp"
#include "instrecon/metrics.hpp"
#include "instrecon/trainer.hpp"

namespace toy {

namespace fs = std::filesystem;
using instrecon::Vec3;

struct Layout {
    Vec3 center = Vec3::Zero();
    double radius = 0.35;
    Vec3 box_lo{0.12, -0.3, -0.3};
    Vec3 box_hi{0.62, 0.3, 0.3};
    // When set, the object is a sphere instead of the box.
    bool round_object = false;
    Vec3 object_center{0.45, 0.0, 0.0};
    double object_radius = 0.3;
};

inline instrecon::TriMesh human_mesh(const Layout& l) { return instrecon::make_icosphere(l.radius, 3, l.center); }
inline instrecon::TriMesh object_mesh(const Layout& l)
{
    return l.round_object ? instrecon::make_icosphere(l.object_radius, 3, l.object_center)
                          : instrecon::make_box(l.box_lo, l.box_hi, 4);
}

inline fs::path write_scene(const fs::path& dir, const Layout& l, instrecon::SampleSource source,
                            const std::string& material = "rigid", std::uint64_t seed = 1)
{
    const auto scene = instrecon::compose_fixed(human_mesh(l), object_mesh(l), {}, 1000, {}, seed);
    instrecon::SceneManifest m;
    m.human_source = "icosphere";
    m.object_source = "box";
    m.seed = seed;
    m.material = material;
    m.source = source;
    instrecon::write_scene(dir, scene, m);
    return dir;
}

inline instrecon::TrainConfig config(std::vector<instrecon::SceneEntry> scenes, std::uint64_t seed, int steps)
{
    instrecon::TrainConfig c;
    c.scenes = std::move(scenes);
    c.seed = seed;
    c.learning_rate = 1e-2;
    c.lr_schedule = "cosine";
    c.batch_scenes = static_cast<int>(c.scenes.size());
    c.points_per_scene = 1000;
    c.steps_per_epoch = 50;
    c.epochs = steps / c.steps_per_epoch;
    c.width = 32;
    c.depth = 3;
    c.feature_levels = 3;
    c.n_freq = 2;
    c.rig.views = 6;
    c.rig.radius_scale = 1.8;
    c.rig.intrinsics = {96, 96, 40.0};
    c.sampling.sigma = 0.03;
    c.checkpoint_every = 1000000;
    return c;
}

inline fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("instrecon_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace toy
