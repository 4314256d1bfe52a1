#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "instrecon/camera.hpp"
#include "instrecon/composer.hpp"
#include "instrecon/field.hpp"
#include "instrecon/losses.hpp"

namespace instrecon {

/// Circle rig around each scene's AABB center.
struct RigConfig {
    int views = 6;
    double radius_scale = 1.5;  // camera distance in scene diagonals
    double height = 0.0;        // vertical camera offset in scene diagonals
    IntrinsicsSpec intrinsics{128, 128, 40.0};
};

struct SceneEntry {
    std::filesystem::path dir;
    std::string role = "synthetic";  // "synthetic" or "real"
};

struct TrainConfig {
    double learning_rate = 1e-4;
    std::string lr_schedule = "constant";  // or "cosine": decays to 0 at total_steps()
    int batch_scenes = 4;
    std::size_t points_per_scene = 6000;
    int epochs = 40;
    int steps_per_epoch = 50;
    std::map<std::string, double> gamma_by_material{{"rigid", 1.0}, {"flexible", 0.75}, {"soft", 0.5}};
    std::array<double, 2> mix_ratio{1.0, 1.0};  // synthetic : real
    std::uint64_t seed = 0;
    int width = 128;
    int depth = 4;
    int feature_levels = 3;
    int n_freq = 2;
    RigConfig rig;
    SamplingConfig sampling;
    double w_i = 1.0;
    double w_u = 1.0;
    double w_in = 1.0;
    int checkpoint_every = 500;
    std::filesystem::path init_ckpt;
    std::vector<SceneEntry> scenes;

    long total_steps() const { return static_cast<long>(epochs) * steps_per_epoch; }
    double learning_rate_at(long step) const;
    double gamma_for(const std::string& material) const;
    /// Throws InvalidConfig.
    void validate() const;
};

inline constexpr int kTrainConfigVersion = 1;

/// Relative scene and checkpoint paths resolve against `base`.
TrainConfig train_config_from_json(const nlohmann::json& j, const std::filesystem::path& base = {});
nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig read_train_config(const std::filesystem::path& path);

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long t = 0;
};

/// Bias-corrected Adam update in place. Throws ShapeMismatch.
void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

/// A scene prepared for training: rendered features and per-epoch samples.
struct TrainScene {
    LoadedScene data;
    SampleSource source = SampleSource::RealUnion;
    double gamma_rig = 1.0;
    FieldContext context;
};

TrainScene prepare_scene(const SceneEntry& entry, const TrainConfig& cfg);

/// Camera rig for a scene.
std::vector<Camera> scene_rig(const TriMesh& scene, const RigConfig& rig);

struct Checkpoint {
    MlpParams params;
    AdamState adam;
    long step = 0;
    TrainConfig config;
};

void write_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& dir);
/// Accepts a checkpoint directory or a training output directory.
std::filesystem::path resolve_checkpoint(const std::filesystem::path& path);

class Trainer {
public:
    explicit Trainer(TrainConfig cfg);
    /// Continues from a checkpoint (parameters, optimizer state and step).
    Trainer(TrainConfig cfg, const Checkpoint& resume);

    /// One optimizer step on the next batch.
    LossReport step();
    /// Steps until total_steps(), logging every step and checkpointing every
    /// checkpoint_every steps and at the end (keeping the last two).
    void run(const std::filesystem::path& out_dir);

    long step_count() const { return step_; }
    const MlpParams& params() const { return params_; }
    const TrainConfig& config() const { return cfg_; }
    const std::vector<TrainScene>& scenes() const { return scenes_; }
    Checkpoint checkpoint() const;

    /// Scene indices drawn at `step`, synthetic first.
    std::vector<std::size_t> batch_at(long step) const;
    /// Samples of scene i for an epoch.
    SampleSet samples_for(std::size_t scene, long epoch) const;

private:
    void load_scenes();
    void refresh(std::size_t scene, long epoch);

    TrainConfig cfg_;
    std::vector<TrainScene> scenes_;
    std::vector<long> cached_epoch_;
    std::vector<SampleSet> cached_samples_;
    std::vector<std::vector<double>> cached_inputs_;
    MlpParams params_;
    AdamState adam_;
    long step_ = 0;
};

/// Both occupancy channels sampled on a res^3 grid over the scene AABB padded
/// 5%, then marching cubes at `iso`.
struct Extraction {
    TriMesh human;
    TriMesh object;
};
Extraction extract_instances(const MlpParams& params, const FieldContext& ctx, const Aabb& box, int resolution,
                             double iso = 0.5);

/// Field outputs at many points, evaluated in batches.
std::vector<Occupancy> evaluate_points(const MlpParams& params, const FieldContext& ctx, std::span<const Vec3> points);

}  // namespace instrecon
