#include "instrecon/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>

#include "instrecon/marching_cubes.hpp"
#include "instrecon/raw_io.hpp"

namespace instrecon {
namespace {

constexpr const char* kModule = "trainer-cli";
constexpr int kCheckpointVersion = 1;
constexpr std::size_t kEvalBatch = 4096;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t scene, std::uint64_t epoch)
{
    std::uint64_t z = seed * 0x9E3779B97F4A7C15ull ^ (scene + 1) * 0xBF58476D1CE4E5B9ull ^ (epoch + 1) * 0x94D049BB133111EBull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base)
{
    if (p.empty() || p.is_absolute() || base.empty()) return p;
    return std::filesystem::weakly_canonical(base / p);
}

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback)
{
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::string checkpoint_name(long step)
{
    std::string digits = std::to_string(step);
    return "ckpt-" + std::string(digits.size() < 8 ? 8 - digits.size() : 0, '0') + digits;
}

}  // namespace

double TrainConfig::gamma_for(const std::string& material) const
{
    const auto it = gamma_by_material.find(material);
    if (it == gamma_by_material.end())
        throw Error(ErrorCode::InvalidConfig, kModule, "no gamma_rig for material '" + material + "'");
    return it->second;
}

double TrainConfig::learning_rate_at(long step) const
{
    if (lr_schedule == "constant" || total_steps() == 0) return learning_rate;
    const double t = std::min(1.0, static_cast<double>(step) / static_cast<double>(total_steps()));
    return 0.5 * learning_rate * (1.0 + std::cos(std::numbers::pi * t));
}

void TrainConfig::validate() const
{
    auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidConfig, kModule, m); };
    if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
    if (lr_schedule != "constant" && lr_schedule != "cosine") fail("lr_schedule must be 'constant' or 'cosine'");
    if (points_per_scene == 0) fail("points_per_scene must be positive");
    if (batch_scenes < 1) fail("batch_scenes must be at least 1");
    if (epochs < 0 || steps_per_epoch < 1) fail("epochs must be >= 0 and steps_per_epoch >= 1");
    if (mix_ratio[0] < 0.0 || mix_ratio[1] < 0.0 || mix_ratio[0] + mix_ratio[1] <= 0.0)
        fail("mix_ratio components must be >= 0 with at least one positive");
    if (width < 1 || depth < 1 || feature_levels < 1 || n_freq < 0) fail("network and feature sizes must be positive");
    if (rig.views < 1 || rig.radius_scale <= 0.0) fail("rig needs at least one view and a positive radius");
    if (checkpoint_every < 1) fail("checkpoint_every must be at least 1");
    for (const auto& [name, g] : gamma_by_material)
        if (!(g >= 0.0 && g <= 1.0)) fail("gamma_rig for '" + name + "' must lie in [0, 1]");
    LossConfig{1.0, w_i, w_u, w_in}.validate();
    for (const auto& s : scenes)
        if (s.role != "synthetic" && s.role != "real") fail("scene role must be 'synthetic' or 'real'");
}

TrainConfig train_config_from_json(const nlohmann::json& j, const std::filesystem::path& base)
{
    TrainConfig c;
    try {
        if (j.contains("version") && j.at("version").get<int>() != kTrainConfigVersion)
            throw Error(ErrorCode::InvalidConfig, kModule, "unsupported config version");
        c.learning_rate = get_or(j, "learning_rate", c.learning_rate);
        c.lr_schedule = get_or(j, "lr_schedule", c.lr_schedule);
        c.batch_scenes = get_or(j, "batch_scenes", c.batch_scenes);
        c.points_per_scene = get_or(j, "points_per_scene", c.points_per_scene);
        c.epochs = get_or(j, "epochs", c.epochs);
        c.steps_per_epoch = get_or(j, "steps_per_epoch", c.steps_per_epoch);
        if (j.contains("gamma_by_material"))
            for (const auto& [k, v] : j.at("gamma_by_material").items()) c.gamma_by_material[k] = v.get<double>();
        if (j.contains("mix_ratio")) c.mix_ratio = {j.at("mix_ratio").at(0).get<double>(), j.at("mix_ratio").at(1).get<double>()};
        c.seed = get_or(j, "seed", c.seed);
        c.width = get_or(j, "width", c.width);
        c.depth = get_or(j, "depth", c.depth);
        c.feature_levels = get_or(j, "feature_levels", c.feature_levels);
        c.n_freq = get_or(j, "n_freq", c.n_freq);
        if (j.contains("rig")) {
            const auto& r = j.at("rig");
            c.rig.views = get_or(r, "views", c.rig.views);
            c.rig.radius_scale = get_or(r, "radius_scale", c.rig.radius_scale);
            c.rig.height = get_or(r, "height", c.rig.height);
            c.rig.intrinsics.width = get_or(r, "image_width", c.rig.intrinsics.width);
            c.rig.intrinsics.height = get_or(r, "image_height", c.rig.intrinsics.height);
            c.rig.intrinsics.fov_y_deg = get_or(r, "fov_y_deg", c.rig.intrinsics.fov_y_deg);
        }
        if (j.contains("sampling")) {
            const auto& s = j.at("sampling");
            c.sampling.sigma = get_or(s, "sigma", c.sampling.sigma);
            c.sampling.bbox_pad = get_or(s, "bbox_pad", c.sampling.bbox_pad);
            c.sampling.surface_fraction = get_or(s, "surface_fraction", c.sampling.surface_fraction);
        }
        if (j.contains("loss_weights")) {
            const auto& w = j.at("loss_weights");
            c.w_i = get_or(w, "w_i", c.w_i);
            c.w_u = get_or(w, "w_u", c.w_u);
            c.w_in = get_or(w, "w_in", c.w_in);
        }
        c.checkpoint_every = get_or(j, "checkpoint_every", c.checkpoint_every);
        if (j.contains("init_ckpt")) c.init_ckpt = resolve(j.at("init_ckpt").get<std::string>(), base);
        if (j.contains("scenes"))
            for (const auto& s : j.at("scenes"))
                c.scenes.push_back({resolve(s.at("dir").get<std::string>(), base), get_or<std::string>(s, "role", "synthetic")});
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, kModule, std::string("train config: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json to_json(const TrainConfig& c)
{
    nlohmann::json scenes = nlohmann::json::array();
    for (const auto& s : c.scenes) scenes.push_back({{"dir", s.dir.string()}, {"role", s.role}});
    nlohmann::json j{{"version", kTrainConfigVersion},
                     {"learning_rate", c.learning_rate},
                     {"lr_schedule", c.lr_schedule},
                     {"batch_scenes", c.batch_scenes},
                     {"points_per_scene", c.points_per_scene},
                     {"epochs", c.epochs},
                     {"steps_per_epoch", c.steps_per_epoch},
                     {"gamma_by_material", c.gamma_by_material},
                     {"mix_ratio", {c.mix_ratio[0], c.mix_ratio[1]}},
                     {"seed", c.seed},
                     {"width", c.width},
                     {"depth", c.depth},
                     {"feature_levels", c.feature_levels},
                     {"n_freq", c.n_freq},
                     {"rig",
                      {{"views", c.rig.views},
                       {"radius_scale", c.rig.radius_scale},
                       {"height", c.rig.height},
                       {"image_width", c.rig.intrinsics.width},
                       {"image_height", c.rig.intrinsics.height},
                       {"fov_y_deg", c.rig.intrinsics.fov_y_deg}}},
                     {"sampling",
                      {{"sigma", c.sampling.sigma},
                       {"bbox_pad", c.sampling.bbox_pad},
                       {"surface_fraction", c.sampling.surface_fraction}}},
                     {"loss_weights", {{"w_i", c.w_i}, {"w_u", c.w_u}, {"w_in", c.w_in}}},
                     {"checkpoint_every", c.checkpoint_every},
                     {"scenes", scenes}};
    if (!c.init_ckpt.empty()) j["init_ckpt"] = c.init_ckpt.string();
    return j;
}

TrainConfig read_train_config(const std::filesystem::path& path)
{
    return train_config_from_json(raw::read_json(path), std::filesystem::absolute(path).parent_path());
}

void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state, double lr,
               double beta1, double beta2, double eps)
{
    if (grads.size() != params.size())
        throw Error(ErrorCode::ShapeMismatch, kModule, "gradient and parameter vectors differ in length");
    if (state.m.empty() && state.v.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size() || state.v.size() != params.size())
        throw Error(ErrorCode::ShapeMismatch, kModule, "optimizer state does not match the parameters");
    ++state.t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
        const double mhat = state.m[i] / c1;
        const double vhat = state.v[i] / c2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

std::vector<Camera> scene_rig(const TriMesh& scene, const RigConfig& rig)
{
    const Aabb box = scene.bounds();
    const double diag = box.diagonal();
    return rig_circle(rig.views, rig.radius_scale * diag, rig.height * diag, box.center(), rig.intrinsics);
}

TrainScene prepare_scene(const SceneEntry& entry, const TrainConfig& cfg)
{
    TrainScene s;
    s.data = read_scene(entry.dir);
    if (entry.role == "real") {
        s.source = SampleSource::RealUnion;
    } else {
        s.source = s.data.manifest.source == SampleSource::RealUnion ? SampleSource::SyntheticInstance
                                                                      : s.data.manifest.source;
        if (!is_watertight(s.data.human)) s.source = SampleSource::SyntheticObjectOnly;
    }
    s.gamma_rig = cfg.gamma_for(s.data.manifest.material);
    const TriMesh merged = merge(s.data.human, s.data.object);
    s.context = make_field_context(scene_rig(merged, cfg.rig), merged, cfg.feature_levels, cfg.n_freq);
    return s;
}

void write_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt)
{
    std::filesystem::create_directories(dir);
    write_params(dir, ckpt.params);
    raw::write_array(dir / "adam_m.f64", ckpt.adam.m);
    raw::write_array(dir / "adam_v.f64", ckpt.adam.v);
    raw::write_json(dir / "state.json", {{"format", "instrecon-checkpoint"},
                                         {"version", kCheckpointVersion},
                                         {"step", ckpt.step},
                                         {"adam_t", ckpt.adam.t},
                                         {"moments", ckpt.adam.m.size()},
                                         {"config", to_json(ckpt.config)}});
}

Checkpoint read_checkpoint(const std::filesystem::path& dir)
{
    const auto state = raw::read_json(dir / "state.json");
    if (state.value("format", "") != "instrecon-checkpoint" || state.value("version", 0) != kCheckpointVersion)
        throw Error(ErrorCode::Io, kModule, "unsupported checkpoint in " + dir.string());
    Checkpoint c;
    c.params = read_params(dir);
    const auto n = state.at("moments").get<std::size_t>();
    c.adam.m = raw::read_array<double>(dir / "adam_m.f64", n);
    c.adam.v = raw::read_array<double>(dir / "adam_v.f64", n);
    c.adam.t = state.at("adam_t").get<long>();
    c.step = state.at("step").get<long>();
    c.config = train_config_from_json(state.at("config"));
    return c;
}

std::filesystem::path resolve_checkpoint(const std::filesystem::path& path)
{
    if (std::filesystem::exists(path / "state.json")) return path;
    if (std::filesystem::exists(path / "checkpoint.json")) {
        const auto j = raw::read_json(path / "checkpoint.json");
        return path / j.at("latest").get<std::string>();
    }
    throw Error(ErrorCode::Io, kModule, "no checkpoint at " + path.string());
}

Trainer::Trainer(TrainConfig cfg) : cfg_(std::move(cfg))
{
    cfg_.validate();
    load_scenes();
    const MlpShape shape{scenes_.front().context.view_input_dim(), cfg_.width, cfg_.depth};
    if (!cfg_.init_ckpt.empty()) {
        params_ = read_params(resolve_checkpoint(cfg_.init_ckpt));
        if (!(params_.shape == shape))
            throw Error(ErrorCode::ShapeMismatch, kModule, "initial checkpoint does not match the network shape");
    } else {
        params_ = init_params(shape, cfg_.seed);
    }
}

Trainer::Trainer(TrainConfig cfg, const Checkpoint& resume) : cfg_(std::move(cfg))
{
    cfg_.validate();
    load_scenes();
    const MlpShape shape{scenes_.front().context.view_input_dim(), cfg_.width, cfg_.depth};
    if (!(resume.params.shape == shape))
        throw Error(ErrorCode::ShapeMismatch, kModule, "checkpoint does not match the network shape");
    params_ = resume.params;
    adam_ = resume.adam;
    step_ = resume.step;
}

void Trainer::load_scenes()
{
    if (cfg_.scenes.empty()) throw Error(ErrorCode::InvalidConfig, kModule, "no training scenes");
    std::vector<std::future<TrainScene>> jobs;
    for (const auto& entry : cfg_.scenes)
        jobs.push_back(std::async(std::launch::async, [&cfg = cfg_, entry] { return prepare_scene(entry, cfg); }));
    for (auto& j : jobs) scenes_.push_back(j.get());
    const int dim = scenes_.front().context.view_input_dim();
    const int views = scenes_.front().context.views();
    for (const auto& s : scenes_)
        if (s.context.view_input_dim() != dim || s.context.views() != views)
            throw Error(ErrorCode::RigMismatch, kModule, "all scenes must share views and feature channels");
    cached_epoch_.assign(scenes_.size(), -1);
    cached_samples_.resize(scenes_.size());
    cached_inputs_.resize(scenes_.size());
}

std::vector<std::size_t> Trainer::batch_at(long step) const
{
    std::vector<std::size_t> syn, real;
    for (std::size_t i = 0; i < scenes_.size(); ++i)
        (scenes_[i].source == SampleSource::RealUnion ? real : syn).push_back(i);
    const double a = syn.empty() ? 0.0 : cfg_.mix_ratio[0];
    const double b = real.empty() ? 0.0 : cfg_.mix_ratio[1];
    if (a + b <= 0.0) throw Error(ErrorCode::MissingGroundTruth, kModule, "mix_ratio selects no available scene");
    const auto batch = static_cast<std::size_t>(cfg_.batch_scenes);
    std::size_t n_syn = a > 0.0 ? std::min<std::size_t>(syn.size(), static_cast<std::size_t>(std::llround(batch * a / (a + b)))) : 0;
    std::size_t n_real = b > 0.0 ? std::min(real.size(), batch - n_syn) : 0;
    if (a > 0.0 && n_syn + n_real < batch) n_syn = std::min(syn.size(), batch - n_real);

    std::vector<std::size_t> out;
    auto take = [&](const std::vector<std::size_t>& pool, std::size_t n) {
        const std::size_t start = static_cast<std::size_t>(step) * n % std::max<std::size_t>(pool.size(), 1);
        for (std::size_t k = 0; k < n; ++k) out.push_back(pool[(start + k) % pool.size()]);
    };
    take(syn, n_syn);
    take(real, n_real);
    return out;
}

SampleSet Trainer::samples_for(std::size_t i, long epoch) const
{
    const TrainScene& s = scenes_.at(i);
    const std::uint64_t seed = mix_seed(cfg_.seed, i, static_cast<std::uint64_t>(epoch));
    const bool union_only = s.source == SampleSource::RealUnion;
    SampleSet out = sample_scene(s.data.human, s.data.object, cfg_.points_per_scene, cfg_.sampling, seed, union_only);
    if (s.source == SampleSource::SyntheticObjectOnly) {
        out.occ_human.clear();
        out.occ_union.clear();
        out.source = SampleSource::SyntheticObjectOnly;
    }
    out.validate();
    return out;
}

void Trainer::refresh(std::size_t i, long epoch)
{
    cached_samples_[i] = samples_for(i, epoch);
    cached_inputs_[i] = assemble_inputs(scenes_[i].context, cached_samples_[i].points);
    cached_epoch_[i] = epoch;
}

LossReport Trainer::step()
{
    const long epoch = step_ / cfg_.steps_per_epoch;
    const auto batch = batch_at(step_);

    std::vector<std::size_t> stale;
    for (std::size_t i : batch)
        if (cached_epoch_[i] != epoch && std::find(stale.begin(), stale.end(), i) == stale.end()) stale.push_back(i);
    std::vector<std::future<void>> jobs;
    for (std::size_t i : stale) jobs.push_back(std::async(std::launch::async, [this, i, epoch] { refresh(i, epoch); }));
    for (auto& j : jobs) j.get();

    MlpParams grads = params_.zeros_like();
    LossReport total;
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (std::size_t i : batch) {
        ForwardCache cache;
        const auto pred = forward(params_, cached_inputs_[i], scenes_[i].context.views(), &cache);
        const LossConfig lc{scenes_[i].gamma_rig, cfg_.w_i, cfg_.w_u, cfg_.w_in};
        LossReport r = loss_total(pred, cached_samples_[i], lc);
#ifndef NDEBUG
        const bool real = cached_samples_[i].source == SampleSource::RealUnion;
        if ((real && r.l_i != 0.0) || (!real && (r.l_u != 0.0 || r.l_in != 0.0)))
            throw Error(ErrorCode::MissingGroundTruth, kModule, "loss routing violated");
#endif
        for (auto& g : r.grad) {
            g.human *= inv;
            g.object *= inv;
        }
        backward(params_, cache, r.grad, grads);
        accumulate(total, r);
    }
    total.l_i *= inv;
    total.l_u *= inv;
    total.l_in *= inv;
    total.l_total *= inv;

    auto flat = params_.flatten();
    adam_step(flat, grads.flatten(), adam_, cfg_.learning_rate_at(step_));
    params_.unflatten(flat);
    ++step_;
    return total;
}

Checkpoint Trainer::checkpoint() const
{
    return {params_, adam_, step_, cfg_};
}

void Trainer::run(const std::filesystem::path& out_dir)
{
    std::filesystem::create_directories(out_dir);
    LossLog log(out_dir / "loss.jsonl", step_ > 0);
    auto save = [&] {
        const std::string name = checkpoint_name(step_);
        write_checkpoint(out_dir / name, checkpoint());
        raw::write_json(out_dir / "checkpoint.json", {{"latest", name}, {"step", step_}});
        std::vector<std::filesystem::path> all;
        for (const auto& e : std::filesystem::directory_iterator(out_dir))
            if (e.is_directory() && e.path().filename().string().rfind("ckpt-", 0) == 0) all.push_back(e.path());
        std::sort(all.begin(), all.end());
        for (std::size_t k = 0; k + 2 < all.size(); ++k) std::filesystem::remove_all(all[k]);
    };
    while (step_ < cfg_.total_steps()) {
        const auto batch = batch_at(step_);
        double gamma = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t i : batch)
            if (scenes_[i].source == SampleSource::RealUnion) {
                gamma = scenes_[i].gamma_rig;
                break;
            }
        const long at = step_;
        const LossReport r = step();
        log.write(at, r, gamma);
        if (step_ % cfg_.checkpoint_every == 0 && step_ < cfg_.total_steps()) save();
    }
    save();
}

std::vector<Occupancy> evaluate_points(const MlpParams& params, const FieldContext& ctx, std::span<const Vec3> points)
{
    std::vector<Occupancy> out;
    out.reserve(points.size());
    for (std::size_t start = 0; start < points.size(); start += kEvalBatch) {
        const auto chunk = points.subspan(start, std::min(kEvalBatch, points.size() - start));
        const auto inputs = assemble_inputs(ctx, chunk);
        const auto s = forward(params, inputs, ctx.views());
        out.insert(out.end(), s.begin(), s.end());
    }
    return out;
}

Extraction extract_instances(const MlpParams& params, const FieldContext& ctx, const Aabb& box, int resolution,
                             double iso)
{
    const Aabb padded = box.padded(0.05);
    const auto points = grid_points(padded, resolution);
    const auto occ = evaluate_points(params, ctx, points);
    ScalarGrid gh(resolution, resolution, resolution, padded);
    ScalarGrid go(resolution, resolution, resolution, padded);
    const int n = resolution - 1;
    for (int z = 0; z <= n; ++z)
        for (int y = 0; y <= n; ++y)
            for (int x = 0; x <= n; ++x) {
                const std::size_t i = (static_cast<std::size_t>(z) * resolution + y) * resolution + x;
                // Outer layer forced outside so both meshes come out closed.
                const bool border = x == 0 || y == 0 || z == 0 || x == n || y == n || z == n;
                gh.values[i] = border ? 0.0 : occ[i].human;
                go.values[i] = border ? 0.0 : occ[i].object;
            }
    Extraction e;
    e.human = marching_cubes(gh, iso);
    e.object = marching_cubes(go, iso);
    set_labels(e.human, kHumanLabel);
    set_labels(e.object, kObjectLabel);
    return e;
}

}  // namespace instrecon
