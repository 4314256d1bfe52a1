// instrecon: compose | label | train | extract | eval

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "instrecon/composer.hpp"
#include "instrecon/fusion.hpp"
#include "instrecon/mesh_io.hpp"
#include "instrecon/metrics.hpp"
#include "instrecon/raw_io.hpp"
#include "instrecon/trainer.hpp"

namespace fs = std::filesystem;
using namespace instrecon;

namespace {

struct ComposeArgs {
    std::string human, object, spec, out;
};
struct LabelArgs {
    std::string mesh, out, label_maps;
    int views = 64;
    double delta = 0.01;
    int image = 256;
};
struct TrainArgs {
    std::string config, out, resume, init_ckpt;
};
struct ExtractArgs {
    std::string ckpt, out_human, out_object;
    int res = 128;
    double iso = 0.5;
    int scene_index = -1;
};
struct EvalArgs {
    std::string pred_human, pred_object, gt, out;
    std::size_t samples = 10000;
    std::size_t volume_samples = 200000;
    std::uint64_t seed = 0;
};

int run_compose(const ComposeArgs& a)
{
    const auto spec_json = raw::read_json(a.spec);
    const PlacementSpec spec = placement_spec_from_json(spec_json);
    const TriMesh human = read_mesh(a.human).mesh;
    const TriMesh object = read_mesh(a.object).mesh;
    const ComposedScene scene = compose_scene(human, object, spec);
    SceneManifest m;
    m.human_source = fs::absolute(a.human).string();
    m.object_source = fs::absolute(a.object).string();
    m.placement = scene.placement;
    m.seed = spec.seed;
    m.material = spec_json.value("material", "rigid");
    m.source = scene.samples.source;
    if (spec_json.contains("source")) m.source = sample_source_from_string(spec_json["source"].get<std::string>());
    write_scene(a.out, scene, m);
    std::printf("scene written to %s (%zu samples, %s)\n", a.out.c_str(), scene.samples.size(), to_string(m.source));
    return 0;
}

int run_label(const LabelArgs& a)
{
    TriMesh mesh = read_mesh(a.mesh).mesh;
    FusionConfig cfg;
    cfg.n_views = a.views;
    cfg.delta = a.delta * mesh.bounds().diagonal();
    const Aabb box = mesh.bounds();
    const auto cams = rig_sphere(a.views, 1.5 * box.diagonal(), box.center(), IntrinsicsSpec{a.image, a.image, 40.0});
    std::vector<DepthMap> depths;
    std::vector<LabelMap> labels;
    for (std::size_t i = 0; i < cams.size(); ++i) {
        depths.push_back(render_depth(cams[i], mesh));
        if (!a.label_maps.empty()) {
            labels.push_back(read_label_map(fs::path(a.label_maps) / ("view_" + std::to_string(i) + ".labels.i32")));
        } else {
            labels.push_back(render_labels(cams[i], mesh));
        }
    }
    const FusionResult r = label_vertices(mesh, cams, depths, labels, cfg);
    mesh.vertex_labels = r.labels;
    write_ply(a.out, mesh, &r.confidence);
    std::size_t unlabeled = std::count(r.labels.begin(), r.labels.end(), kUnlabeled);
    std::printf("labeled %zu vertices (%zu without evidence)\n", r.labels.size(), unlabeled);
    return 0;
}

int run_train(const TrainArgs& a)
{
    TrainConfig cfg = read_train_config(a.config);
    if (!a.init_ckpt.empty()) cfg.init_ckpt = fs::absolute(a.init_ckpt);
    if (!a.resume.empty()) {
        const Checkpoint c = read_checkpoint(resolve_checkpoint(a.resume));
        Trainer t(cfg, c);
        t.run(a.out);
    } else {
        Trainer t(cfg);
        t.run(a.out);
    }
    std::printf("training finished, checkpoints in %s\n", a.out.c_str());
    return 0;
}

int run_extract(const ExtractArgs& a)
{
    const Checkpoint c = read_checkpoint(resolve_checkpoint(a.ckpt));
    if (c.config.scenes.empty()) throw Error(ErrorCode::InvalidConfig, "trainer-cli", "checkpoint lists no scenes");
    std::size_t index = 0;
    if (a.scene_index >= 0) {
        index = static_cast<std::size_t>(a.scene_index);
    } else {
        for (std::size_t i = 0; i < c.config.scenes.size(); ++i)
            if (c.config.scenes[i].role == "real") {
                index = i;
                break;
            }
    }
    if (index >= c.config.scenes.size()) throw Error(ErrorCode::InvalidConfig, "trainer-cli", "scene index out of range");
    const TrainScene scene = prepare_scene(c.config.scenes[index], c.config);
    const Aabb box = merge(scene.data.human, scene.data.object).bounds();
    const Extraction e = extract_instances(c.params, scene.context, box, a.res, a.iso);
    write_ply(a.out_human, e.human);
    write_ply(a.out_object, e.object);
    std::printf("human %zu faces, object %zu faces\n", e.human.faces.size(), e.object.faces.size());
    return 0;
}

int run_eval(const EvalArgs& a)
{
    const TriMesh ph = read_mesh(a.pred_human).mesh;
    const TriMesh po = read_mesh(a.pred_object).mesh;
    const TriMesh gt = read_mesh(a.gt).mesh;
    EvalConfig cfg{a.samples, a.volume_samples, a.seed};
    const MetricReport r = evaluate(ph, po, gt, cfg);
    nlohmann::json j = r.to_json();
    j["pred_human"] = a.pred_human;
    j["pred_object"] = a.pred_object;
    j["gt"] = a.gt;
    std::ofstream(a.out) << j.dump(2) << '\n';
    std::cout << r.table();
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Instance-level reconstruction of interacting human/object scans"};
    app.require_subcommand(1);

    ComposeArgs ca;
    auto* compose = app.add_subcommand("compose", "Place an object against a human and emit labeled samples");
    compose->add_option("--human", ca.human, "Human mesh (.ply/.obj)")->required()->check(CLI::ExistingFile);
    compose->add_option("--object", ca.object, "Object mesh (.ply/.obj)")->required()->check(CLI::ExistingFile);
    compose->add_option("--spec", ca.spec, "Placement spec (JSON)")->required()->check(CLI::ExistingFile);
    compose->add_option("--out", ca.out, "Output scene directory")->required();

    LabelArgs la;
    auto* label = app.add_subcommand("label", "Label mesh vertices by multi-view fusion");
    label->add_option("--mesh", la.mesh, "Mesh to label")->required()->check(CLI::ExistingFile);
    label->add_option("--views", la.views, "Number of virtual views")->check(CLI::PositiveNumber);
    label->add_option("--delta", la.delta, "Depth threshold as a fraction of the AABB diagonal")->check(CLI::PositiveNumber);
    label->add_option("--image", la.image, "Render size in pixels")->check(CLI::PositiveNumber);
    label->add_option("--label-maps", la.label_maps, "Directory of view_<i>.labels.i32 maps (default: render from mesh labels)");
    label->add_option("--out", la.out, "Output PLY")->required();

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "Complementary training");
    train->add_option("--config", ta.config, "Training config (JSON)")->required()->check(CLI::ExistingFile);
    train->add_option("--out", ta.out, "Checkpoint directory")->required();
    train->add_option("--resume", ta.resume, "Resume from a checkpoint");
    train->add_option("--init-ckpt", ta.init_ckpt, "Warm-start parameters");

    ExtractArgs ea;
    auto* extract = app.add_subcommand("extract", "Extract per-instance meshes from a checkpoint");
    extract->add_option("--ckpt", ea.ckpt, "Checkpoint or training output directory")->required();
    extract->add_option("--res", ea.res, "Grid resolution per axis")->check(CLI::Range(2, 1024));
    extract->add_option("--iso", ea.iso, "Iso level")->check(CLI::Range(0.0, 1.0));
    extract->add_option("--scene-index", ea.scene_index, "Training scene giving the views (default: first real scene)");
    extract->add_option("--out-human", ea.out_human, "Human PLY")->required();
    extract->add_option("--out-object", ea.out_object, "Object PLY")->required();

    EvalArgs va;
    auto* eval = app.add_subcommand("eval", "Evaluate reconstructed instances against a labeled mesh");
    eval->add_option("--pred-human", va.pred_human, "Predicted human mesh")->required()->check(CLI::ExistingFile);
    eval->add_option("--pred-object", va.pred_object, "Predicted object mesh")->required()->check(CLI::ExistingFile);
    eval->add_option("--gt", va.gt, "Labeled ground-truth mesh")->required()->check(CLI::ExistingFile);
    eval->add_option("--out", va.out, "Report (JSON)")->required();
    eval->add_option("--samples", va.samples, "Surface samples");
    eval->add_option("--volume-samples", va.volume_samples, "Monte Carlo samples for IoU");
    eval->add_option("--seed", va.seed, "Sampling seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (*compose) return run_compose(ca);
        if (*label) return run_label(la);
        if (*train) return run_train(ta);
        if (*extract) return run_extract(ea);
        if (*eval) return run_eval(va);
    } catch (const Error& e) {
        std::cerr << "error [" << e.module() << "]: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
