#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "instrecon/mesh_io.hpp"
#include "instrecon/raw_io.hpp"
#include "support/toy.hpp"

using namespace instrecon;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string err;
};

Run cli(const std::string& args, const fs::path& dir)
{
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string(INSTRECON_CLI) + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(err);
    std::stringstream ss;
    ss << in.rdbuf();
    r.err = ss.str();
    return r;
}

}  // namespace

TEST_CASE("usage errors exit with 2")
{
    const auto dir = toy::scratch("cli_usage");
    CHECK(cli("", dir).code == 2);
    CHECK(cli("compose --bogus 1", dir).code == 2);
    CHECK(cli("frobnicate", dir).code == 2);
    CHECK(cli("extract --ckpt x", dir).code == 2);
    CHECK(cli("--help", dir).code == 0);
}

TEST_CASE("compose, label, train, extract and eval end to end")
{
    const auto dir = toy::scratch("cli_pipeline");
    const toy::Layout layout;
    write_ply(dir / "human.ply", toy::human_mesh(layout));
    write_ply(dir / "object.ply", toy::object_mesh(layout));
    raw::write_json(dir / "spec.json", {{"translation_min", {0, 0, 0}},
                                        {"translation_max", {0, 0, 0}},
                                        {"angle_min", 0.0},
                                        {"angle_max", 0.0},
                                        {"scale_min", 1.0},
                                        {"scale_max", 1.0},
                                        {"samples", 500},
                                        {"seed", 3},
                                        {"material", "soft"}});
    const std::string d = dir.string();
    REQUIRE(cli("compose --human " + d + "/human.ply --object " + d + "/object.ply --spec " + d + "/spec.json --out " + d + "/scene", dir).code == 0);
    CHECK(fs::exists(dir / "scene" / "scene.json"));
    CHECK(raw::read_json(dir / "scene" / "scene.json").at("material") == "soft");

    TriMesh h = toy::human_mesh(layout), o = toy::object_mesh(layout);
    set_labels(h, kHumanLabel);
    set_labels(o, kObjectLabel);
    write_ply(dir / "gt.ply", merge(h, o));
    REQUIRE(cli("label --mesh " + d + "/gt.ply --views 8 --image 64 --out " + d + "/labeled.ply", dir).code == 0);
    const TriMesh labeled = read_mesh(dir / "labeled.ply").mesh;
    CHECK(labeled.vertex_labels.size() == labeled.vertices.size());

    raw::write_json(dir / "train.json", {{"learning_rate", 1e-3},
                                         {"epochs", 1},
                                         {"steps_per_epoch", 4},
                                         {"points_per_scene", 200},
                                         {"batch_scenes", 1},
                                         {"width", 8},
                                         {"depth", 2},
                                         {"gamma_by_material", {{"soft", 0.5}}},
                                         {"rig", {{"views", 3}, {"image_width", 32}, {"image_height", 32}}},
                                         {"scenes", {{{"dir", "scene"}, {"role", "real"}}}}});
    REQUIRE(cli("train --config " + d + "/train.json --out " + d + "/run", dir).code == 0);
    CHECK(fs::exists(dir / "run" / "checkpoint.json"));
    CHECK(cli("train --config " + d + "/train.json --out " + d + "/run2 --init-ckpt " + d + "/run", dir).code == 0);

    REQUIRE(cli("extract --ckpt " + d + "/run --res 12 --out-human " + d + "/ph.ply --out-object " + d + "/po.ply", dir).code == 0);
    CHECK(fs::exists(dir / "ph.ply"));
    CHECK(fs::exists(dir / "po.ply"));

    write_ply(dir / "h.ply", h);
    write_ply(dir / "o.ply", o);
    REQUIRE(cli("eval --pred-human " + d + "/h.ply --pred-object " + d + "/o.ply --gt " + d + "/gt.ply --samples 500 --volume-samples 2000 --out " + d + "/report.json", dir).code == 0);
    const auto report = raw::read_json(dir / "report.json");
    CHECK(report.at("p2s_cm").get<double>() < 1e-6);
    CHECK(report.contains("iou_percent"));
}

TEST_CASE("data errors exit with 1 and name the module")
{
    const auto dir = toy::scratch("cli_data");
    write_ply(dir / "plain.ply", make_icosphere(0.5, 2));
    const std::string d = dir.string();
    const Run r = cli("eval --pred-human " + d + "/plain.ply --pred-object " + d + "/plain.ply --gt " + d + "/plain.ply --out " + d + "/r.json", dir);
    CHECK(r.code == 1);
    CHECK(r.err.find("error [recon-metrics]") != std::string::npos);
    std::ofstream(dir / "broken.json") << "{ not json";
    CHECK(cli("train --config " + d + "/broken.json --out " + d + "/run", dir).code == 1);
}
