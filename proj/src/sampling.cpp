#include "instrecon/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "instrecon/raw_io.hpp"

namespace instrecon {

const char* to_string(SampleSource source) noexcept
{
    switch (source) {
    case SampleSource::SyntheticInstance: return "synthetic_instance";
    case SampleSource::SyntheticObjectOnly: return "synthetic_object_only";
    case SampleSource::RealUnion: return "real_union";
    }
    return "unknown";
}

SampleSource sample_source_from_string(const std::string& name)
{
    if (name == "synthetic_instance") return SampleSource::SyntheticInstance;
    if (name == "synthetic_object_only") return SampleSource::SyntheticObjectOnly;
    if (name == "real_union") return SampleSource::RealUnion;
    throw Error(ErrorCode::InvalidConfig, "mesh-core", "unknown sample source '" + name + "'");
}

void SampleSet::validate() const
{
    const std::size_t n = points.size();
    auto check = [n](const std::vector<std::uint8_t>& c, const char* name) {
        if (!c.empty() && c.size() != n) {
            throw Error(ErrorCode::ShapeMismatch, "mesh-core", std::string(name) + " channel length mismatch");
        }
    };
    check(occ_human, "human");
    check(occ_object, "object");
    check(occ_union, "union");
    switch (source) {
    case SampleSource::SyntheticInstance:
        if (!has_human() || !has_object()) {
            throw Error(ErrorCode::MissingGroundTruth, "mesh-core", "synthetic instance samples need both channels");
        }
        break;
    case SampleSource::SyntheticObjectOnly:
        if (!has_object()) {
            throw Error(ErrorCode::MissingGroundTruth, "mesh-core", "object-only samples need the object channel");
        }
        break;
    case SampleSource::RealUnion:
        if (has_human() || has_object()) {
            throw Error(ErrorCode::ShapeMismatch, "mesh-core", "real union samples carry no instance channels");
        }
        if (!has_union()) {
            throw Error(ErrorCode::MissingGroundTruth, "mesh-core", "real union samples need the union channel");
        }
        break;
    }
    if (has_human() && has_object() && has_union()) {
        for (std::size_t i = 0; i < n; ++i) {
            if (occ_union[i] != std::max(occ_human[i], occ_object[i])) {
                throw Error(ErrorCode::ShapeMismatch, "mesh-core", "union channel is not max(human, object)");
            }
        }
    }
}

namespace {

// Cumulative face areas for area-weighted face selection.
std::vector<double> area_cdf(const TriMesh& mesh)
{
    std::vector<double> cdf(mesh.faces.size());
    double total = 0.0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        total += mesh.face_area(f);
        cdf[f] = total;
    }
    return cdf;
}

Vec3 draw_surface_point(const TriMesh& mesh, const std::vector<double>& cdf, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double target = unit(rng) * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    if (it == cdf.end()) {
        --it;
    }
    const Face& f = mesh.faces[static_cast<std::size_t>(it - cdf.begin())];
    double r1 = unit(rng);
    double r2 = unit(rng);
    if (r1 + r2 > 1.0) {
        r1 = 1.0 - r1;
        r2 = 1.0 - r2;
    }
    const Vec3& a = mesh.vertices[f[0]];
    return a + r1 * (mesh.vertices[f[1]] - a) + r2 * (mesh.vertices[f[2]] - a);
}

}  // namespace

std::vector<Vec3> sample_surface(const TriMesh& mesh, std::size_t n, std::uint64_t seed)
{
    if (mesh.empty()) {
        throw Error(ErrorCode::EmptyMesh, "mesh-core", "cannot sample an empty mesh");
    }
    std::mt19937_64 rng(seed);
    const auto cdf = area_cdf(mesh);
    std::vector<Vec3> points;
    points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        points.push_back(draw_surface_point(mesh, cdf, rng));
    }
    return points;
}

SampleSet sample_points(const TriMesh& mesh, std::size_t n, const SamplingConfig& cfg, std::uint64_t seed)
{
    if (mesh.empty()) {
        throw Error(ErrorCode::EmptyMesh, "mesh-core", "cannot sample an empty mesh");
    }
    if (n == 0 || !(cfg.sigma >= 0.0) || !(cfg.bbox_pad >= 0.0) || cfg.surface_fraction < 0.0 ||
        cfg.surface_fraction > 1.0) {
        throw Error(ErrorCode::InvalidConfig, "mesh-core", "sample_points needs n > 0, sigma >= 0, pad >= 0");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Aabb box = mesh.bounds().padded(cfg.bbox_pad);
    const auto cdf = area_cdf(mesh);
    const auto n_surface = static_cast<std::size_t>(std::llround(static_cast<double>(n) * cfg.surface_fraction));

    SampleSet out;
    out.points.reserve(n);
    for (std::size_t i = 0; i < n_surface; ++i) {
        Vec3 p = draw_surface_point(mesh, cdf, rng);
        if (cfg.sigma > 0.0) {
            const double gx = gauss(rng);
            const double gy = gauss(rng);
            const double gz = gauss(rng);
            p += cfg.sigma * Vec3(gx, gy, gz);
        }
        out.points.push_back(p.cwiseMax(box.min).cwiseMin(box.max));
    }
    for (std::size_t i = n_surface; i < n; ++i) {
        const double ux = unit(rng);
        const double uy = unit(rng);
        const double uz = unit(rng);
        out.points.push_back(box.min + Vec3(ux, uy, uz).cwiseProduct(box.extent()));
    }
    return out;
}

void write_sample_set(const std::filesystem::path& stem, const SampleSet& samples)
{
    samples.validate();
    std::vector<double> flat;
    flat.reserve(samples.size() * 3);
    for (const Vec3& p : samples.points) {
        flat.insert(flat.end(), {p.x(), p.y(), p.z()});
    }
    raw::write_array(raw::with_suffix(stem, ".points.f64"), flat);
    nlohmann::json header{{"format", "instrecon-samples"}, {"version", 1}, {"count", samples.size()},
                          {"source", to_string(samples.source)}, {"points", {{"dtype", "float64"}, {"shape", {samples.size(), 3}}}}};
    nlohmann::json channels = nlohmann::json::array();
    auto emit = [&](const std::vector<std::uint8_t>& c, const char* name) {
        if (!c.empty()) {
            raw::write_array(raw::with_suffix(stem, std::string(".") + name + ".u8"), c);
            channels.push_back(name);
        }
    };
    emit(samples.occ_human, "human");
    emit(samples.occ_object, "object");
    emit(samples.occ_union, "union");
    header["channels"] = channels;
    header["channel_dtype"] = "uint8";
    raw::write_json(raw::with_suffix(stem, ".json"), header);
}

SampleSet read_sample_set(const std::filesystem::path& stem)
{
    const auto header = raw::read_json(raw::with_suffix(stem, ".json"));
    const auto n = header.at("count").get<std::size_t>();
    SampleSet out;
    out.source = sample_source_from_string(header.at("source").get<std::string>());
    const auto flat = raw::read_array<double>(raw::with_suffix(stem, ".points.f64"), n * 3);
    out.points.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.points[i] = Vec3(flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]);
    }
    for (const auto& name : header.at("channels")) {
        const auto channel = name.get<std::string>();
        auto values = raw::read_array<std::uint8_t>(raw::with_suffix(stem, "." + channel + ".u8"), n);
        if (channel == "human") {
            out.occ_human = std::move(values);
        } else if (channel == "object") {
            out.occ_object = std::move(values);
        } else if (channel == "union") {
            out.occ_union = std::move(values);
        }
    }
    out.validate();
    return out;
}

}  // namespace instrecon
