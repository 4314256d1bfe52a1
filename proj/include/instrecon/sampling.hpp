#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "instrecon/mesh.hpp"

namespace instrecon {

enum class SampleSource { SyntheticInstance, SyntheticObjectOnly, RealUnion };

const char* to_string(SampleSource source) noexcept;
SampleSource sample_source_from_string(const std::string& name);

/// Labeled query points. Channels are 0/1 per point; an absent channel is an
/// empty vector. `occ_union` is always present once labels are assigned.
struct SampleSet {
    std::vector<Vec3> points;
    std::vector<std::uint8_t> occ_human;
    std::vector<std::uint8_t> occ_object;
    std::vector<std::uint8_t> occ_union;
    SampleSource source = SampleSource::RealUnion;

    std::size_t size() const { return points.size(); }
    bool has_human() const { return !occ_human.empty(); }
    bool has_object() const { return !occ_object.empty(); }
    bool has_union() const { return !occ_union.empty(); }

    /// Throws ShapeMismatch / MissingGroundTruth when channels disagree with
    /// the source or with each other.
    void validate() const;
};

struct SamplingConfig {
    double sigma = 0.01;     // near-surface Gaussian scale (meters)
    double bbox_pad = 0.05;  // padding of the uniform box, fraction of extent per axis
    double surface_fraction = 0.5;
};

/// n query points: round(n * surface_fraction) area-weighted surface points with
/// isotropic Gaussian offsets, the rest uniform in the padded AABB. Perturbed
/// points are clamped into the padded box. Deterministic for a fixed seed.
/// Throws EmptyMesh, InvalidConfig.
SampleSet sample_points(const TriMesh& mesh, std::size_t n, const SamplingConfig& cfg, std::uint64_t seed);

/// Area-weighted uniform samples on the surface. Throws EmptyMesh.
std::vector<Vec3> sample_surface(const TriMesh& mesh, std::size_t n, std::uint64_t seed);

/// Raw little-endian arrays: <stem>.points.f64 (n x 3), <stem>.<channel>.u8 (n),
/// with a JSON sidecar <stem>.json giving shape, dtype and source.
void write_sample_set(const std::filesystem::path& stem, const SampleSet& samples);
SampleSet read_sample_set(const std::filesystem::path& stem);

}  // namespace instrecon
