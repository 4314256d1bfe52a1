#pragma once

#include <vector>

#include "instrecon/raster.hpp"

namespace instrecon {

enum class TieBreak { LowestLabel, Unlabeled };

struct FusionConfig {
    int n_views = 64;
    double delta = 0.0;  // <= 0 selects 1% of the mesh AABB diagonal
    TieBreak tie_break = TieBreak::LowestLabel;

    /// Throws InvalidConfig.
    void validate() const;
    double resolved_delta(const TriMesh& mesh) const;
};

struct FusionResult {
    std::vector<std::int32_t> labels;  // kUnlabeled without evidence
    std::vector<float> confidence;     // modal fraction of the evidence, 0 without evidence
    std::vector<int> evidence;         // number of agreeing views per vertex
};

/// True where the vertex projects inside the image (nearest pixel) and the
/// depth there is within `delta` of its camera distance.
std::vector<bool> visibility_mask(const TriMesh& mesh, const Camera& cam, const DepthMap& depth, double delta);

/// Modal 2D label over the views where the vertex is depth-consistent.
/// Throws RigMismatch when the lists differ in length, EmptyMesh on an empty mesh.
FusionResult label_vertices(const TriMesh& mesh, const std::vector<Camera>& cams, const std::vector<DepthMap>& depths,
                            const std::vector<LabelMap>& labels2d, const FusionConfig& cfg);

/// Renders depth and labels of `mesh` (which must carry labels) from every
/// camera and fuses them back.
FusionResult relabel_from_renders(const TriMesh& mesh, const std::vector<Camera>& cams, const FusionConfig& cfg);

}  // namespace instrecon
