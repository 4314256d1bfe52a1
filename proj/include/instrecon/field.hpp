#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "instrecon/features.hpp"

namespace instrecon {

/// Occupancy probabilities of the two instance channels at one point.
struct Occupancy {
    double human = 0.0;
    double object = 0.0;
};

inline double union_value(double s_human, double s_object) { return s_human > s_object ? s_human : s_object; }
inline double intersection_value(double s_human, double s_object) { return s_human * s_object; }

/// Dense layer with input-major weights: y = b + x W, W is in x out.
struct DenseLayer {
    int in = 0;
    int out = 0;
    std::vector<double> weight;
    std::vector<double> bias;

    DenseLayer() = default;
    DenseLayer(int in_dim, int out_dim)
        : in(in_dim), out(out_dim), weight(static_cast<std::size_t>(in_dim) * out_dim, 0.0),
          bias(static_cast<std::size_t>(out_dim), 0.0)
    {
    }
};

struct MlpShape {
    int view_input = 0;  // per-view input width
    int width = 128;
    int depth = 4;       // trunk layers, the first one applied per view

    bool operator==(const MlpShape&) const = default;
};

/// Trunk (first layer shared across views, mean-fused after its activation)
/// plus one sigmoid head per instance.
struct MlpParams {
    MlpShape shape;
    std::vector<DenseLayer> trunk;
    DenseLayer human_head;
    DenseLayer object_head;

    std::size_t parameter_count() const;
    /// Fixed order: trunk layers (weights then bias), human head, object head.
    std::vector<double> flatten() const;
    void unflatten(std::span<const double> values);
    /// Same layout, all zeros.
    MlpParams zeros_like() const;
    bool all_finite() const;
};

MlpParams make_params(const MlpShape& shape);  // all zeros
MlpParams init_params(const MlpShape& shape, std::uint64_t seed);

/// Activations retained by a forward pass for `backward`.
struct ForwardCache {
    std::size_t rows = 0;
    int views = 0;
    std::vector<double> input;                 // rows*views x view_input
    std::vector<std::vector<double>> pre;      // per trunk layer
    std::vector<std::vector<double>> post;     // per trunk layer (layer 0 after view-mean)
    std::vector<double> view_post;             // layer 0 activations per view before the mean
    std::vector<Occupancy> output;
};

/// Batched forward pass over inputs laid out [point][view][view_input].
/// Pure in (params, inputs). Throws ShapeMismatch.
std::vector<Occupancy> forward(const MlpParams& params, std::span<const double> inputs, int views,
                               ForwardCache* cache = nullptr);

/// Reverse-mode gradients for upstream dL/ds per point; accumulated into `grads`.
/// Throws ShapeMismatch when shapes disagree with the cache or parameters.
void backward(const MlpParams& params, const ForwardCache& cache, std::span<const Occupancy> upstream,
              MlpParams& grads);

/// Single-point evaluation; views are mean-fused, so duplicated views give
/// the same output as one.
Occupancy eval_field(const MlpParams& params, const FieldQuery& query);

/// Dense-layer primitives, exposed for testing the calculus in isolation.
void dense_forward(const DenseLayer& layer, std::span<const double> x, std::size_t rows, std::span<double> y);
void dense_backward(const DenseLayer& layer, std::span<const double> x, std::span<const double> dy,
                    std::size_t rows, DenseLayer& grad, std::span<double> dx);

double softplus(double x);
double sigmoid(double x);

/// <dir>/params.f64 (raw little-endian float64 in flatten() order) with the
/// JSON sidecar <dir>/params.json listing layer shapes and a format version.
void write_params(const std::filesystem::path& dir, const MlpParams& params);
MlpParams read_params(const std::filesystem::path& dir);

}  // namespace instrecon
