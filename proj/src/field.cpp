#include "instrecon/field.hpp"

#include <cmath>
#include <random>

#include "instrecon/raw_io.hpp"
#include "instrecon/simd/kernels.hpp"

namespace instrecon {
namespace {

constexpr const char* kModule = "field";
constexpr int kFormatVersion = 1;

void check(bool ok, const std::string& what)
{
    if (!ok) throw Error(ErrorCode::ShapeMismatch, kModule, what);
}

std::vector<double> transpose(const DenseLayer& layer)
{
    std::vector<double> wt(layer.weight.size());
    for (int i = 0; i < layer.in; ++i)
        for (int o = 0; o < layer.out; ++o)
            wt[static_cast<std::size_t>(o) * layer.in + i] = layer.weight[static_cast<std::size_t>(i) * layer.out + o];
    return wt;
}

template <class F>
void for_each_layer(MlpParams& p, F&& f)
{
    for (auto& l : p.trunk) f(l);
    f(p.human_head);
    f(p.object_head);
}

template <class F>
void for_each_layer(const MlpParams& p, F&& f)
{
    for (const auto& l : p.trunk) f(l);
    f(p.human_head);
    f(p.object_head);
}

}  // namespace

double softplus(double x)
{
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x)
{
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::size_t MlpParams::parameter_count() const
{
    std::size_t n = 0;
    for_each_layer(*this, [&](const DenseLayer& l) { n += l.weight.size() + l.bias.size(); });
    return n;
}

std::vector<double> MlpParams::flatten() const
{
    std::vector<double> v;
    v.reserve(parameter_count());
    for_each_layer(*this, [&](const DenseLayer& l) {
        v.insert(v.end(), l.weight.begin(), l.weight.end());
        v.insert(v.end(), l.bias.begin(), l.bias.end());
    });
    return v;
}

void MlpParams::unflatten(std::span<const double> values)
{
    check(values.size() == parameter_count(), "parameter vector length mismatch");
    std::size_t k = 0;
    for_each_layer(*this, [&](DenseLayer& l) {
        for (auto& w : l.weight) w = values[k++];
        for (auto& b : l.bias) b = values[k++];
    });
}

MlpParams MlpParams::zeros_like() const
{
    return make_params(shape);
}

bool MlpParams::all_finite() const
{
    bool ok = true;
    for_each_layer(*this, [&](const DenseLayer& l) {
        for (double w : l.weight) ok = ok && std::isfinite(w);
        for (double b : l.bias) ok = ok && std::isfinite(b);
    });
    return ok;
}

MlpParams make_params(const MlpShape& shape)
{
    if (shape.view_input <= 0 || shape.width <= 0 || shape.depth <= 0)
        throw Error(ErrorCode::InvalidConfig, kModule, "network dimensions must be positive");
    MlpParams p;
    p.shape = shape;
    p.trunk.emplace_back(shape.view_input, shape.width);
    for (int l = 1; l < shape.depth; ++l) p.trunk.emplace_back(shape.width, shape.width);
    p.human_head = DenseLayer(shape.width, 1);
    p.object_head = DenseLayer(shape.width, 1);
    return p;
}

MlpParams init_params(const MlpShape& shape, std::uint64_t seed)
{
    MlpParams p = make_params(shape);
    std::mt19937_64 rng(seed);
    for_each_layer(p, [&](DenseLayer& l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (auto& w : l.weight) w = u(rng);
        for (auto& b : l.bias) b = u(rng);
    });
    return p;
}

void dense_forward(const DenseLayer& layer, std::span<const double> x, std::size_t rows, std::span<double> y)
{
    check(x.size() == rows * layer.in && y.size() == rows * layer.out, "dense_forward buffer size");
    simd::kernels().dense_forward(x.data(), rows, layer.in, layer.weight.data(), layer.bias.data(), layer.out,
                                  y.data());
}

void dense_backward(const DenseLayer& layer, std::span<const double> x, std::span<const double> dy,
                    std::size_t rows, DenseLayer& grad, std::span<double> dx)
{
    check(x.size() == rows * layer.in && dy.size() == rows * layer.out, "dense_backward buffer size");
    check(grad.in == layer.in && grad.out == layer.out, "gradient layer shape");
    const auto& k = simd::kernels();
    k.dense_backward_params(x.data(), dy.data(), rows, layer.in, layer.out, grad.weight.data(), grad.bias.data());
    if (!dx.empty()) {
        check(dx.size() == rows * layer.in, "dense_backward dx size");
        const auto wt = transpose(layer);
        k.dense_backward_input(dy.data(), rows, wt.data(), layer.in, layer.out, dx.data());
    }
}

std::vector<Occupancy> forward(const MlpParams& params, std::span<const double> inputs, int views,
                               ForwardCache* cache)
{
    const auto& shape = params.shape;
    check(views > 0, "at least one view required");
    const std::size_t per_point = static_cast<std::size_t>(views) * shape.view_input;
    check(inputs.size() % per_point == 0, "input length is not a multiple of views x view_input");
    check(static_cast<int>(params.trunk.size()) == shape.depth, "trunk depth");
    const std::size_t rows = inputs.size() / per_point;
    const std::size_t width = static_cast<std::size_t>(shape.width);

    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    c.rows = rows;
    c.views = views;
    c.input.assign(inputs.begin(), inputs.end());
    c.pre.assign(shape.depth, {});
    c.post.assign(shape.depth, {});

    // Layer 0 per view, then mean over views.
    c.pre[0].resize(rows * views * width);
    dense_forward(params.trunk[0], inputs, rows * views, c.pre[0]);
    c.view_post.resize(c.pre[0].size());
    for (std::size_t i = 0; i < c.pre[0].size(); ++i) c.view_post[i] = softplus(c.pre[0][i]);
    c.post[0].assign(rows * width, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        double* dst = c.post[0].data() + r * width;
        for (int v = 0; v < views; ++v) {
            const double* src = c.view_post.data() + (r * views + v) * width;
            for (std::size_t j = 0; j < width; ++j) dst[j] += src[j];
        }
        for (std::size_t j = 0; j < width; ++j) dst[j] /= views;
    }

    for (int l = 1; l < shape.depth; ++l) {
        c.pre[l].resize(rows * width);
        dense_forward(params.trunk[l], c.post[l - 1], rows, c.pre[l]);
        c.post[l].resize(rows * width);
        for (std::size_t i = 0; i < c.pre[l].size(); ++i) c.post[l][i] = softplus(c.pre[l][i]);
    }

    std::vector<double> zh(rows), zo(rows);
    dense_forward(params.human_head, c.post.back(), rows, zh);
    dense_forward(params.object_head, c.post.back(), rows, zo);
    c.output.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) c.output[r] = {sigmoid(zh[r]), sigmoid(zo[r])};
    return c.output;
}

void backward(const MlpParams& params, const ForwardCache& cache, std::span<const Occupancy> upstream,
              MlpParams& grads)
{
    const auto& shape = params.shape;
    check(grads.shape == shape, "gradient shape differs from parameters");
    check(upstream.size() == cache.rows && cache.output.size() == cache.rows, "upstream length");
    const std::size_t rows = cache.rows;
    const int views = cache.views;
    const std::size_t width = static_cast<std::size_t>(shape.width);

    std::vector<double> dzh(rows), dzo(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& s = cache.output[r];
        dzh[r] = upstream[r].human * s.human * (1.0 - s.human);
        dzo[r] = upstream[r].object * s.object * (1.0 - s.object);
    }

    std::vector<double> dpost(rows * width), tmp(rows * width);
    dense_backward(params.human_head, cache.post.back(), dzh, rows, grads.human_head, dpost);
    dense_backward(params.object_head, cache.post.back(), dzo, rows, grads.object_head, tmp);
    for (std::size_t i = 0; i < dpost.size(); ++i) dpost[i] += tmp[i];

    for (int l = shape.depth - 1; l >= 1; --l) {
        std::vector<double> dpre(rows * width);
        for (std::size_t i = 0; i < dpre.size(); ++i) dpre[i] = dpost[i] * sigmoid(cache.pre[l][i]);
        dense_backward(params.trunk[l], cache.post[l - 1], dpre, rows, grads.trunk[l], dpost);
    }

    std::vector<double> dpre0(rows * views * width);
    for (std::size_t r = 0; r < rows; ++r)
        for (int v = 0; v < views; ++v) {
            const std::size_t base = (r * views + v) * width;
            for (std::size_t j = 0; j < width; ++j)
                dpre0[base + j] = dpost[r * width + j] / views * sigmoid(cache.pre[0][base + j]);
        }
    dense_backward(params.trunk[0], cache.input, dpre0, rows * views, grads.trunk[0], {});
}

Occupancy eval_field(const MlpParams& params, const FieldQuery& query)
{
    const auto flat = query.flatten();
    return forward(params, flat, query.views()).front();
}

void write_params(const std::filesystem::path& dir, const MlpParams& params)
{
    std::filesystem::create_directories(dir);
    nlohmann::json j;
    j["format"] = "instrecon-field";
    j["version"] = kFormatVersion;
    j["view_input"] = params.shape.view_input;
    j["width"] = params.shape.width;
    j["depth"] = params.shape.depth;
    j["parameters"] = params.parameter_count();
    nlohmann::json layers = nlohmann::json::array();
    for_each_layer(params, [&](const DenseLayer& l) { layers.push_back({l.in, l.out}); });
    j["layers"] = layers;
    raw::write_array(dir / "params.f64", params.flatten());
    raw::write_json(dir / "params.json", j);
}

MlpParams read_params(const std::filesystem::path& dir)
{
    const auto j = raw::read_json(dir / "params.json");
    if (j.value("format", "") != "instrecon-field" || j.value("version", 0) != kFormatVersion)
        throw Error(ErrorCode::Io, kModule, "unsupported checkpoint format in " + dir.string());
    MlpShape shape;
    shape.view_input = j.at("view_input").get<int>();
    shape.width = j.at("width").get<int>();
    shape.depth = j.at("depth").get<int>();
    MlpParams p = make_params(shape);
    const auto values = raw::read_array<double>(dir / "params.f64", p.parameter_count());
    p.unflatten(values);
    return p;
}

}  // namespace instrecon
