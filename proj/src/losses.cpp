#include "instrecon/losses.hpp"

#include <cmath>

#include <json.hpp>

namespace instrecon {
namespace {

constexpr const char* kModule = "losses";

void check_sizes(std::span<const Occupancy> pred, const SampleSet& gt)
{
    if (pred.size() != gt.size())
        throw Error(ErrorCode::ShapeMismatch, kModule, "prediction and ground truth lengths differ");
}

double mean_of(const std::vector<double>& terms)
{
    return terms.empty() ? 0.0 : pairwise_sum(terms) / static_cast<double>(terms.size());
}

}  // namespace

void LossConfig::validate() const
{
    if (!(gamma_rig >= 0.0 && gamma_rig <= 1.0))
        throw Error(ErrorCode::InvalidConfig, kModule, "gamma_rig must lie in [0, 1]");
    if (!(w_i >= 0.0 && w_u >= 0.0 && w_in >= 0.0))
        throw Error(ErrorCode::InvalidConfig, kModule, "loss weights must be non-negative");
}

double pairwise_sum(std::span<const double> values)
{
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

LossTerm loss_instance(std::span<const Occupancy> pred, const SampleSet& gt)
{
    if (gt.source == SampleSource::RealUnion)
        throw Error(ErrorCode::MissingInstanceGroundTruth, kModule, "instance loss needs synthetic samples");
    check_sizes(pred, gt);
    const bool human = gt.source == SampleSource::SyntheticInstance;
    if ((human && !gt.has_human()) || !gt.has_object())
        throw Error(ErrorCode::MissingInstanceGroundTruth, kModule, "instance channels missing");

    const std::size_t n = pred.size();
    LossTerm t;
    t.grad.assign(n, {});
    std::vector<double> terms(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double eo = pred[k].object - gt.occ_object[k];
        double e = eo * eo;
        t.grad[k].object = 2.0 * eo / n;
        if (human) {
            const double eh = pred[k].human - gt.occ_human[k];
            e = eh * eh + e;
            t.grad[k].human = 2.0 * eh / n;
        }
        terms[k] = e;
    }
    t.value = mean_of(terms);
    return t;
}

LossTerm loss_union(std::span<const Occupancy> pred, const SampleSet& gt)
{
    if (!gt.has_union()) throw Error(ErrorCode::MissingGroundTruth, kModule, "union channel missing");
    check_sizes(pred, gt);
    const std::size_t n = pred.size();
    LossTerm t;
    t.grad.assign(n, {});
    std::vector<double> terms(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double sh = pred[k].human;
        const double so = pred[k].object;
        const double e = union_value(sh, so) - gt.occ_union[k];
        terms[k] = e * e;
        const double g = 2.0 * e / n;
        if (sh > so)
            t.grad[k].human = g;
        else if (so > sh)
            t.grad[k].object = g;
        else
            t.grad[k] = {0.5 * g, 0.5 * g};
    }
    t.value = mean_of(terms);
    return t;
}

double intersection_term(double s_human, double s_object, double gamma, double* d_human, double* d_object)
{
    const double a = s_object - 0.5;
    const double b = s_human - 0.5;
    if (!(a > 0.0 && b > 0.0)) {
        if (d_human) *d_human = 0.0;
        if (d_object) *d_object = 0.0;
        return 0.0;
    }
    const double ea = 1.0 - gamma;
    const double pa = std::pow(a, ea);
    const double pb = std::pow(b, gamma);
    if (d_object) *d_object = ea == 0.0 ? 0.0 : ea * std::pow(a, -gamma) * pb;
    if (d_human) *d_human = gamma == 0.0 ? 0.0 : gamma * pa * std::pow(b, gamma - 1.0);
    return pa * pb;
}

LossTerm loss_intersection(std::span<const Occupancy> pred, const LossConfig& cfg)
{
    cfg.validate();
    const std::size_t n = pred.size();
    LossTerm t;
    t.grad.assign(n, {});
    std::vector<double> terms(n);
    for (std::size_t k = 0; k < n; ++k) {
        double dh = 0.0, dobj = 0.0;
        terms[k] = intersection_term(pred[k].human, pred[k].object, cfg.gamma_rig, &dh, &dobj);
        t.grad[k] = {dh / n, dobj / n};
    }
    t.value = mean_of(terms);
    return t;
}

LossReport loss_total(std::span<const Occupancy> pred, const SampleSet& gt, const LossConfig& cfg)
{
    cfg.validate();
    check_sizes(pred, gt);
    LossReport r;
    r.grad.assign(pred.size(), {});
    auto add = [&](const LossTerm& t, double w) {
        for (std::size_t k = 0; k < pred.size(); ++k) {
            r.grad[k].human += w * t.grad[k].human;
            r.grad[k].object += w * t.grad[k].object;
        }
    };
    if (gt.source == SampleSource::RealUnion) {
        const auto u = loss_union(pred, gt);
        const auto in = loss_intersection(pred, cfg);
        r.l_u = u.value;
        r.l_in = in.value;
        add(u, cfg.w_u);
        add(in, cfg.w_in);
        r.fed_u.push_back(gt.source);
        r.fed_in.push_back(gt.source);
    } else {
        const auto i = loss_instance(pred, gt);
        r.l_i = i.value;
        add(i, cfg.w_i);
        r.fed_i.push_back(gt.source);
    }
    r.l_total = cfg.w_i * r.l_i + cfg.w_u * r.l_u + cfg.w_in * r.l_in;
    return r;
}

void accumulate(LossReport& sum, const LossReport& part)
{
    sum.l_i += part.l_i;
    sum.l_u += part.l_u;
    sum.l_in += part.l_in;
    sum.l_total += part.l_total;
    sum.fed_i.insert(sum.fed_i.end(), part.fed_i.begin(), part.fed_i.end());
    sum.fed_u.insert(sum.fed_u.end(), part.fed_u.begin(), part.fed_u.end());
    sum.fed_in.insert(sum.fed_in.end(), part.fed_in.begin(), part.fed_in.end());
}

LossLog::LossLog(const std::filesystem::path& path, bool append)
    : out_(path, append ? std::ios::app : std::ios::trunc)
{
    if (!out_) throw Error(ErrorCode::Io, kModule, "cannot open loss log " + path.string());
}

void LossLog::write(long step, const LossReport& report, double gamma_rig)
{
    nlohmann::json j;
    j["step"] = step;
    j["l_i"] = report.l_i;
    j["l_u"] = report.l_u;
    j["l_in"] = report.l_in;
    j["l_total"] = report.l_total;
    j["gamma_rig"] = gamma_rig;
    out_ << j.dump() << '\n';
    out_.flush();
}

}  // namespace instrecon
