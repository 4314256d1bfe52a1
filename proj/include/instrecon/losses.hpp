#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include "instrecon/field.hpp"
#include "instrecon/sampling.hpp"

namespace instrecon {

struct LossConfig {
    double gamma_rig = 1.0;  // 1 rigid, 0.75 flexible, 0.5 soft
    double w_i = 1.0;
    double w_u = 1.0;
    double w_in = 1.0;

    /// Throws InvalidConfig.
    void validate() const;
};

/// Loss value with per-point gradients dL/ds.
struct LossTerm {
    double value = 0.0;
    std::vector<Occupancy> grad;
};

/// Mean squared error on both channels, or on the object channel only for
/// SyntheticObjectOnly samples. Throws MissingInstanceGroundTruth for RealUnion.
LossTerm loss_instance(std::span<const Occupancy> pred, const SampleSet& gt);

/// Mean squared error of max(s_H, s_O) against the union channel. The
/// gradient goes to the larger channel; ties split it equally.
/// Throws MissingGroundTruth.
LossTerm loss_union(std::span<const Occupancy> pred, const SampleSet& gt);

/// Mean of max(0, s_O - .5)^(1-g) * max(0, s_H - .5)^g. A term is zero when
/// either base is zero.
LossTerm loss_intersection(std::span<const Occupancy> pred, const LossConfig& cfg);

/// One intersection term and its partials (unscaled by 1/n).
double intersection_term(double s_human, double s_object, double gamma, double* d_human, double* d_object);

struct LossReport {
    double l_i = 0.0;
    double l_u = 0.0;
    double l_in = 0.0;
    double l_total = 0.0;
    std::vector<Occupancy> grad;  // dL_total/ds per point
    // Which sources fed each term.
    std::vector<SampleSource> fed_i;
    std::vector<SampleSource> fed_u;
    std::vector<SampleSource> fed_in;
};

/// Routes by gt.source: synthetic sources feed L_i, RealUnion feeds L_u and
/// L_in. Unfed terms contribute 0.
LossReport loss_total(std::span<const Occupancy> pred, const SampleSet& gt, const LossConfig& cfg);

/// Adds the scalar parts of `part` into `sum` (gradients are left alone).
void accumulate(LossReport& sum, const LossReport& part);

/// Fixed-order pairwise summation.
double pairwise_sum(std::span<const double> values);

/// Line-delimited JSON records: step, l_i, l_u, l_in, l_total, gamma_rig.
class LossLog {
public:
    explicit LossLog(const std::filesystem::path& path, bool append = false);
    void write(long step, const LossReport& report, double gamma_rig);

private:
    std::ofstream out_;
};

}  // namespace instrecon
