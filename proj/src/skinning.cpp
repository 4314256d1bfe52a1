#include "instrecon/skinning.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>


#include "instrecon/bvh.hpp"

namespace instrecon {
namespace {

constexpr const char* kModule = "composer";

void check_weights(const WeightMatrix& w, std::size_t vertices, int joints)
{
    if (static_cast<std::size_t>(w.rows()) != vertices || w.cols() != joints)
        throw Error(ErrorCode::InvalidWeights, kModule, "weight matrix shape does not match mesh and joints");
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
        if ((w.row(r).array() < 0.0).any() || !w.row(r).allFinite())
            throw Error(ErrorCode::InvalidWeights, kModule, "negative or non-finite weight");
        if (std::abs(w.row(r).sum() - 1.0) > 1e-9)
            throw Error(ErrorCode::InvalidWeights, kModule, "weight row does not sum to 1");
    }
}

Affine blend(const WeightMatrix& w, Eigen::Index row, const std::vector<Affine>& transforms)
{
    Affine m = Affine::Zero();
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
        const double wj = w(row, j);
        if (wj != 0.0) m += wj * transforms[static_cast<std::size_t>(j)];
    }
    return m;
}

double hat(double y, double lo, double mid, double hi)
{
    if (y <= lo || y >= hi) return 0.0;
    return y < mid ? (y - lo) / (mid - lo) : (hi - y) / (hi - mid);
}

}  // namespace

void SkinnedTemplate::validate() const
{
    rest_mesh.validate();
    if (joints.empty()) throw Error(ErrorCode::InvalidWeights, kModule, "template has no joints");
    for (std::size_t j = 0; j < joints.size(); ++j) {
        const int p = joints[j].parent;
        if ((j == 0) != (p < 0) || p >= static_cast<int>(j))
            throw Error(ErrorCode::InvalidWeights, kModule, "joint 0 must be the only root and parents must precede children");
    }
    std::vector<int> seen(joints.size(), 0);
    for (int j : upper) {
        if (j < 0 || j >= joint_count()) throw Error(ErrorCode::InvalidWeights, kModule, "joint group index out of range");
        ++seen[static_cast<std::size_t>(j)];
    }
    for (int j : lower) {
        if (j < 0 || j >= joint_count()) throw Error(ErrorCode::InvalidWeights, kModule, "joint group index out of range");
        ++seen[static_cast<std::size_t>(j)];
    }
    if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; }))
        throw Error(ErrorCode::InvalidWeights, kModule, "upper and lower groups must partition the joints");
    check_weights(weights, rest_mesh.vertices.size(), joint_count());
}

Pose Pose::identity(int joints)
{
    Pose p;
    p.rotations.assign(static_cast<std::size_t>(joints), Vec3::Zero());
    return p;
}

void Pose::validate(int joints) const
{
    if (static_cast<int>(rotations.size()) != joints)
        throw Error(ErrorCode::InvalidConfig, kModule, "pose joint count does not match the template");
    if (!translation.allFinite()) throw Error(ErrorCode::InvalidConfig, kModule, "non-finite pose translation");
    for (const Vec3& r : rotations) {
        if (!r.allFinite() || r.norm() >= 2.0 * std::numbers::pi)
            throw Error(ErrorCode::InvalidConfig, kModule, "joint rotation must be finite with angle below 2 pi");
    }
}

std::vector<Affine> skinning_transforms(const std::vector<Joint>& joints, const Pose& pose)
{
    pose.validate(static_cast<int>(joints.size()));
    std::vector<Mat3> rot(joints.size());
    std::vector<Vec3> pos(joints.size());
    std::vector<Affine> out(joints.size());
    for (std::size_t j = 0; j < joints.size(); ++j) {
        const Mat3 local = axis_angle(pose.rotations[j]);
        const int p = joints[j].parent;
        if (p < 0) {
            rot[j] = local;
            pos[j] = joints[j].position + pose.translation;
        } else {
            const auto pj = static_cast<std::size_t>(p);
            rot[j] = rot[pj] * local;
            pos[j] = pos[pj] + rot[pj] * (joints[j].position - joints[pj].position);
        }
        out[j].leftCols<3>() = rot[j];
        out[j].col(3) = pos[j] - rot[j] * joints[j].position;
    }
    return out;
}

TriMesh lbs_apply(const TriMesh& mesh, const WeightMatrix& weights, const std::vector<Joint>& joints,
                  const Pose& pose)
{
    check_weights(weights, mesh.vertices.size(), static_cast<int>(joints.size()));
    const auto transforms = skinning_transforms(joints, pose);
    TriMesh out = mesh;
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        const Affine m = blend(weights, static_cast<Eigen::Index>(i), transforms);
        out.vertices[i] = m.leftCols<3>() * mesh.vertices[i] + m.col(3);
    }
    return out;
}

TriMesh lbs_unapply(const TriMesh& posed, const WeightMatrix& weights, const std::vector<Joint>& joints,
                    const Pose& pose)
{
    check_weights(weights, posed.vertices.size(), static_cast<int>(joints.size()));
    const auto transforms = skinning_transforms(joints, pose);
    TriMesh out = posed;
    for (std::size_t i = 0; i < posed.vertices.size(); ++i) {
        const Affine m = blend(weights, static_cast<Eigen::Index>(i), transforms);
        const Mat3 lin = m.leftCols<3>();
        if (std::abs(lin.determinant()) < 1e-9)
            throw Error(ErrorCode::SingularBlend, kModule, "blended transform of vertex " + std::to_string(i) + " is singular");
        out.vertices[i] = lin.partialPivLu().solve(posed.vertices[i] - m.col(3));
    }
    return out;
}

TriMesh lbs_forward(const SkinnedTemplate& tmpl, const Pose& pose)
{
    return lbs_apply(tmpl.rest_mesh, tmpl.weights, tmpl.joints, pose);
}

TriMesh lbs_inverse(const SkinnedTemplate& tmpl, const TriMesh& posed, const Pose& pose)
{
    if (posed.vertices.size() == tmpl.rest_mesh.vertices.size())
        return lbs_unapply(posed, tmpl.weights, tmpl.joints, pose);
    return lbs_unapply(posed, transfer_weights(tmpl, posed, pose), tmpl.joints, pose);
}

WeightMatrix transfer_weights(const SkinnedTemplate& tmpl, const TriMesh& scan, const Pose& pose)
{
    const TriMesh posed = lbs_forward(tmpl, pose);
    if (posed.vertices.empty()) throw Error(ErrorCode::EmptyMesh, kModule, "template has no vertices");
    const PointTree tree(posed.vertices);
    WeightMatrix out(static_cast<Eigen::Index>(scan.vertices.size()), tmpl.weights.cols());
    for (std::size_t i = 0; i < scan.vertices.size(); ++i) {
        const auto hit = tree.nearest(scan.vertices[i]);
        out.row(static_cast<Eigen::Index>(i)) = tmpl.weights.row(static_cast<Eigen::Index>(hit.index));
    }
    return out;
}

WeightMatrix transfer_weights(const SkinnedTemplate& tmpl, const TriMesh& scan)
{
    return transfer_weights(tmpl, scan, Pose::identity(tmpl.joint_count()));
}

Pose concat_pose(const SkinnedTemplate& tmpl, const Pose& upper_src, const Pose& lower_src)
{
    upper_src.validate(tmpl.joint_count());
    lower_src.validate(tmpl.joint_count());
    Pose out = upper_src;
    for (int j : tmpl.lower) out.rotations[static_cast<std::size_t>(j)] = lower_src.rotations[static_cast<std::size_t>(j)];
    return out;
}

TriMesh repose(const SkinnedTemplate& tmpl, const TriMesh& scan, const Pose& scan_pose, const Pose& target_lower)
{
    const WeightMatrix w = transfer_weights(tmpl, scan, scan_pose);
    const TriMesh rest = lbs_unapply(scan, w, tmpl.joints, scan_pose);
    return lbs_apply(rest, w, tmpl.joints, concat_pose(tmpl, scan_pose, target_lower));
}

SkinnedTemplate make_capsule_body(int around, int rings)
{
    SkinnedTemplate t;
    t.joints = {
        {{0.0, 0.95, 0.0}, -1},  // pelvis
        {{0.0, 1.2, 0.0}, 0},    // spine
        {{0.0, 1.45, 0.0}, 1},   // neck
        {{0.22, 1.42, 0.0}, 1},  // left shoulder
        {{-0.22, 1.42, 0.0}, 1}, // right shoulder
        {{0.08, 0.88, 0.0}, 0},  // left hip
        {{0.08, 0.47, 0.0}, 5},  // left knee
        {{-0.08, 0.88, 0.0}, 0}, // right hip
        {{-0.08, 0.47, 0.0}, 7}, // right knee
    };
    t.upper = {0, 1, 2, 3, 4};
    t.lower = {5, 6, 7, 8};

    std::vector<std::vector<double>> rows;
    auto add = [&](const TriMesh& part, auto&& weights_of) {
        for (const Vec3& v : part.vertices) rows.push_back(weights_of(v));
        t.rest_mesh = t.rest_mesh.vertices.empty() ? part : merge(t.rest_mesh, part);
    };
    auto one_hot = [](int j) {
        std::vector<double> w(9, 0.0);
        w[static_cast<std::size_t>(j)] = 1.0;
        return w;
    };

    add(make_cylinder(0.15, 0.9, 1.5, around, rings), [&](const Vec3& v) {
        std::vector<double> w(9, 0.0);
        const double y = std::clamp(v.y(), 0.95, 1.45);
        w[0] = hat(y, 0.7, 0.95, 1.2);
        w[1] = hat(y, 0.95, 1.2, 1.45);
        w[2] = hat(y, 1.2, 1.45, 1.7);
        return w;
    });
    add(make_icosphere(0.1, 2, {0.0, 1.62, 0.0}), [&](const Vec3&) { return one_hot(2); });
    add(make_cylinder(0.05, 0.95, 1.45, around, rings, {0.22, 0.0, 0.0}), [&](const Vec3&) { return one_hot(3); });
    add(make_cylinder(0.05, 0.95, 1.45, around, rings, {-0.22, 0.0, 0.0}), [&](const Vec3&) { return one_hot(4); });
    for (int side = 0; side < 2; ++side) {
        const double x = side == 0 ? 0.08 : -0.08;
        const int hip = side == 0 ? 5 : 7;
        add(make_cylinder(0.06, 0.05, 0.85, around, rings, {x, 0.0, 0.0}), [&](const Vec3& v) {
            std::vector<double> w(9, 0.0);
            const double knee = std::clamp((0.55 - v.y()) / 0.16, 0.0, 1.0);
            w[static_cast<std::size_t>(hip + 1)] = knee;
            w[static_cast<std::size_t>(hip)] = 1.0 - knee;
            return w;
        });
    }

    t.weights.resize(static_cast<Eigen::Index>(rows.size()), 9);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < 9; ++j) t.weights(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    t.validate();
    return t;
}

std::size_t hip_vertex_index(const SkinnedTemplate& body)
{
    const Vec3 pelvis = body.joints.front().position;
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < body.rest_mesh.vertices.size(); ++i) {
        const double d = (body.rest_mesh.vertices[i] - pelvis).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace instrecon
