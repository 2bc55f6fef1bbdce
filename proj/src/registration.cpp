#include "kneadforge/registration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include <Eigen/Dense>

#include "kneadforge/mesh_io.hpp"

namespace kneadforge {

namespace {

Vec3 centroid(const std::vector<Vec3>& pts) {
    Vec3 c;
    for (const Vec3& p : pts)
        c = c + p;
    return c * (1.0 / double(pts.size()));
}

void require_registrable(const PointCloud& cloud, const char* which) {
    if (cloud.points.size() < 3)
        throw RegistrationError(std::string("icp: ") + which + " cloud needs at least 3 points");
    // non-collinearity: some pair of difference vectors with nonzero cross product
    const Vec3& a = cloud.points.front();
    for (size_t i = 1; i + 1 < cloud.points.size(); ++i) {
        Vec3 u = cloud.points[i] - a;
        for (size_t j = i + 1; j < std::min(cloud.points.size(), i + 16); ++j) {
            if (u.cross(cloud.points[j] - a).norm() > 1e-12)
                return;
        }
    }
    throw RegistrationError(std::string("icp: ") + which + " cloud is collinear");
}

Eigen::Matrix3d covariance(const std::vector<Vec3>& pts, const Vec3& mean) {
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const Vec3& p : pts) {
        Eigen::Vector3d d(p.x - mean.x, p.y - mean.y, p.z - mean.z);
        cov += d * d.transpose();
    }
    return cov / double(pts.size());
}

RigidTransform from_eigen(const Eigen::Matrix3d& rot, const Eigen::Vector3d& t) {
    RigidTransform out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out.rotation[3 * i + j] = rot(i, j);
    out.translation = {t.x(), t.y(), t.z()};
    return out;
}

double mean_nn_distance(const std::vector<Vec3>& sample, const RigidTransform& tf, const KdTree3& tree) {
    double sum = 0.0;
    for (const Vec3& p : sample)
        sum += tree.nearest(tf.apply(p)).distance;
    return sum / double(sample.size());
}

// Centroid shift plus the best of the principal-axes alignments (all proper
// sign combinations), scored by nearest-neighbor distance on a subsample.
RigidTransform initial_alignment(const PointCloud& source, const KdTree3& target_tree) {
    Vec3 cs = centroid(source.points);
    Vec3 ct = centroid(target_tree.points());

    std::vector<Vec3> sample;
    size_t stride = std::max<size_t>(1, source.points.size() / 512);
    for (size_t i = 0; i < source.points.size(); i += stride)
        sample.push_back(source.points[i]);

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(covariance(source.points, cs));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> et(covariance(target_tree.points(), ct));
    Eigen::Matrix3d vs = es.eigenvectors();
    Eigen::Matrix3d vt = et.eigenvectors();

    std::vector<Eigen::Matrix3d> rotations = {Eigen::Matrix3d::Identity()};
    for (int sx : {1, -1})
        for (int sy : {1, -1}) {
            Eigen::Matrix3d flip = Eigen::Vector3d(sx, sy, 1).asDiagonal();
            Eigen::Matrix3d r = vt * flip * vs.transpose();
            if (r.determinant() < 0.0) {
                flip(2, 2) = -1;
                r = vt * flip * vs.transpose();
            }
            rotations.push_back(r);
        }

    RigidTransform best;
    double best_score = std::numeric_limits<double>::infinity();
    Eigen::Vector3d ecs(cs.x, cs.y, cs.z);
    Eigen::Vector3d ect(ct.x, ct.y, ct.z);
    for (const Eigen::Matrix3d& r : rotations) {
        RigidTransform tf = from_eigen(r, ect - r * ecs);
        double score = mean_nn_distance(sample, tf, target_tree);
        if (score < best_score) {
            best_score = score;
            best = tf;
        }
    }
    return best;
}

}  // namespace

RigidTransform kabsch(const std::vector<Vec3>& src, const std::vector<Vec3>& dst) {
    if (src.size() != dst.size() || src.empty())
        throw RegistrationError("kabsch: mismatched or empty point sets");
    Vec3 cs = centroid(src);
    Vec3 cd = centroid(dst);
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (size_t i = 0; i < src.size(); ++i) {
        Eigen::Vector3d p(src[i].x - cs.x, src[i].y - cs.y, src[i].z - cs.z);
        Eigen::Vector3d q(dst[i].x - cd.x, dst[i].y - cd.y, dst[i].z - cd.z);
        h += p * q.transpose();
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d u = svd.matrixU();
    Eigen::Matrix3d v = svd.matrixV();
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    if ((v * u.transpose()).determinant() < 0.0)
        d(2, 2) = -1.0;
    Eigen::Matrix3d r = v * d * u.transpose();
    Eigen::Vector3d ecs(cs.x, cs.y, cs.z);
    Eigen::Vector3d ecd(cd.x, cd.y, cd.z);
    return from_eigen(r, ecd - r * ecs);
}

RegistrationResult icp(const PointCloud& source, const PointCloud& target, double threshold, int max_iterations,
                       double tol, const std::optional<RigidTransform>& initial) {
    require_registrable(target, "target");
    KdTree3 tree(target.points);
    return icp(source, tree, threshold, max_iterations, tol, initial);
}

RegistrationResult icp(const PointCloud& source, const KdTree3& target_tree, double threshold, int max_iterations,
                       double tol, const std::optional<RigidTransform>& initial) {
    require_registrable(source, "source");
    if (!(threshold > 0.0))
        throw RegistrationError("icp: threshold must be positive");

    RigidTransform tf = initial ? *initial : initial_alignment(source, target_tree);

    RegistrationResult result;
    result.threshold = threshold;
    result.transform = tf;

    std::vector<Vec3> matched_src;
    std::vector<Vec3> matched_dst;
    double prev_rmse = std::numeric_limits<double>::infinity();

    auto evaluate = [&](const RigidTransform& t, bool collect) {
        size_t matched = 0;
        double sq_sum = 0.0;
        if (collect) {
            matched_src.clear();
            matched_dst.clear();
        }
        for (const Vec3& p : source.points) {
            KdTree3::Hit hit = target_tree.nearest(t.apply(p));
            if (hit.distance <= threshold) {
                ++matched;
                sq_sum += hit.distance * hit.distance;
                if (collect) {
                    matched_src.push_back(p);
                    matched_dst.push_back(target_tree.points()[hit.index]);
                }
            }
        }
        double fitness = double(matched) / double(source.points.size());
        double rmse = matched > 0 ? std::sqrt(sq_sum / double(matched)) : std::numeric_limits<double>::infinity();
        return std::pair<double, double>(fitness, rmse);
    };

    int iter = 0;
    for (; iter < max_iterations; ++iter) {
        auto [fitness, rmse] = evaluate(tf, true);
        result.fitness = fitness;
        result.rmse = rmse;
        result.transform = tf;
        if (matched_src.size() < 3)
            break;
        if (std::abs(prev_rmse - rmse) < tol)
            break;
        prev_rmse = rmse;
        tf = kabsch(matched_src, matched_dst);
    }
    result.iterations = iter;
    return result;
}

RegistrationCurve sweep(const PointCloud& source, const PointCloud& target, const std::vector<double>& thresholds) {
    if (thresholds.empty())
        throw RegistrationError("sweep: empty threshold grid");
    require_registrable(source, "source");
    require_registrable(target, "target");
    KdTree3 tree(target.points);

    RegistrationCurve curve;
    std::optional<RigidTransform> warm;
    for (double th : thresholds) {
        RegistrationResult res = icp(source, tree, th, 50, 1e-10, warm);
        warm = res.transform;
        curve.samples.push_back({th, res.fitness, res.rmse});
        if (!curve.complete && res.fitness >= 1.0) {
            curve.complete = true;
            curve.convergence_threshold = th;
            curve.compensation_value = res.rmse;
        }
    }
    return curve;
}

std::vector<double> make_threshold_grid(double start, double stop, double step) {
    std::vector<double> grid;
    for (long i = 0;; ++i) {
        double t = start + double(i) * step;
        if (t > stop + 1e-9)
            break;
        grid.push_back(t);
    }
    return grid;
}

std::string RegistrationCurve::to_csv() const {
    std::ostringstream os;
    os << "threshold,fitness,rmse\n";
    for (const Sample& s : samples)
        os << format_double(s.threshold) << ',' << format_double(s.fitness) << ',' << format_double(s.rmse) << '\n';
    return os.str();
}

PointCloud compensate(const PointCloud& cloud, double value) {
    if (value < 0.0)
        throw RegistrationError("compensate: value must be >= 0");
    PointCloud out = cloud;
    if (value == 0.0)
        return out;

    // Group points into layers: by the layer column when present, else by z.
    std::map<long long, std::vector<size_t>> groups;
    for (size_t i = 0; i < cloud.points.size(); ++i) {
        long long key = cloud.has_layers() ? cloud.layer[i] : (long long)std::llround(cloud.points[i].z * 1e6);
        groups[key].push_back(i);
    }
    for (const auto& [key, indices] : groups) {
        Vec2 c{0.0, 0.0};
        for (size_t i : indices)
            c = c + cloud.points[i].xy();
        c = c * (1.0 / double(indices.size()));
        for (size_t i : indices) {
            Vec2 rel = cloud.points[i].xy() - c;
            double r = rel.norm();
            double r_new = std::max(r - value, 0.0);
            double s = r > 0.0 ? r_new / r : 0.0;
            out.points[i] = {c.x + rel.x * s, c.y + rel.y * s, cloud.points[i].z};
        }
    }
    return out;
}

std::vector<double> nearest_distances(const PointCloud& cloud, const PointCloud& target) {
    if (target.points.empty())
        throw RegistrationError("nearest_distances: empty target");
    KdTree3 tree(target.points);
    std::vector<double> out;
    out.reserve(cloud.points.size());
    for (const Vec3& p : cloud.points)
        out.push_back(tree.nearest(p).distance);
    return out;
}

double directed_hausdorff(const PointCloud& cloud, const PointCloud& target) {
    std::vector<double> d = nearest_distances(cloud, target);
    return d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
}

}  // namespace kneadforge
