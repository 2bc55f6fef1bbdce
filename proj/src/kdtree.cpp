#include "kneadforge/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace kneadforge {

namespace {
constexpr size_t kLeafSize = 16;

double coord(const Vec3& p, int axis) {
    return axis == 0 ? p.x : axis == 1 ? p.y : p.z;
}
}  // namespace

KdTree3::KdTree3(std::vector<Vec3> points) : points_(std::move(points)) {
    if (points_.empty())
        throw std::invalid_argument("kdtree: empty point set");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), size_t(0));
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    root_ = build(0, points_.size());
}

size_t KdTree3::build(size_t begin, size_t end) {
    Node node;
    if (end - begin <= kLeafSize) {
        node.begin = begin;
        node.end = end;
        nodes_.push_back(node);
        return nodes_.size() - 1;
    }

    Vec3 lo = points_[order_[begin]];
    Vec3 hi = lo;
    for (size_t i = begin; i < end; ++i) {
        const Vec3& p = points_[order_[i]];
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
    Vec3 extent = hi - lo;
    int axis = extent.x >= extent.y && extent.x >= extent.z ? 0 : (extent.y >= extent.z ? 1 : 2);

    size_t mid = (begin + end) / 2;
    std::nth_element(order_.begin() + long(begin), order_.begin() + long(mid), order_.begin() + long(end),
                     [&](size_t a, size_t b) { return coord(points_[a], axis) < coord(points_[b], axis); });

    node.axis = axis;
    node.split = coord(points_[order_[mid]], axis);
    nodes_.push_back(node);
    size_t self = nodes_.size() - 1;
    size_t left = build(begin, mid);
    size_t right = build(mid, end);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
}

void KdTree3::search(size_t node_idx, const Vec3& q, size_t& best, double& best_sq) const {
    const Node& node = nodes_[node_idx];
    if (node.axis < 0) {
        for (size_t i = node.begin; i < node.end; ++i) {
            const Vec3& p = points_[order_[i]];
            Vec3 d = p - q;
            double sq = d.dot(d);
            if (sq < best_sq) {
                best_sq = sq;
                best = order_[i];
            }
        }
        return;
    }
    double delta = coord(q, node.axis) - node.split;
    size_t near = delta <= 0.0 ? node.left : node.right;
    size_t far = delta <= 0.0 ? node.right : node.left;
    search(near, q, best, best_sq);
    if (delta * delta < best_sq)
        search(far, q, best, best_sq);
}

KdTree3::Hit KdTree3::nearest(const Vec3& query) const {
    size_t best = 0;
    double best_sq = std::numeric_limits<double>::infinity();
    search(root_, query, best, best_sq);
    return {best, std::sqrt(best_sq)};
}

}  // namespace kneadforge
