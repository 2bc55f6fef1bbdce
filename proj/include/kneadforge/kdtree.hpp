#pragma once

#include <cstddef>
#include <vector>

#include "kneadforge/geometry.hpp"

namespace kneadforge {

// Static balanced 3D kd-tree for exact nearest-neighbor queries.
class KdTree3 {
public:
    explicit KdTree3(std::vector<Vec3> points);

    struct Hit {
        size_t index = 0;
        double distance = 0.0;
    };

    Hit nearest(const Vec3& query) const;
    size_t size() const { return points_.size(); }
    const std::vector<Vec3>& points() const { return points_; }

private:
    struct Node {
        int axis = -1;          // -1 marks a leaf
        size_t begin = 0;       // leaf point range
        size_t end = 0;
        double split = 0.0;
        size_t left = 0;
        size_t right = 0;
    };

    size_t build(size_t begin, size_t end);
    void search(size_t node, const Vec3& q, size_t& best, double& best_sq) const;

    std::vector<Vec3> points_;
    std::vector<size_t> order_;
    std::vector<Node> nodes_;
    size_t root_ = 0;
};

}  // namespace kneadforge
