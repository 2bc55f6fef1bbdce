#include "kneadforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "kneadforge/registration.hpp"

namespace kneadforge {

double ring_mesh_area(const LayeredContourCloud& cloud) {
    if (cloud.layers.size() < 2)
        throw std::invalid_argument("ring_mesh_area: need at least 2 layers");
    const size_t m = cloud.samples_per_layer();
    for (const ContourLayer& layer : cloud.layers)
        if (layer.samples.size() != m)
            throw std::invalid_argument("ring_mesh_area: layers must share one sample count");

    double area = 0.0;
    for (size_t k = 0; k + 1 < cloud.layers.size(); ++k) {
        const ContourLayer& a = cloud.layers[k];
        const ContourLayer& b = cloud.layers[k + 1];
        for (size_t j = 0; j < m; ++j) {
            size_t jn = (j + 1) % m;
            Vec3 v00 = a.world_point(j);
            Vec3 v10 = b.world_point(j);
            Vec3 v11 = b.world_point(jn);
            Vec3 v01 = a.world_point(jn);
            area += 0.5 * (v10 - v00).cross(v11 - v00).norm();
            area += 0.5 * (v01 - v00).cross(v11 - v00).norm();
        }
    }
    return area;
}

double utilization(double mass_in, double mass_out) {
    if (!(mass_in > 0.0))
        throw std::invalid_argument("utilization: input mass must be positive");
    if (mass_out < 0.0 || mass_out > mass_in)
        throw std::invalid_argument("utilization: output mass must lie in [0, mass_in]");
    return mass_out / mass_in;
}

std::string stars_label(Stars s) {
    switch (s) {
        case Stars::ns: return "ns";
        case Stars::one: return "*";
        case Stars::two: return "**";
        case Stars::three: return "***";
        case Stars::four: return "****";
    }
    return "ns";
}

Stars stars_from_p(double p) {
    if (p < 1e-4)
        return Stars::four;
    if (p < 1e-3)
        return Stars::three;
    if (p < 1e-2)
        return Stars::two;
    if (p < 5e-2)
        return Stars::one;
    return Stars::ns;
}

MannWhitneyResult mann_whitney_u(const std::vector<double>& sample_a, const std::vector<double>& sample_b) {
    const size_t n1 = sample_a.size();
    const size_t n2 = sample_b.size();
    if (n1 == 0 || n2 == 0)
        throw std::invalid_argument("mann_whitney_u: empty sample");

    struct Tagged {
        double value;
        int group;
    };
    std::vector<Tagged> all;
    all.reserve(n1 + n2);
    for (double v : sample_a)
        all.push_back({v, 0});
    for (double v : sample_b)
        all.push_back({v, 1});
    std::sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) { return a.value < b.value; });

    // average ranks over ties; accumulate the tie correction term
    double rank_sum_a = 0.0;
    double tie_term = 0.0;
    size_t i = 0;
    while (i < all.size()) {
        size_t j = i;
        while (j < all.size() && all[j].value == all[i].value)
            ++j;
        double avg_rank = 0.5 * double(i + 1 + j);  // ranks are 1-based
        size_t t = j - i;
        if (t > 1)
            tie_term += double(t) * (double(t) * double(t) - 1.0);
        for (size_t k = i; k < j; ++k)
            if (all[k].group == 0)
                rank_sum_a += avg_rank;
        i = j;
    }

    double u1 = rank_sum_a - double(n1) * double(n1 + 1) / 2.0;
    double n = double(n1 + n2);
    double mean_u = double(n1) * double(n2) / 2.0;
    double var_u = double(n1) * double(n2) / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));

    MannWhitneyResult result;
    result.u = u1;
    if (var_u <= 0.0) {
        result.p_value = 1.0;  // all values tied
        return result;
    }
    // two-sided with continuity correction
    double z = (std::abs(u1 - mean_u) - 0.5) / std::sqrt(var_u);
    z = std::max(z, 0.0);
    result.p_value = std::erfc(z / std::sqrt(2.0));
    return result;
}

namespace {
double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}
}  // namespace

ErrorStats error_distribution(const PointCloud& cloud_a, const PointCloud& cloud_b, const PointCloud& target) {
    if (cloud_a.points.empty() || cloud_b.points.empty())
        throw std::invalid_argument("error_distribution: empty cloud");
    std::vector<double> da = nearest_distances(cloud_a, target);
    std::vector<double> db = nearest_distances(cloud_b, target);

    ErrorStats stats;
    stats.mean_nn_a = std::accumulate(da.begin(), da.end(), 0.0) / double(da.size());
    stats.mean_nn_b = std::accumulate(db.begin(), db.end(), 0.0) / double(db.size());
    stats.median_nn_a = median(da);
    stats.median_nn_b = median(db);
    MannWhitneyResult mw = mann_whitney_u(da, db);
    stats.u_statistic = mw.u;
    stats.p_value = mw.p_value;
    stats.stars = stars_from_p(mw.p_value);
    return stats;
}

}  // namespace kneadforge
