#include "kneadforge/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

namespace kneadforge {

double layer_section_area(const ContourLayer& layer) {
    const auto& s = layer.samples;
    double area = 0.0;
    for (size_t i = 0; i < s.size(); ++i) {
        const PolarSample& a = s[i];
        const PolarSample& b = s[(i + 1) % s.size()];
        area += a.r * b.r * std::sin(b.theta - a.theta);
    }
    return 0.5 * area;
}

namespace {

// Angular offset of profile b relative to profile a, from the peak of their
// circular cross-correlation with parabolic interpolation between samples.
// Adjacent layers twist by a small angle, so only shifts up to a quarter
// turn are searched, nearest-to-zero first; that keeps periodic profiles
// (square, octagon) from locking onto an aliased peak a full symmetry
// period away. Returns 0 when the profiles carry no angular structure.
double profile_rotation(const std::vector<double>& a, const std::vector<double>& b) {
    const size_t n = a.size();
    double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / double(n);
    double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / double(n);

    auto corr_at = [&](long s) {
        size_t offset = size_t((s % long(n) + long(n)) % long(n));
        double c = 0.0;
        for (size_t i = 0; i < n; ++i)
            c += (a[i] - mean_a) * (b[(i + offset) % n] - mean_b);
        return c;
    };

    double scale = 0.0;
    for (size_t i = 0; i < n; ++i)
        scale += (a[i] - mean_a) * (a[i] - mean_a);

    const long reach = long(n) / 4;
    long best_shift = 0;
    double best = -std::numeric_limits<double>::infinity();
    double worst = std::numeric_limits<double>::infinity();
    for (long k = 0; k <= reach; ++k) {
        for (long s : {k, -k}) {
            if (s == 0 && k != 0)
                continue;
            double c = corr_at(s);
            worst = std::min(worst, c);
            if (c > best * (1.0 + 1e-12) + 1e-12 * std::abs(best)) {
                best = c;
                best_shift = s;
            }
            if (k == 0)
                break;
        }
    }
    if (best - worst < 1e-9 * std::max(scale, 1e-30))
        return 0.0;  // flat correlation: rotationally symmetric profile

    double cm = corr_at(best_shift - 1);
    double c0 = corr_at(best_shift);
    double cp = corr_at(best_shift + 1);
    double denom = cm - 2.0 * c0 + cp;
    double frac = denom != 0.0 ? 0.5 * (cm - cp) / denom : 0.0;
    double shift = double(best_shift) + frac;
    // With b rotated CCW by d samples, b[j] = a[j-d] and the peak sits at
    // s = d, so the offset is +shift in angle units.
    return wrap_angle(shift * kTwoPi / double(n));
}

}  // namespace

ShapeSignature signature(const LayeredContourCloud& cloud) {
    if (cloud.layers.size() < 3)
        throw SlicerError("signature: need at least 3 layers");
    const size_t n = cloud.samples_per_layer();
    for (const ContourLayer& layer : cloud.layers)
        if (layer.samples.size() != n)
            throw SlicerError("signature: layers must share one sample count");

    ShapeSignature sig;
    const size_t m = cloud.layers.size();
    sig.z.reserve(m);
    sig.mean_radius.reserve(m);
    sig.section_area.reserve(m);
    sig.center.reserve(m);

    std::vector<std::vector<double>> profiles(m);
    for (size_t k = 0; k < m; ++k) {
        const ContourLayer& layer = cloud.layers[k];
        sig.z.push_back(layer.z);
        double sum = 0.0;
        profiles[k].reserve(n);
        for (const PolarSample& s : layer.samples) {
            sum += s.r;
            profiles[k].push_back(s.r);
        }
        sig.mean_radius.push_back(sum / double(n));
        double area = layer_section_area(layer);
        if (!(area > 0.0))
            throw SlicerError("signature: degenerate layer at z=" + std::to_string(layer.z));
        sig.section_area.push_back(area);
        sig.center.push_back(layer.center);
    }

    sig.torsion.resize(m, 0.0);
    for (size_t k = 0; k + 1 < m; ++k) {
        double dz = sig.z[k + 1] - sig.z[k];
        sig.torsion[k] = dz > 0.0 ? profile_rotation(profiles[k], profiles[k + 1]) / dz : 0.0;
    }
    if (m >= 2)
        sig.torsion[m - 1] = sig.torsion[m - 2];
    return sig;
}

ClassificationReport classify(const ShapeSignature& sig, const ClassifierTolerances& tol) {
    const size_t m = sig.z.size();
    ClassificationReport report;

    // (a) continuity of the mean-radius gradient
    double max_grad_jump = 0.0;
    {
        std::vector<double> grad;
        for (size_t k = 0; k + 1 < m; ++k)
            grad.push_back((sig.mean_radius[k + 1] - sig.mean_radius[k]) / (sig.z[k + 1] - sig.z[k]));
        for (size_t k = 0; k + 1 < grad.size(); ++k)
            max_grad_jump = std::max(max_grad_jump, std::abs(grad[k + 1] - grad[k]));
    }
    report.criteria.push_back(
        {"mean_radius_gradient_continuity", max_grad_jump <= tol.grad_jump, max_grad_jump, tol.grad_jump});

    // (b) monotonicity of the section area
    int flips = 0;
    {
        int prev_sign = 0;
        for (size_t k = 0; k + 1 < m; ++k) {
            double d = (sig.section_area[k + 1] - sig.section_area[k]) / (sig.z[k + 1] - sig.z[k]);
            int s = std::abs(d) <= tol.area_noise ? 0 : (d > 0.0 ? 1 : -1);
            if (s != 0) {
                if (prev_sign != 0 && s != prev_sign)
                    ++flips;
                prev_sign = s;
            }
        }
    }
    report.criteria.push_back(
        {"section_area_monotonicity", flips <= tol.sign_flips, double(flips), double(tol.sign_flips)});

    // (c) regularity of the twist rate
    double max_torsion_jump = 0.0;
    for (size_t k = 0; k + 2 < m; ++k)
        max_torsion_jump = std::max(max_torsion_jump, std::abs(sig.torsion[k + 1] - sig.torsion[k]));
    report.criteria.push_back(
        {"torsion_regularity", max_torsion_jump <= tol.torsion_jump, max_torsion_jump, tol.torsion_jump});

    // (d) centers on a common vertical axis
    Vec2 mean_center;
    for (const Vec2& c : sig.center)
        mean_center = mean_center + c;
    mean_center = mean_center * (1.0 / double(m));
    double max_drift = 0.0;
    for (const Vec2& c : sig.center)
        max_drift = std::max(max_drift, (c - mean_center).norm());
    report.criteria.push_back({"center_axis_drift", max_drift <= tol.center_drift, max_drift, tol.center_drift});

    report.label = std::all_of(report.criteria.begin(), report.criteria.end(),
                               [](const CriterionResult& c) { return c.pass; })
                       ? ShapeClass::Enveloping
                       : ShapeClass::NonEnveloping;
    return report;
}

std::string ClassificationReport::to_json() const {
    nlohmann::json j;
    j["label"] = label_string();
    j["criteria"] = nlohmann::json::array();
    for (const CriterionResult& c : criteria)
        j["criteria"].push_back(
            {{"name", c.name}, {"pass", c.pass}, {"statistic", c.statistic}, {"tolerance", c.tolerance}});
    return j.dump(2);
}

}  // namespace kneadforge
