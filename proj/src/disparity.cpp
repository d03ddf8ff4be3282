#include "roadstereo/disparity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "roadstereo/parallel.hpp"

namespace roadstereo {

DisparityMap wta(const CostVolume& volume, unsigned threads)
{
    const int w = volume.width();
    const int h = volume.height();
    DisparityMap out(w, h);
    parallel_for(0, h, threads, [&](int v) {
        for (int u = 0; u < w; ++u) {
            int best_d = -1;
            double best = -std::numeric_limits<double>::infinity();
            for (int d = 0; d <= volume.d_max(); ++d) {
                const double c = volume.at(u, v, d);
                if (is_valid_cost(c) && (best_d < 0 || c > best)) {
                    best = c;
                    best_d = d;
                }
            }
            if (best_d >= 0)
                out(u, v) = best_d;
        }
    });
    return out;
}

DisparityMap lr_consistency(const DisparityMap& ref_map, const DisparityMap& tar_map, double tol)
{
    if (!ref_map.same_shape(tar_map))
        throw DimensionError("lr_consistency: reference and target maps differ in size");
    if (!(tol >= 0.0))
        throw ParameterError("lr_consistency: tolerance must be non-negative");
    DisparityMap out = ref_map;
    for (int v = 0; v < ref_map.height(); ++v)
        for (int u = 0; u < ref_map.width(); ++u) {
            if (!ref_map.valid(u, v))
                continue;
            const double d = ref_map(u, v);
            const long x = std::lround(u - d);
            if (x < 0 || x >= ref_map.width() || !tar_map.valid(static_cast<int>(x), v) ||
                std::abs(d - tar_map(static_cast<int>(x), v)) > tol)
                out.invalidate(u, v);
        }
    return out;
}

double parabola_vertex_offset(double c_prev, double c_mid, double c_next) noexcept
{
    const double denom = 2.0 * c_prev + 2.0 * c_next - 4.0 * c_mid;
    if (std::abs(denom) < 1e-12)
        return 0.0;
    return (c_prev - c_next) / denom;
}

DisparityMap subpixel_refine(const DisparityMap& map, const CostVolume& volume, unsigned threads)
{
    if (map.width() != volume.width() || map.height() != volume.height())
        throw DimensionError("subpixel_refine: map and cost volume differ in size");
    DisparityMap out = map;
    parallel_for(0, map.height(), threads, [&](int v) {
        for (int u = 0; u < map.width(); ++u) {
            if (!map.valid(u, v))
                continue;
            const long d = std::lround(map(u, v));
            if (d <= 0 || d >= volume.d_max())
                continue;
            const int di = static_cast<int>(d);
            const double cp = volume.at(u, v, di - 1);
            const double cm = volume.at(u, v, di);
            const double cn = volume.at(u, v, di + 1);
            if (!is_valid_cost(cp) || !is_valid_cost(cm) || !is_valid_cost(cn))
                continue;
            out(u, v) = static_cast<double>(d) + parabola_vertex_offset(cp, cm, cn);
        }
    });
    return out;
}

DisparityMap postprocess(const DisparityMap& map, const RoadModel& model)
{
    DisparityMap out = map;
    for (int v = 0; v < map.height(); ++v) {
        const double s = model.shift(v);
        for (auto& d : out.row(v))
            if (is_valid_disparity(d))
                d += s;
    }
    return out;
}

GrayImage visualize_disparity(const DisparityMap& map, double lo, double scale)
{
    GrayImage out(map.width(), map.height(), 0);
    for (int v = 0; v < map.height(); ++v)
        for (int u = 0; u < map.width(); ++u)
            if (map.valid(u, v)) {
                const long g = std::lround((map(u, v) - lo) * scale);
                out(u, v) = static_cast<std::uint8_t>(std::clamp(g, 1L, 255L));
            }
    return out;
}

GrayImage visualize_disparity(const DisparityMap& map)
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double d : map.pixels())
        if (is_valid_disparity(d)) {
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
    if (!(hi > lo))
        return visualize_disparity(map, std::isfinite(lo) ? lo - 1.0 : 0.0, 1.0);
    const double scale = 254.0 / (hi - lo);
    return visualize_disparity(map, lo - 1.0 / scale, scale);
}

}  // namespace roadstereo
