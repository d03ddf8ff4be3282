#pragma once

#include <vector>

#include "roadstereo/costs.hpp"
#include "roadstereo/image.hpp"

namespace roadstereo {

struct BilateralParams {
    int rho_agg = 4;       ///< half window
    double gamma_d = 5.0;  ///< spatial falloff, pixels
    double gamma_r = 10.0; ///< range falloff, intensity levels; +inf disables range weighting

    int window() const noexcept { return 2 * rho_agg + 1; }
    void validate() const;
};

/// Weights of the (2 rho + 1)^2 window centred on (u, v). Entries whose
/// neighbour falls outside the guide image are zero.
struct WeightWindow {
    int radius = 0;
    std::vector<double> spatial;
    std::vector<double> range;

    double spatial_at(int dx, int dy) const noexcept { return spatial[offset(dx, dy)]; }
    double range_at(int dx, int dy) const noexcept { return range[offset(dx, dy)]; }
    double weight_at(int dx, int dy) const noexcept { return spatial_at(dx, dy) * range_at(dx, dy); }

private:
    std::size_t offset(int dx, int dy) const noexcept
    {
        return static_cast<std::size_t>((dy + radius) * (2 * radius + 1) + dx + radius);
    }
};

WeightWindow bilateral_weights(const GrayImage& guide, int u, int v, const BilateralParams& params);

/// Bilateral-weighted mean of each disparity slice over the window, skipping
/// invalid neighbours and clipping at the borders. Entries that are invalid in
/// the input stay invalid.
CostVolume aggregate_volume(const CostVolume& volume, const GrayImage& guide, const BilateralParams& params,
                            unsigned threads = 0);

}  // namespace roadstereo
