#pragma once

#include <vector>

#include "roadstereo/image.hpp"
#include "roadstereo/transform.hpp"

namespace roadstereo {

struct SparseMatchParams {
    int half_window = 5;
    int grid_step = 16;
    double min_peak = 0.9;
    int max_disparity = 0;     ///< 0 = a quarter of the image width
    double min_stddev = 4.0;   ///< texture required of a keypoint block

    void validate() const;
};

/// Picks the highest-variance pixel of each grid cell in `left` and matches
/// it along the same row of `right` by NCC, with parabola refinement of the
/// correlation peak. Matches whose peak is below min_peak are dropped.
std::vector<Correspondence> sparse_match(const GrayImage& left, const GrayImage& right,
                                         const SparseMatchParams& params, unsigned threads = 0);

}  // namespace roadstereo
