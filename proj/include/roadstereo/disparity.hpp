#pragma once

#include "roadstereo/costs.hpp"
#include "roadstereo/image.hpp"
#include "roadstereo/transform.hpp"

namespace roadstereo {

/// Per-pixel argmax over d of the valid costs; ties go to the smallest d.
/// Pixels without any valid cost are invalid.
DisparityMap wta(const CostVolume& volume, unsigned threads = 0);

/// Keeps ref(u, v) only where tar(u - ref(u, v), v) is valid, inside the
/// image, and within `tol` of ref(u, v). Surviving values are untouched.
DisparityMap lr_consistency(const DisparityMap& ref_map, const DisparityMap& tar_map, double tol = 0.0);

/// Offset of the parabola vertex through (-1, c_prev), (0, c_mid), (+1, c_next).
/// Returns 0 when the denominator magnitude is below 1e-12.
double parabola_vertex_offset(double c_prev, double c_mid, double c_next) noexcept;

/// Parabola refinement around each integer disparity using the costs it was
/// selected from. Pixels at d = 0, d = d_max or with an invalid neighbouring
/// cost keep their integer value.
DisparityMap subpixel_refine(const DisparityMap& map, const CostVolume& volume, unsigned threads = 0);

/// Adds the row shift of `model` back to every valid disparity.
DisparityMap postprocess(const DisparityMap& map, const RoadModel& model);

/// 8-bit view of a disparity map: round((d - lo) * scale) clamped to
/// [1, 255]; invalid pixels are 0.
GrayImage visualize_disparity(const DisparityMap& map, double lo, double scale);
/// Same, with lo/scale chosen to span the valid range.
GrayImage visualize_disparity(const DisparityMap& map);

}  // namespace roadstereo
