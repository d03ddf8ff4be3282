#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "roadstereo/image.hpp"

namespace roadstereo {

class KeyValueFile;

/// Rectified stereo rig plus the road plane n * y_w + beta = 0 expressed in
/// the pitched world frame.
struct CameraRig {
    double f = 700.0;        ///< focal length, pixels
    double u0 = 320.0;       ///< principal point, pixels
    double v0 = 240.0;
    double baseline = 0.12;  ///< metres
    double theta = 0.0;      ///< rig pitch relative to the road, radians
    double plane_n = -1.0;
    double plane_beta = 1.0; ///< metres

    void validate() const;

    /// Reads keys f, u0, v0, baseline, theta, plane_n, plane_beta; missing
    /// keys keep their defaults.
    static CameraRig from_config(const KeyValueFile& kv);
    void to_config(KeyValueFile& kv) const;
};

/// Linear row model d(v) = alpha0 + alpha1 * v of the road disparity, plus
/// the constant delta kept as residual disparity after warping.
struct RoadModel {
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    double delta = 0.0;
    int inlier_count = 0;
    double residual_rms = 0.0;

    double road_disparity(double v) const noexcept { return alpha0 + alpha1 * v; }
    /// Horizontal shift applied to row v of the target image.
    double shift(double v) const noexcept { return alpha0 + alpha1 * v - delta; }

    static RoadModel identity() noexcept { return {}; }
};

struct Correspondence {
    double ul = 0.0;
    double vl = 0.0;
    double ur = 0.0;
    double vr = 0.0;

    double disparity() const noexcept { return ul - ur; }
};

struct RansacParams {
    double inlier_threshold = 1.0;      ///< pixels
    int iterations = 200;
    double min_consensus_fraction = 0.5;
    std::uint64_t seed = 1;

    void validate() const;
};

struct AlphaCoefficients {
    double alpha0 = 0.0;
    double alpha1 = 0.0;
};

/// Road-plane disparity coefficients implied by the rig geometry.
AlphaCoefficients alpha_from_rig(const CameraRig& rig);

struct PixelRect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    bool contains(int px, int py) const noexcept
    {
        return px >= x && py >= y && px < x + width && py < y + height;
    }
    PixelRect grown(int by) const noexcept { return {x - by, y - by, width + 2 * by, height + 2 * by}; }
};

/// Bottom-centre 25% x 15% patch of a width x height map.
PixelRect default_roll_patch(int width, int height);

/// Roll angle atan(-g1/g2) of the least-squares plane d = g0 + g1 u + g2 v
/// through the valid pixels of `region` (the whole map when omitted).
double estimate_roll(const DisparityMap& map);
double estimate_roll(const DisparityMap& map, PixelRect region);

/// delta = floor(min over rows of the road disparity) clamped to
/// [0, delta_margin], so every row shift is non-negative and road pixels keep
/// a residual disparity of about delta_margin after warping.
double choose_delta(double alpha0, double alpha1, int image_height, double delta_margin);

/// RANSAC over (v, d) pairs followed by a least-squares refit on the
/// consensus set.
RoadModel fit_road_model(std::span<const Correspondence> matches, const RansacParams& ransac, int image_height,
                         double delta_margin = 10.0);

struct WarpResult {
    GrayImage image;
    Mask valid;  ///< 255 where the source column lay inside the target image
};

/// Shifts row v of `target` right by model.shift(v) with horizontal linear
/// interpolation.
WarpResult warp_target(const GrayImage& target, const RoadModel& model, unsigned threads = 0);

std::vector<Correspondence> read_correspondences(std::istream& in);
std::vector<Correspondence> load_correspondences(const std::filesystem::path& path);
void write_correspondences(std::ostream& out, std::span<const Correspondence> matches);

RoadModel read_road_model(std::istream& in);
RoadModel load_road_model(const std::filesystem::path& path);
void write_road_model(std::ostream& out, const RoadModel& model);

}  // namespace roadstereo
