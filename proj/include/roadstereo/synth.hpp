#pragma once

#include <cstdint>
#include <vector>

#include "roadstereo/image.hpp"
#include "roadstereo/transform.hpp"

namespace roadstereo {

class KeyValueFile;

/// Axis-aligned box standing on the road. (x, z) is the footprint centre in
/// the pitched world frame; width runs along x, length along z.
struct Box {
    double x = 0.0;
    double z = 1.0;
    double width = 0.1;
    double length = 0.1;
    double height = 0.05;
};

struct SceneSpec {
    CameraRig rig;
    int width = 640;
    int height = 480;
    std::uint64_t seed = 1;
    std::vector<Box> boxes;
    double noise_sigma = 0.0;

    void validate() const;

    /// Rig keys plus width, height, seed, noise_sigma and repeatable
    /// `box = x,z,width,length,height`.
    static SceneSpec from_config(const KeyValueFile& kv);
    void to_config(KeyValueFile& kv) const;
};

enum class Surface : std::uint8_t { none = 0, road = 1, box_top = 2, box_side = 3 };

struct SyntheticPair {
    GrayImage left;
    GrayImage right;
    DisparityMap gt_disparity;  ///< left-view disparity; invalid where no surface is hit
    Mask occlusion;             ///< 255 where the left-view point is hidden from, or outside, the right view
    Raster<std::uint8_t> surface;  ///< Surface label per left pixel
    Raster<std::int16_t> box_id;   ///< index into SceneSpec::boxes, -1 elsewhere
};

/// Ray-casts the scene from both cameras. The left image carries procedural
/// value-noise texture; the right image is the left image inverse-warped by
/// the right-view disparity with linear interpolation.
SyntheticPair render_pair(const SceneSpec& spec, unsigned threads = 0);

/// Four-octave value noise in [30, 225] at continuous image coordinates.
double texture_value(double x, double y, std::uint64_t seed);

/// Bounding rectangle of the left pixels labelled `s` (and belonging to box
/// `box` when box >= 0). Empty rectangle when none.
PixelRect surface_bounds(const SyntheticPair& pair, Surface s, int box = -1);

}  // namespace roadstereo
