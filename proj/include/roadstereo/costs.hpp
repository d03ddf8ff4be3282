#pragma once

#include <filesystem>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "roadstereo/image.hpp"

namespace roadstereo {

inline constexpr double kInvalidCost = std::numeric_limits<double>::quiet_NaN();

inline bool is_valid_cost(double c) noexcept { return !std::isnan(c); }

/// Blocks with a standard deviation below this many intensity levels are
/// treated as textureless and produce no cost.
inline constexpr double kMinBlockStddev = 0.5;

struct NccParams {
    int rho_block = 3;  ///< half window; blocks are (2 rho + 1)^2 pixels
    int d_max = 20;     ///< disparities 0..d_max inclusive

    int block_size() const noexcept { return 2 * rho_block + 1; }
    int n_pixels() const noexcept { return block_size() * block_size(); }
    void validate() const;
};

/// Dense cost volume c(u, v, d), d = 0..d_max, stored as one contiguous
/// width x height plane per disparity. Invalid entries hold NaN.
class CostVolume {
public:
    CostVolume() = default;
    CostVolume(int width, int height, int d_max);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int d_max() const noexcept { return d_max_; }
    int disparities() const noexcept { return d_max_ + 1; }

    double& at(int u, int v, int d) noexcept { return data_[index(u, v, d)]; }
    double at(int u, int v, int d) const noexcept { return data_[index(u, v, d)]; }
    bool valid(int u, int v, int d) const noexcept { return is_valid_cost(at(u, v, d)); }

    std::span<double> slice(int d) noexcept { return {data_.data() + index(0, 0, d), plane()}; }
    std::span<const double> slice(int d) const noexcept { return {data_.data() + index(0, 0, d), plane()}; }
    std::span<const double> values() const noexcept { return data_; }

    friend bool operator==(const CostVolume&, const CostVolume&) = default;

private:
    std::size_t plane() const noexcept { return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_); }
    std::size_t index(int u, int v, int d) const noexcept
    {
        return static_cast<std::size_t>(d) * plane() + static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(u);
    }

    int width_ = 0;
    int height_ = 0;
    int d_max_ = 0;
    std::vector<double> data_;
};

/// Block mean and standard deviation, centred on each pixel. Pixels closer
/// than rho to the border hold NaN.
struct BlockStats {
    int radius = 0;
    RealImage mean;
    RealImage stddev;
};

BlockStats compute_block_stats(const GrayImage& image, const NccParams& params);

struct CostVolumes {
    CostVolume reference;  ///< c at (u, v, d), left block centred at (u, v)
    CostVolume target;     ///< the same c stored at (u - d, v, d)
};

/// NCC between the left block at (u, v) and the right block at (u - d, v).
/// When `right_valid` is given, blocks touching a zero mask pixel are invalid.
CostVolumes compute_cost_volumes(const GrayImage& left, const GrayImage& right_warped, const NccParams& params,
                                 const Mask* right_valid = nullptr, unsigned threads = 0);

/// Debug dump: "width height dmax\n" then little-endian float32 slices.
void write_cost_volume(std::ostream& out, const CostVolume& volume);
void save_cost_volume(const std::filesystem::path& path, const CostVolume& volume);

}  // namespace roadstereo
