#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "roadstereo/errors.hpp"

namespace roadstereo {

/// Row-major raster with the origin at the top-left, x to the right and y
/// downwards.
template <typename T>
class Raster {
public:
    using value_type = T;

    Raster() = default;
    Raster(int width, int height, T fill = T{}) : width_(width), height_(height)
    {
        if (width < 1 || height < 1)
            throw DimensionError("raster dimensions must be at least 1x1");
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }
    Raster(int width, int height, std::vector<T> data) : width_(width), height_(height), data_(std::move(data))
    {
        if (width < 1 || height < 1)
            throw DimensionError("raster dimensions must be at least 1x1");
        if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
            throw DimensionError("raster data length does not match width x height");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t size() const noexcept { return data_.size(); }

    T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
    const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }

    bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    std::span<T> row(int y) noexcept { return {data_.data() + index(0, y), static_cast<std::size_t>(width_)}; }
    std::span<const T> row(int y) const noexcept
    {
        return {data_.data() + index(0, y), static_cast<std::size_t>(width_)};
    }

    std::span<T> pixels() noexcept { return data_; }
    std::span<const T> pixels() const noexcept { return data_; }

    bool same_shape(const auto& other) const noexcept
    {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    std::size_t index(int x, int y) const noexcept
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

/// 8-bit single-channel image.
using GrayImage = Raster<std::uint8_t>;
/// Binary mask, 0 = unset, nonzero = set.
using Mask = Raster<std::uint8_t>;
using RealImage = Raster<double>;

inline constexpr double kInvalidDisparity = std::numeric_limits<double>::quiet_NaN();

inline bool is_valid_disparity(double d) noexcept { return !std::isnan(d); }

/// Per-pixel real disparities; invalid pixels hold a quiet NaN.
class DisparityMap : public Raster<double> {
public:
    DisparityMap() = default;
    DisparityMap(int width, int height) : Raster<double>(width, height, kInvalidDisparity) {}
    DisparityMap(int width, int height, std::vector<double> data) : Raster<double>(width, height, std::move(data)) {}

    bool valid(int x, int y) const noexcept { return is_valid_disparity((*this)(x, y)); }
    void invalidate(int x, int y) noexcept { (*this)(x, y) = kInvalidDisparity; }
    std::size_t valid_count() const noexcept;
};

/// Summed-area table over a width x height source, stored as a
/// (width+1) x (height+1) table with zero first row and column.
class IntegralImage {
public:
    IntegralImage() = default;

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    /// S(x, y) = sum of source(i, j) for i < x, j < y.
    double at(int x, int y) const noexcept
    {
        return table_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_ + 1) + static_cast<std::size_t>(x)];
    }

    /// Sum over the half-open rectangle [x1, x2) x [y1, y2).
    double rect_sum(int x1, int y1, int x2, int y2) const noexcept
    {
        return at(x2, y2) - at(x1, y2) - at(x2, y1) + at(x1, y1);
    }

    friend IntegralImage build_integral(std::span<const double> values, int width, int height);

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> table_;
};

/// Builds the summed-area table of a row-major raster of reals.
IntegralImage build_integral(std::span<const double> values, int width, int height);
IntegralImage build_integral(const RealImage& image);
/// Table of intensities (squared = false) or squared intensities.
IntegralImage build_integral(const GrayImage& image, bool squared = false);

}  // namespace roadstereo
