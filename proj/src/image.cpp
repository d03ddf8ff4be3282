#include "roadstereo/image.hpp"

#include <algorithm>

namespace roadstereo {

std::size_t DisparityMap::valid_count() const noexcept
{
    const auto px = pixels();
    return static_cast<std::size_t>(std::count_if(px.begin(), px.end(), is_valid_disparity));
}

IntegralImage build_integral(std::span<const double> values, int width, int height)
{
    if (width < 1 || height < 1 || values.empty())
        throw DimensionError("integral image of an empty raster");
    if (values.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw DimensionError("integral image source length does not match width x height");

    IntegralImage out;
    out.width_ = width;
    out.height_ = height;
    const std::size_t stride = static_cast<std::size_t>(width) + 1;
    out.table_.assign(stride * (static_cast<std::size_t>(height) + 1), 0.0);
    for (int y = 0; y < height; ++y) {
        double row_sum = 0.0;
        const double* src = values.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(width);
        double* prev = out.table_.data() + static_cast<std::size_t>(y) * stride;
        double* cur = prev + stride;
        for (int x = 0; x < width; ++x) {
            row_sum += src[x];
            cur[x + 1] = prev[x + 1] + row_sum;
        }
    }
    return out;
}

IntegralImage build_integral(const RealImage& image)
{
    return build_integral(image.pixels(), image.width(), image.height());
}

IntegralImage build_integral(const GrayImage& image, bool squared)
{
    std::vector<double> values(image.size());
    std::ranges::transform(image.pixels(), values.begin(), [squared](std::uint8_t v) {
        const double d = v;
        return squared ? d * d : d;
    });
    return build_integral(values, image.width(), image.height());
}

}  // namespace roadstereo
