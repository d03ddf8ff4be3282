#include "roadstereo/costs.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <string>

#include "roadstereo/parallel.hpp"

namespace roadstereo {

void NccParams::validate() const
{
    if (rho_block < 1)
        throw ParameterError("ncc: rho_block must be at least 1");
    if (d_max < 1)
        throw ParameterError("ncc: d_max must be at least 1");
}

CostVolume::CostVolume(int width, int height, int d_max) : width_(width), height_(height), d_max_(d_max)
{
    if (width < 1 || height < 1 || d_max < 0)
        throw DimensionError("cost volume dimensions must be positive");
    data_.assign(plane() * static_cast<std::size_t>(d_max + 1), kInvalidCost);
}

BlockStats compute_block_stats(const GrayImage& image, const NccParams& params)
{
    params.validate();
    const int r = params.rho_block;
    const int w = image.width();
    const int h = image.height();
    if (w < params.block_size() || h < params.block_size())
        throw DimensionError("block stats: image " + std::to_string(w) + "x" + std::to_string(h) +
                             " is smaller than the block size " + std::to_string(params.block_size()));

    const IntegralImage sum = build_integral(image, false);
    const IntegralImage sum_sq = build_integral(image, true);
    const double n = params.n_pixels();

    const double nan = std::numeric_limits<double>::quiet_NaN();
    BlockStats stats{r, RealImage(w, h, nan), RealImage(w, h, nan)};
    for (int v = r; v < h - r; ++v)
        for (int u = r; u < w - r; ++u) {
            const double s = sum.rect_sum(u - r, v - r, u + r + 1, v + r + 1);
            const double s2 = sum_sq.rect_sum(u - r, v - r, u + r + 1, v + r + 1);
            const double mu = s / n;
            stats.mean(u, v) = mu;
            stats.stddev(u, v) = std::sqrt(std::max(0.0, s2 / n - mu * mu));
        }
    return stats;
}

CostVolumes compute_cost_volumes(const GrayImage& left, const GrayImage& right_warped, const NccParams& params,
                                 const Mask* right_valid, unsigned threads)
{
    params.validate();
    if (!left.same_shape(right_warped))
        throw DimensionError("cost volumes: left and right images differ in size");
    if (right_valid && !right_valid->same_shape(right_warped))
        throw DimensionError("cost volumes: validity mask differs in size from the right image");

    const BlockStats left_stats = compute_block_stats(left, params);
    const BlockStats right_stats = compute_block_stats(right_warped, params);

    const int w = left.width();
    const int h = left.height();
    const int r = params.rho_block;
    const int bs = params.block_size();
    const double n = params.n_pixels();

    // A right block is usable iff it contains no masked pixel.
    RealImage right_block_ok(w, h, 1.0);
    if (right_valid) {
        RealImage masked(w, h, 0.0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                masked(x, y) = (*right_valid)(x, y) ? 0.0 : 1.0;
        const IntegralImage masked_sum = build_integral(masked);
        for (int y = r; y < h - r; ++y)
            for (int x = r; x < w - r; ++x)
                right_block_ok(x, y) = masked_sum.rect_sum(x - r, y - r, x + r + 1, y + r + 1) == 0.0 ? 1.0 : 0.0;
    }

    CostVolumes out{CostVolume(w, h, params.d_max), CostVolume(w, h, params.d_max)};
    parallel_for(r, h - r, threads, [&](int v) {
        std::vector<std::int32_t> block(static_cast<std::size_t>(params.n_pixels()));
        for (int u = r; u < w - r; ++u) {
            const double mu_l = left_stats.mean(u, v);
            const double sd_l = left_stats.stddev(u, v);
            if (sd_l < kMinBlockStddev)
                continue;
            for (int dy = 0; dy < bs; ++dy)
                for (int dx = 0; dx < bs; ++dx)
                    block[static_cast<std::size_t>(dy * bs + dx)] = left(u - r + dx, v - r + dy);

            const int d_hi = std::min(params.d_max, u - r);
            for (int d = 0; d <= d_hi; ++d) {
                const int x = u - d;
                if (right_block_ok(x, v) == 0.0)
                    continue;
                const double sd_r = right_stats.stddev(x, v);
                if (sd_r < kMinBlockStddev)
                    continue;
                std::int64_t dot = 0;
                for (int dy = 0; dy < bs; ++dy) {
                    const auto rrow = right_warped.row(v - r + dy);
                    const std::int32_t* lrow = block.data() + dy * bs;
                    const std::uint8_t* rp = rrow.data() + (x - r);
                    std::int32_t acc = 0;
                    for (int dx = 0; dx < bs; ++dx)
                        acc += lrow[dx] * static_cast<std::int32_t>(rp[dx]);
                    dot += acc;
                }
                const double c = (static_cast<double>(dot) - n * mu_l * right_stats.mean(x, v)) / (n * sd_l * sd_r);
                const double clamped = std::clamp(c, -1.0, 1.0);
                out.reference.at(u, v, d) = clamped;
                out.target.at(x, v, d) = clamped;
            }
        }
    });
    return out;
}

void write_cost_volume(std::ostream& out, const CostVolume& volume)
{
    out << volume.width() << ' ' << volume.height() << ' ' << volume.d_max() << '\n';
    const bool host_little = std::endian::native == std::endian::little;
    std::vector<std::uint32_t> buf(static_cast<std::size_t>(volume.width()) * static_cast<std::size_t>(volume.height()));
    for (int d = 0; d <= volume.d_max(); ++d) {
        const auto slice = volume.slice(d);
        for (std::size_t i = 0; i < slice.size(); ++i) {
            std::uint32_t word = std::bit_cast<std::uint32_t>(static_cast<float>(slice[i]));
            if (!host_little)
                word = ((word & 0xffu) << 24) | ((word & 0xff00u) << 8) | ((word >> 8) & 0xff00u) | (word >> 24);
            buf[i] = word;
        }
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));
    }
    if (!out)
        throw IoError("cost volume dump: write failed");
}

void save_cost_volume(const std::filesystem::path& path, const CostVolume& volume)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path.string() + "' for writing");
    write_cost_volume(out, volume);
}

}  // namespace roadstereo
