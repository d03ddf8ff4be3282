#include "roadstereo/sparse_match.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "roadstereo/costs.hpp"
#include "roadstereo/disparity.hpp"
#include "roadstereo/parallel.hpp"

namespace roadstereo {

void SparseMatchParams::validate() const
{
    if (half_window < 1)
        throw ParameterError("sparse match: half_window must be at least 1");
    if (grid_step < 1)
        throw ParameterError("sparse match: grid_step must be at least 1");
    if (!(min_peak >= -1.0 && min_peak <= 1.0))
        throw ParameterError("sparse match: min_peak must lie in [-1, 1]");
    if (max_disparity < 0)
        throw ParameterError("sparse match: max_disparity must be non-negative");
}

std::vector<Correspondence> sparse_match(const GrayImage& left, const GrayImage& right,
                                         const SparseMatchParams& params, unsigned threads)
{
    params.validate();
    if (!left.same_shape(right))
        throw DimensionError("sparse match: images differ in size");
    const NccParams block{params.half_window, 1};
    const BlockStats ls = compute_block_stats(left, block);
    const BlockStats rs = compute_block_stats(right, block);
    const int r = params.half_window;
    const int bs = block.block_size();
    const double n = block.n_pixels();
    const int w = left.width();
    const int h = left.height();
    const int max_d = params.max_disparity > 0 ? params.max_disparity : std::max(1, w / 4);

    const int rows = (h - 2 * r + params.grid_step - 1) / params.grid_step;
    const int cols = (w - 2 * r + params.grid_step - 1) / params.grid_step;
    std::vector<std::vector<Correspondence>> found(static_cast<std::size_t>(std::max(rows, 0)));

    parallel_for(0, rows, threads, [&](int gy) {
        std::vector<double> scores;
        for (int gx = 0; gx < cols; ++gx) {
            const int y_lo = r + gy * params.grid_step;
            const int x_lo = r + gx * params.grid_step;
            const int y_hi = std::min(h - r, y_lo + params.grid_step);
            const int x_hi = std::min(w - r, x_lo + params.grid_step);
            int bu = -1;
            int bv = -1;
            double best_sd = params.min_stddev;
            for (int y = y_lo; y < y_hi; ++y)
                for (int x = x_lo; x < x_hi; ++x)
                    if (ls.stddev(x, y) > best_sd) {
                        best_sd = ls.stddev(x, y);
                        bu = x;
                        bv = y;
                    }
            if (bu < 0)
                continue;

            const int d_hi = std::min(max_d, bu - r);
            if (d_hi < 2)
                continue;
            scores.assign(static_cast<std::size_t>(d_hi + 1), -2.0);
            for (int d = 0; d <= d_hi; ++d) {
                const int x = bu - d;
                const double sd_r = rs.stddev(x, bv);
                if (sd_r < kMinBlockStddev)
                    continue;
                std::int64_t dot = 0;
                for (int dy = -r; dy <= r; ++dy) {
                    const auto lrow = left.row(bv + dy);
                    const auto rrow = right.row(bv + dy);
                    for (int dx = 0; dx < bs; ++dx)
                        dot += static_cast<std::int64_t>(lrow[static_cast<std::size_t>(bu - r + dx)]) *
                               rrow[static_cast<std::size_t>(x - r + dx)];
                }
                scores[static_cast<std::size_t>(d)] =
                    (static_cast<double>(dot) - n * ls.mean(bu, bv) * rs.mean(x, bv)) / (n * best_sd * sd_r);
            }
            const auto peak = std::ranges::max_element(scores);
            const int d = static_cast<int>(peak - scores.begin());
            if (*peak < params.min_peak || d == 0 || d == d_hi)
                continue;
            if (scores[static_cast<std::size_t>(d - 1)] < -1.0 || scores[static_cast<std::size_t>(d + 1)] < -1.0)
                continue;
            const double sub = d + parabola_vertex_offset(scores[static_cast<std::size_t>(d - 1)], *peak,
                                                          scores[static_cast<std::size_t>(d + 1)]);
            found[static_cast<std::size_t>(gy)].push_back(
                {static_cast<double>(bu), static_cast<double>(bv), bu - sub, static_cast<double>(bv)});
        }
    });

    std::vector<Correspondence> out;
    for (auto& row : found)
        out.insert(out.end(), row.begin(), row.end());
    return out;
}

}  // namespace roadstereo
