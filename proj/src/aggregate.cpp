#include "roadstereo/aggregate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "roadstereo/parallel.hpp"

namespace roadstereo {
namespace {

constexpr double kMinWeightSum = 1e-12;

double spatial_weight(int dx, int dy, double gamma_d)
{
    return std::exp(-static_cast<double>(dx * dx + dy * dy) / (gamma_d * gamma_d));
}

double range_weight(int diff, double gamma_r)
{
    return std::exp(-static_cast<double>(diff * diff) / (gamma_r * gamma_r));
}

}  // namespace

void BilateralParams::validate() const
{
    if (rho_agg < 0)
        throw ParameterError("bilateral: rho_agg must be non-negative");
    if (!(gamma_d > 0.0))
        throw ParameterError("bilateral: gamma_d must be positive");
    if (!(gamma_r > 0.0))
        throw ParameterError("bilateral: gamma_r must be positive");
}

WeightWindow bilateral_weights(const GrayImage& guide, int u, int v, const BilateralParams& params)
{
    params.validate();
    if (!guide.contains(u, v))
        throw DimensionError("bilateral weights: centre outside the guide image");
    const int r = params.rho_agg;
    WeightWindow win;
    win.radius = r;
    const auto cells = static_cast<std::size_t>(params.window() * params.window());
    win.spatial.assign(cells, 0.0);
    win.range.assign(cells, 0.0);
    const int centre = guide(u, v);
    std::size_t k = 0;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx, ++k) {
            if (!guide.contains(u + dx, v + dy))
                continue;
            win.spatial[k] = spatial_weight(dx, dy, params.gamma_d);
            win.range[k] = range_weight(guide(u + dx, v + dy) - centre, params.gamma_r);
        }
    return win;
}

CostVolume aggregate_volume(const CostVolume& volume, const GrayImage& guide, const BilateralParams& params,
                            unsigned threads)
{
    params.validate();
    if (volume.width() != guide.width() || volume.height() != guide.height())
        throw DimensionError("aggregate: guide image and cost volume differ in size");

    const int w = volume.width();
    const int h = volume.height();
    const int r = params.rho_agg;
    const int win = params.window();
    const auto cells = static_cast<std::size_t>(win * win);

    std::vector<double> spatial(cells);
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            spatial[static_cast<std::size_t>((dy + r) * win + dx + r)] = spatial_weight(dx, dy, params.gamma_d);
    std::array<double, 256> range{};
    for (int diff = 0; diff < 256; ++diff)
        range[static_cast<std::size_t>(diff)] = range_weight(diff, params.gamma_r);

    CostVolume out(w, h, volume.d_max());
    const auto ws = static_cast<std::size_t>(w);
    const auto padded = ws + 2 * static_cast<std::size_t>(r);
    parallel_for(0, h, threads, [&](int v) {
        // Combined weights of the row, offset-major so the accumulation below
        // runs over contiguous u. Zero where the neighbour leaves the image.
        std::vector<double> weights(cells * ws, 0.0);
        for (int dy = -r; dy <= r; ++dy) {
            const int y = v + dy;
            if (y < 0 || y >= h)
                continue;
            const auto grow = guide.row(y);
            const auto crow = guide.row(v);
            for (int dx = -r; dx <= r; ++dx) {
                const auto k = static_cast<std::size_t>((dy + r) * win + dx + r);
                double* wk = weights.data() + k * ws;
                for (int u = std::max(0, -dx); u < std::min(w, w - dx); ++u) {
                    const int diff = std::abs(grow[static_cast<std::size_t>(u + dx)] - crow[static_cast<std::size_t>(u)]);
                    wk[u] = spatial[k] * range[static_cast<std::size_t>(diff)];
                }
            }
        }

        // Padded copies of one cost row: invalid entries become 0 in the
        // values and 0 in the indicator, so they drop out of both sums.
        std::vector<double> value(padded, 0.0);
        std::vector<double> present(padded, 0.0);
        std::vector<double> num(ws);
        std::vector<double> den(ws);
        for (int d = 0; d <= volume.d_max(); ++d) {
            const auto src = volume.slice(d);
            std::fill(num.begin(), num.end(), 0.0);
            std::fill(den.begin(), den.end(), 0.0);
            for (int dy = -r; dy <= r; ++dy) {
                const int y = v + dy;
                if (y < 0 || y >= h)
                    continue;
                const double* row = src.data() + static_cast<std::size_t>(y) * ws;
                for (std::size_t x = 0; x < ws; ++x) {
                    const bool ok = is_valid_cost(row[x]);
                    value[x + static_cast<std::size_t>(r)] = ok ? row[x] : 0.0;
                    present[x + static_cast<std::size_t>(r)] = ok ? 1.0 : 0.0;
                }
                for (int dx = -r; dx <= r; ++dx) {
                    const auto k = static_cast<std::size_t>((dy + r) * win + dx + r);
                    const double* wk = weights.data() + k * ws;
                    const double* cv = value.data() + r + dx;
                    const double* pv = present.data() + r + dx;
                    for (std::size_t u = 0; u < ws; ++u) {
                        num[u] += wk[u] * cv[u];
                        den[u] += wk[u] * pv[u];
                    }
                }
            }
            auto dst = out.slice(d);
            const std::size_t base = static_cast<std::size_t>(v) * ws;
            for (std::size_t u = 0; u < ws; ++u)
                if (is_valid_cost(src[base + u]) && den[u] >= kMinWeightSum)
                    dst[base + u] = num[u] / den[u];
        }
    });
    return out;
}

}  // namespace roadstereo
