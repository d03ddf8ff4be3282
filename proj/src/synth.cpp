#include "roadstereo/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "roadstereo/keyvalue.hpp"
#include "roadstereo/parallel.hpp"

namespace roadstereo {
namespace {

constexpr double kTextureBaseCell = 32.0;
constexpr int kTextureOctaves = 4;
constexpr double kTextureLow = 30.0;
constexpr double kTextureHigh = 225.0;

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

double lattice(std::int64_t ix, std::int64_t iy, int octave, std::uint64_t seed)
{
    std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(ix) * 0x632be59bd9b4e019ull +
                                                   static_cast<std::uint64_t>(iy) * 0x85157af5ull +
                                                   static_cast<std::uint64_t>(octave)));
    return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise(double x, double y, int octave, std::uint64_t seed)
{
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const auto ix = static_cast<std::int64_t>(fx);
    const auto iy = static_cast<std::int64_t>(fy);
    const double tx = smooth(x - fx);
    const double ty = smooth(y - fy);
    const double a = lattice(ix, iy, octave, seed);
    const double b = lattice(ix + 1, iy, octave, seed);
    const double c = lattice(ix, iy + 1, octave, seed);
    const double d = lattice(ix + 1, iy + 1, octave, seed);
    return (a + (b - a) * tx) * (1.0 - ty) + (c + (d - c) * tx) * ty;
}

struct Ray {
    double ox, oy, oz;  // world origin
    double dx, dy, dz;  // world direction, scaled so that camera depth == t
};

struct Hit {
    double t = std::numeric_limits<double>::infinity();
    Surface surface = Surface::none;
    int box = -1;
};

class Scene {
public:
    explicit Scene(const SceneSpec& spec) : spec_(spec)
    {
        const auto& rig = spec.rig;
        cos_t_ = std::cos(rig.theta);
        sin_t_ = std::sin(rig.theta);
        road_y_ = -rig.plane_beta / rig.plane_n;
        up_ = road_y_ > 0.0 ? -1.0 : 1.0;
    }

    // Camera at baseline offset `cam_x` (0 = left, B = right) looking through
    // pixel (u, v).
    Ray ray(double cam_x, double u, double v) const
    {
        const auto& rig = spec_.rig;
        const double X = (u - rig.u0) / rig.f;
        const double Y = (v - rig.v0) / rig.f;
        const double Z = 1.0;
        return {cam_x, 0.0, 0.0, X, Y * cos_t_ + Z * sin_t_, -Y * sin_t_ + Z * cos_t_};
    }

    Hit cast(const Ray& r) const
    {
        Hit best;
        if (r.dy != 0.0) {
            const double t = (road_y_ - r.oy) / r.dy;
            if (t > 0.0)
                best = {t, Surface::road, -1};
        }
        for (std::size_t i = 0; i < spec_.boxes.size(); ++i) {
            const Box& b = spec_.boxes[i];
            const double y_top = road_y_ + up_ * b.height;
            const double lo[3] = {b.x - b.width / 2, std::min(road_y_, y_top), b.z - b.length / 2};
            const double hi[3] = {b.x + b.width / 2, std::max(road_y_, y_top), b.z + b.length / 2};
            const double o[3] = {r.ox, r.oy, r.oz};
            const double dir[3] = {r.dx, r.dy, r.dz};
            double t_near = -std::numeric_limits<double>::infinity();
            double t_far = std::numeric_limits<double>::infinity();
            int near_axis = -1;
            bool miss = false;
            for (int a = 0; a < 3 && !miss; ++a) {
                if (dir[a] == 0.0) {
                    miss = o[a] < lo[a] || o[a] > hi[a];
                    continue;
                }
                double t0 = (lo[a] - o[a]) / dir[a];
                double t1 = (hi[a] - o[a]) / dir[a];
                if (t0 > t1)
                    std::swap(t0, t1);
                if (t0 > t_near) {
                    t_near = t0;
                    near_axis = a;
                }
                t_far = std::min(t_far, t1);
                miss = t_near > t_far;
            }
            if (miss || t_near <= 0.0 || t_near >= best.t)
                continue;
            best = {t_near, near_axis == 1 ? Surface::box_top : Surface::box_side, static_cast<int>(i)};
        }
        return best;
    }

    double disparity(double depth) const { return spec_.rig.f * spec_.rig.baseline / depth; }

private:
    const SceneSpec& spec_;
    double cos_t_ = 1.0;
    double sin_t_ = 0.0;
    double road_y_ = 0.0;
    double up_ = -1.0;
};

bool same_point(const Hit& a, double t) { return std::isfinite(a.t) && std::abs(a.t - t) <= 1e-9 * std::max(1.0, t); }

std::uint8_t quantize(double value) { return static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L)); }

}  // namespace

double texture_value(double x, double y, std::uint64_t seed)
{
    double sum = 0.0;
    double norm = 0.0;
    double amp = 1.0;
    double cell = kTextureBaseCell;
    for (int o = 0; o < kTextureOctaves; ++o) {
        sum += amp * value_noise(x / cell, y / cell, o, seed);
        norm += amp;
        amp *= 0.5;
        cell *= 0.5;
    }
    return kTextureLow + (kTextureHigh - kTextureLow) * (sum / norm);
}

void SceneSpec::validate() const
{
    rig.validate();
    if (width < 2 || height < 2)
        throw ParameterError("scene: image must be at least 2x2");
    if (!(noise_sigma >= 0.0))
        throw ParameterError("scene: noise_sigma must be non-negative");
    if (rig.plane_n == 0.0)
        throw SceneError("scene: road plane normal component n is zero");
    for (const auto& b : boxes)
        if (!(b.height > 0.0) || !(b.width > 0.0) || !(b.length > 0.0))
            throw ParameterError("scene: box dimensions must be positive");
}

SceneSpec SceneSpec::from_config(const KeyValueFile& kv)
{
    SceneSpec s;
    s.rig = CameraRig::from_config(kv);
    s.width = kv.get_int("width", s.width);
    s.height = kv.get_int("height", s.height);
    if (!kv.has("u0"))
        s.rig.u0 = (s.width - 1) / 2.0;
    if (!kv.has("v0"))
        s.rig.v0 = (s.height - 1) / 2.0;
    s.seed = static_cast<std::uint64_t>(kv.get_int("seed", 1));
    s.noise_sigma = kv.get_double("noise_sigma", 0.0);
    for (const auto& text : kv.get_all("box")) {
        const auto f = split_csv_fields(text);
        if (f.size() != 5)
            throw FormatError("box: expected x,z,width,length,height");
        s.boxes.push_back({parse_double(f[0], "box"), parse_double(f[1], "box"), parse_double(f[2], "box"),
                           parse_double(f[3], "box"), parse_double(f[4], "box")});
    }
    return s;
}

void SceneSpec::to_config(KeyValueFile& kv) const
{
    rig.to_config(kv);
    kv.set("width", std::to_string(width));
    kv.set("height", std::to_string(height));
    kv.set("seed", std::to_string(seed));
    std::ostringstream os;
    os.precision(17);
    os << noise_sigma;
    kv.set("noise_sigma", os.str());
    for (const auto& b : boxes) {
        std::ostringstream bs;
        bs.precision(17);
        bs << b.x << ',' << b.z << ',' << b.width << ',' << b.length << ',' << b.height;
        kv.add("box", bs.str());
    }
}

SyntheticPair render_pair(const SceneSpec& spec, unsigned threads)
{
    spec.validate();
    const Scene scene(spec);
    const int w = spec.width;
    const int h = spec.height;
    const double baseline = spec.rig.baseline;

    RealImage clean_left(w, h);
    SyntheticPair out{GrayImage(w, h), GrayImage(w, h), DisparityMap(w, h), Mask(w, h, 0),
                      Raster<std::uint8_t>(w, h, 0), Raster<std::int16_t>(w, h, -1)};

    parallel_for(0, h, threads, [&](int v) {
        for (int u = 0; u < w; ++u) {
            clean_left(u, v) = texture_value(u, v, spec.seed);
            const Hit hit = scene.cast(scene.ray(0.0, u, v));
            if (hit.surface == Surface::none)
                continue;
            const double d = scene.disparity(hit.t);
            out.gt_disparity(u, v) = d;
            out.surface(u, v) = static_cast<std::uint8_t>(hit.surface);
            out.box_id(u, v) = static_cast<std::int16_t>(hit.box);
            const double ur = u - d;
            bool visible = ur >= 0.0 && ur <= w - 1;
            if (visible)
                visible = same_point(scene.cast(scene.ray(baseline, ur, v)), hit.t);
            out.occlusion(u, v) = visible ? 0 : 255;
        }
    });
    if (out.gt_disparity.valid_count() == 0)
        throw SceneError("scene: the road plane is not visible (behind the camera?)");

    const std::uint64_t hidden_seed = splitmix64(spec.seed ^ 0x5bd1e995ull);
    RealImage clean_right(w, h);
    parallel_for(0, h, threads, [&](int v) {
        const auto src = clean_left.row(v);
        for (int ur = 0; ur < w; ++ur) {
            const Hit hit = scene.cast(scene.ray(baseline, ur, v));
            // Points at infinity (no surface) have zero disparity.
            const double d = hit.surface == Surface::none ? 0.0 : scene.disparity(hit.t);
            const double ul = ur + d;
            bool seen_left = ul >= 0.0 && ul <= w - 1;
            if (seen_left && hit.surface != Surface::none)
                seen_left = same_point(scene.cast(scene.ray(0.0, ul, v)), hit.t);
            if (!seen_left) {
                clean_right(ur, v) = texture_value(ur, v, hidden_seed);
                continue;
            }
            const int x0 = static_cast<int>(std::floor(ul));
            const double t = ul - x0;
            double value = src[static_cast<std::size_t>(x0)];
            if (t > 0.0 && x0 + 1 < w)
                value = (1.0 - t) * value + t * src[static_cast<std::size_t>(x0 + 1)];
            clean_right(ur, v) = value;
        }
    });

    parallel_for(0, h, threads, [&](int v) {
        std::mt19937_64 rng_l(splitmix64(spec.seed * 2 + 0) ^ splitmix64(static_cast<std::uint64_t>(v)));
        std::mt19937_64 rng_r(splitmix64(spec.seed * 2 + 1) ^ splitmix64(static_cast<std::uint64_t>(v) + 0x1000000ull));
        std::normal_distribution<double> noise(0.0, 1.0);
        for (int u = 0; u < w; ++u) {
            const double nl = spec.noise_sigma > 0.0 ? spec.noise_sigma * noise(rng_l) : 0.0;
            const double nr = spec.noise_sigma > 0.0 ? spec.noise_sigma * noise(rng_r) : 0.0;
            out.left(u, v) = quantize(clean_left(u, v) + nl);
            out.right(u, v) = quantize(clean_right(u, v) + nr);
        }
    });
    return out;
}

PixelRect surface_bounds(const SyntheticPair& pair, Surface s, int box)
{
    int x0 = pair.surface.width();
    int y0 = pair.surface.height();
    int x1 = -1;
    int y1 = -1;
    for (int v = 0; v < pair.surface.height(); ++v)
        for (int u = 0; u < pair.surface.width(); ++u)
            if (pair.surface(u, v) == static_cast<std::uint8_t>(s) && (box < 0 || pair.box_id(u, v) == box)) {
                x0 = std::min(x0, u);
                y0 = std::min(y0, v);
                x1 = std::max(x1, u);
                y1 = std::max(y1, v);
            }
    if (x1 < 0)
        return {};
    return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

}  // namespace roadstereo
