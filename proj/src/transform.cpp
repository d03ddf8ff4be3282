#include "roadstereo/transform.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "roadstereo/keyvalue.hpp"
#include "roadstereo/parallel.hpp"

namespace roadstereo {
namespace {

std::string fmt_double(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

struct LineFit {
    double alpha0 = 0.0;
    double alpha1 = 0.0;
};

// Least squares d = a0 + a1 v over the selected indices.
LineFit least_squares_line(std::span<const Correspondence> matches, std::span<const std::size_t> idx)
{
    double mean_v = 0.0;
    double mean_d = 0.0;
    for (auto i : idx) {
        mean_v += matches[i].vl;
        mean_d += matches[i].disparity();
    }
    const double n = static_cast<double>(idx.size());
    mean_v /= n;
    mean_d /= n;
    double svv = 0.0;
    double svd = 0.0;
    for (auto i : idx) {
        const double dv = matches[i].vl - mean_v;
        svv += dv * dv;
        svd += dv * (matches[i].disparity() - mean_d);
    }
    if (svv <= 1e-12 * std::max(1.0, mean_v * mean_v) * n)
        throw FitError("road model fit is degenerate: all correspondences lie on one row");
    const double a1 = svd / svv;
    return {mean_d - a1 * mean_v, a1};
}

std::vector<std::size_t> inliers_of(std::span<const Correspondence> matches, LineFit line, double threshold)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < matches.size(); ++i) {
        const double r = matches[i].disparity() - (line.alpha0 + line.alpha1 * matches[i].vl);
        if (std::abs(r) <= threshold)
            out.push_back(i);
    }
    return out;
}

}  // namespace

void CameraRig::validate() const
{
    if (!(f > 0.0) || !std::isfinite(f))
        throw ParameterError("camera rig: focal length must be positive");
    if (!(baseline > 0.0) || !std::isfinite(baseline))
        throw ParameterError("camera rig: baseline must be positive");
    if (plane_beta == 0.0 || !std::isfinite(plane_beta))
        throw ParameterError("camera rig: degenerate road plane (beta = 0)");
    if (!std::isfinite(u0) || !std::isfinite(v0) || !std::isfinite(theta) || !std::isfinite(plane_n))
        throw ParameterError("camera rig: non-finite parameter");
}

CameraRig CameraRig::from_config(const KeyValueFile& kv)
{
    CameraRig rig;
    rig.f = kv.get_double("f", rig.f);
    rig.u0 = kv.get_double("u0", rig.u0);
    rig.v0 = kv.get_double("v0", rig.v0);
    rig.baseline = kv.get_double("baseline", rig.baseline);
    rig.theta = kv.get_double("theta", rig.theta);
    rig.plane_n = kv.get_double("plane_n", rig.plane_n);
    rig.plane_beta = kv.get_double("plane_beta", rig.plane_beta);
    return rig;
}

void CameraRig::to_config(KeyValueFile& kv) const
{
    kv.set("f", fmt_double(f));
    kv.set("u0", fmt_double(u0));
    kv.set("v0", fmt_double(v0));
    kv.set("baseline", fmt_double(baseline));
    kv.set("theta", fmt_double(theta));
    kv.set("plane_n", fmt_double(plane_n));
    kv.set("plane_beta", fmt_double(plane_beta));
}

void RansacParams::validate() const
{
    if (!(inlier_threshold > 0.0))
        throw ParameterError("ransac: inlier threshold must be positive");
    if (iterations < 1)
        throw ParameterError("ransac: iterations must be at least 1");
    if (!(min_consensus_fraction >= 0.0 && min_consensus_fraction <= 1.0))
        throw ParameterError("ransac: minimum consensus fraction must lie in [0, 1]");
}

AlphaCoefficients alpha_from_rig(const CameraRig& rig)
{
    if (rig.plane_beta == 0.0)
        throw ParameterError("alpha_from_rig: degenerate road plane (beta = 0)");
    const double k = rig.baseline * rig.plane_n / rig.plane_beta;
    const double c = std::cos(rig.theta);
    const double s = std::sin(rig.theta);
    return {(rig.v0 * c - rig.f * s) * k, -c * k};
}

PixelRect default_roll_patch(int width, int height)
{
    const int w = std::max(1, static_cast<int>(std::lround(0.25 * width)));
    const int h = std::max(1, static_cast<int>(std::lround(0.15 * height)));
    return {(width - w) / 2, height - h, w, h};
}

double estimate_roll(const DisparityMap& map) { return estimate_roll(map, {0, 0, map.width(), map.height()}); }

double estimate_roll(const DisparityMap& map, PixelRect region)
{
    const int x0 = std::max(0, region.x);
    const int y0 = std::max(0, region.y);
    const int x1 = std::min(map.width(), region.x + region.width);
    const int y1 = std::min(map.height(), region.y + region.height);

    std::vector<double> us;
    std::vector<double> vs;
    std::vector<double> ds;
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
            if (map.valid(x, y)) {
                us.push_back(x);
                vs.push_back(y);
                ds.push_back(map(x, y));
            }
    if (ds.size() < 3)
        throw FitError("roll estimate: fewer than 3 valid disparities in patch");

    // Centre the coordinates so the design matrix is well conditioned.
    const Eigen::Index n = static_cast<Eigen::Index>(ds.size());
    const double cu = (x0 + x1 - 1) / 2.0;
    const double cv = (y0 + y1 - 1) / 2.0;
    Eigen::MatrixXd a(n, 3);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a(i, 0) = 1.0;
        a(i, 1) = us[static_cast<std::size_t>(i)] - cu;
        a(i, 2) = vs[static_cast<std::size_t>(i)] - cv;
        b(i) = ds[static_cast<std::size_t>(i)];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < 3)
        throw FitError("roll estimate: valid pixels are collinear");
    const Eigen::Vector3d g = qr.solve(b);
    if (std::abs(g(2)) < 1e-12 * std::max(1.0, std::abs(g(1))))
        throw FitError("roll estimate: undefined roll (vertical disparity gradient is zero)");
    return std::atan(-g(1) / g(2));
}

double choose_delta(double alpha0, double alpha1, int image_height, double delta_margin)
{
    if (image_height < 1)
        throw ParameterError("image height must be positive");
    if (!(delta_margin >= 0.0))
        throw ParameterError("delta margin must be non-negative");
    const double top = alpha0;
    const double bottom = alpha0 + alpha1 * (image_height - 1);
    const double floor_min = std::floor(std::min(top, bottom));
    return std::max(0.0, std::min(delta_margin, floor_min));
}

RoadModel fit_road_model(std::span<const Correspondence> matches, const RansacParams& ransac, int image_height,
                         double delta_margin)
{
    ransac.validate();
    if (matches.size() < 2)
        throw InsufficientDataError("road model fit needs at least 2 correspondences, got " +
                                    std::to_string(matches.size()));
    for (const auto& m : matches)
        if (!std::isfinite(m.ul) || !std::isfinite(m.ur) || !std::isfinite(m.vl) || !std::isfinite(m.vr))
            throw ParameterError("road model fit: non-finite correspondence");

    std::mt19937_64 rng(ransac.seed);
    std::uniform_int_distribution<std::size_t> pick(0, matches.size() - 1);

    std::size_t best_count = 0;
    double best_score = std::numeric_limits<double>::infinity();
    LineFit best{};
    bool found = false;
    for (int it = 0; it < ransac.iterations; ++it) {
        const std::size_t i = pick(rng);
        std::size_t j = pick(rng);
        if (matches.size() == 2)
            j = 1 - i;
        const double dv = matches[j].vl - matches[i].vl;
        if (i == j || std::abs(dv) < 1e-9)
            continue;
        LineFit line;
        line.alpha1 = (matches[j].disparity() - matches[i].disparity()) / dv;
        line.alpha0 = matches[i].disparity() - line.alpha1 * matches[i].vl;

        std::size_t count = 0;
        double score = 0.0;
        for (const auto& m : matches) {
            const double r = std::abs(m.disparity() - (line.alpha0 + line.alpha1 * m.vl));
            if (r <= ransac.inlier_threshold) {
                ++count;
                score += r;
            }
        }
        if (count > best_count || (count == best_count && score < best_score)) {
            best_count = count;
            best_score = score;
            best = line;
            found = true;
        }
    }

    const auto required = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::ceil(ransac.min_consensus_fraction * static_cast<double>(matches.size()))));
    if (!found || best_count < required)
        throw NoConsensusError("road model fit: consensus set of " + std::to_string(best_count) +
                               " is below the required " + std::to_string(required));

    auto inliers = inliers_of(matches, best, ransac.inlier_threshold);
    LineFit fit = least_squares_line(matches, inliers);
    for (int refine = 0; refine < 5; ++refine) {
        auto next = inliers_of(matches, fit, ransac.inlier_threshold);
        if (next == inliers || next.size() < required)
            break;
        inliers = std::move(next);
        fit = least_squares_line(matches, inliers);
    }

    double sq = 0.0;
    for (auto i : inliers) {
        const double r = matches[i].disparity() - (fit.alpha0 + fit.alpha1 * matches[i].vl);
        sq += r * r;
    }

    RoadModel model;
    model.alpha0 = fit.alpha0;
    model.alpha1 = fit.alpha1;
    model.delta = choose_delta(fit.alpha0, fit.alpha1, image_height, delta_margin);
    model.inlier_count = static_cast<int>(inliers.size());
    model.residual_rms = std::sqrt(sq / static_cast<double>(inliers.size()));
    return model;
}

WarpResult warp_target(const GrayImage& target, const RoadModel& model, unsigned threads)
{
    if (target.empty())
        throw DimensionError("warp_target: empty image");
    if (!std::isfinite(model.alpha0) || !std::isfinite(model.alpha1) || !std::isfinite(model.delta))
        throw ParameterError("warp_target: non-finite road model");
    const int w = target.width();
    const int h = target.height();
    for (int v : {0, h - 1})
        if (model.shift(v) < -1e-9)
            throw ParameterError("warp_target: invalid road model, negative shift " + std::to_string(model.shift(v)) +
                                 " on row " + std::to_string(v));

    WarpResult out{GrayImage(w, h), Mask(w, h)};
    parallel_for(0, h, threads, [&](int v) {
        const double s = std::max(0.0, model.shift(v));
        const auto src = target.row(v);
        auto dst = out.image.row(v);
        auto ok = out.valid.row(v);
        for (int u = 0; u < w; ++u) {
            const double x = u - s;
            if (x < 0.0 || x > w - 1) {
                dst[static_cast<std::size_t>(u)] = 0;
                ok[static_cast<std::size_t>(u)] = 0;
                continue;
            }
            const int x0 = static_cast<int>(std::floor(x));
            const double t = x - x0;
            double value = src[static_cast<std::size_t>(x0)];
            if (t > 0.0 && x0 + 1 < w)
                value = (1.0 - t) * value + t * src[static_cast<std::size_t>(x0 + 1)];
            dst[static_cast<std::size_t>(u)] = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
            ok[static_cast<std::size_t>(u)] = 255;
        }
    });
    return out;
}

std::vector<Correspondence> read_correspondences(std::istream& in)
{
    std::vector<Correspondence> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        if (line.find_first_not_of(" \t\r\n") == std::string::npos)
            continue;
        const auto fields = split_csv_fields(line);
        const std::string where = "correspondences line " + std::to_string(line_no);
        if (fields.size() != 4)
            throw FormatError(where + ": expected ul,vl,ur,vr");
        Correspondence c{parse_double(fields[0], where), parse_double(fields[1], where),
                         parse_double(fields[2], where), parse_double(fields[3], where)};
        if (std::abs(c.vl - c.vr) > 1.0)
            throw FormatError(where + ": rows differ by more than 1 px (images not rectified?)");
        if (!std::isfinite(c.disparity()))
            throw FormatError(where + ": non-finite disparity");
        out.push_back(c);
    }
    return out;
}

std::vector<Correspondence> load_correspondences(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path.string() + "' for reading");
    return read_correspondences(in);
}

void write_correspondences(std::ostream& out, std::span<const Correspondence> matches)
{
    out << "# ul,vl,ur,vr\n" << std::setprecision(10);
    for (const auto& m : matches)
        out << m.ul << ',' << m.vl << ',' << m.ur << ',' << m.vr << '\n';
}

RoadModel read_road_model(std::istream& in)
{
    const auto kv = KeyValueFile::parse(in);
    RoadModel m;
    m.alpha0 = kv.require_double("alpha0");
    m.alpha1 = kv.require_double("alpha1");
    m.delta = kv.require_double("delta");
    m.inlier_count = kv.get_int("inlier_count", 0);
    m.residual_rms = kv.get_double("residual_rms", 0.0);
    return m;
}

RoadModel load_road_model(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path.string() + "' for reading");
    try {
        return read_road_model(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_road_model(std::ostream& out, const RoadModel& model)
{
    KeyValueFile kv;
    kv.set("alpha0", fmt_double(model.alpha0));
    kv.set("alpha1", fmt_double(model.alpha1));
    kv.set("delta", fmt_double(model.delta));
    kv.set("inlier_count", std::to_string(model.inlier_count));
    kv.set("residual_rms", fmt_double(model.residual_rms));
    kv.write(out);
}

}  // namespace roadstereo
