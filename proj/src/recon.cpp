#include "roadstereo/recon.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "roadstereo/parallel.hpp"

namespace roadstereo {

std::vector<Point3> PointCloud::positions() const
{
    std::vector<Point3> out;
    out.reserve(points.size());
    for (const auto& cp : points)
        out.push_back(cp.p);
    return out;
}

PointCloud PointCloud::select(const PixelRect& rect, bool inside) const
{
    PointCloud out;
    for (const auto& cp : points)
        if (rect.contains(cp.u, cp.v) == inside)
            out.points.push_back(cp);
    return out;
}

PointCloud triangulate(const DisparityMap& map, const CameraRig& rig, double d_min, unsigned threads)
{
    if (!(d_min > 0.0))
        throw ParameterError("triangulate: d_min must be positive");
    rig.validate();
    std::vector<std::vector<CloudPoint>> rows(static_cast<std::size_t>(map.height()));
    const double fb = rig.f * rig.baseline;
    parallel_for(0, map.height(), threads, [&](int v) {
        auto& row = rows[static_cast<std::size_t>(v)];
        for (int u = 0; u < map.width(); ++u) {
            const double d = map(u, v);
            if (!is_valid_disparity(d) || d < d_min)
                continue;
            const double z = fb / d;
            row.push_back({{(u - rig.u0) * z / rig.f, (v - rig.v0) * z / rig.f, z}, u, v});
        }
    });
    PointCloud cloud;
    for (auto& row : rows)
        cloud.points.insert(cloud.points.end(), row.begin(), row.end());
    return cloud;
}

Plane fit_plane(std::span<const Point3> points)
{
    if (points.size() < 3)
        throw FitError("plane fit needs at least 3 points");
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& p : points)
        mean += Eigen::Vector3d(p.x, p.y, p.z);
    mean /= static_cast<double>(points.size());
    Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
    for (const auto& p : points) {
        const Eigen::Vector3d q = Eigen::Vector3d(p.x, p.y, p.z) - mean;
        scatter += q * q.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
    if (eig.info() != Eigen::Success)
        throw FitError("plane fit: eigen decomposition failed");
    const Eigen::Vector3d ev = eig.eigenvalues();  // ascending
    if (ev(1) <= 1e-12 * std::max(1.0, ev(2)))
        throw FitError("plane fit: points are collinear or coincident");
    Eigen::Vector3d n = eig.eigenvectors().col(0).normalized();
    if (n(1) < 0.0 || (n(1) == 0.0 && (n(2) < 0.0 || (n(2) == 0.0 && n(0) < 0.0))))
        n = -n;
    return {n(0), n(1), n(2), -n.dot(mean)};
}

Plane fit_plane(const PointCloud& cloud) { return fit_plane(cloud.positions()); }

Plane fit_plane_corners(const Point3& s1, const Point3& s2, const Point3& s3, const Point3& s4)
{
    const Point3 corners[] = {s1, s2, s3, s4};
    return fit_plane(corners);
}

std::vector<double> point_plane_distances(std::span<const Point3> points, const Plane& plane)
{
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points)
        out.push_back(plane.signed_distance(p));
    return out;
}

std::vector<double> point_plane_distances(const PointCloud& cloud, const Plane& plane)
{
    return point_plane_distances(cloud.positions(), plane);
}

DistanceStats summarize(std::span<const double> values)
{
    DistanceStats s;
    s.count = values.size();
    if (values.empty())
        return s;
    const auto [lo, hi] = std::ranges::minmax_element(values);
    s.min = *lo;
    s.max = *hi;
    double sum = 0.0;
    double sq = 0.0;
    for (double v : values) {
        sum += v;
        sq += v * v;
    }
    s.mean = sum / static_cast<double>(values.size());
    s.rms = std::sqrt(sq / static_cast<double>(values.size()));
    return s;
}

double mde_per_second(int width, int height, int d_max, double runtime_s)
{
    if (width <= 0 || height <= 0 || d_max <= 0)
        throw ParameterError("mde_per_second: dimensions and d_max must be positive");
    if (!(runtime_s > 0.0))
        throw ParameterError("mde_per_second: runtime must be positive");
    return static_cast<double>(width) * static_cast<double>(height) * static_cast<double>(d_max) * 1e-6 / runtime_s;
}

void write_ply(std::ostream& out, const PointCloud& cloud)
{
    out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
        << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
    char buf[96];
    for (const auto& cp : cloud.points) {
        std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f\n", cp.p.x, cp.p.y, cp.p.z);
        out << buf;
    }
    if (!out)
        throw IoError("PLY: write failed");
}

void save_ply(const std::filesystem::path& path, const PointCloud& cloud)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open '" + path.string() + "' for writing");
    write_ply(out, cloud);
}

}  // namespace roadstereo
