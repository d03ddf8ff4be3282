#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "roadstereo/image.hpp"
#include "roadstereo/transform.hpp"

namespace roadstereo {

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

/// Point in the left-camera frame (x right, y down, z forward), metres,
/// tagged with the pixel it was triangulated from.
struct CloudPoint {
    Point3 p;
    int u = 0;
    int v = 0;
};

struct PointCloud {
    std::vector<CloudPoint> points;

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }
    std::vector<Point3> positions() const;
    /// Points whose source pixel lies inside (inside = true) or outside `rect`.
    PointCloud select(const PixelRect& rect, bool inside) const;
};

/// n0 x + n1 y + n2 z + n3 = 0 with a unit normal and n1 >= 0.
struct Plane {
    double n0 = 0.0;
    double n1 = 1.0;
    double n2 = 0.0;
    double n3 = 0.0;

    double signed_distance(const Point3& p) const noexcept { return n0 * p.x + n1 * p.y + n2 * p.z + n3; }
};

/// z = f B / d, x = (u - u0) z / f, y = (v - v0) z / f for every valid pixel
/// with d >= d_min.
PointCloud triangulate(const DisparityMap& map, const CameraRig& rig, double d_min = 1.0, unsigned threads = 0);

/// Total-least-squares plane: normal is the eigenvector of the smallest
/// eigenvalue of the centred scatter matrix.
Plane fit_plane(std::span<const Point3> points);
Plane fit_plane(const PointCloud& cloud);
/// Plane through the four corner points of a selected region.
Plane fit_plane_corners(const Point3& s1, const Point3& s2, const Point3& s3, const Point3& s4);

std::vector<double> point_plane_distances(std::span<const Point3> points, const Plane& plane);
std::vector<double> point_plane_distances(const PointCloud& cloud, const Plane& plane);

struct DistanceStats {
    std::size_t count = 0;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double rms = 0.0;
};

DistanceStats summarize(std::span<const double> values);

/// Millions of disparity evaluations per second.
double mde_per_second(int width, int height, int d_max, double runtime_s);

/// ASCII PLY with float x, y, z vertex properties at 6 decimals.
void write_ply(std::ostream& out, const PointCloud& cloud);
void save_ply(const std::filesystem::path& path, const PointCloud& cloud);

}  // namespace roadstereo
