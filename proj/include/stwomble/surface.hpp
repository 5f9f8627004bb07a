#pragma once

#include <vector>

#include <Eigen/Dense>

#include "stwomble/errors.hpp"

namespace stw {

struct PolyCurveAtTime {
    double t = 0;
    std::vector<Eigen::Vector2d> vertices;
    bool closed = false;
};

double arc_length(const PolyCurveAtTime& c);
double signed_area(const PolyCurveAtTime& c);  // > 0 for counter-clockwise

// Points of the plane v0 + w * e_omega + u * e_upsilon, w, u >= 0, w + u <= 1, in (x, y, t).
struct TrianglePlane {
    Eigen::Vector3d v0, e_omega, e_upsilon;
    Eigen::Vector2d n_s;
    double n_t = 0;
    double norm = 0;  // |e_upsilon x e_omega|
    double area = 0;
    int i = 0, j = 0, level = 0, k = 1;  // omega cell, time interval, level within interval, half
    int cell = 0;                        // index into TriangulatedSurface::cell_mid

    Eigen::Vector3d at(double w, double u) const { return v0 + w * e_omega + u * e_upsilon; }
    Eigen::Vector3d normal_raw() const { return e_upsilon.cross(e_omega); }
};

struct TriangulatedSurface {
    std::vector<TrianglePlane> triangles;
    std::vector<Eigen::Vector3d> cell_mid;  // bilinear midpoint of each parameter cell
    std::vector<double> times;
    int n_omega = 0;    // vertices along each curve, including the wrap vertex for closed curves
    int n_upsilon = 0;  // levels per time interval, both ends included
    double partition_norm = 0;

    int n_intervals() const { return int(times.size()) - 1; }
    double total_area() const;
};

// Curves are corresponded by vertex index. Closed curves are traversed so normals point
// out of the enclosed region; open curves keep their direction and get the left normal.
TriangulatedSurface triangulate(std::vector<PolyCurveAtTime> curves, int n_upsilon);

// Field values(ix, iy) at (xs[ix], ys[iy]) for one time slice.
struct GridField {
    std::vector<double> xs, ys;
    Eigen::MatrixXd values;
    double t = 0;
};

// Marching squares. Closed curves come out counter-clockwise, open curves with the
// higher values on their left.
std::vector<PolyCurveAtTime> level_curves(const GridField& field, double level);

PolyCurveAtTime resample_curve(const PolyCurveAtTime& c, int n);

// Shared start and direction, then resampling to n vertices (0 = largest input count).
std::vector<PolyCurveAtTime> align_curves(std::vector<PolyCurveAtTime> curves, int n = 0);

// The closed curve with the smallest area that contains p; EmptyContour when none does.
PolyCurveAtTime closed_curve_around(const std::vector<PolyCurveAtTime>& curves, const Eigen::Vector2d& p);
// The open curve passing closest to p; EmptyContour when there is none.
PolyCurveAtTime open_curve_near(const std::vector<PolyCurveAtTime>& curves, const Eigen::Vector2d& p);

bool contains(const PolyCurveAtTime& c, const Eigen::Vector2d& p);

}  // namespace stw
