#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "stwomble/gp.hpp"
#include "stwomble/lstar.hpp"
#include "stwomble/predict.hpp"
#include "stwomble/surface.hpp"

namespace stw {

struct QuadratureSpec {
    int order = 12;      // Gauss-Legendre nodes per axis
    double tol = 1e-6;   // relative agreement required between order and 2*order
    int max_refine = 1;  // doublings allowed; 0 evaluates once without a check
    bool sqexp_fast = false;

    void validate() const;
};

// Cov(L*Z(first), L*Z(second)) as a function of lag = first - second.
using LStarCov = std::function<Mat17(const LagPair&)>;
LStarCov kernel_lstar_cov(const KernelParams& p);

// Cov(Gamma(T), Z(s_i)) for every data point: 8 x N.
Eigen::MatrixXd gamma_data_cross(const TrianglePlane& T, const std::vector<Point>& data, const KernelParams& p,
                                 const QuadratureSpec& q);

// Same through the closed-form inner integral; squared-exponential non-separable kernels only.
Eigen::MatrixXd gamma_data_cross_sqexp(const TrianglePlane& T, const std::vector<Point>& data,
                                       const KernelParams& p, const QuadratureSpec& q);

// Cov(Gamma(a), Gamma(b)). a == b uses the overlap-weighted 2-D reduction over the
// difference hexagon; distinct triangles use a 4-D product rule at half the order.
Mat8 gamma_auto_cov(const TrianglePlane& a, const TrianglePlane& b, const LStarCov& c, const QuadratureSpec& q,
                    bool same);
Mat8 gamma_auto_cov(const TrianglePlane& a, const TrianglePlane& b, const KernelParams& p, const QuadratureSpec& q,
                    bool same);

// 4-D tensor product reference with `order` nodes per axis on each triangle.
Mat8 gamma_auto_cov_bruteforce(const TrianglePlane& a, const TrianglePlane& b, const LStarCov& c, int order);

enum class GammaScope { Triangle, Interval };

// Per-unit cross covariance with the data (8U x N) and joint covariance (8U x 8U), where
// units are triangles or whole time intervals of the surface.
struct GammaModel {
    GammaScope scope = GammaScope::Triangle;
    Eigen::MatrixXd G;
    Eigen::MatrixXd K;
};

GammaModel gamma_model(const TriangulatedSurface& s, const std::vector<Point>& data, const KernelParams& p,
                       const QuadratureSpec& q, GammaScope scope, int threads = 1);

// values[(d * n_units + u) * 8 + r]
struct GammaDraws {
    GammaScope scope = GammaScope::Triangle;
    int n_draws = 0;
    int n_units = 0;
    int n_intervals = 0;
    std::vector<int> unit_interval;
    std::vector<double> unit_area;
    std::vector<double> values;

    Vec8 unit(int d, int u) const;
    Vec8 interval(int d, int j) const;
    Vec8 overall(int d) const;
    double interval_area(int j) const;
    double total_area() const;
};

GammaDraws sample_gamma(const std::vector<PosteriorDraw>& draws, const Dataset& data, const TriangulatedSurface& s,
                        const KernelParams& kernel, const QuadratureSpec& q, GammaScope scope, std::uint64_t seed,
                        int threads = 1);

// Midpoint sums: dm holds one L*Z vector per parameter cell of s, in cell order.
GammaDraws riemann_gamma(const DerivDraws& dm, const TriangulatedSurface& s);

struct MeasureRow {
    std::string scope;  // "overall", "interval", "triangle"
    int index = 0;
    std::array<HpdSummary, 8> total;
    std::array<HpdSummary, 8> average;
};

std::vector<MeasureRow> aggregate(const GammaDraws& g, double level = 0.95, bool include_units = false);

const std::array<std::string, 8>& measure_names();

// Divergence-theorem harness on an axis-aligned box in (x, y, t).
struct AnalyticField {
    // d_t^a d_x^i d_y^j Z at (x, y, t), total order <= 3
    std::function<double(int a, int i, int j, double x, double y, double t)> d;
};

struct FluxResult {
    double surface, volume, rel_err;
};

struct FluxCheck {
    FluxResult first;   // closed-surface integral of n'grad Z against the volume integral of its divergence
    FluxResult second;  // n'(Hess Z)n against the divergence of (2x_i - lo_i - hi_i)/(hi_i - lo_i) * H_ii
};

FluxCheck flux_identity_check(const AnalyticField& f, const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                              int order = 16);

}  // namespace stw
