#pragma once

#include <vector>

#include <Eigen/Dense>

#include "stwomble/kernel.hpp"

namespace stw {

// Unique space-time derivatives of a planar field, in the order
// (Ls, d_t, d_t Ls, d_t^2, d_t^2 Ls) with Ls = (d_x, d_y, d_xx, d_xy, d_yy).
struct LStarLayout {
    std::vector<DerivIndex> entries;
    int index(int a, int i, int j) const;  // -1 when absent
    int size() const { return int(entries.size()); }
};

LStarLayout layout(int d = 2);
const LStarLayout& lstar();

// (Z, d_x, d_y, d_t, d_t d_x, d_t d_y): everything a once-differentiable kernel supports.
const std::vector<DerivIndex>& reduced_entries();

constexpr int kLStar = 17;
using Vec17 = Eigen::Matrix<double, kLStar, 1>;
using Mat17 = Eigen::Matrix<double, kLStar, kLStar>;
using NormalMatrix = Eigen::Matrix<double, 8, kLStar>;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

// Cov of (Z, L*Z) at a first point with (Z, L*Z) at a second point, lag = first - second.
// 18x18 for twice-differentiable kernels, 6x6 on the reduced set for Matern32.
struct CrossCovMatrix {
    Eigen::MatrixXd matrix;
    LagPair lag;
};

CrossCovMatrix cross_cov(const LagPair& lag, const KernelParams& p);

// Cov(L*Z(first), L*Z(second)) from a table filled to (4, 4).
Mat17 lstar_block(const DerivTable& t);

// Cov(L*Z(first), Z(second)).
Vec17 lstar_vs_value(const DerivTable& t);

NormalMatrix normal_projection(const Eigen::Vector2d& n_s, double n_t);

struct DivLap {
    Eigen::Vector3d div;
    Eigen::Vector3d lap;
};

// Divergence and Laplacian at temporal orders 0, 1, 2.
DivLap divergence_laplacian(const Vec17& v);

// Eigenvalues (ascending) and determinant of the spatial Hessian at temporal order a.
struct HessianSummary {
    double lambda_min;
    double lambda_max;
    double det;
};
HessianSummary hessian_summary(const Vec17& v, int a = 0);

}  // namespace stw
