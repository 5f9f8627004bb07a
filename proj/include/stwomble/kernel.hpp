#pragma once

#include <array>
#include <string>

#include <Eigen/Dense>

#include "stwomble/errors.hpp"

namespace stw {

enum class Family { Matern32, Matern52, SqExp };

// Temporal factor of a separable kernel: the same family evaluated in phi_t*|dt|,
// or the Cauchy-type 1/(phi_t^2 dt^2 + 1).
enum class TemporalKind { Matched, Inverse };

struct KernelParams {
    Family family = Family::Matern52;
    bool separable = false;
    TemporalKind temporal = TemporalKind::Matched;
    double sigma2 = 1.0;
    double phi_s = 1.0;
    double phi_t = 1.0;

    void validate() const;
};

// Lag between a first point and a second point: first minus second.
struct LagPair {
    Eigen::Vector2d ds = Eigen::Vector2d::Zero();
    double dt = 0.0;
};

// d^a/dt^a d^i/dx^i d^j/dy^j
struct DerivIndex {
    int a = 0;
    int i = 0;
    int j = 0;
};

// Highest kernel derivative order available along each axis (space, time).
int smoothness_limit(Family f);

// True when every kernel derivative with temporal order <= a and total spatial
// order <= b exists at the origin.
bool admissible(const KernelParams& p, int a, int b);

double cov(const LagPair& lag, const KernelParams& p);
double cov_deriv(const LagPair& lag, DerivIndex idx, const KernelParams& p);

// All kernel derivatives d_t^a d_x^i d_y^j K at one lag, a <= 4, i + j <= 4.
struct DerivTable {
    std::array<double, 125> v{};
    double operator()(int a, int i, int j) const { return v[a * 25 + i * 5 + j]; }
    double& at(int a, int i, int j) { return v[a * 25 + i * 5 + j]; }
};

// Fills entries with a <= max_t and i + j <= max_s; the rest stay zero.
DerivTable deriv_table(const LagPair& lag, const KernelParams& p, int max_t, int max_s);

// Cov(D_u^{r1-j1} d_t^{j1} Z(first), D_u^{r2-j2} d_t^{j2} Z(second)) where D_u is the
// directional derivative along the unit vector u and lag = first - second.
double directional_cov(const Eigen::Vector2d& u, int r1, int j1, int r2, int j2,
                       const LagPair& lag, const KernelParams& p);

std::string family_name(Family f);
Family parse_family(const std::string& s);

}  // namespace stw
