#include "stwomble/lstar.hpp"

#include <cmath>

namespace stw {

namespace {

int order(const DerivIndex& d) { return d.a + d.i + d.j; }

}  // namespace

int LStarLayout::index(int a, int i, int j) const {
    for (int k = 0; k < size(); ++k)
        if (entries[k].a == a && entries[k].i == i && entries[k].j == j) return k;
    return -1;
}

LStarLayout layout(int d) {
    if (d != 2) throw Unsupported("only planar domains are supported (d = 2)");
    const DerivIndex spatial[5] = {{0, 1, 0}, {0, 0, 1}, {0, 2, 0}, {0, 1, 1}, {0, 0, 2}};
    LStarLayout l;
    for (int a = 0; a <= 2; ++a) {
        if (a > 0) l.entries.push_back({a, 0, 0});
        for (auto s : spatial) l.entries.push_back({a, s.i, s.j});
    }
    return l;
}

const LStarLayout& lstar() {
    static const LStarLayout l = layout(2);
    return l;
}

const std::vector<DerivIndex>& reduced_entries() {
    static const std::vector<DerivIndex> e = {{0, 0, 0}, {0, 1, 0}, {0, 0, 1},
                                              {1, 0, 0}, {1, 1, 0}, {1, 0, 1}};
    return e;
}

CrossCovMatrix cross_cov(const LagPair& lag, const KernelParams& p) {
    std::vector<DerivIndex> e;
    DerivTable t;
    if (p.family == Family::Matern32) {
        e = reduced_entries();
        t = deriv_table(lag, p, 2, 2);
    } else {
        e.push_back({0, 0, 0});
        for (auto d : lstar().entries) e.push_back(d);
        t = deriv_table(lag, p, 4, 4);
    }
    const int n = int(e.size());
    CrossCovMatrix out{Eigen::MatrixXd(n, n), lag};
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const double v = t(e[r].a + e[c].a, e[r].i + e[c].i, e[r].j + e[c].j);
            out.matrix(r, c) = (order(e[c]) & 1) ? -v : v;
        }
    return out;
}

Mat17 lstar_block(const DerivTable& t) {
    const auto& e = lstar().entries;
    Mat17 m;
    for (int r = 0; r < kLStar; ++r)
        for (int c = 0; c < kLStar; ++c) {
            const double v = t(e[r].a + e[c].a, e[r].i + e[c].i, e[r].j + e[c].j);
            m(r, c) = (order(e[c]) & 1) ? -v : v;
        }
    return m;
}

Vec17 lstar_vs_value(const DerivTable& t) {
    const auto& e = lstar().entries;
    Vec17 v;
    for (int r = 0; r < kLStar; ++r) v[r] = t(e[r].a, e[r].i, e[r].j);
    return v;
}

NormalMatrix normal_projection(const Eigen::Vector2d& n_s, double n_t) {
    const double len = std::sqrt(n_s.squaredNorm() + n_t * n_t);
    if (!std::isfinite(len) || std::abs(len - 1.0) > 1e-9) throw NonUnitNormal("normal has length " + std::to_string(len));
    const double nx = n_s.x(), ny = n_s.y();
    NormalMatrix N = NormalMatrix::Zero();
    double w = 1.0;
    for (int a = 0; a <= 2; ++a) {
        // position of the first spatial entry at this temporal order, and its gradient row
        const int s0 = a == 0 ? 0 : (a == 1 ? 6 : 12);
        const int row = 3 * a;
        if (a > 0) N(row - 1, s0 - 1) = w;
        N(row, s0) = w * nx;
        N(row, s0 + 1) = w * ny;
        N(row + 1, s0 + 2) = w * nx * nx;
        N(row + 1, s0 + 3) = w * 2 * nx * ny;
        N(row + 1, s0 + 4) = w * ny * ny;
        w *= n_t;
    }
    return N;
}

DivLap divergence_laplacian(const Vec17& v) {
    DivLap out;
    const int s0[3] = {0, 6, 12};
    for (int a = 0; a < 3; ++a) {
        out.div[a] = v[s0[a]] + v[s0[a] + 1];
        out.lap[a] = v[s0[a] + 2] + v[s0[a] + 4];
    }
    return out;
}

HessianSummary hessian_summary(const Vec17& v, int a) {
    const int s0[3] = {0, 6, 12};
    const double hxx = v[s0[a] + 2], hxy = v[s0[a] + 3], hyy = v[s0[a] + 4];
    const double mean = 0.5 * (hxx + hyy);
    const double rad = std::hypot(0.5 * (hxx - hyy), hxy);
    return {mean - rad, mean + rad, hxx * hyy - hxy * hxy};
}

}  // namespace stw
