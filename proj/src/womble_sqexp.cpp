#include <array>
#include <cmath>

#include "stwomble/quadrature.hpp"
#include "stwomble/womble.hpp"

namespace stw {

namespace {

constexpr int kB = 5, kD = 9;

// Polynomial in (B, x, y); the kernel derivative is this polynomial times exp(-phi^2 B (x^2 + y^2)).
struct Poly3 {
    std::array<double, kB * kD * kD> c{};
    double& at(int b, int i, int j) { return c[(b * kD + i) * kD + j]; }
    double get(int b, int i, int j) const { return c[(b * kD + i) * kD + j]; }
};

Poly3 dx(const Poly3& p, double phi2, bool y) {
    Poly3 r;
    for (int b = 0; b < kB; ++b)
        for (int i = 0; i < kD; ++i)
            for (int j = 0; j < kD; ++j) {
                const double v = p.get(b, i, j);
                if (v == 0) continue;
                const int e = y ? j : i;
                if (e > 0) {
                    if (y) r.at(b, i, j - 1) += e * v;
                    else r.at(b, i - 1, j) += e * v;
                }
                if (y) r.at(b + 1, i, j + 1) -= 2 * phi2 * v;
                else r.at(b + 1, i + 1, j) -= 2 * phi2 * v;
            }
    return r;
}

Poly3 dB(const Poly3& p, double phi2) {
    Poly3 r;
    for (int b = 0; b < kB; ++b)
        for (int i = 0; i < kD; ++i)
            for (int j = 0; j < kD; ++j) {
                const double v = p.get(b, i, j);
                if (v == 0) continue;
                if (b > 0) r.at(b - 1, i, j) += b * v;
                r.at(b, i + 2, j) -= phi2 * v;
                r.at(b, i, j + 2) -= phi2 * v;
            }
    return r;
}

// P[k][entry]: spatial derivative of the k-th B-derivative of sigma^2 B exp(-phi^2 B u)
struct Tables {
    std::array<std::array<Poly3, kLStar>, 3> P;
};

Tables build_tables(double sigma2, double phi2) {
    Tables t;
    Poly3 base[3];
    base[0].at(1, 0, 0) = sigma2;
    base[1] = dB(base[0], phi2);
    base[2] = dB(base[1], phi2);
    const auto& e = lstar().entries;
    for (int k = 0; k < 3; ++k)
        for (int n = 0; n < kLStar; ++n) {
            if (e[n].a < k || (k == 0 && e[n].a == 2)) continue;
            Poly3 q = base[k];
            for (int r = 0; r < e[n].i; ++r) q = dx(q, phi2, false);
            for (int r = 0; r < e[n].j; ++r) q = dx(q, phi2, true);
            t.P[k][n] = q;
        }
    return t;
}

using Poly1 = std::array<double, kD>;

// p(x0 + w ex, y0 + w ey) as a polynomial in w, with B fixed
Poly1 along(const Poly3& p, double b0, double x0, double y0, double ex, double ey) {
    std::array<Poly1, kD> xp{}, yp{};
    xp[0][0] = yp[0][0] = 1;
    for (int k = 1; k < kD; ++k)
        for (int n = 0; n < kD; ++n) {
            xp[k][n] = x0 * xp[k - 1][n] + (n ? ex * xp[k - 1][n - 1] : 0);
            yp[k][n] = y0 * yp[k - 1][n] + (n ? ey * yp[k - 1][n - 1] : 0);
        }
    Poly1 r{};
    for (int i = 0; i < kD; ++i)
        for (int j = 0; i + j < kD; ++j) {
            double c = 0, bp = 1;
            for (int b = 0; b < kB; ++b, bp *= b0) c += p.get(b, i, j) * bp;
            if (c == 0) continue;
            for (int a = 0; a < kD; ++a)
                for (int d = 0; a + d < kD; ++d) r[a + d] += c * xp[i][a] * yp[j][d];
        }
    return r;
}

constexpr int kSeries = 40;

// Integrals I[n] = int_lo^hi w^n exp(-c |z0 + w e|^2) dw by piecewise Taylor expansion of
// the exponent around each piece's midpoint.
struct ExpMoments {
    double c, x0, y0, ex, ey;

    double g(double w) const {
        const double x = x0 + w * ex, y = y0 + w * ey;
        return -c * (x * x + y * y);
    }
    double g1(double w) const { return -2 * c * ((x0 + w * ex) * ex + (y0 + w * ey) * ey); }

    void piece(double lo, double hi, Poly1& I, int depth) const {
        const double m = 0.5 * (lo + hi), l = hi - lo;
        const double alpha = c * (ex * ex + ey * ey);
        const double h = std::abs(g1(m)) * l / 2 + alpha * l * l / 4;
        const double gm = g(m);
        if (gm + h < -700) return;
        if (h > 2 && depth < 60) {
            piece(lo, m, I, depth + 1);
            piece(m, hi, I, depth + 1);
            return;
        }
        std::array<double, kSeries> e{};
        e[0] = 1;
        e[1] = g1(m);
        for (int k = 2; k < kSeries; ++k) e[k] = (g1(m) * e[k - 1] - 2 * alpha * e[k - 2]) / k;
        // S[n] = int v^n exp(g(m + v) - g(m)) dv over [-l/2, l/2]
        std::array<double, kD> S{};
        const double half = l / 2;
        for (int n = 0; n < kD; ++n)
            for (int k = 0; k < kSeries; ++k) {
                const int p = n + k;
                if (p & 1) continue;
                S[n] += e[k] * 2 * std::pow(half, p + 1) / (p + 1);
            }
        // w^n = (m + v)^n
        const double s = std::exp(gm);
        for (int n = 0; n < kD; ++n) {
            double binom = 1, acc = 0;
            for (int r = 0; r <= n; ++r) {
                acc += binom * std::pow(m, n - r) * S[r];
                binom = binom * (n - r) / (r + 1);
            }
            I[n] += s * acc;
        }
    }
};

Eigen::MatrixXd sqexp_cross_at(const TrianglePlane& T, const std::vector<Point>& data, const KernelParams& p,
                             const Tables& tab, int order) {
    const double ps2 = p.phi_s * p.phi_s, pt2 = p.phi_t * p.phi_t;
    const Rule1D& r = gauss_legendre(order);
    const int n = int(data.size());
    Eigen::Matrix<double, kLStar, Eigen::Dynamic> acc = Eigen::MatrixXd::Zero(kLStar, n);
    for (int q = 0; q < order; ++q) {
        const double u = r.x[q], len = 1 - u;
        const Eigen::Vector3d start = T.at(0, u);
        for (int i = 0; i < n; ++i) {
            const double dt = start.z() - data[i].t;
            const double b0 = 1 / (1 + pt2 * dt * dt);
            const double b1 = -2 * pt2 * dt * b0 * b0;
            const double b2 = 0.5 * (-2 * pt2 * b0 * b0 + 8 * pt2 * pt2 * dt * dt * b0 * b0 * b0);
            const double x0 = start.x() - data[i].x, y0 = start.y() - data[i].y;
            ExpMoments em{ps2 * b0, x0, y0, T.e_omega.x(), T.e_omega.y()};
            Poly1 I{};
            em.piece(0, len, I, 0);
            auto integ = [&](const Poly3& P) {
                const Poly1 c = along(P, b0, x0, y0, T.e_omega.x(), T.e_omega.y());
                double s = 0;
                for (int k = 0; k < kD; ++k) s += c[k] * I[k];
                return s;
            };
            const auto& e = lstar().entries;
            for (int k = 0; k < kLStar; ++k) {
                double v;
                if (e[k].a == 0) v = integ(tab.P[0][k]);
                else if (e[k].a == 1) v = b1 * integ(tab.P[1][k]);
                else v = 2 * (b2 * integ(tab.P[1][k]) + 0.5 * b1 * b1 * integ(tab.P[2][k]));
                acc(k, i) += r.w[q] * v;
            }
        }
    }
    return T.norm * normal_projection(T.n_s, T.n_t) * acc;
}

}  // namespace

Eigen::MatrixXd gamma_data_cross_sqexp(const TrianglePlane& T, const std::vector<Point>& data, const KernelParams& p,
                                       const QuadratureSpec& q) {
    if (p.family != Family::SqExp || p.separable)
        throw Unsupported("closed-form inner integral needs the non-separable squared-exponential kernel");
    TrianglePlane S = T;
    // the inner integral runs along e_omega and needs t constant on it
    if (std::abs(S.e_omega.z()) > 1e-12 * S.e_omega.norm()) {
        if (std::abs(S.e_upsilon.z()) > 1e-12 * S.e_upsilon.norm())
            throw Unsupported("closed-form inner integral needs a triangle edge at constant time");
        std::swap(S.e_omega, S.e_upsilon);
    }
    const Tables tab = build_tables(p.sigma2, p.phi_s * p.phi_s);
    auto eval = [&](int order) { return sqexp_cross_at(S, data, p, tab, order); };
    Eigen::MatrixXd cur = eval(q.order);
    if (q.max_refine == 0) return cur;
    int order = q.order;
    for (int r = 0; r < q.max_refine; ++r) {
        order *= 2;
        Eigen::MatrixXd next = eval(order);
        if (next.size() == 0 || (next - cur).cwiseAbs().maxCoeff() <= q.tol * next.cwiseAbs().maxCoeff() + 1e-14 * p.sigma2 * T.norm)
            return next;
        cur = next;
    }
    throw QuadratureNonConvergence("closed-form data cross-covariance did not reach tolerance by order " +
                                   std::to_string(order));
}

}  // namespace stw
