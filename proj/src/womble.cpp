#include "stwomble/womble.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "stwomble/parallel.hpp"
#include "stwomble/quadrature.hpp"

namespace stw {

namespace {

LagPair lag_of(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    LagPair l;
    l.ds = {a.x() - b.x(), a.y() - b.y()};
    l.dt = a.z() - b.z();
    return l;
}

LagPair lag_of(const Eigen::Vector3d& a, const Point& b) {
    LagPair l;
    l.ds = {a.x() - b.x, a.y() - b.y};
    l.dt = a.z() - b.t;
    return l;
}

NormalMatrix normal_of(const TrianglePlane& T) { return normal_projection(T.n_s, T.n_t); }

bool converged(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol, double floor) {
    if (a.size() == 0) return true;
    return (a - b).cwiseAbs().maxCoeff() <= tol * b.cwiseAbs().maxCoeff() + floor;
}

// Runs eval(order), doubling while two successive orders disagree.
template <class Eval>
auto refine(const QuadratureSpec& q, double floor, const char* what, Eval eval) {
    auto cur = eval(q.order);
    if (q.max_refine == 0) return cur;
    int order = q.order;
    for (int r = 0; r < q.max_refine; ++r) {
        order *= 2;
        auto next = eval(order);
        if (converged(next, cur, q.tol, floor)) return next;
        cur = next;
    }
    throw QuadratureNonConvergence(std::string(what) + " did not reach tolerance by order " + std::to_string(order));
}

Eigen::MatrixXd data_cross_at(const TrianglePlane& T, const std::vector<Point>& data, const KernelParams& p,
                              int order) {
    const NormalMatrix N = normal_of(T);
    const int n = int(data.size());
    Eigen::Matrix<double, kLStar, Eigen::Dynamic> acc = Eigen::MatrixXd::Zero(kLStar, n);
    for (const auto& node : triangle_rule(order)) {
        const Eigen::Vector3d x = T.at(node.omega, node.upsilon);
        for (int i = 0; i < n; ++i) acc.col(i) += node.w * lstar_vs_value(deriv_table(lag_of(x, data[i]), p, 2, 2));
    }
    return T.norm * N * acc;
}

const Eigen::Vector2d kHex[6] = {{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}};

// Panels on [0, 1] for the angular variable of one hexagon sector. The spatial lag along the
// sector's rays is xi * (a + eta * b); when it nearly vanishes at some eta the radial kink of
// the kernel shows up there, so panels are graded geometrically towards that point.
std::vector<std::pair<double, double>> sector_panels(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    std::vector<std::pair<double, double>> out;
    const double bb = b.squaredNorm();
    const double scale = std::max(a.norm(), (a + b).norm());
    if (bb == 0 || scale == 0) return {{0.0, 1.0}};
    const double e0 = std::clamp(-a.dot(b) / bb, 0.0, 1.0);
    const double gap = (a + e0 * b).norm() / std::sqrt(bb);
    if (gap > 0.25) return {{0.0, 1.0}};
    std::vector<double> cuts = {0.0, e0, 1.0};
    for (double h = std::max(gap, 1e-12); h < 1; h *= 4) {
        if (e0 - h > 0) cuts.push_back(e0 - h);
        if (e0 + h < 1) cuts.push_back(e0 + h);
    }
    std::sort(cuts.begin(), cuts.end());
    for (size_t i = 0; i + 1 < cuts.size(); ++i)
        if (cuts[i + 1] > cuts[i]) out.push_back({cuts[i], cuts[i + 1]});
    return out;
}

Mat8 self_cov_at(const TrianglePlane& T, const LStarCov& c, int order) {
    // difference x - x' over the hexagon, weight |T n (T + d)| = (1 - xi)^2 / 2 on each
    // origin-apex sub-triangle; opposite sub-triangles give transposed contributions
    const Rule1D& g = gauss_legendre(order);
    Eigen::Matrix2d P;
    P << T.e_omega.head<2>(), T.e_upsilon.head<2>();
    Mat17 M = Mat17::Zero();
    for (int k = 0; k < 3; ++k)
        for (const auto& [lo, hi] : sector_panels(P * kHex[k], P * (kHex[k + 1] - kHex[k])))
            for (int a = 0; a < order; ++a)
                for (int b = 0; b < order; ++b) {
                    const double xi = g.x[a], eta = lo + (hi - lo) * g.x[b];
                    const Eigen::Vector2d d = xi * ((1 - eta) * kHex[k] + eta * kHex[k + 1]);
                    const double w = g.w[a] * g.w[b] * (hi - lo) * xi * 0.5 * (1 - xi) * (1 - xi);
                    M += w * c(lag_of(d.x() * T.e_omega + d.y() * T.e_upsilon, Eigen::Vector3d::Zero()));
                }
    const NormalMatrix N = normal_of(T);
    return T.norm * T.norm * N * (M + M.transpose()) * N.transpose();
}

Mat8 cross_cov_at(const TrianglePlane& a, const TrianglePlane& b, const LStarCov& c, int order) {
    const auto& rule = triangle_rule(order);
    Mat17 M = Mat17::Zero();
    for (const auto& na : rule) {
        const Eigen::Vector3d xa = a.at(na.omega, na.upsilon);
        for (const auto& nb : rule) M += na.w * nb.w * c(lag_of(xa, b.at(nb.omega, nb.upsilon)));
    }
    return a.norm * b.norm * normal_of(a) * M * normal_of(b).transpose();
}

}  // namespace

void QuadratureSpec::validate() const {
    if (order < 4) throw ConfigError("quadrature order must be >= 4");
    if (!(tol > 0)) throw ConfigError("quadrature tolerance must be positive");
    if (max_refine < 0) throw ConfigError("max_refine must be >= 0");
}

LStarCov kernel_lstar_cov(const KernelParams& p) {
    if (!admissible(p, 4, 4))
        throw InadmissibleDerivative(family_name(p.family) + " does not support curvature-level wombling");
    return [p](const LagPair& l) { return lstar_block(deriv_table(l, p, 4, 4)); };
}

Eigen::MatrixXd gamma_data_cross(const TrianglePlane& T, const std::vector<Point>& data, const KernelParams& p,
                                 const QuadratureSpec& q) {
    if (!admissible(p, 4, 4))
        throw InadmissibleDerivative(family_name(p.family) + " does not support curvature-level wombling");
    if (q.sqexp_fast && p.family == Family::SqExp && !p.separable) return gamma_data_cross_sqexp(T, data, p, q);
    return refine(q, 1e-14 * p.sigma2 * T.norm, "data cross-covariance",
                  [&](int order) { return data_cross_at(T, data, p, order); });
}

Mat8 gamma_auto_cov(const TrianglePlane& a, const TrianglePlane& b, const LStarCov& c, const QuadratureSpec& q,
                    bool same) {
    if (same) {
        const double floor = 1e-14 * a.norm * a.norm * c(LagPair{}).cwiseAbs().maxCoeff();
        return refine(q, floor, "triangle auto-covariance", [&](int order) { return self_cov_at(a, c, order); });
    }
    return cross_cov_at(a, b, c, std::max(q.order / 2, 2));
}

Mat8 gamma_auto_cov(const TrianglePlane& a, const TrianglePlane& b, const KernelParams& p, const QuadratureSpec& q,
                    bool same) {
    return gamma_auto_cov(a, b, kernel_lstar_cov(p), q, same);
}

Mat8 gamma_auto_cov_bruteforce(const TrianglePlane& a, const TrianglePlane& b, const LStarCov& c, int order) {
    return cross_cov_at(a, b, c, order);
}

GammaModel gamma_model(const TriangulatedSurface& s, const std::vector<Point>& data, const KernelParams& p,
                       const QuadratureSpec& q, GammaScope scope, int threads) {
    q.validate();
    const LStarCov c = kernel_lstar_cov(p);
    const int T = int(s.triangles.size()), N = int(data.size());
    const int U = scope == GammaScope::Triangle ? T : s.n_intervals();
    auto unit = [&](int t) { return scope == GammaScope::Triangle ? t : s.triangles[t].j; };

    std::vector<Eigen::MatrixXd> G(T);
    parallel_for(T, threads, [&](int t) { G[t] = gamma_data_cross(s.triangles[t], data, p, q); });

    // row t holds the blocks (t, u) for u >= t
    std::vector<std::vector<Mat8>> blocks(T);
    parallel_for(T, threads, [&](int t) {
        blocks[t].resize(T - t);
        for (int u = t; u < T; ++u) blocks[t][u - t] = gamma_auto_cov(s.triangles[t], s.triangles[u], c, q, u == t);
    });

    GammaModel m;
    m.scope = scope;
    m.G = Eigen::MatrixXd::Zero(8 * U, N);
    m.K = Eigen::MatrixXd::Zero(8 * U, 8 * U);
    for (int t = 0; t < T; ++t) {
        m.G.block(8 * unit(t), 0, 8, N) += G[t];
        for (int u = t; u < T; ++u) {
            const Mat8& B = blocks[t][u - t];
            m.K.block<8, 8>(8 * unit(t), 8 * unit(u)) += B;
            if (u != t) m.K.block<8, 8>(8 * unit(u), 8 * unit(t)) += B.transpose();
        }
    }
    m.K = 0.5 * (m.K + m.K.transpose());
    return m;
}

Vec8 GammaDraws::unit(int d, int u) const { return Eigen::Map<const Vec8>(&values[(size_t(d) * n_units + u) * 8]); }

Vec8 GammaDraws::interval(int d, int j) const {
    Vec8 v = Vec8::Zero();
    for (int u = 0; u < n_units; ++u)
        if (unit_interval[u] == j) v += unit(d, u);
    return v;
}

Vec8 GammaDraws::overall(int d) const {
    Vec8 v = Vec8::Zero();
    for (int u = 0; u < n_units; ++u) v += unit(d, u);
    return v;
}

double GammaDraws::interval_area(int j) const {
    double a = 0;
    for (int u = 0; u < n_units; ++u)
        if (unit_interval[u] == j) a += unit_area[u];
    return a;
}

double GammaDraws::total_area() const {
    double a = 0;
    for (double x : unit_area) a += x;
    return a;
}

namespace {

GammaDraws empty_draws(const TriangulatedSurface& s, GammaScope scope, int n_draws) {
    GammaDraws g;
    g.scope = scope;
    g.n_draws = n_draws;
    g.n_intervals = s.n_intervals();
    if (scope == GammaScope::Triangle) {
        g.n_units = int(s.triangles.size());
        for (const auto& t : s.triangles) {
            g.unit_interval.push_back(t.j);
            g.unit_area.push_back(t.area);
        }
    } else {
        g.n_units = g.n_intervals;
        g.unit_area.assign(g.n_units, 0.0);
        for (int j = 0; j < g.n_units; ++j) g.unit_interval.push_back(j);
        for (const auto& t : s.triangles) g.unit_area[t.j] += t.area;
    }
    g.values.assign(size_t(n_draws) * g.n_units * 8, 0.0);
    return g;
}

}  // namespace

GammaDraws sample_gamma(const std::vector<PosteriorDraw>& draws, const Dataset& data, const TriangulatedSurface& s,
                        const KernelParams& kernel, const QuadratureSpec& q, GammaScope scope, std::uint64_t seed,
                        int threads) {
    GammaDraws out = empty_draws(s, scope, int(draws.size()));
    const int n = 8 * out.n_units;
    // rejected proposals repeat theta, so the conditional law is reused across such draws
    KernelParams last;
    bool have = false;
    GammaModel m;
    Eigen::MatrixXd W, cov;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    Eigen::VectorXd sd;
    std::optional<Factor> K;
    for (int d = 0; d < out.n_draws; ++d) {
        const KernelParams p = with_theta(kernel, draws[d]);
        const bool same = have && p.sigma2 == last.sigma2 && p.phi_s == last.phi_s && p.phi_t == last.phi_t;
        if (!same) {
            m = gamma_model(s, data.coords, p, q, scope, threads);
            cov = m.K;
            if (data.n() > 0) {
                K.emplace(jittered_cholesky(data_cov(data.coords, p)));
                W = K->llt.matrixL().solve(m.G.transpose());
                cov -= W.transpose() * W;
            }
            cov = 0.5 * (cov + cov.transpose());
            es.compute(cov);
            sd = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
            last = p;
            have = true;
        }
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
        if (data.n() > 0) mean = W.transpose() * K->llt.matrixL().solve(draws[d].z);
        Rng rng(seed ^ (0xD1B54A32D192ED03ULL * (std::uint64_t(d) + 1)));
        std::normal_distribution<double> N01;
        Eigen::VectorXd e(n);
        for (int k = 0; k < n; ++k) e[k] = N01(rng);
        const Eigen::VectorXd v = mean + es.eigenvectors() * sd.cwiseProduct(e);
        std::copy(v.data(), v.data() + n, out.values.begin() + size_t(d) * n);
    }
    return out;
}

GammaDraws riemann_gamma(const DerivDraws& dm, const TriangulatedSurface& s) {
    if (dm.n_points != int(s.cell_mid.size()))
        throw MidpointMismatch("derivative draws cover " + std::to_string(dm.n_points) + " points, surface has " +
                               std::to_string(s.cell_mid.size()) + " cells");
    GammaDraws out = empty_draws(s, GammaScope::Triangle, dm.n_draws);
    for (int t = 0; t < out.n_units; ++t) {
        const auto& T = s.triangles[t];
        const NormalMatrix N = normal_of(T);
        for (int d = 0; d < dm.n_draws; ++d) {
            const Vec8 v = T.area * N * dm.vec(d, T.cell);
            std::copy(v.data(), v.data() + 8, out.values.begin() + (size_t(d) * out.n_units + t) * 8);
        }
    }
    return out;
}

const std::array<std::string, 8>& measure_names() {
    static const std::array<std::string, 8> n = {"ns_grad",        "ns_curv",        "nt_dt",
                                                 "nt_dt_ns_grad",  "nt_dt_ns_curv",  "nt2_dt2",
                                                 "nt2_dt2_ns_grad", "nt2_dt2_ns_curv"};
    return n;
}

std::vector<MeasureRow> aggregate(const GammaDraws& g, double level, bool include_units) {
    std::vector<MeasureRow> rows;
    auto add = [&](const std::string& scope, int idx, auto get, double area) {
        MeasureRow r;
        r.scope = scope;
        r.index = idx;
        for (int k = 0; k < 8; ++k) {
            std::vector<double> tot(g.n_draws), avg(g.n_draws);
            for (int d = 0; d < g.n_draws; ++d) {
                tot[d] = get(d)[k];
                avg[d] = tot[d] / area;
            }
            r.total[k] = summarize(tot, level);
            r.average[k] = summarize(avg, level);
        }
        rows.push_back(r);
    };
    add("overall", 0, [&](int d) { return g.overall(d); }, g.total_area());
    for (int j = 0; j < g.n_intervals; ++j)
        add("interval", j, [&](int d) { return g.interval(d, j); }, g.interval_area(j));
    if (include_units && g.scope == GammaScope::Triangle)
        for (int u = 0; u < g.n_units; ++u) add("triangle", u, [&](int d) { return g.unit(d, u); }, g.unit_area[u]);
    return rows;
}

FluxCheck flux_identity_check(const AnalyticField& f, const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                              int order) {
    // twelve boundary triangles with outward normals
    std::vector<TrianglePlane> faces;
    for (int axis = 0; axis < 3; ++axis)
        for (int side = 0; side < 2; ++side) {
            const int u = (axis + 1) % 3, w = (axis + 2) % 3;
            Eigen::Vector3d c = lo;
            c[axis] = side ? hi[axis] : lo[axis];
            Eigen::Vector3d eu = Eigen::Vector3d::Zero(), ew = Eigen::Vector3d::Zero();
            eu[u] = hi[u] - lo[u];
            ew[w] = hi[w] - lo[w];
            const Eigen::Vector3d corners[2][3] = {{c, c + eu, c + ew}, {c + eu + ew, c + ew, c + eu}};
            for (auto& tri : corners) {
                TrianglePlane T;
                T.v0 = tri[0];
                T.e_omega = tri[1] - tri[0];
                T.e_upsilon = tri[2] - tri[0];
                Eigen::Vector3d n = T.normal_raw();
                const double out_sign = side ? 1.0 : -1.0;
                if (n[axis] * out_sign < 0) {
                    std::swap(T.e_omega, T.e_upsilon);
                    n = -n;
                }
                T.norm = n.norm();
                T.area = 0.5 * T.norm;
                T.n_s = n.head<2>() / T.norm;
                T.n_t = n.z() / T.norm;
                faces.push_back(T);
            }
        }
    auto lstar_at = [&](const Eigen::Vector3d& x) {
        Vec17 v;
        const auto& e = lstar().entries;
        for (int k = 0; k < kLStar; ++k) v[k] = f.d(e[k].a, e[k].i, e[k].j, x.x(), x.y(), x.z());
        return v;
    };
    double s1 = 0, s2 = 0;
    for (const auto& T : faces) {
        const NormalMatrix N = normal_of(T);
        for (const auto& node : triangle_rule(order)) {
            const Vec8 g = N * lstar_at(T.at(node.omega, node.upsilon));
            const double w = node.w * T.norm;
            s1 += w * (g[0] + g[2]);
            s2 += w * (g[1] + 2 * g[3] + g[5]);
        }
    }
    // volume side; a fixed per-axis extension of the normal gives V_i = nt_i * H_ii
    const Rule1D& r = gauss_legendre(order);
    const Eigen::Vector3d len = hi - lo;
    double v1 = 0, v2 = 0;
    for (int a = 0; a < order; ++a)
        for (int b = 0; b < order; ++b)
            for (int c = 0; c < order; ++c) {
                const double x = lo.x() + len.x() * r.x[a], y = lo.y() + len.y() * r.x[b],
                             t = lo.z() + len.z() * r.x[c];
                const double w = r.w[a] * r.w[b] * r.w[c] * len.prod();
                const double hxx = f.d(0, 2, 0, x, y, t), hyy = f.d(0, 0, 2, x, y, t), htt = f.d(2, 0, 0, x, y, t);
                v1 += w * (hxx + hyy + htt);
                const double ex = (2 * x - lo.x() - hi.x()) / len.x(), ey = (2 * y - lo.y() - hi.y()) / len.y(),
                             et = (2 * t - lo.z() - hi.z()) / len.z();
                v2 += w * (2 * hxx / len.x() + ex * f.d(0, 3, 0, x, y, t) + 2 * hyy / len.y() +
                           ey * f.d(0, 0, 3, x, y, t) + 2 * htt / len.z() + et * f.d(3, 0, 0, x, y, t));
            }
    auto rel = [](double s, double v) { return std::abs(s - v) / std::max(std::abs(v), 1.0); };
    return {{s1, v1, rel(s1, v1)}, {s2, v2, rel(s2, v2)}};
}

}  // namespace stw
