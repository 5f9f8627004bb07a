#include <cmath>
#include <random>

#include "doctest.h"
#include "stwomble/womble.hpp"

using namespace stw;

namespace {

KernelParams kernel(Family f, double s2 = 1, double ps = 1, double pt = 1) {
    KernelParams p;
    p.family = f;
    p.sigma2 = s2;
    p.phi_s = ps;
    p.phi_t = pt;
    return p;
}

TrianglePlane plane(Eigen::Vector3d v0, Eigen::Vector3d ew, Eigen::Vector3d eu) {
    TrianglePlane T;
    T.v0 = v0;
    T.e_omega = ew;
    T.e_upsilon = eu;
    const Eigen::Vector3d n = T.normal_raw();
    T.norm = n.norm();
    T.area = T.norm / 2;
    T.n_s = n.head<2>() / T.norm;
    T.n_t = n.z() / T.norm;
    return T;
}

TrianglePlane random_triangle(std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> U(-1, 1);
    auto v = [&]() -> Eigen::Vector3d { return Eigen::Vector3d(U(rng), U(rng), U(rng)) * scale; };
    return plane(v(), v(), v());
}

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

PolyCurveAtTime segment(double t, Eigen::Vector2d a, Eigen::Vector2d b, int n) {
    PolyCurveAtTime c{t, {}, false};
    for (int i = 0; i < n; ++i) c.vertices.push_back(a + (b - a) * double(i) / (n - 1));
    return c;
}

PolyCurveAtTime circle(double t, Eigen::Vector2d c, double r, int n) {
    PolyCurveAtTime out{t, {}, true};
    for (int i = 0; i < n; ++i)
        out.vertices.push_back(c + r * Eigen::Vector2d(std::cos(2 * M_PI * i / n), std::sin(2 * M_PI * i / n)));
    return out;
}

}  // namespace

TEST_CASE("quadrature spec validation") {
    QuadratureSpec q;
    CHECK_NOTHROW(q.validate());
    q.order = 3;
    CHECK_THROWS_AS(q.validate(), ConfigError);
    q = {};
    q.max_refine = -1;
    CHECK_THROWS_AS(q.validate(), ConfigError);
}

TEST_CASE("curvature wombling needs a four-times differentiable kernel") {
    CHECK_THROWS_AS(kernel_lstar_cov(kernel(Family::Matern32)), InadmissibleDerivative);
    auto T = plane({0, 0, 0}, {1, 0, 0}, {0, 0, 1});
    CHECK_THROWS_AS(gamma_data_cross(T, {{0.5, 0.5, 0.5}}, kernel(Family::Matern32), {}), InadmissibleDerivative);
}

TEST_CASE("self block with a constant integrand") {
    std::mt19937_64 rng(3);
    Mat17 C = Mat17::Random();
    C = C * C.transpose();
    LStarCov c = [&](const LagPair&) { return C; };
    for (int r = 0; r < 3; ++r) {
        auto T = random_triangle(rng, 1.0);
        QuadratureSpec q;
        q.order = 4;
        const NormalMatrix N = normal_projection(T.n_s, T.n_t);
        const Mat8 expect = N * C * N.transpose() * T.norm * T.norm / 4;
        CHECK(rel_diff(gamma_auto_cov(T, T, c, q, true), expect) < 1e-13);
        CHECK(rel_diff(gamma_auto_cov_bruteforce(T, T, c, 4), expect) < 1e-13);
    }
}

TEST_CASE("reduced self block against brute force") {
    std::mt19937_64 rng(17);
    QuadratureSpec q;
    q.max_refine = 3;
    for (Family f : {Family::SqExp, Family::Matern52}) {
        auto p = kernel(f, 1.3, 1.1, 0.8);
        for (int r = 0; r < 3; ++r) {
            auto T = random_triangle(rng, 0.3);
            const Mat8 red = gamma_auto_cov(T, T, p, q, true);
            const Mat8 bf = gamma_auto_cov_bruteforce(T, T, kernel_lstar_cov(p), f == Family::SqExp ? 16 : 24);
            CHECK(rel_diff(red, bf) < (f == Family::SqExp ? 1e-10 : 1e-4));
            CHECK((red - red.transpose()).cwiseAbs().maxCoeff() < 1e-12 * red.cwiseAbs().maxCoeff());
        }
    }
}

TEST_CASE("cross block is transposed under swapping") {
    std::mt19937_64 rng(5);
    auto p = kernel(Family::Matern52);
    auto a = random_triangle(rng, 0.5), b = random_triangle(rng, 0.5);
    b.v0 += Eigen::Vector3d(1, 0, 0);
    QuadratureSpec q;
    q.order = 16;
    const Mat8 ab = gamma_auto_cov(a, b, p, q, false), ba = gamma_auto_cov(b, a, p, q, false);
    CHECK(rel_diff(ab, ba.transpose()) < 1e-12);
    CHECK(rel_diff(ab, gamma_auto_cov_bruteforce(a, b, kernel_lstar_cov(p), 16)) < 1e-5);
}

TEST_CASE("data cross covariance decays with distance") {
    auto T = plane({0, 0, 0}, {0.2, 0, 0}, {0, 0.2, 0.2});
    auto p = kernel(Family::Matern52, 1, 2, 2);
    QuadratureSpec q;
    const Eigen::MatrixXd G = gamma_data_cross(T, {{0.1, 0.3, 0.1}, {40, 40, 0.1}}, p, q);
    CHECK(G.rows() == 8);
    CHECK(G.cols() == 2);
    CHECK(G.col(0).cwiseAbs().maxCoeff() > 1e-3);
    CHECK(G.col(1).cwiseAbs().maxCoeff() < 1e-20);
}

TEST_CASE("static surfaces have no temporal measures") {
    auto s = triangulate({segment(0, {0, 0}, {1, 0}, 3), segment(1, {0, 0}, {1, 0}, 3)}, 2);
    QuadratureSpec q;
    const auto m = gamma_model(s, {{0.3, 0.4, 0.5}, {0.7, -0.2, 0.1}}, kernel(Family::SqExp), q,
                               GammaScope::Triangle);
    for (int u = 0; u < int(s.triangles.size()); ++u)
        for (int r = 2; r < 8; ++r) {
            CHECK(m.G.row(8 * u + r).cwiseAbs().maxCoeff() < 1e-15);
            CHECK(m.K.row(8 * u + r).cwiseAbs().maxCoeff() < 1e-15);
        }
}

TEST_CASE("joint surface covariance is positive semidefinite") {
    for (Family f : {Family::Matern52, Family::SqExp}) {
        std::vector<PolyCurveAtTime> curves;
        for (int t = 0; t < 3; ++t) curves.push_back(segment(t * 0.5, {0.1 * t, 0}, {0.2 + 0.1 * t, 0.5}, 3));
        auto s = triangulate(curves, 2);
        QuadratureSpec q;
        q.order = 6;
        q.max_refine = 0;
        const auto m = gamma_model(s, {}, kernel(f, 1, 2, 1), q, GammaScope::Triangle);
        CHECK(m.K.rows() == 8 * int(s.triangles.size()));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.K);
        CHECK(es.eigenvalues().minCoeff() >= -1e-6 * m.K.trace());
    }
}

TEST_CASE("closed-form squared exponential inner integral") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> U(-1, 1);
    QuadratureSpec q;
    q.order = 16;
    for (int r = 0; r < 5; ++r) {
        auto p = kernel(Family::SqExp, 1 + 0.5 * U(rng), 1.5 + U(rng), 1.5 + U(rng));
        // triangles from surfaces keep e_omega at constant time
        auto T = plane({U(rng), U(rng), U(rng)}, {U(rng), U(rng), 0}, {U(rng), U(rng), 0.5 + U(rng)});
        std::vector<Point> data;
        for (int i = 0; i < 4; ++i) data.push_back({U(rng), U(rng), U(rng)});
        const Eigen::MatrixXd fast = gamma_data_cross_sqexp(T, data, p, q);
        q.order = 48;
        const Eigen::MatrixXd gen = gamma_data_cross(T, data, p, q);
        q.order = 16;
        CHECK(rel_diff(fast, gen) < 1e-8);
    }
    auto T = plane({0, 0, 0}, {1, 0, 1}, {0, 1, 1});
    CHECK_THROWS_AS(gamma_data_cross_sqexp(T, {{0, 0, 0}}, kernel(Family::SqExp), q), Unsupported);
    CHECK_THROWS_AS(gamma_data_cross_sqexp(T, {{0, 0, 0}}, kernel(Family::Matern52), q), Unsupported);
}

TEST_CASE("flux identities on a box") {
    AnalyticField lin{[](int a, int i, int j, double, double, double) { return (a == 1 && i + j == 0) ? 1.0 : 0.0; }};
    AnalyticField quad{[](int a, int i, int j, double x, double y, double t) {
        if (a + i + j == 0) return x * x + y * y + t * t;
        if (a + i + j == 1) return 2 * (a ? t : i ? x : y);
        if (a + i + j == 2) return (a == 2 || i == 2 || j == 2) ? 2.0 : 0.0;
        return 0.0;
    }};
    AnalyticField wave{[](int a, int i, int j, double x, double y, double t) {
        const double sx[4] = {std::sin(x), std::cos(x), -std::sin(x), -std::cos(x)};
        const double cy[4] = {std::cos(y), -std::sin(y), -std::cos(y), std::sin(y)};
        const double tt[4] = {t * t, 2 * t, 2, 0};
        return sx[i % 4] * cy[j % 4] * tt[std::min(a, 3)];
    }};
    for (const auto* f : {&lin, &quad, &wave}) {
        const auto r = flux_identity_check(*f, {0, 0, 0}, {1, 1, 1});
        CHECK(r.first.rel_err < 1e-10);
        CHECK(r.second.rel_err < 1e-10);
    }
    const auto r = flux_identity_check(wave, {-0.5, 0.2, 1}, {1.5, 1.0, 2.5});
    CHECK(r.first.rel_err < 1e-10);
    CHECK(r.second.rel_err < 1e-10);
    CHECK(std::abs(r.first.volume) > 0.1);
}

TEST_CASE("midpoint sums with a constant field") {
    auto s = triangulate({circle(0, {0, 0}, 1, 8), circle(1, {0.2, 0}, 1.5, 8)}, 3);
    DerivDraws dm;
    dm.n_draws = 2;
    dm.n_points = int(s.cell_mid.size());
    dm.available.set();
    dm.values.assign(size_t(dm.n_draws) * dm.n_points * kLStar, 0.0);
    Vec17 v = Vec17::LinSpaced(1, 2);
    for (int d = 0; d < 2; ++d)
        for (int g = 0; g < dm.n_points; ++g)
            for (int k = 0; k < kLStar; ++k) dm.at(d, g, k) = v[k];
    const GammaDraws g = riemann_gamma(dm, s);
    Vec8 expect = Vec8::Zero();
    for (const auto& T : s.triangles) expect += T.area * normal_projection(T.n_s, T.n_t) * v;
    CHECK((g.overall(1) - expect).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(g.total_area() == doctest::Approx(s.total_area()));
    dm.n_points--;
    CHECK_THROWS_AS(riemann_gamma(dm, s), MidpointMismatch);
}

TEST_CASE("interval units are sums of triangles") {
    std::vector<PolyCurveAtTime> curves;
    for (int t = 0; t < 3; ++t) curves.push_back(circle(t, {0, 0}, 1 + 0.2 * t, 5));
    auto s = triangulate(curves, 2);
    QuadratureSpec q;
    q.order = 4;
    q.max_refine = 0;
    const std::vector<Point> data = {{0, 0, 0.5}, {1, 0.5, 1.5}};
    auto p = kernel(Family::Matern52);
    const auto tri = gamma_model(s, data, p, q, GammaScope::Triangle, 2);
    const auto itv = gamma_model(s, data, p, q, GammaScope::Interval, 2);
    CHECK(itv.G.rows() == 16);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(16, tri.G.rows());
    for (int u = 0; u < int(s.triangles.size()); ++u)
        A.block<8, 8>(8 * s.triangles[u].j, 8 * u).setIdentity();
    CHECK(rel_diff(A * tri.G, itv.G) < 1e-12);
    CHECK(rel_diff(A * tri.K * A.transpose(), itv.K) < 1e-12);
}

TEST_CASE("reversing an open curve flips the odd measures") {
    // a straight segment moving in x sweeps a plane, so both triangulations cover the same set
    auto fwd = triangulate({segment(0, {0, 0}, {0, 1}, 4), segment(1, {0.5, 0}, {0.5, 1}, 4)}, 3);
    auto rev = triangulate({segment(0, {0, 1}, {0, 0}, 4), segment(1, {0.5, 1}, {0.5, 0}, 4)}, 3);
    QuadratureSpec q;
    const std::vector<Point> data = {{0.3, 0.2, 0.6}, {-0.4, 0.9, 0.1}};
    auto p = kernel(Family::SqExp, 1, 1.5, 1.5);
    const auto a = gamma_model(fwd, data, p, q, GammaScope::Interval);
    const auto b = gamma_model(rev, data, p, q, GammaScope::Interval);
    const int degree[8] = {1, 2, 1, 2, 3, 2, 3, 4};
    for (int r = 0; r < 8; ++r) {
        const double sgn = (degree[r] & 1) ? -1 : 1;
        CHECK((a.G.row(r) - sgn * b.G.row(r)).cwiseAbs().maxCoeff() < 1e-9 * a.G.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("without data the draws follow the prior") {
    auto s = triangulate({segment(0, {0, 0}, {1, 0}, 2), segment(1, {0, 0.3}, {1, 0.3}, 2)}, 2);
    auto p = kernel(Family::SqExp);
    QuadratureSpec q;
    Dataset empty;
    const auto m = gamma_model(s, {}, p, q, GammaScope::Interval);
    std::vector<PosteriorDraw> draws(3000);
    for (auto& d : draws) {
        d.sigma2 = p.sigma2;
        d.phi_s = p.phi_s;
        d.phi_t = p.phi_t;
        d.tau2 = 0.1;
    }
    const auto g = sample_gamma(draws, empty, s, p, q, GammaScope::Interval, 9);
    for (int r = 0; r < 8; ++r) {
        const double var = m.K(r, r);
        if (var < 1e-12) continue;
        double s1 = 0, s2 = 0;
        for (int d = 0; d < g.n_draws; ++d) {
            s1 += g.unit(d, 0)[r];
            s2 += g.unit(d, 0)[r] * g.unit(d, 0)[r];
        }
        const double mean = s1 / g.n_draws, v = s2 / g.n_draws - mean * mean;
        CHECK(std::abs(mean) < 4 * std::sqrt(var / g.n_draws));
        CHECK(v / var == doctest::Approx(1).epsilon(0.1));
    }
    const auto rows = aggregate(g, 0.95, true);
    CHECK(rows.size() == 2);
    CHECK(rows[0].scope == "overall");
    CHECK(rows[0].average[0].lower < 0);
    CHECK(rows[0].average[0].upper > 0);
}
