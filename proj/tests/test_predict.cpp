#include <cmath>

#include "doctest.h"
#include "stwomble/predict.hpp"

using namespace stw;

namespace {

PosteriorDraw draw_with_z(const Dataset& d, std::uint64_t seed) {
    PosteriorDraw th;
    th.sigma2 = 1.2;
    th.tau2 = 0.1;
    th.phi_s = 2.0;
    th.phi_t = 0.7;
    th.beta = Eigen::VectorXd::Zero(1);
    Rng rng(seed);
    std::normal_distribution<double> N01;
    th.z.resize(d.n());
    for (int i = 0; i < d.n(); ++i) th.z[i] = N01(rng);
    return th;
}

Dataset small_design() {
    Rng rng(12);
    std::uniform_real_distribution<double> U;
    std::vector<Point> p;
    for (int i = 0; i < 20; ++i) p.push_back({U(rng), U(rng), double(1 + i % 4)});
    return make_dataset(p, Eigen::VectorXd::Zero(20));
}

}  // namespace

TEST_CASE("single observation at the origin") {
    Dataset d = make_dataset({{0, 0, 0}}, Eigen::VectorXd::Constant(1, 1.0));
    PosteriorDraw th = draw_with_z(d, 1);
    th.z[0] = 1.7;
    KernelParams k;
    PredictionGrid g{{{0, 0, 0}}};
    g = separate_from_data(g, d);
    CHECK(g.points[0].t == 1e-9);
    LatentConditioner lc(d, th, k);
    auto c = lc.at(g.points[0]);
    const auto& e = lstar().entries;
    for (int i = 0; i < kLStar; ++i)
        if ((e[i].a + e[i].i + e[i].j) % 2) CHECK(std::abs(c.mean[i]) < 1e-6);
}

TEST_CASE("far from data the conditional is the prior") {
    Dataset d = small_design();
    PosteriorDraw th = draw_with_z(d, 2);
    for (Family f : {Family::Matern52, Family::SqExp}) {
        KernelParams k;
        k.family = f;
        LatentConditioner lc(d, th, k);
        auto c = lc.at({500, 500, 200});
        const Mat17 prior = lstar_block(deriv_table({}, with_theta(k, th), 4, 4));
        CHECK((c.cov - prior).norm() < 1e-3 * prior.norm());
        CHECK(c.mean.norm() < 1e-8);
    }
}

TEST_CASE("conditional mean is linear in z") {
    Dataset d = small_design();
    PosteriorDraw th = draw_with_z(d, 3);
    KernelParams k;
    LatentConditioner a(d, th, k);
    PosteriorDraw th3 = th;
    th3.z *= 3.0;
    LatentConditioner b(d, th3, k);
    Point g{0.4, 0.6, 2.5};
    CHECK((b.at(g).mean - 3.0 * a.at(g).mean).norm() < 1e-10 * (1 + a.at(g).mean.norm()));
}

TEST_CASE("conditional covariance agrees with dense joint conditioning") {
    Dataset d = small_design();
    d.coords.resize(4);
    d.y.resize(4);
    d.X.resize(4, 1);
    PosteriorDraw th = draw_with_z(d, 4);
    KernelParams k;
    k.family = Family::SqExp;
    const KernelParams p = with_theta(k, th);
    Point g{0.3, 0.2, 1.5};
    // joint covariance of (z_1..z_4, L*Z(g))
    Eigen::MatrixXd J(21, 21);
    J.topLeftCorner(4, 4) = data_cov(d.coords, p);
    for (int i = 0; i < 4; ++i) {
        LagPair l;
        l.ds = {g.x - d.coords[i].x, g.y - d.coords[i].y};
        l.dt = g.t - d.coords[i].t;
        // first entry of the full cross matrix is Z(g); rows 1.. are L*Z(g) against Z(data)
        auto cc = cross_cov(l, p).matrix;
        J.block(4, i, 17, 1) = cc.block(1, 0, 17, 1);
        J.block(i, 4, 1, 17) = cc.block(1, 0, 17, 1).transpose();
    }
    J.bottomRightCorner(17, 17) = cross_cov({}, p).matrix.bottomRightCorner(17, 17);
    const Eigen::MatrixXd S12 = J.block(4, 0, 17, 4);
    const Eigen::MatrixXd S11 = J.topLeftCorner(4, 4);
    const Eigen::MatrixXd cond = J.bottomRightCorner(17, 17) - S12 * S11.inverse() * S12.transpose();
    const Eigen::VectorXd mean = S12 * S11.inverse() * th.z;
    auto c = LatentConditioner(d, th, k).at(g);
    CHECK((c.cov - cond).norm() < 1e-6 * cond.norm());
    CHECK((c.mean - mean).norm() < 1e-6 * (1 + mean.norm()));
}

TEST_CASE("predict_derivatives shape, availability and determinism") {
    Dataset d = small_design();
    std::vector<PosteriorDraw> draws = {draw_with_z(d, 5), draw_with_z(d, 6), draw_with_z(d, 7)};
    PredictionGrid g{{{0.1, 0.1, 1}, {0.5, 0.5, 2}}};
    KernelParams k;
    auto a = predict_derivatives(draws, d, g, k, 42, 1);
    auto b = predict_derivatives(draws, d, g, k, 42, 3);
    CHECK(a.values == b.values);
    CHECK(a.values.size() == 3 * 2 * 17);

    KernelParams m32;
    m32.family = Family::Matern32;
    auto c = predict_derivatives(draws, d, g, m32, 42, 1);
    CHECK(c.available.count() == 5);
    CHECK(std::isnan(c(0, 0, 2)));
    CHECK(std::isfinite(c(0, 0, 6)));
}

TEST_CASE("HPD summaries") {
    std::vector<double> v;
    for (int i = 1; i <= 100; ++i) v.push_back(i);
    auto h = summarize(v);
    CHECK(h.lower == 1);
    CHECK(h.upper == 95);
    CHECK(h.median == 50.5);
    CHECK(h.significant == Significance::Pos);

    std::vector<double> s;
    for (int i = -100; i <= 100; ++i) s.push_back(i);
    std::reverse(s.begin(), s.end());
    auto hs = summarize(s);
    CHECK(hs.median == 0);
    CHECK(hs.significant == Significance::None);
    CHECK(hs.lower == -100);  // all windows tie; lowest start
    CHECK(hs.upper == 90);

    std::vector<double> n(150, -1.0);
    n[3] = -2;
    CHECK(summarize(n).significant == Significance::Neg);
    CHECK_THROWS_AS(summarize(std::vector<double>(99, 1.0)), TooFewDraws);

    // skewed draws: window hugs the dense end
    std::vector<double> sk;
    for (int i = 0; i < 200; ++i) sk.push_back(std::exp(i / 40.0));
    auto hk = summarize(sk);
    CHECK(hk.lower == sk[0]);
}
