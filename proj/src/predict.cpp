#include "stwomble/predict.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stwomble/parallel.hpp"

namespace stw {

Vec17 DerivDraws::vec(int d, int g) const {
    return Eigen::Map<const Vec17>(&values[(size_t(d) * n_points + g) * kLStar]);
}

std::vector<double> DerivDraws::series(int g, int k) const {
    std::vector<double> s(n_draws);
    for (int d = 0; d < n_draws; ++d) s[d] = (*this)(d, g, k);
    return s;
}

std::bitset<kLStar> supported_entries(const KernelParams& kernel) {
    std::bitset<kLStar> b;
    if (kernel.family == Family::Matern32) {
        for (int k : {0, 1, 5, 6, 7}) b.set(k);
    } else {
        b.set();
    }
    return b;
}

LatentConditioner::LatentConditioner(const Dataset& data, const PosteriorDraw& draw, const KernelParams& kernel)
    : data_(data), params_(with_theta(kernel, draw)), avail_(supported_entries(kernel)) {
    K_ = jittered_cholesky(data_cov(data.coords, params_));
    alpha_ = K_.llt.matrixL().solve(draw.z);
    const bool full = avail_.all();
    prior_ = lstar_block(deriv_table({}, params_, full ? 4 : 2, full ? 4 : 2));
    for (int k = 0; k < kLStar; ++k)
        if (!avail_[k]) {
            prior_.row(k).setZero();
            prior_.col(k).setZero();
        }
}

LStarConditional LatentConditioner::at(const Point& g) const {
    const int N = data_.n();
    Eigen::MatrixXd C(N, kLStar);
    for (int i = 0; i < N; ++i) {
        LagPair l;
        l.ds = {g.x - data_.coords[i].x, g.y - data_.coords[i].y};
        l.dt = g.t - data_.coords[i].t;
        C.row(i) = lstar_vs_value(deriv_table(l, params_, 2, 2)).transpose();
    }
    for (int k = 0; k < kLStar; ++k)
        if (!avail_[k]) C.col(k).setZero();
    LStarConditional out;
    if (N == 0) {
        out.mean.setZero();
        out.cov = prior_;
        return out;
    }
    const Eigen::MatrixXd W = K_.llt.matrixL().solve(C);
    out.mean = W.transpose() * alpha_;
    out.cov = prior_ - W.transpose() * W;
    return out;
}

Vec17 sample_joint(const LStarConditional& c, const std::bitset<kLStar>& avail, Rng& rng) {
    Eigen::SelfAdjointEigenSolver<Mat17> es(0.5 * (c.cov + c.cov.transpose()));
    std::normal_distribution<double> N01;
    Vec17 e;
    for (int k = 0; k < kLStar; ++k) e[k] = N01(rng) * std::sqrt(std::max(0.0, es.eigenvalues()[k]));
    Vec17 v = c.mean + es.eigenvectors() * e;
    for (int k = 0; k < kLStar; ++k)
        if (!avail[k]) v[k] = std::numeric_limits<double>::quiet_NaN();
    return v;
}

DerivDraws predict_derivatives(const std::vector<PosteriorDraw>& draws, const Dataset& data,
                               const PredictionGrid& grid, const KernelParams& kernel, std::uint64_t seed,
                               int threads) {
    if (grid.points.empty()) throw ShapeMismatch("prediction grid is empty");
    for (const auto& p : grid.points)
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.t))
            throw GeometryError("non-finite grid coordinate");
    const PredictionGrid g = separate_from_data(grid, data);
    DerivDraws out;
    out.n_draws = int(draws.size());
    out.n_points = int(g.points.size());
    out.available = supported_entries(kernel);
    out.values.assign(size_t(out.n_draws) * out.n_points * kLStar, 0.0);
    parallel_for(out.n_draws, threads, [&](int d) {
        LatentConditioner lc(data, draws[d], kernel);
        Rng rng(seed ^ (0x9E3779B97F4A7C15ULL * (std::uint64_t(d) + 1)));
        for (int p = 0; p < out.n_points; ++p) {
            const Vec17 v = sample_joint(lc.at(g.points[p]), out.available, rng);
            for (int k = 0; k < kLStar; ++k) out.at(d, p, k) = v[k];
        }
    });
    return out;
}

HpdSummary summarize(std::vector<double> draws, double level) {
    const int n = int(draws.size());
    if (n < 100) throw TooFewDraws("HPD summary needs at least 100 draws, got " + std::to_string(n));
    if (!(level > 0 && level < 1)) throw ConfigError("HPD level must be in (0, 1)");
    std::sort(draws.begin(), draws.end());
    const int k = std::max(1, int(std::ceil(level * n - 1e-9)));
    int best = 0;
    for (int s = 1; s + k <= n; ++s)
        if (draws[s + k - 1] - draws[s] < draws[best + k - 1] - draws[best]) best = s;
    HpdSummary h;
    h.lower = draws[best];
    h.upper = draws[best + k - 1];
    h.median = (n % 2) ? draws[n / 2] : 0.5 * (draws[n / 2 - 1] + draws[n / 2]);
    h.significant = h.lower > 0 ? Significance::Pos : (h.upper < 0 ? Significance::Neg : Significance::None);
    return h;
}

const char* significance_name(Significance s) {
    switch (s) {
        case Significance::Pos: return "pos";
        case Significance::Neg: return "neg";
        default: return "none";
    }
}

PredictionGrid separate_from_data(PredictionGrid grid, const Dataset& data) {
    for (auto& g : grid.points)
        for (const auto& c : data.coords)
            if (g.x == c.x && g.y == c.y && g.t == c.t) {
                g.t += 1e-9;
                break;
            }
    return grid;
}

}  // namespace stw
