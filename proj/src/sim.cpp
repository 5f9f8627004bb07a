#include "stwomble/sim.hpp"

#include <cmath>
#include <random>

namespace stw {

namespace {

// sin(k z + phase); the constant 1 is k = 0, phase = pi/2.
struct Wave {
    double k, phase;
    double d(int n, double z) const {
        if (n > 0 && k == 0) return 0.0;
        return std::pow(k, n) * std::sin(k * z + phase + n * M_PI / 2);
    }
};

struct Term {
    double c;
    Wave x, y, t;
};

std::vector<Term> terms(int id) {
    const double k = 3 * M_PI, w = M_PI / 7, h = M_PI / 2;
    const Wave one{0, h}, sx{k, 0}, cy{k, h}, ct{w, h};
    const double c = (id == 3 || id == 4) ? 5.0 : 10.0;
    if (id == 1 || id == 3) return {{c, sx, one, one}, {c, one, cy, ct}};
    if (id == 2 || id == 4) return {{c, sx, cy, ct}};
    throw ConfigError("pattern id must be 1..4");
}

}  // namespace

void PatternSpec::validate() const {
    if (id < 1 || id > 4) throw ConfigError("pattern id must be 1..4");
    if (!(tau2 > 0)) throw ConfigError("pattern noise variance must be positive");
    if (n_s < 1 || n_t < 1 || n_t > 9) throw ConfigError("need n_s >= 1 and 1 <= n_t <= 9");
}

double pattern_deriv(int id, int a, int i, int j, double x, double y, double t) {
    double s = 0;
    for (const auto& tm : terms(id)) s += tm.c * tm.x.d(i, x) * tm.y.d(j, y) * tm.t.d(a, t);
    return s;
}

double pattern_mean(int id, double x, double y, double t) { return pattern_deriv(id, 0, 0, 0, x, y, t); }

Vec17 truth_derivatives(int id, const Point& p) {
    Vec17 v;
    const auto& e = lstar().entries;
    for (int k = 0; k < kLStar; ++k) v[k] = pattern_deriv(id, e[k].a, e[k].i, e[k].j, p.x, p.y, p.t);
    return v;
}

Dataset gen_pattern(const PatternSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    std::uniform_real_distribution<double> U;
    std::normal_distribution<double> N01;
    std::vector<std::pair<double, double>> sites(spec.n_s);
    for (auto& s : sites) {
        s.first = U(rng);
        s.second = U(rng);
    }
    std::vector<Point> pts;
    std::vector<double> y;
    for (int t = 1; t <= spec.n_t; ++t)
        for (auto& s : sites) {
            pts.push_back({s.first, s.second, double(t)});
            y.push_back(pattern_mean(spec.id, s.first, s.second, t) + std::sqrt(spec.tau2) * N01(rng));
        }
    return make_dataset(pts, Eigen::Map<Eigen::VectorXd>(y.data(), y.size()));
}

ScoreTable score(const DerivDraws& draws, const std::vector<Vec17>& truth, double level) {
    if (int(truth.size()) != draws.n_points) throw ShapeMismatch("truth and draws cover different grids");
    ScoreTable s;
    s.available = draws.available;
    for (int k = 0; k < kLStar; ++k) {
        if (!draws.available[k]) {
            s.rmse[k] = s.coverage[k] = s.post_sd[k] = std::nan("");
            continue;
        }
        double se = 0, hit = 0, sd = 0;
        for (int g = 0; g < draws.n_points; ++g) {
            const auto series = draws.series(g, k);
            const HpdSummary h = summarize(series, level);
            se += (h.median - truth[g][k]) * (h.median - truth[g][k]);
            hit += (h.lower <= truth[g][k] && truth[g][k] <= h.upper) ? 1 : 0;
            double m = 0, v = 0;
            for (double x : series) m += x / series.size();
            for (double x : series) v += (x - m) * (x - m) / (series.size() - 1);
            sd += std::sqrt(v);
        }
        s.rmse[k] = std::sqrt(se / draws.n_points);
        s.coverage[k] = hit / draws.n_points;
        s.post_sd[k] = sd / draws.n_points;
    }
    return s;
}

}  // namespace stw
