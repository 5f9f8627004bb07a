#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "stwomble/data.hpp"
#include "stwomble/lstar.hpp"
#include "stwomble/predict.hpp"

namespace stw {

// Test surfaces on the unit square over t in 1..9:
//   1: 10 (sin 3 pi x + cos 3 pi y cos(pi t / 7))
//   2: 10 sin 3 pi x cos 3 pi y cos(pi t / 7)
//   3, 4: halves of 1 and 2.
struct PatternSpec {
    int id = 1;
    double tau2 = 1.0;
    int n_s = 50;
    int n_t = 6;
    std::uint64_t seed = 1;

    void validate() const;
};

double pattern_mean(int id, double x, double y, double t);

// d_t^a d_x^i d_y^j of the pattern mean.
double pattern_deriv(int id, int a, int i, int j, double x, double y, double t);

Vec17 truth_derivatives(int id, const Point& p);

// Uniform sites on the unit square shared by all times 1..n_t.
Dataset gen_pattern(const PatternSpec& spec);

struct ScoreTable {
    std::array<double, kLStar> rmse{};
    std::array<double, kLStar> coverage{};
    std::array<double, kLStar> post_sd{};  // mean posterior sd across grid points
    std::bitset<kLStar> available;
};

// truth[g] holds the 17 true derivatives at grid point g.
ScoreTable score(const DerivDraws& draws, const std::vector<Vec17>& truth, double level = 0.95);

}  // namespace stw
