#pragma once

#include <bitset>
#include <cstdint>
#include <vector>

#include "stwomble/gp.hpp"
#include "stwomble/lstar.hpp"

namespace stw {

struct PredictionGrid {
    std::vector<Point> points;
};

// values[(d * n_points + g) * 17 + k]; entries a kernel cannot supply hold NaN.
struct DerivDraws {
    int n_draws = 0;
    int n_points = 0;
    std::bitset<kLStar> available;
    std::vector<double> values;

    double operator()(int d, int g, int k) const { return values[(size_t(d) * n_points + g) * kLStar + k]; }
    double& at(int d, int g, int k) { return values[(size_t(d) * n_points + g) * kLStar + k]; }
    Vec17 vec(int d, int g) const;
    std::vector<double> series(int g, int k) const;
};

// Layout positions a kernel supports: all 17, or (d_x, d_y, d_t, d_t d_x, d_t d_y) for Matern32.
std::bitset<kLStar> supported_entries(const KernelParams& kernel);

// Conditional law of L*Z at one location given the latent field values.
struct LStarConditional {
    Vec17 mean;
    Mat17 cov;
};

class LatentConditioner {
public:
    LatentConditioner(const Dataset& data, const PosteriorDraw& draw, const KernelParams& kernel);
    LStarConditional at(const Point& g) const;

private:
    const Dataset& data_;
    KernelParams params_;
    Factor K_;
    Eigen::VectorXd alpha_;  // L^-1 z
    Mat17 prior_;
    std::bitset<kLStar> avail_;
};

// Draw from N(mean, cov) with negative eigenvalues of cov clipped to zero.
Vec17 sample_joint(const LStarConditional& c, const std::bitset<kLStar>& avail, Rng& rng);

// One joint L*Z draw per posterior draw and grid point. Draw d uses the stream seeded by
// (seed, d) so results do not depend on the thread count.
DerivDraws predict_derivatives(const std::vector<PosteriorDraw>& draws, const Dataset& data,
                               const PredictionGrid& grid, const KernelParams& kernel, std::uint64_t seed,
                               int threads = 1);

enum class Significance { Pos, Neg, None };

struct HpdSummary {
    double median = 0, lower = 0, upper = 0;
    Significance significant = Significance::None;
};

HpdSummary summarize(std::vector<double> draws, double level = 0.95);
const char* significance_name(Significance s);

// Grids points that coincide with a data location move by 1e-9 in time.
PredictionGrid separate_from_data(PredictionGrid grid, const Dataset& data);

}  // namespace stw
