#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "stwomble/data.hpp"
#include "stwomble/kernel.hpp"

namespace stw {

struct Priors {
    double phi_s_lo = 0.01, phi_s_hi = 30;
    double phi_t_lo = 0.01, phi_t_hi = 30;
    double sigma2_shape = 2, sigma2_scale = 1;  // inverse gamma
    double tau2_shape = 2, tau2_scale = 0.1;
    Eigen::VectorXd beta_mean;  // empty means zero
    double beta_var = 1e6;

    void validate(int p) const;
    Eigen::VectorXd beta_mean_or_zero(int p) const;
};

struct PosteriorDraw {
    double sigma2 = 1, tau2 = 1, phi_s = 1, phi_t = 1;
    Eigen::VectorXd beta;
    Eigen::VectorXd z;
};

struct ChainConfig {
    int n_iter = 2000;
    int n_burn = 1000;
    int thin = 1;
    double target_accept = 0.35;
    int adapt_window = 50;
    std::uint64_t seed = 1;

    void validate() const;
    int n_kept() const { return (n_iter - n_burn + thin - 1) / thin; }
};

struct ChainStats {
    std::array<double, 4> accept_rate{};  // sigma2, tau2, phi_s, phi_t after burn-in
    std::array<double, 4> step{};         // frozen log-scale proposal sd
};

using Rng = std::mt19937_64;

// Kernel with family/separability from `kernel` and the draw's sigma2, phi_s, phi_t.
KernelParams with_theta(const KernelParams& kernel, const PosteriorDraw& d);

Eigen::MatrixXd data_cov(const std::vector<Point>& pts, const KernelParams& p);

// Cholesky with diagonal jitter 1e-10 * mean(diag), escalating x10 to 1e-6 of it.
struct Factor {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0;  // absolute amount added to the diagonal
};
Factor jittered_cholesky(const Eigen::MatrixXd& K);

// log p(sigma2, tau2, phi_s, phi_t | y) up to the evidence, with z and beta integrated out.
double log_collapsed_posterior(const PosteriorDraw& theta, const Dataset& data, const Priors& priors,
                               const KernelParams& kernel);

// z | theta, beta, y ~ N(m, M^-1), M = K^-1 + I/tau2, m = M^-1 (y - X beta) / tau2.
Eigen::VectorXd z_conditional_draw(const PosteriorDraw& theta, const Dataset& data,
                                   const KernelParams& kernel, Rng& rng);

// beta | theta, y with z integrated out.
Eigen::VectorXd beta_conditional_draw(const PosteriorDraw& theta, const Dataset& data,
                                      const Priors& priors, const KernelParams& kernel, Rng& rng);

std::vector<PosteriorDraw> run_chain(const Dataset& data, const Priors& priors, const PosteriorDraw& init,
                                     const KernelParams& kernel, const ChainConfig& cfg,
                                     ChainStats* stats = nullptr);

}  // namespace stw
