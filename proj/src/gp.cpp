#include "stwomble/gp.hpp"

#include <cmath>

namespace stw {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double log_inv_gamma(double x, double shape, double scale) {
    return shape * std::log(scale) - std::lgamma(shape) - (shape + 1) * std::log(x) - scale / x;
}

Eigen::VectorXd std_normal(int n, Rng& rng) {
    std::normal_distribution<double> N01;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = N01(rng);
    return v;
}

double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

// Marginal of y with z and beta integrated out: N(X m0, C + s2 X X'), C = K + tau2 I,
// handled through C and the p x p matrix A = I/s2 + X'C^-1 X.
struct Marginal {
    Factor C;
    Eigen::LLT<Eigen::MatrixXd> A;
    Eigen::MatrixXd CiX;
    Eigen::VectorXd Cir;
};

Marginal marginal(const PosteriorDraw& th, const Dataset& data, const Priors& pr, const KernelParams& kernel) {
    Eigen::MatrixXd C = data_cov(data.coords, with_theta(kernel, th));
    C.diagonal().array() += th.tau2;
    Marginal m;
    m.C = jittered_cholesky(C);
    const Eigen::VectorXd r = data.y - data.X * pr.beta_mean_or_zero(data.p());
    m.CiX = m.C.llt.solve(data.X);
    m.Cir = m.C.llt.solve(r);
    Eigen::MatrixXd A = data.X.transpose() * m.CiX;
    A.diagonal().array() += 1.0 / pr.beta_var;
    m.A.compute(A);
    if (m.A.info() != Eigen::Success) throw CholeskyFailure("regression block is not positive definite");
    return m;
}

}  // namespace

void Priors::validate(int p) const {
    if (!(phi_s_lo > 0 && phi_s_hi > phi_s_lo && phi_t_lo > 0 && phi_t_hi > phi_t_lo))
        throw ConfigError("uniform decay bounds must be positive and ordered");
    if (!(sigma2_shape > 0 && sigma2_scale > 0 && tau2_shape > 0 && tau2_scale > 0))
        throw ConfigError("inverse-gamma hyperparameters must be positive");
    if (!(beta_var > 0)) throw ConfigError("beta prior variance must be positive");
    if (beta_mean.size() != 0 && beta_mean.size() != p) throw ConfigError("beta prior mean has the wrong length");
}

Eigen::VectorXd Priors::beta_mean_or_zero(int p) const {
    return beta_mean.size() == 0 ? Eigen::VectorXd::Zero(p) : beta_mean;
}

void ChainConfig::validate() const {
    if (!(n_iter > n_burn && n_burn >= 0)) throw ConfigError("need n_iter > n_burn >= 0");
    if (thin < 1) throw ConfigError("thin must be >= 1");
    if (!(target_accept > 0 && target_accept < 1)) throw ConfigError("target_accept must be in (0, 1)");
    if (adapt_window < 1) throw ConfigError("adapt_window must be >= 1");
}

KernelParams with_theta(const KernelParams& kernel, const PosteriorDraw& d) {
    KernelParams p = kernel;
    p.sigma2 = d.sigma2;
    p.phi_s = d.phi_s;
    p.phi_t = d.phi_t;
    return p;
}

Eigen::MatrixXd data_cov(const std::vector<Point>& pts, const KernelParams& p) {
    const int n = int(pts.size());
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i) {
        K(i, i) = p.sigma2;
        for (int j = 0; j < i; ++j) {
            LagPair l;
            l.ds = {pts[i].x - pts[j].x, pts[i].y - pts[j].y};
            l.dt = pts[i].t - pts[j].t;
            K(i, j) = K(j, i) = cov(l, p);
        }
    }
    return K;
}

Factor jittered_cholesky(const Eigen::MatrixXd& K) {
    Factor f;
    if (K.rows() == 0) {
        f.llt.compute(K);
        return f;
    }
    if (!K.allFinite()) throw NonFiniteLikelihood("covariance matrix has non-finite entries");
    const double base = K.diagonal().mean();
    for (double rel = 1e-10; rel <= 1e-6 * (1 + 1e-9); rel *= 10) {
        Eigen::MatrixXd Kj = K;
        Kj.diagonal().array() += rel * base;
        f.llt.compute(Kj);
        if (f.llt.info() == Eigen::Success) {
            f.jitter = rel * base;
            return f;
        }
    }
    throw CholeskyFailure("covariance not positive definite after jitter " + std::to_string(1e-6 * base));
}

double log_collapsed_posterior(const PosteriorDraw& th, const Dataset& data, const Priors& pr,
                               const KernelParams& kernel) {
    if (!(th.sigma2 > 0 && th.tau2 > 0)) return -INFINITY;
    if (th.phi_s < pr.phi_s_lo || th.phi_s > pr.phi_s_hi || th.phi_t < pr.phi_t_lo || th.phi_t > pr.phi_t_hi)
        return -INFINITY;
    double lp = -std::log(pr.phi_s_hi - pr.phi_s_lo) - std::log(pr.phi_t_hi - pr.phi_t_lo) +
                log_inv_gamma(th.sigma2, pr.sigma2_shape, pr.sigma2_scale) +
                log_inv_gamma(th.tau2, pr.tau2_shape, pr.tau2_scale);
    const int N = data.n(), p = data.p();
    if (N == 0) return lp;
    const Marginal m = marginal(th, data, pr, kernel);
    const Eigen::VectorXd b = data.X.transpose() * m.Cir;
    const Eigen::VectorXd r = data.y - data.X * pr.beta_mean_or_zero(p);
    const double quad = r.dot(m.Cir) - b.dot(m.A.solve(b));
    const double ld = log_det(m.C.llt) + p * std::log(pr.beta_var) + log_det(m.A);
    const double ll = -0.5 * (N * kLog2Pi + ld + quad);
    if (!std::isfinite(ll)) throw NonFiniteLikelihood("log likelihood is not finite; check data scaling");
    return lp + ll;
}

Eigen::VectorXd beta_conditional_draw(const PosteriorDraw& th, const Dataset& data, const Priors& pr,
                                      const KernelParams& kernel, Rng& rng) {
    const int p = data.p();
    const Eigen::VectorXd m0 = pr.beta_mean_or_zero(p);
    if (data.n() == 0) return m0 + std::sqrt(pr.beta_var) * std_normal(p, rng);
    const Marginal m = marginal(th, data, pr, kernel);
    // beta - m0 | y ~ N(A^-1 X'C^-1 r, A^-1)
    const Eigen::VectorXd mean = m.A.solve(data.X.transpose() * m.Cir);
    const Eigen::VectorXd e = std_normal(p, rng);
    return m0 + mean + m.A.matrixU().solve(e);
}

Eigen::VectorXd z_conditional_draw(const PosteriorDraw& th, const Dataset& data, const KernelParams& kernel,
                                   Rng& rng) {
    const int N = data.n();
    if (N == 0) return Eigen::VectorXd(0);
    // Matheron update: z0 ~ N(0, K), e0 ~ N(0, tau2 I), z = z0 + K (K + tau2 I)^-1 (r - z0 - e0)
    // has exactly the N(m, M^-1) law.
    const Factor K = jittered_cholesky(data_cov(data.coords, with_theta(kernel, th)));
    const Eigen::MatrixXd L = K.llt.matrixL();
    const Eigen::MatrixXd Kj = L * L.transpose();
    Eigen::MatrixXd C = Kj;
    C.diagonal().array() += th.tau2;
    const Factor Cf = jittered_cholesky(C);
    const Eigen::VectorXd z0 = L * std_normal(N, rng);
    const Eigen::VectorXd e0 = std::sqrt(th.tau2) * std_normal(N, rng);
    const Eigen::VectorXd r = data.y - data.X * th.beta;
    return z0 + Kj * Cf.llt.solve(r - z0 - e0);
}

std::vector<PosteriorDraw> run_chain(const Dataset& data, const Priors& priors, const PosteriorDraw& init,
                                     const KernelParams& kernel, const ChainConfig& cfg, ChainStats* stats) {
    data.validate();
    priors.validate(data.p());
    cfg.validate();
    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> U01;
    std::normal_distribution<double> N01;

    PosteriorDraw cur = init;
    double lp = log_collapsed_posterior(cur, data, priors, kernel);
    if (!std::isfinite(lp)) throw ConfigError("initial values lie outside the prior support");

    auto field = [](PosteriorDraw& d, int k) -> double& {
        switch (k) {
            case 0: return d.sigma2;
            case 1: return d.tau2;
            case 2: return d.phi_s;
            default: return d.phi_t;
        }
    };
    std::array<double, 4> log_step{std::log(0.5), std::log(0.5), std::log(0.3), std::log(0.3)};
    std::array<int, 4> acc{};
    std::vector<PosteriorDraw> out;
    out.reserve(cfg.n_kept());

    for (int it = 0; it < cfg.n_iter; ++it) {
        for (int k = 0; k < 4; ++k) {
            PosteriorDraw prop = cur;
            const double old = field(cur, k);
            field(prop, k) = old * std::exp(std::exp(log_step[k]) * N01(rng));
            const double lq = log_collapsed_posterior(prop, data, priors, kernel);
            // log-scale proposal: Jacobian log(new) - log(old)
            const double la = lq - lp + std::log(field(prop, k)) - std::log(old);
            const bool ok = std::isfinite(lq) && std::log(U01(rng)) < la;
            if (ok) {
                cur = prop;
                lp = lq;
            }
            if (it < cfg.n_burn) {
                const double gain = 1.0 / std::pow(1.0 + double(it) / cfg.adapt_window, 0.6);
                log_step[k] += gain * ((ok ? 1.0 : 0.0) - cfg.target_accept);
            } else if (ok) {
                ++acc[k];
            }
        }
        if (it >= cfg.n_burn && (it - cfg.n_burn) % cfg.thin == 0) {
            PosteriorDraw d = cur;
            d.beta = beta_conditional_draw(d, data, priors, kernel, rng);
            d.z = z_conditional_draw(d, data, kernel, rng);
            out.push_back(std::move(d));
        }
    }
    if (stats) {
        const int kept_iters = cfg.n_iter - cfg.n_burn;
        for (int k = 0; k < 4; ++k) {
            stats->accept_rate[k] = double(acc[k]) / kept_iters;
            stats->step[k] = std::exp(log_step[k]);
        }
    }
    return out;
}

}  // namespace stw
