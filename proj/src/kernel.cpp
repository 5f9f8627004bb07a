#include "stwomble/kernel.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

namespace stw {

namespace {

constexpr int kMaxDeg = 4;
constexpr int kMaxRadial = 8;  // radial derivatives needed: spatial 4 + temporal 4
using Jet = std::array<double, kMaxDeg + 1>;

const double kFact[] = {1, 1, 2, 6, 24, 120, 720, 5040, 40320};

Jet mul(const Jet& a, const Jet& b, int n) {
    Jet r{};
    for (int k = 0; k <= n; ++k)
        for (int l = 0; l <= k; ++l) r[k] += a[l] * b[k - l];
    return r;
}

Jet recip(const Jet& a, int n) {
    Jet r{};
    r[0] = 1.0 / a[0];
    for (int k = 1; k <= n; ++k) {
        double s = 0;
        for (int l = 1; l <= k; ++l) s += a[l] * r[k - l];
        r[k] = -s * r[0];
    }
    return r;
}

Jet jet_exp(const Jet& w, int n) {
    Jet r{};
    r[0] = std::exp(w[0]);
    for (int k = 1; k <= n; ++k) {
        double s = 0;
        for (int l = 1; l <= k; ++l) s += l * w[l] * r[k - l];
        r[k] = s / k;
    }
    return r;
}

double kappa(Family f) {
    switch (f) {
        case Family::Matern32: return 3.0;
        case Family::Matern52: return 5.0;
        case Family::SqExp: return 1.0;
    }
    return 1.0;
}

// Matern radial profile H(v) = h(sqrt v). Every derivative has the form
// exp(-q) * sum_p c_p q^p with q = sqrt v; d/dv maps R to (R' - R) / (2q).
// Coefficients are rational and kept exact so cancelled negative powers vanish.
struct Frac {
    long long n = 0, d = 1;
};

Frac reduce(long long n, long long d) {
    const long long g = std::gcd(n, d);
    return g ? Frac{n / g, d / g} : Frac{0, 1};
}
Frac operator+(Frac a, Frac b) { return reduce(a.n * b.d + b.n * a.d, a.d * b.d); }
Frac operator*(Frac a, Frac b) { return reduce(a.n * b.n, a.d * b.d); }

using Laurent = std::map<int, Frac>;

Laurent laurent_step(const Laurent& r) {
    Laurent out;
    for (auto [p, cp] : r) {
        if (p != 0) out[p - 2] = out[p - 2] + cp * Frac{p, 2};
        out[p - 1] = out[p - 1] + cp * Frac{-1, 2};
    }
    std::erase_if(out, [](const auto& kv) { return kv.second.n == 0; });
    return out;
}

struct RadialTable {
    std::vector<std::vector<std::pair<int, double>>> terms;  // per derivative order
};

RadialTable build_radial(Family f) {
    Laurent r{{0, {1, 1}}, {1, {1, 1}}};
    if (f == Family::Matern52) r[2] = {1, 3};
    RadialTable t;
    for (int m = 0; m <= kMaxRadial; ++m) {
        std::vector<std::pair<int, double>> row;
        for (auto [p, c] : r) row.emplace_back(p, double(c.n) / double(c.d));
        t.terms.push_back(row);
        r = laurent_step(r);
    }
    return t;
}

const RadialTable& radial(Family f) {
    static const RadialTable m32 = build_radial(Family::Matern32);
    static const RadialTable m52 = build_radial(Family::Matern52);
    return f == Family::Matern32 ? m32 : m52;
}

// m-th derivative of the radial profile at v >= 0.
double radial_deriv(Family f, int m, double v) {
    if (f == Family::SqExp) return ((m & 1) ? -1.0 : 1.0) * std::exp(-v);
    const auto& terms = radial(f).terms[m];
    if (v == 0.0) {
        double c0 = 0;
        for (auto [p, cp] : terms) {
            if (p < 0) return std::numeric_limits<double>::quiet_NaN();
            if (p == 0) c0 = cp;
        }
        return c0;
    }
    const double q = std::sqrt(v);
    double s = 0;
    for (auto [p, cp] : terms) s += cp * std::pow(q, p);
    return s * std::exp(-q);
}

double radial_value(Family f, double v) {
    if (f == Family::SqExp) return std::exp(-v);
    const double q = std::sqrt(v);
    if (f == Family::Matern32) return (1 + q) * std::exp(-q);
    return (1 + q + q * q / 3.0) * std::exp(-q);
}

// d_x^i d_y^j g(x^2 + y^2) = sum over terms of c * x^ex * y^ey * g^(m)(u)
struct SpatialTerm {
    int m;
    double c;
    int ex;
    int ey;
};

std::vector<SpatialTerm> differentiate(const std::vector<SpatialTerm>& in, bool in_x) {
    std::map<std::array<int, 3>, double> acc;
    for (const auto& t : in) {
        const int e = in_x ? t.ex : t.ey;
        std::array<int, 3> up{t.m + 1, t.ex + (in_x ? 1 : 0), t.ey + (in_x ? 0 : 1)};
        acc[up] += 2.0 * t.c;
        if (e > 0) {
            std::array<int, 3> down{t.m, t.ex - (in_x ? 1 : 0), t.ey - (in_x ? 0 : 1)};
            acc[down] += t.c * e;
        }
    }
    std::vector<SpatialTerm> out;
    for (auto& [k, c] : acc)
        if (c != 0.0) out.push_back({k[0], c, k[1], k[2]});
    return out;
}

const std::vector<SpatialTerm>& spatial_terms(int i, int j) {
    static const auto table = [] {
        std::array<std::vector<SpatialTerm>, 25> t;
        for (int i = 0; i <= 4; ++i)
            for (int j = 0; i + j <= 4; ++j) {
                std::vector<SpatialTerm> cur{{0, 1.0, 0, 0}};
                for (int k = 0; k < i; ++k) cur = differentiate(cur, true);
                for (int k = 0; k < j; ++k) cur = differentiate(cur, false);
                t[i * 5 + j] = cur;
            }
        return t;
    }();
    return table[i * 5 + j];
}

// Matched Matern temporal factor h(q): h^(k)(q) = P_k(q) exp(-q), P_{k+1} = P_k' - P_k.
double matched_temporal_deriv(Family f, int k, double q) {
    std::vector<double> poly = {1.0, 1.0};
    if (f == Family::Matern52) poly.push_back(1.0 / 3.0);
    for (int s = 0; s < k; ++s) {
        std::vector<double> next(poly.size(), 0.0);
        for (size_t d = 1; d < poly.size(); ++d) next[d - 1] += d * poly[d];
        for (size_t d = 0; d < poly.size(); ++d) next[d] -= poly[d];
        poly = next;
    }
    double s = 0, qp = 1;
    for (double c : poly) {
        s += c * qp;
        qp *= q;
    }
    return s * std::exp(-q);
}

// Taylor coefficients in tau of the separable temporal factor at dt + tau.
Jet temporal_jet(const KernelParams& p, double dt, int n) {
    const double pt2 = p.phi_t * p.phi_t;
    Jet t{};
    if (p.temporal == TemporalKind::Inverse) {
        Jet a{};
        a[0] = 1 + pt2 * dt * dt;
        a[1] = 2 * pt2 * dt;
        a[2] = pt2;
        return recip(a, n);
    }
    if (p.family == Family::SqExp) {
        Jet w{};
        w[0] = -pt2 * dt * dt;
        w[1] = -2 * pt2 * dt;
        w[2] = -pt2;
        return jet_exp(w, n);
    }
    const double ct = std::sqrt(kappa(p.family)) * p.phi_t;
    const double sg = dt < 0 ? -1.0 : 1.0;
    const double q = ct * std::abs(dt);
    double scale = 1;
    for (int a = 0; a <= n; ++a) {
        t[a] = scale * matched_temporal_deriv(p.family, a, q) / kFact[a];
        scale *= ct * sg;
    }
    return t;
}

double temporal_value(const KernelParams& p, double dt) {
    const double pt2 = p.phi_t * p.phi_t;
    if (p.temporal == TemporalKind::Inverse) return 1.0 / (1 + pt2 * dt * dt);
    if (p.family == Family::SqExp) return std::exp(-pt2 * dt * dt);
    return radial_value(p.family, kappa(p.family) * pt2 * dt * dt);
}

}  // namespace

void KernelParams::validate() const {
    if (!(sigma2 > 0) || !(phi_s > 0) || !(phi_t > 0) || !std::isfinite(sigma2) ||
        !std::isfinite(phi_s) || !std::isfinite(phi_t))
        throw Error("kernel parameters must be positive and finite");
}

int smoothness_limit(Family f) {
    switch (f) {
        case Family::Matern32: return 2;
        case Family::Matern52: return 4;
        case Family::SqExp: return 1 << 20;
    }
    return 0;
}

bool admissible(const KernelParams& p, int a, int b) {
    const int lim = smoothness_limit(p.family);
    return a >= 0 && b >= 0 && a <= lim && b <= lim;
}

double cov(const LagPair& lag, const KernelParams& p) {
    const double u = lag.ds.squaredNorm();
    const double c = kappa(p.family) * p.phi_s * p.phi_s;
    if (!p.separable) {
        const double a = 1 + p.phi_t * p.phi_t * lag.dt * lag.dt;
        return p.sigma2 / a * radial_value(p.family, c * u / a);
    }
    return p.sigma2 * radial_value(p.family, c * u) * temporal_value(p, lag.dt);
}

DerivTable deriv_table(const LagPair& lag, const KernelParams& p, int max_t, int max_s) {
    if (max_t < 0 || max_s < 0 || max_t > kMaxDeg || max_s > 4 || !admissible(p, max_t, max_s))
        throw InadmissibleDerivative(family_name(p.family) + " does not admit temporal order " +
                                     std::to_string(max_t) + " with spatial order " +
                                     std::to_string(max_s));
    const double x = lag.ds.x(), y = lag.ds.y();
    const bool at_origin = std::hypot(x, y) < 1e-8 / p.phi_s;
    const double u = at_origin ? 0.0 : x * x + y * y;
    const double c = kappa(p.family) * p.phi_s * p.phi_s;
    const int n = max_t;
    const int m_hi = at_origin ? max_s / 2 : max_s;

    std::array<Jet, 5> gu{};
    if (!p.separable) {
        const double pt2 = p.phi_t * p.phi_t;
        Jet a{};
        a[0] = 1 + pt2 * lag.dt * lag.dt;
        a[1] = 2 * pt2 * lag.dt;
        a[2] = pt2;
        const Jet b = recip(a, n);
        const double v0 = c * u * b[0];
        Jet eps{};
        for (int k = 1; k <= n; ++k) eps[k] = c * u * b[k];
        const int kmax = (u == 0.0) ? 0 : n;
        std::array<Jet, kMaxDeg + 1> epow{};
        epow[0][0] = 1.0;
        for (int k = 1; k <= kmax; ++k) epow[k] = mul(epow[k - 1], eps, n);
        Jet bp = b;
        double cm = p.sigma2;
        for (int m = 0; m <= m_hi; ++m) {
            Jet h{};
            for (int k = 0; k <= kmax; ++k) {
                const double hd = radial_deriv(p.family, m + k, v0) / kFact[k];
                for (int d = 0; d <= n; ++d) h[d] += hd * epow[k][d];
            }
            gu[m] = mul(bp, h, n);
            for (double& g : gu[m]) g *= cm;
            bp = mul(bp, b, n);
            cm *= c;
        }
    } else {
        const Jet t = temporal_jet(p, lag.dt, n);
        double cm = p.sigma2;
        for (int m = 0; m <= m_hi; ++m) {
            const double hs = cm * radial_deriv(p.family, m, c * u);
            for (int d = 0; d <= n; ++d) gu[m][d] = hs * t[d];
            cm *= c;
        }
    }

    double xp[5] = {1, x, x * x, x * x * x, x * x * x * x};
    double yp[5] = {1, y, y * y, y * y * y, y * y * y * y};
    DerivTable out;
    for (int i = 0; i <= max_s; ++i)
        for (int j = 0; i + j <= max_s; ++j) {
            const auto& terms = spatial_terms(i, j);
            for (int a = 0; a <= n; ++a) {
                double s = 0;
                for (const auto& t : terms) {
                    if (t.m > m_hi || (at_origin && t.ex + t.ey > 0)) continue;
                    s += t.c * xp[t.ex] * yp[t.ey] * gu[t.m][a];
                }
                out.at(a, i, j) = s * kFact[a];
            }
        }
    return out;
}

double cov_deriv(const LagPair& lag, DerivIndex idx, const KernelParams& p) {
    if (idx.a < 0 || idx.i < 0 || idx.j < 0)
        throw InadmissibleDerivative("negative derivative order");
    return deriv_table(lag, p, idx.a, idx.i + idx.j)(idx.a, idx.i, idx.j);
}

double directional_cov(const Eigen::Vector2d& u, int r1, int j1, int r2, int j2,
                       const LagPair& lag, const KernelParams& p) {
    if (j1 < 0 || j2 < 0 || j1 > r1 || j2 > r2)
        throw InadmissibleDerivative("temporal order exceeds total order");
    const int ps = (r1 - j1) + (r2 - j2);
    const int a = j1 + j2;
    const DerivTable t = deriv_table(lag, p, a, ps);
    double s = 0, binom = 1;
    for (int k = 0; k <= ps; ++k) {
        s += binom * std::pow(u.x(), k) * std::pow(u.y(), ps - k) * t(a, k, ps - k);
        binom = binom * (ps - k) / (k + 1);
    }
    return (r2 & 1) ? -s : s;
}

std::string family_name(Family f) {
    switch (f) {
        case Family::Matern32: return "matern32";
        case Family::Matern52: return "matern52";
        case Family::SqExp: return "sqexp";
    }
    return "?";
}

Family parse_family(const std::string& s) {
    if (s == "matern32") return Family::Matern32;
    if (s == "matern52") return Family::Matern52;
    if (s == "sqexp" || s == "gaussian") return Family::SqExp;
    throw ConfigError("unknown kernel family '" + s + "'");
}

}  // namespace stw
