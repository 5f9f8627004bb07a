#include "stwomble/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace stw {

namespace {

Rule1D compute_gl(int n) {
    Rule1D r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton on P_n from the Chebyshev-like initial guess
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5)), dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1;
            dp = n * (z * p1 - p0) / (z * z - 1);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        r.x[n - 1 - i] = 0.5 * (1 + z);
        r.w[n - 1 - i] = 1.0 / ((1 - z * z) * dp * dp);
    }
    return r;
}

std::mutex cache_mu;

}  // namespace

const Rule1D& gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("quadrature order must be positive");
    static std::map<int, Rule1D> cache;
    std::lock_guard<std::mutex> lock(cache_mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gl(n)).first;
    return it->second;
}

const std::vector<TriNode>& triangle_rule(int n) {
    static std::map<int, std::vector<TriNode>> cache;
    const Rule1D& g = gauss_legendre(n);
    std::lock_guard<std::mutex> lock(cache_mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<TriNode> nodes;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const double xi = g.x[a], eta = g.x[b];
            nodes.push_back({xi * (1 - eta), xi * eta, g.w[a] * g.w[b] * xi});
        }
    return cache.emplace(n, std::move(nodes)).first->second;
}

}  // namespace stw
