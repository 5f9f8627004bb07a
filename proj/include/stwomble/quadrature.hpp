#pragma once

#include <vector>

namespace stw {

struct Rule1D {
    std::vector<double> x, w;  // on [0, 1], weights sum to 1
};

// Gauss-Legendre rule with n nodes mapped to [0, 1]. Cached per n.
const Rule1D& gauss_legendre(int n);

struct TriNode {
    double omega, upsilon, w;
};

// Collapsed tensor rule on {omega, upsilon >= 0, omega + upsilon <= 1}; weights sum to 1/2.
const std::vector<TriNode>& triangle_rule(int n);

}  // namespace stw
