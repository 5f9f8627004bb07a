#include "stwomble/data.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "stwomble/errors.hpp"

namespace stw {

void Dataset::validate() const {
    const int N = n();
    if (y.size() != N || X.rows() != N) throw ShapeMismatch("dataset rows disagree across coords, y and X");
    if (X.cols() < 1) throw ShapeMismatch("design matrix needs an intercept column");
    for (const auto& c : coords)
        if (!std::isfinite(c.x) || !std::isfinite(c.y) || !std::isfinite(c.t))
            throw GeometryError("non-finite coordinate");
    std::vector<int> order(N);
    for (int i = 0; i < N; ++i) order[i] = i;
    auto key = [&](int i) { return std::tie(coords[i].x, coords[i].y, coords[i].t); };
    std::sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });
    for (int k = 1; k < N; ++k)
        if (key(order[k]) == key(order[k - 1]))
            throw DuplicateCoordinate("duplicate space-time coordinate at rows " + std::to_string(order[k - 1]) +
                                      " and " + std::to_string(order[k]));
}

Dataset make_dataset(std::vector<Point> coords, Eigen::VectorXd y) {
    Dataset d;
    d.coords = std::move(coords);
    d.y = std::move(y);
    d.X = Eigen::MatrixXd::Ones(d.n(), 1);
    return d;
}

}  // namespace stw
