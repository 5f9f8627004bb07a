#pragma once

#include <vector>

#include <Eigen/Dense>

namespace stw {

struct Point {
    double x = 0, y = 0, t = 0;
};

struct Dataset {
    std::vector<Point> coords;
    Eigen::VectorXd y;
    Eigen::MatrixXd X;  // first column is the intercept

    int n() const { return int(coords.size()); }
    int p() const { return int(X.cols()); }
    // Throws ShapeMismatch, GeometryError for non-finite coordinates, DuplicateCoordinate.
    void validate() const;
};

// Intercept-only design for the given coordinates.
Dataset make_dataset(std::vector<Point> coords, Eigen::VectorXd y);

}  // namespace stw
