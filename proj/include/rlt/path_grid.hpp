#pragma once

#include <Eigen/Dense>

namespace rlt {

/// An equidistantly sampled path: levels x(0), x(delta_n), ..., x(n*delta_n).
/// values holds the n+1 levels; the time span covered is n * delta_n in the
/// same units as delta_n (days throughout this project: delta_n = 1/m for m
/// observations per day).
struct PathGrid {
    double delta_n = 0.0;
    Eigen::VectorXd values;

    /// Number of increments n (one less than the number of levels).
    Eigen::Index n_increments() const { return values.size() - 1; }

    /// Time covered by the grid, n * delta_n.
    double t_span() const { return static_cast<double>(n_increments()) * delta_n; }

    /// First differences of the levels (length n).
    Eigen::VectorXd increments() const;

    /// Throws std::invalid_argument unless delta_n > 0, at least two levels
    /// are present and every level is finite.
    void validate() const;
};

} // namespace rlt
