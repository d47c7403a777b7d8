#include "rlt/path_grid.hpp"

#include <stdexcept>

namespace rlt {

Eigen::VectorXd PathGrid::increments() const {
    const Eigen::Index n = values.size() - 1;
    return values.tail(n) - values.head(n);
}

void PathGrid::validate() const {
    if (!(delta_n > 0.0))
        throw std::invalid_argument("PathGrid: delta_n must be positive");
    if (values.size() < 2)
        throw std::invalid_argument("PathGrid: need at least two levels");
    if (!values.allFinite())
        throw std::invalid_argument("PathGrid: levels must be finite");
}

} // namespace rlt
