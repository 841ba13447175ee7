#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace cogarch::optim {

using Point = std::vector<double>;
using Objective = std::function<double(const Point&)>;

struct NelderMeadOptions {
    /// Stop when max_j ||x_j - x_best||_inf ≤ xtol.
    double xtol = 1e-14;
    std::size_t max_iterations = 20000;
};

struct NelderMeadResult {
    Point argmin;
    double value = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    /// Final max_j ||x_j - x_best||_inf.
    double spread = 0.0;
    bool converged = false;
};

/// Simplex of d+1 vertices around `start`: start and start + step_j e_j.
std::vector<Point> axis_simplex(const Point& start, const Point& steps);

/**
 * Minimizes `f` by the Nelder–Mead simplex method with reflection 1,
 * expansion 2, contraction 1/2 and shrink 1/2. Non-finite values are treated
 * as +inf. Throws ValidationError for a degenerate (affinely dependent) simplex.
 */
NelderMeadResult nelder_mead(const Objective& f, std::vector<Point> simplex,
                             const NelderMeadOptions& options = {});

}  // namespace cogarch::optim
