#include "cogarch/nelder_mead.hpp"

#include "cogarch/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cogarch::optim {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

double safe_eval(const Objective& f, const Point& x, std::size_t& evals) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

/// c + coef (c - w)
Point along(const Point& c, const Point& w, double coef) {
    Point x(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) x[i] = c[i] + coef * (c[i] - w[i]);
    return x;
}

void check_simplex(const std::vector<Point>& simplex) {
    const std::size_t n = simplex.size();
    if (n < 2) throw ValidationError("simplex needs at least two vertices");
    const std::size_t d = simplex.front().size();
    if (d + 1 != n) throw ValidationError("simplex must have dimension + 1 vertices");
    Eigen::MatrixXd edges(d, d);
    double scale = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
        if (simplex[j].size() != d) throw ValidationError("simplex vertices differ in dimension");
        for (std::size_t i = 0; i < d; ++i) {
            edges(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j - 1)) = simplex[j][i] - simplex[0][i];
            scale = std::max(scale, std::abs(simplex[j][i] - simplex[0][i]));
        }
    }
    for (const Point& p : simplex) {
        for (double v : p) {
            if (!std::isfinite(v)) throw ValidationError("simplex vertex is not finite");
        }
    }
    if (scale == 0.0) throw ValidationError("degenerate simplex");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(edges / scale);
    lu.setThreshold(1e-10);
    if (lu.rank() < static_cast<Eigen::Index>(d)) throw ValidationError("degenerate simplex");
}

}  // namespace

std::vector<Point> axis_simplex(const Point& start, const Point& steps) {
    if (steps.size() != start.size()) throw ValidationError("step vector size mismatch");
    std::vector<Point> simplex{start};
    for (std::size_t j = 0; j < start.size(); ++j) {
        Point v = start;
        v[j] += steps[j];
        simplex.push_back(std::move(v));
    }
    return simplex;
}

NelderMeadResult nelder_mead(const Objective& f, std::vector<Point> simplex,
                             const NelderMeadOptions& options) {
    check_simplex(simplex);
    const std::size_t n = simplex.size();
    const std::size_t d = n - 1;

    NelderMeadResult result;
    std::vector<double> values(n);
    for (std::size_t j = 0; j < n; ++j) values[j] = safe_eval(f, simplex[j], result.evaluations);

    std::vector<std::size_t> order(n);
    auto sort_vertices = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<Point> s(n);
        std::vector<double> v(n);
        for (std::size_t j = 0; j < n; ++j) {
            s[j] = std::move(simplex[order[j]]);
            v[j] = values[order[j]];
        }
        simplex = std::move(s);
        values = std::move(v);
    };
    auto spread = [&] {
        double worst = 0.0;
        for (std::size_t j = 1; j < n; ++j) {
            for (std::size_t i = 0; i < d; ++i) {
                worst = std::max(worst, std::abs(simplex[j][i] - simplex[0][i]));
            }
        }
        return worst;
    };

    while (true) {
        sort_vertices();
        result.spread = spread();
        if (result.spread <= options.xtol) {
            result.converged = true;
            break;
        }
        if (result.iterations >= options.max_iterations) break;
        ++result.iterations;

        Point centroid(d, 0.0);
        for (std::size_t j = 0; j < d; ++j) {
            for (std::size_t i = 0; i < d; ++i) centroid[i] += simplex[j][i];
        }
        for (double& c : centroid) c /= static_cast<double>(d);

        const Point& worst = simplex[d];
        Point xr = along(centroid, worst, kReflect);
        const double fr = safe_eval(f, xr, result.evaluations);

        if (fr < values[0]) {
            Point xe = along(centroid, worst, kExpand);
            const double fe = safe_eval(f, xe, result.evaluations);
            if (fe < fr) {
                simplex[d] = std::move(xe);
                values[d] = fe;
            } else {
                simplex[d] = std::move(xr);
                values[d] = fr;
            }
            continue;
        }
        if (fr < values[d - 1]) {
            simplex[d] = std::move(xr);
            values[d] = fr;
            continue;
        }

        bool accepted = false;
        if (fr < values[d]) {
            Point xc = along(centroid, worst, kReflect * kContract);
            const double fc = safe_eval(f, xc, result.evaluations);
            if (fc <= fr) {
                simplex[d] = std::move(xc);
                values[d] = fc;
                accepted = true;
            }
        } else {
            Point xc = along(centroid, worst, -kContract);
            const double fc = safe_eval(f, xc, result.evaluations);
            if (fc < values[d]) {
                simplex[d] = std::move(xc);
                values[d] = fc;
                accepted = true;
            }
        }
        if (accepted) continue;

        for (std::size_t j = 1; j < n; ++j) {
            for (std::size_t i = 0; i < d; ++i) {
                simplex[j][i] = simplex[0][i] + kShrink * (simplex[j][i] - simplex[0][i]);
            }
            values[j] = safe_eval(f, simplex[j], result.evaluations);
        }
    }

    result.argmin = simplex[0];
    result.value = values[0];
    return result;
}

}  // namespace cogarch::optim
