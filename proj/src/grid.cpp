#include "cogarch/grid.hpp"

#include "cogarch/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cogarch {

Grid::Grid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.size() < 2) {
        throw ValidationError("grid needs at least one cell");
    }
    if (times_.front() != 0.0) {
        throw ValidationError("grid must start at t = 0");
    }
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (!std::isfinite(times_[i]) || !(times_[i] > times_[i - 1])) {
            throw ValidationError("grid times must be strictly increasing (index " +
                                  std::to_string(i) + ")");
        }
        mesh_ = std::max(mesh_, times_[i] - times_[i - 1]);
    }
}

Grid Grid::uniform(double horizon, std::size_t cells) {
    if (!(horizon > 0.0)) throw ValidationError("T must be positive");
    if (cells == 0) throw ValidationError("grid needs at least one cell");
    std::vector<double> t(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) {
        t[i] = horizon * static_cast<double>(i) / static_cast<double>(cells);
    }
    t.back() = horizon;
    return Grid(std::move(t));
}

Grid Grid::from_spacings(std::span<const double> spacings) {
    std::vector<double> t;
    t.reserve(spacings.size() + 1);
    t.push_back(0.0);
    for (double d : spacings) {
        if (!(d > 0.0)) throw ValidationError("grid spacings must be positive");
        t.push_back(t.back() + d);
    }
    return Grid(std::move(t));
}

std::vector<double> Grid::spacings() const {
    std::vector<double> d(cells());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = times_[k + 1] - times_[k];
    return d;
}

std::size_t Grid::cell_of(double t) const {
    if (t < 0.0 || t > horizon()) throw ValidationError("time outside grid");
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t k = static_cast<std::size_t>(it - times_.begin());
    return std::min(k == 0 ? 0 : k - 1, cells() - 1);
}

bool Grid::refines(const Grid& coarse, double tol) const {
    const double scale = tol * std::max(1.0, horizon());
    for (double t : coarse.times()) {
        auto it = std::lower_bound(times_.begin(), times_.end(), t - scale);
        if (it == times_.end() || std::abs(*it - t) > scale) return false;
    }
    return true;
}

}  // namespace cogarch
