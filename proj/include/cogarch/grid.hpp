#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cogarch {

/**
 * Deterministic partition 0 = t_0 < t_1 < ... < t_N = T.
 *
 * Cells are 0-based: cell k spans [t_k, t_{k+1}) and has length spacing(k).
 */
class Grid {
public:
    explicit Grid(std::vector<double> times);

    static Grid uniform(double horizon, std::size_t cells);
    static Grid from_spacings(std::span<const double> spacings);

    [[nodiscard]] std::size_t cells() const noexcept { return times_.size() - 1; }
    [[nodiscard]] double horizon() const noexcept { return times_.back(); }
    [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
    [[nodiscard]] double time(std::size_t i) const { return times_.at(i); }
    [[nodiscard]] double spacing(std::size_t cell) const { return times_.at(cell + 1) - times_.at(cell); }
    [[nodiscard]] std::vector<double> spacings() const;
    /// Largest cell length.
    [[nodiscard]] double mesh() const noexcept { return mesh_; }

    /// Index k of the cell [t_k, t_{k+1}) containing t; t = T maps to the last cell.
    [[nodiscard]] std::size_t cell_of(double t) const;

    /// True if every time of `coarse` is also a time of this grid (up to tol).
    [[nodiscard]] bool refines(const Grid& coarse, double tol = 1e-9) const;

private:
    std::vector<double> times_;
    double mesh_ = 0.0;
};

}  // namespace cogarch
