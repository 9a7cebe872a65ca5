#include "polrelax/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace polrelax {

std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
    if (points < 2) throw std::invalid_argument("uniform_grid: need at least 2 points");
    if (!(hi > lo)) throw std::invalid_argument("uniform_grid: upper bound must exceed lower bound");
    std::vector<double> grid(points);
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) grid[i] = lo + step * static_cast<double>(i);
    grid.back() = hi;
    return grid;
}

void require_increasing(std::span<const double> grid, const std::string& what) {
    if (grid.size() < 2) throw std::invalid_argument(what + ": grid needs at least 2 points");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw std::invalid_argument(what + ": grid is not strictly increasing");
        }
    }
}

std::vector<double> trapezoid_weights(std::span<const double> grid) {
    const std::size_t n = grid.size();
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = 0.5 * (grid[i + 1] - grid[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    return w;
}

double trapezoid(std::span<const double> grid, std::span<const double> values) {
    if (grid.size() != values.size()) throw std::invalid_argument("trapezoid: size mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        sum += 0.5 * (grid[i + 1] - grid[i]) * (values[i] + values[i + 1]);
    }
    return sum;
}

SpectralFunction broaden(std::span<const Stick> sticks, std::span<const double> grid,
                         double gamma) {
    require_increasing(grid, "broaden");
    if (!(gamma > 0.0)) throw std::invalid_argument("broaden: gamma must be positive");
    SpectralFunction out{{grid.begin(), grid.end()}, std::vector<double>(grid.size(), 0.0)};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double v = 0.0;
        for (const auto& s : sticks) v += s.weight * lorentzian(grid[i], s.frequency, gamma);
        out.value[i] = v;
    }
    return out;
}

SpectralFunction deposit_sticks(std::span<const Stick> sticks, std::span<const double> grid) {
    require_increasing(grid, "deposit_sticks");
    SpectralFunction out{{grid.begin(), grid.end()}, std::vector<double>(grid.size(), 0.0)};
    const auto w = trapezoid_weights(grid);
    for (const auto& s : sticks) {
        if (s.frequency < grid.front() || s.frequency > grid.back()) continue;
        auto it = std::upper_bound(grid.begin(), grid.end(), s.frequency);
        std::size_t hi = static_cast<std::size_t>(it - grid.begin());
        if (hi == grid.size()) hi = grid.size() - 1;
        const std::size_t lo = hi - 1;
        const double t = (s.frequency - grid[lo]) / (grid[hi] - grid[lo]);
        out.value[lo] += s.weight * (1.0 - t) / w[lo];
        out.value[hi] += s.weight * t / w[hi];
    }
    return out;
}

std::vector<Stick> coalesce(std::span<const Stick> sticks, double tol) {
    std::vector<Stick> sorted(sticks.begin(), sticks.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Stick& a, const Stick& b) { return a.frequency < b.frequency; });
    std::vector<Stick> out;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i + 1;
        double wsum = sorted[i].weight;
        double fsum = sorted[i].weight * sorted[i].frequency;
        double first = sorted[i].frequency;
        while (j < sorted.size() && sorted[j].frequency - first <= tol) {
            wsum += sorted[j].weight;
            fsum += sorted[j].weight * sorted[j].frequency;
            ++j;
        }
        const double freq = wsum > 0.0 ? fsum / wsum : first;
        out.push_back({freq, wsum});
        i = j;
    }
    return out;
}

double total_weight(std::span<const Stick> sticks) noexcept {
    double s = 0.0;
    for (const auto& st : sticks) s += st.weight;
    return s;
}

}  // namespace polrelax
