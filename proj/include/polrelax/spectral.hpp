// spectral.hpp - frequency grids, Lorentzian line shapes and stick spectra
//
// All energies and frequencies are in atomic units (hbar = 1).

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace polrelax {

// Thrown when an eigensolver does not converge or a numerical invariant that
// the caller cannot repair is violated.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Stick {
    double frequency{0.0};
    double weight{0.0};
};

// Frequency grid paired with real values.
struct SpectralFunction {
    std::vector<double> omega;
    std::vector<double> value;

    std::size_t size() const noexcept { return omega.size(); }
};

// Unit-area Lorentzian (gamma/pi) / ((x - center)^2 + gamma^2).
inline double lorentzian(double x, double center, double gamma) noexcept {
    const double d = x - center;
    return (gamma / 3.14159265358979323846) / (d * d + gamma * gamma);
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t points);

// Throws std::invalid_argument unless the grid has >= 2 strictly increasing points.
void require_increasing(std::span<const double> grid, const std::string& what);

// Per-node trapezoid quadrature weights, so that sum_i w_i f_i = trapz(f).
std::vector<double> trapezoid_weights(std::span<const double> grid);

double trapezoid(std::span<const double> grid, std::span<const double> values);

// Sticks convolved with a unit-area Lorentzian of half-width gamma.
SpectralFunction broaden(std::span<const Stick> sticks, std::span<const double> grid,
                         double gamma);

// Grid-resolved delta functions: each stick is split onto its two bracketing
// nodes (hat-function weights) and divided by the node quadrature weight, so
// trapezoid(grid, result * f) equals sum_k w_k * f(omega_k) with f linearly
// interpolated. Sticks outside the grid are dropped.
SpectralFunction deposit_sticks(std::span<const Stick> sticks, std::span<const double> grid);

// Merge sticks whose frequencies differ by at most tol (weights summed,
// frequency is the weight-averaged position). Output sorted by frequency.
std::vector<Stick> coalesce(std::span<const Stick> sticks, double tol);

double total_weight(std::span<const Stick> sticks) noexcept;

}  // namespace polrelax
