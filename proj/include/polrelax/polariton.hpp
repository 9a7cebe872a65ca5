// polariton.hpp - phonon-sector blocks of the bosonic polariton Hamiltonian in
// the first excitation manifold, their eigensystems, and the cavity linear
// response (photon Green's function, absorption, transmission).

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "polrelax/spectral.hpp"
#include "polrelax/vibronic.hpp"

namespace polrelax {

struct CavityModel {
    double cavity_frequency{0.0};     // w_c
    double collective_coupling{0.0};  // g sqrt(N)
    std::int64_t molecules{1};        // N
    double kappa{0.0};                // cavity linewidth
    double gamma_xi{0.0};             // eigenstate broadening
    double electronic_gap{0.0};       // w_0, for the detuning

    void validate() const;
    double single_coupling() const noexcept;  // g = g sqrt(N) / sqrt(N)
    double detuning() const noexcept { return cavity_frequency - electronic_gap; }
};

// Ground-state molecules carrying phonons, as a multiset of vibrational basis
// indices (each > 0). Empty for the block with every ground-state molecule in
// the vibrational ground state.
struct Sector {
    std::vector<std::size_t> phonon_states;

    std::size_t excited_molecules() const noexcept { return phonon_states.size(); }
};

// Row/column 0 is the photon, rows 1..m the excited molecule in vibrational
// state i (with the sector's ground-state phonons as spectators).
struct PolaritonBlock {
    Sector sector;
    Eigen::MatrixXd matrix;
    double effective_coupling{0.0};  // g sqrt(N - M)
    double sector_energy{0.0};       // sum over sector phonons of w_g,j
};

struct PolaritonEigensystem {
    Eigen::VectorXd energies;  // ascending
    Eigen::MatrixXd vectors;   // column xi; row 0 photon, row i matter state i-1

    std::size_t size() const noexcept { return static_cast<std::size_t>(energies.size()); }
    std::size_t matter_states() const noexcept { return size() - 1; }
    double photon(std::size_t xi) const { return vectors(0, static_cast<Eigen::Index>(xi)); }
    double matter(std::size_t xi, std::size_t i) const {
        return vectors(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(xi));
    }
};

struct TavisCummingsPolaritons {
    double lower{0.0};
    double upper{0.0};
    double photon_lower{0.0};  // c^(ph) of each branch
    double photon_upper{0.0};
    double matter_lower{0.0};  // c^(exc) on the Franck-Condon state
    double matter_upper{0.0};
};

struct LinearResponse {
    std::vector<double> omega;
    std::vector<std::complex<double>> green;  // D^R
    std::vector<double> absorption;           // A
    std::vector<double> transmission;         // T

    std::size_t size() const noexcept { return omega.size(); }
    std::vector<double> minus_im_green() const;
};

PolaritonBlock build_block(const Sector& sector, const VibronicCouplingMatrix& veg,
                           const VibrationalBasis& basis, const CavityModel& cavity);

PolaritonEigensystem diagonalize(const PolaritonBlock& block);
// Symmetric matrix with the same row layout as a block; used by the oracles.
PolaritonEigensystem diagonalize(const Eigen::MatrixXd& symmetric);

TavisCummingsPolaritons tc_polaritons(const CavityModel& cavity);

LinearResponse photon_green_function(const PolaritonEigensystem& eig, double gamma_xi,
                                     std::span<const double> grid);

// T = (kappa^2/4)|D^R|^2 and A = kappa(-Im D^R) - 2T, for equal mirror losses.
void absorption_transmission(LinearResponse& response, double kappa);

// Default frequency grid: [lo - margin, hi + margin] with margin = 20 gamma,
// where [lo, hi] covers the eigenvalues with photon weight above 1e-12 and the
// extra points supplied (e.g. emission lines).
std::vector<double> default_grid(const PolaritonEigensystem& eig, double gamma,
                                 std::span<const double> extra = {},
                                 std::size_t points = 20001);

// Frequency of the lowest local maximum of `curve` that reaches at least
// `fraction` of its global maximum.
double lowest_band_peak(std::span<const double> grid, std::span<const double> curve,
                        double fraction = 0.1);

}  // namespace polrelax
