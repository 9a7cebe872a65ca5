// vibronic.hpp - single-molecule vibronic structure for a multi-mode linear
// vibronic coupling model:
//
//   H_m = sum_k w_k b_k^+ b_k + [ w_0 + sum_k w_k sqrt(s_k) (b_k^+ + b_k) ] |e><e|
//
// The ground-state vibrational eigenstates (harmonic number states) are used as
// the basis for both electronic states. Energies are measured from the
// vibrational ground state, so the all-zeros occupation has energy 0.

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "polrelax/spectral.hpp"

namespace polrelax {

struct VibrationalMode {
    double frequency{0.0};   // w_nu > 0
    double huang_rhys{0.0};  // s >= 0
    int max_quanta{0};       // per-mode cap n_max >= 0

    void validate() const;
};

struct MoleculeModel {
    double electronic_gap{0.0};  // w_0
    std::vector<VibrationalMode> modes;
    int total_quanta_cap{0};

    void validate() const;

    // w_0 - sum_k w_k s_k : bottom of the displaced excited-state surface.
    double adiabatic_minimum() const noexcept;
    // w_0 + sum_k w_k s_k : the "vertical transition" cavity setting used for
    // the radiative pumping and Raman parameter sets.
    double vertical_resonance() const noexcept;
    // sum_k w_k s_k
    double reorganization_energy() const noexcept;
};

using Occupation = std::vector<int>;

struct VibrationalBasis {
    std::vector<Occupation> states;
    std::vector<double> energies;  // w_g,i

    std::size_t size() const noexcept { return states.size(); }
    std::optional<std::size_t> index_of(const Occupation& occ) const;
    // Total number of quanta in state i.
    int quanta(std::size_t i) const;
};

// Excited-state vibronic block in the ground vibrational basis:
// diag(w_e,i) + V_eg (off-diagonal).
struct VibronicCouplingMatrix {
    Eigen::VectorXd excited_energies;  // w_e,i = w_g,i + w_0 for the linear model
    Eigen::MatrixXd coupling;          // V_eg,ij, zero diagonal, symmetric

    std::size_t dimension() const noexcept { return static_cast<std::size_t>(excited_energies.size()); }
    Eigen::MatrixXd excited_block() const;
    // Number of nonzero off-diagonal entries (both triangles).
    std::size_t off_diagonal_nonzeros() const;
};

// Full eigendecomposition of the excited vibronic block, eigenvalues ascending,
// each eigenvector's largest-magnitude component made positive.
struct VibronicEigensystem {
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;
};

struct StokesShiftedState {
    Eigen::VectorXd coefficients;  // c_exc^(i), unit norm
    double energy{0.0};            // w_ss
    double fc_leak{0.0};           // |c_exc^(1)|^2, overlap with the Franck-Condon state
};

struct BareSpectrum {
    std::vector<Stick> sticks;
    SpectralFunction broadened;
    double broadening{0.0};
};

enum class AbsorptionScale {
    unit,      // weights sum to one
    ensemble,  // weights multiplied by pi * N * g^2
};

VibrationalBasis enumerate_basis(const MoleculeModel& molecule);

VibronicCouplingMatrix build_veg(const VibrationalBasis& basis, const MoleculeModel& molecule);

VibronicEigensystem diagonalize_excited(const VibronicCouplingMatrix& veg);

StokesShiftedState stokes_shifted_state(const VibronicCouplingMatrix& veg);
StokesShiftedState stokes_shifted_state(const VibronicEigensystem& eig);

// Sticks at w_ss - w_g,j with weights |c_exc^(j)|^2. The Franck-Condon
// (0-0) line j = 1 is excluded unless include_origin is set.
BareSpectrum bare_emission(const StokesShiftedState& ss, const VibrationalBasis& basis,
                           double gamma_mol, std::span<const double> grid,
                           bool include_origin = false);

BareSpectrum bare_absorption(const VibronicEigensystem& eig, double gamma_mol,
                             std::span<const double> grid,
                             AbsorptionScale scale = AbsorptionScale::unit,
                             double ensemble_coupling_sq = 0.0);
BareSpectrum bare_absorption(const VibronicCouplingMatrix& veg, double gamma_mol,
                             std::span<const double> grid,
                             AbsorptionScale scale = AbsorptionScale::unit,
                             double ensemble_coupling_sq = 0.0);

struct ConvergedMolecule {
    MoleculeModel molecule;  // with the final caps
    VibrationalBasis basis;
    VibronicCouplingMatrix veg;
    VibronicEigensystem eigensystem;
    int iterations{0};
    bool converged{false};
    double last_change{0.0};  // max |delta weight| of the final comparison
};

// Grow the per-mode and total caps until the emission stick weights change
// by less than epsilon between successive bases.
ConvergedMolecule converge_basis(const MoleculeModel& start, double epsilon = 1e-6,
                                 int max_iterations = 40);

// Build basis, coupling matrix and eigensystem at fixed caps.
ConvergedMolecule fixed_basis(const MoleculeModel& molecule);

// Flip eigenvector signs so that the largest-magnitude component of each
// column is positive (first such index wins ties).
void normalize_signs(Eigen::MatrixXd& vectors);

}  // namespace polrelax
