// rates.hpp - Fermi-golden-rule relaxation rates out of dark (incoherent)
// exciton states: radiative pumping, photon recycling, vibrational relaxation
// and polariton-assisted Raman scattering. Rates are in inverse atomic time.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polrelax/polariton.hpp"
#include "polrelax/spectral.hpp"
#include "polrelax/vibronic.hpp"

namespace polrelax {

struct RateContribution {
    std::string label;
    double value{0.0};
};

struct RateResult {
    double total{0.0};
    std::vector<RateContribution> per_final_state;  // largest first
    std::optional<SpectralFunction> frequency_resolved;
    std::map<std::string, double> channels;

    // Flat (label, value) records: "total", "channel:<name>", then the
    // per-final-state contributions.
    std::vector<std::pair<std::string, double>> records() const;
};

// Sorts contributions (largest first, ties by label) and drops the smallest
// ones as long as their accumulated sum stays below `relative_cut` of the
// total. The total itself is the untruncated sum.
void finalize(RateResult& result, double relative_cut = 1e-15);

RateResult radiative_pumping_sum(const StokesShiftedState& ss, const VibrationalBasis& basis,
                                 const PolaritonEigensystem& eig, const CavityModel& cavity);

// sigma_em is resampled (linearly) onto the response grid when the grids
// differ; the resampled emission must keep its integral to `resample_tolerance`.
RateResult radiative_pumping_overlap(const SpectralFunction& sigma_em, const LinearResponse& lr,
                                     const CavityModel& cavity, double resample_tolerance = 1e-3);

struct RecyclingResult {
    RateResult rate;
    SpectralFunction reabsorption_ratio;  // A / (2T) where T > 1e-30
};

RecyclingResult recycling_rate(const SpectralFunction& sigma_em, const LinearResponse& lr,
                               const CavityModel& cavity, double resample_tolerance = 1e-3);

enum class RelaxationVariant { full4, reduced2, litinskaya };

struct BranchRates {
    RateResult upper;  // xi = +
    RateResult lower;  // xi = -
};

// Rate from the dark state carrying one ground-state phonon in vibrational
// state k (0-based, k >= 1) into the upper/lower polariton. Requires zero
// detuning.
BranchRates vibrational_relaxation(std::size_t k, const VibronicCouplingMatrix& veg,
                                   const VibrationalBasis& basis, const MoleculeModel& molecule,
                                   const CavityModel& cavity, RelaxationVariant variant);

// Pairs (i, j) whose emission weights |c_i|^2 and |c_j|^2 both fall below
// weight_cut are skipped.
RateResult raman_scattering(const StokesShiftedState& ss, const PolaritonEigensystem& eig,
                            const VibrationalBasis& basis, const CavityModel& cavity,
                            double weight_cut = 1e-10);

const char* variant_name(RelaxationVariant v) noexcept;

}  // namespace polrelax
