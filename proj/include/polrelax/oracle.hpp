// oracle.hpp - brute-force checks at small N: the first-quantized many-molecule
// Hamiltonian, its permutation-symmetric subspace, comparison against the
// bosonic Hamiltonian, and explicit Fermi-golden-rule sums.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "polrelax/fock.hpp"
#include "polrelax/polariton.hpp"
#include "polrelax/vibronic.hpp"

namespace polrelax {

// One molecule's vibronic state: electronic * m + vibrational.
struct MolecularConfig {
    std::vector<int> local;
    int photons{0};

    bool operator<(const MolecularConfig& o) const {
        return local != o.local ? local < o.local : photons < o.photons;
    }
    bool operator==(const MolecularConfig& o) const = default;
};

struct FirstQuantizedSystem {
    int molecules{0};
    std::size_t vib_states{0};
    int excitations{0};            // N_exc; also the photon cutoff
    std::size_t full_dimension{0};  // (2m)^N (N_exc + 1)
    std::vector<MolecularConfig> configs;  // the N_exc manifold
    std::map<MolecularConfig, std::size_t> index;
    Eigen::SparseMatrix<double> hamiltonian;

    std::size_t dimension() const noexcept { return configs.size(); }
    bool excited(int local) const noexcept { return static_cast<std::size_t>(local) >= vib_states; }
    std::size_t vibration(int local) const noexcept { return static_cast<std::size_t>(local) % vib_states; }
};

constexpr std::size_t kOracleDimensionCap = 1000000;

FirstQuantizedSystem build_first_quantized(const VibrationalBasis& basis, const VibronicCouplingMatrix& veg,
                                           double cavity_frequency, double single_coupling,
                                           int molecules, int excitations);
FirstQuantizedSystem build_first_quantized(const MoleculeModel& molecule, double cavity_frequency,
                                           double single_coupling, int molecules, int excitations);

// Largest |H(P r, P c) - H(r, c)| over all transpositions P of molecule labels,
// including entries that appear in only one of the two patterns.
double permutation_deviation(const FirstQuantizedSystem& sys);

struct SymmetricSubspace {
    Eigen::MatrixXd vectors;           // columns: normalized orbit sums
    std::vector<FockState> labels;     // bosonic occupation of each column
    std::vector<std::size_t> orbit_sizes;

    std::size_t size() const noexcept { return labels.size(); }
};

SymmetricSubspace symmetric_projector(const FirstQuantizedSystem& sys);

struct MappingReport {
    std::size_t symmetric_dimension{0};
    std::size_t bosonic_dimension{0};
    double max_eigenvalue_deviation{0.0};
    double max_element_deviation{0.0};
};

MappingReport verify_mapping(const FirstQuantizedSystem& sys, const SymmetricSubspace& sub,
                             const BosonicParameters& params);

struct ConservationReport {
    double excitation_commutator{0.0};  // Frobenius norm of [H, N_exc]
    double molecule_commutator{0.0};    // Frobenius norm of [H, N]
};

ConservationReport verify_conservation(const Eigen::SparseMatrix<double>& h, const FockBasis& basis);

// N x N single-excitation site density matrix, tracing vibrations and photon,
// of a first-quantized state vector. Components with a photon or more than one
// electronic excitation are ignored.
Eigen::MatrixXd reduced_electronic_density(const FirstQuantizedSystem& sys, const Eigen::VectorXd& state);

struct DiagonalBlock {
    std::vector<std::size_t> indices;  // ascending
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;           // rows follow `indices`
};

// Connected components of the nonzero pattern, each diagonalized.
std::vector<DiagonalBlock> block_diagonalize(const Eigen::MatrixXd& h);

// 2 pi sum_f |<f|V|i>|^2 L(E_f - E_i; gamma) over the given final states.
double fgr_oracle(const Eigen::VectorXd& initial, double initial_energy, const Eigen::MatrixXd& perturbation,
                  const Eigen::VectorXd& final_energies, const Eigen::MatrixXd& final_vectors, double gamma);

struct BranchOracle {
    double upper{0.0};
    double lower{0.0};
    double initial_energy{0.0};
    std::size_t fock_dimension{0};
};

// Relaxation out of the dark state with one phonon in vibrational state k:
// H0 is the bosonic Hamiltonian without the vibronic off-diagonal couplings,
// V is that coupling, and the final states are the highest (upper) and lowest
// (lower) photon-carrying eigenstates of every block of H0.
BranchOracle dark_state_relaxation(std::size_t k, const VibrationalBasis& basis,
                                   const VibronicCouplingMatrix& veg, const CavityModel& cavity);

struct CheckRecord {
    std::string name;
    double value{0.0};
    double threshold{0.0};
    bool passed{false};
};

struct OracleReport {
    std::vector<CheckRecord> checks;

    void add(std::string name, double value, double threshold);
    bool all_passed() const noexcept;
    std::string to_json() const;
};

}  // namespace polrelax
