// fock.hpp - sparse bosonic Hamiltonians on explicit occupation-number bases.
//
// Mode layout for N molecules with m vibrational states:
//   mode 0         photon a
//   modes 1..m     b_i  (ground-state molecule in vibrational state i-1)
//   modes m+1..2m  B_i  (excited molecule in vibrational state i-1)

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "polrelax/vibronic.hpp"

namespace polrelax {

using FockState = std::vector<int>;

struct LadderOp {
    std::size_t mode{0};
    bool creation{false};
};

// coefficient * ops[0] ops[1] ... ops[n-1] (rightmost acts first).
struct OperatorTerm {
    double coefficient{0.0};
    std::vector<LadderOp> ops;
};

class FockBasis {
public:
    FockBasis() = default;
    explicit FockBasis(std::vector<FockState> states);

    std::size_t size() const noexcept { return states_.size(); }
    std::size_t modes() const noexcept { return states_.empty() ? 0 : states_.front().size(); }
    const FockState& operator[](std::size_t i) const { return states_[i]; }
    const std::vector<FockState>& states() const noexcept { return states_; }
    std::optional<std::size_t> index_of(const FockState& s) const;

private:
    std::vector<FockState> states_;
    std::map<FockState, std::size_t> index_;
};

struct ModeLayout {
    std::size_t vib_states{0};  // m

    std::size_t modes() const noexcept { return 2 * vib_states + 1; }
    static constexpr std::size_t photon() noexcept { return 0; }
    std::size_t ground(std::size_t i) const noexcept { return 1 + i; }
    std::size_t excited(std::size_t i) const noexcept { return 1 + vib_states + i; }
};

// All occupations with sum(b) + sum(B) = molecules and a^+a + sum(B) = excitations.
FockBasis manifold_basis(std::size_t vib_states, int molecules, int excitations);

// Union of manifold bases over molecules in [0, max_molecules] and excitations
// in [0, max_excitations].
FockBasis mixed_basis(std::size_t vib_states, int max_molecules, int max_excitations);

struct BosonicParameters {
    std::vector<double> ground_energies;  // w_g,i
    Eigen::VectorXd excited_energies;     // w_e,i
    Eigen::MatrixXd vibronic_coupling;    // V_eg,ij (diagonal ignored)
    double cavity_frequency{0.0};
    double single_coupling{0.0};          // g

    bool include_vibronic_coupling{true};
    bool include_light_matter{true};

    static BosonicParameters from(const VibrationalBasis& basis, const VibronicCouplingMatrix& veg,
                                  double cavity_frequency, double single_coupling);
};

std::vector<OperatorTerm> bosonic_hamiltonian_terms(const BosonicParameters& p);

// Matrix of the operator on the basis; contributions leaving the basis are
// dropped.
Eigen::SparseMatrix<double> assemble(const std::vector<OperatorTerm>& terms, const FockBasis& basis);

// Dense symmetric variant for small bases.
Eigen::MatrixXd assemble_dense(const std::vector<OperatorTerm>& terms, const FockBasis& basis);

}  // namespace polrelax
