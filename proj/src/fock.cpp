#include "polrelax/fock.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace polrelax {

FockBasis::FockBasis(std::vector<FockState> states) : states_(std::move(states)) {
    for (std::size_t i = 0; i < states_.size(); ++i) {
        if (!index_.emplace(states_[i], i).second) {
            throw std::invalid_argument("FockBasis: duplicate occupation state");
        }
        if (states_[i].size() != states_.front().size()) {
            throw std::invalid_argument("FockBasis: inconsistent mode count");
        }
    }
}

std::optional<std::size_t> FockBasis::index_of(const FockState& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

namespace {

// Every way of distributing `count` bosons over modes [first, first + n).
void distribute(FockState& state, std::size_t first, std::size_t n, int count,
                const std::function<void()>& emit) {
    if (n == 1) {
        state[first] = count;
        emit();
        state[first] = 0;
        return;
    }
    for (int c = count; c >= 0; --c) {
        state[first] = c;
        distribute(state, first + 1, n - 1, count - c, emit);
    }
    state[first] = 0;
}

}  // namespace

FockBasis manifold_basis(std::size_t vib_states, int molecules, int excitations) {
    if (vib_states == 0) throw std::invalid_argument("manifold_basis: need at least one vibrational state");
    if (molecules < 0 || excitations < 0) throw std::invalid_argument("manifold_basis: negative counts");
    const ModeLayout layout{vib_states};
    std::vector<FockState> states;
    FockState s(layout.modes(), 0);
    for (int excited = std::min(molecules, excitations); excited >= 0; --excited) {
        const int photons = excitations - excited;
        const int grounds = molecules - excited;
        s[ModeLayout::photon()] = photons;
        distribute(s, layout.excited(0), vib_states, excited, [&] {
            distribute(s, layout.ground(0), vib_states, grounds, [&] { states.push_back(s); });
        });
    }
    return FockBasis(std::move(states));
}

FockBasis mixed_basis(std::size_t vib_states, int max_molecules, int max_excitations) {
    std::vector<FockState> all;
    for (int n = 0; n <= max_molecules; ++n) {
        for (int e = 0; e <= max_excitations; ++e) {
            const auto part = manifold_basis(vib_states, n, e);
            all.insert(all.end(), part.states().begin(), part.states().end());
        }
    }
    return FockBasis(std::move(all));
}

BosonicParameters BosonicParameters::from(const VibrationalBasis& basis, const VibronicCouplingMatrix& veg,
                                          double cavity_frequency, double single_coupling) {
    if (basis.size() != veg.dimension()) throw std::invalid_argument("BosonicParameters: size mismatch");
    BosonicParameters p;
    p.ground_energies = basis.energies;
    p.excited_energies = veg.excited_energies;
    p.vibronic_coupling = veg.coupling;
    p.cavity_frequency = cavity_frequency;
    p.single_coupling = single_coupling;
    return p;
}

std::vector<OperatorTerm> bosonic_hamiltonian_terms(const BosonicParameters& p) {
    const std::size_t m = p.ground_energies.size();
    if (static_cast<std::size_t>(p.excited_energies.size()) != m ||
        static_cast<std::size_t>(p.vibronic_coupling.rows()) != m ||
        static_cast<std::size_t>(p.vibronic_coupling.cols()) != m) {
        throw std::invalid_argument("bosonic_hamiltonian_terms: inconsistent sizes");
    }
    const ModeLayout L{m};
    const std::size_t a = ModeLayout::photon();
    std::vector<OperatorTerm> terms;
    terms.push_back({p.cavity_frequency, {{a, true}, {a, false}}});
    for (std::size_t i = 0; i < m; ++i) {
        terms.push_back({p.ground_energies[i], {{L.ground(i), true}, {L.ground(i), false}}});
        terms.push_back({p.excited_energies(static_cast<Eigen::Index>(i)),
                         {{L.excited(i), true}, {L.excited(i), false}}});
    }
    if (p.include_vibronic_coupling) {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                const double v = p.vibronic_coupling(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (i == j || v == 0.0) continue;
                terms.push_back({v, {{L.excited(i), true}, {L.excited(j), false}}});
            }
        }
    }
    if (p.include_light_matter && p.single_coupling != 0.0) {
        for (std::size_t i = 0; i < m; ++i) {
            terms.push_back({p.single_coupling, {{L.excited(i), true}, {L.ground(i), false}, {a, false}}});
            terms.push_back({p.single_coupling, {{L.excited(i), false}, {L.ground(i), true}, {a, true}}});
        }
    }
    return terms;
}

namespace {

template <typename Sink>
void apply_terms(const std::vector<OperatorTerm>& terms, const FockBasis& basis, Sink&& sink) {
    for (std::size_t c = 0; c < basis.size(); ++c) {
        for (const auto& term : terms) {
            FockState s = basis[c];
            double amp = term.coefficient;
            for (auto op = term.ops.rbegin(); op != term.ops.rend() && amp != 0.0; ++op) {
                if (op->mode >= s.size()) throw std::invalid_argument("operator term: mode out of range");
                int& n = s[op->mode];
                if (op->creation) {
                    amp *= std::sqrt(static_cast<double>(n + 1));
                    ++n;
                } else {
                    amp *= std::sqrt(static_cast<double>(n));
                    --n;
                }
            }
            if (amp == 0.0) continue;
            if (auto r = basis.index_of(s)) sink(*r, c, amp);
        }
    }
}

}  // namespace

Eigen::SparseMatrix<double> assemble(const std::vector<OperatorTerm>& terms, const FockBasis& basis) {
    std::vector<Eigen::Triplet<double>> triplets;
    apply_terms(terms, basis, [&](std::size_t r, std::size_t c, double v) {
        triplets.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
    });
    const auto n = static_cast<Eigen::Index>(basis.size());
    Eigen::SparseMatrix<double> h(n, n);
    h.setFromTriplets(triplets.begin(), triplets.end());
    return h;
}

Eigen::MatrixXd assemble_dense(const std::vector<OperatorTerm>& terms, const FockBasis& basis) {
    const auto n = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    apply_terms(terms, basis, [&](std::size_t r, std::size_t c, double v) {
        h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += v;
    });
    return h;
}

}  // namespace polrelax
