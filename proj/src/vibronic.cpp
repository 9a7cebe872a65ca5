#include "polrelax/vibronic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace polrelax {

void VibrationalMode::validate() const {
    if (!(frequency > 0.0)) throw std::invalid_argument("vibrational mode frequency must be positive");
    if (!(huang_rhys >= 0.0)) throw std::invalid_argument("Huang-Rhys factor must be non-negative");
    if (max_quanta < 0) throw std::invalid_argument("per-mode quanta cap must be non-negative");
}

void MoleculeModel::validate() const {
    if (modes.empty()) throw std::invalid_argument("molecule needs at least one vibrational mode");
    for (const auto& m : modes) m.validate();
    if (total_quanta_cap < 0) throw std::invalid_argument("caps produce zero states (negative total quanta cap)");
}

double MoleculeModel::reorganization_energy() const noexcept {
    double sum = 0.0;
    for (const auto& m : modes) sum += m.frequency * m.huang_rhys;
    return sum;
}

double MoleculeModel::adiabatic_minimum() const noexcept {
    return electronic_gap - reorganization_energy();
}

double MoleculeModel::vertical_resonance() const noexcept {
    return electronic_gap + reorganization_energy();
}

std::optional<std::size_t> VibrationalBasis::index_of(const Occupation& occ) const {
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i] == occ) return i;
    }
    return std::nullopt;
}

int VibrationalBasis::quanta(std::size_t i) const {
    int q = 0;
    for (int n : states.at(i)) q += n;
    return q;
}

Eigen::MatrixXd VibronicCouplingMatrix::excited_block() const {
    Eigen::MatrixXd h = coupling;
    h.diagonal() = excited_energies;
    return h;
}

std::size_t VibronicCouplingMatrix::off_diagonal_nonzeros() const {
    std::size_t count = 0;
    for (Eigen::Index j = 0; j < coupling.cols(); ++j)
        for (Eigen::Index i = 0; i < coupling.rows(); ++i)
            if (i != j && coupling(i, j) != 0.0) ++count;
    return count;
}

namespace {

// Energies are sums of a handful of mode frequencies; quantizing them makes
// exact-degeneracy ties (e.g. w_1 = 10 w_2) fall back to lexicographic order
// deterministically.
long long energy_key(double e) { return std::llround(e * 1e12); }

void enumerate(const MoleculeModel& mol, std::size_t mode, int used, Occupation& current,
               std::vector<Occupation>& out) {
    if (mode == mol.modes.size()) {
        out.push_back(current);
        return;
    }
    const int limit = std::min(mol.modes[mode].max_quanta, mol.total_quanta_cap - used);
    for (int n = 0; n <= limit; ++n) {
        current[mode] = n;
        enumerate(mol, mode + 1, used + n, current, out);
    }
    current[mode] = 0;
}

}  // namespace

VibrationalBasis enumerate_basis(const MoleculeModel& molecule) {
    molecule.validate();
    std::vector<Occupation> states;
    Occupation current(molecule.modes.size(), 0);
    enumerate(molecule, 0, 0, current, states);
    if (states.empty()) throw std::invalid_argument("caps produce zero states");

    auto energy_of = [&](const Occupation& occ) {
        double e = 0.0;
        for (std::size_t k = 0; k < occ.size(); ++k) e += occ[k] * molecule.modes[k].frequency;
        return e;
    };
    std::vector<std::pair<double, Occupation>> keyed;
    keyed.reserve(states.size());
    for (auto& s : states) keyed.emplace_back(energy_of(s), std::move(s));
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        const auto ka = energy_key(a.first), kb = energy_key(b.first);
        if (ka != kb) return ka < kb;
        return a.second < b.second;
    });

    VibrationalBasis basis;
    basis.states.reserve(keyed.size());
    basis.energies.reserve(keyed.size());
    for (auto& [e, occ] : keyed) {
        basis.energies.push_back(e);
        basis.states.push_back(std::move(occ));
    }
    return basis;
}

VibronicCouplingMatrix build_veg(const VibrationalBasis& basis, const MoleculeModel& molecule) {
    molecule.validate();
    const std::size_t nmodes = molecule.modes.size();
    for (const auto& s : basis.states) {
        if (s.size() != nmodes) throw std::invalid_argument("build_veg: basis/molecule mode-count mismatch");
    }
    const auto m = static_cast<Eigen::Index>(basis.size());
    VibronicCouplingMatrix veg;
    veg.excited_energies.resize(m);
    veg.coupling = Eigen::MatrixXd::Zero(m, m);

    std::map<Occupation, Eigen::Index> index;
    for (Eigen::Index i = 0; i < m; ++i) index.emplace(basis.states[static_cast<std::size_t>(i)], i);

    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& occ = basis.states[static_cast<std::size_t>(i)];
        veg.excited_energies(i) = basis.energies[static_cast<std::size_t>(i)] + molecule.electronic_gap;
        for (std::size_t k = 0; k < nmodes; ++k) {
            const auto& mode = molecule.modes[k];
            if (mode.huang_rhys == 0.0) continue;
            Occupation up = occ;
            up[k] += 1;
            auto it = index.find(up);
            if (it == index.end()) continue;
            const double v = mode.frequency * std::sqrt(mode.huang_rhys) * std::sqrt(occ[k] + 1.0);
            veg.coupling(i, it->second) = v;
            veg.coupling(it->second, i) = v;
        }
    }
    return veg;
}

void normalize_signs(Eigen::MatrixXd& vectors) {
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
        Eigen::Index best = 0;
        double mag = -1.0;
        for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
            const double a = std::abs(vectors(r, c));
            if (a > mag * (1.0 + 1e-12)) {
                mag = a;
                best = r;
            }
        }
        if (vectors(best, c) < 0.0) vectors.col(c) *= -1.0;
    }
}

VibronicEigensystem diagonalize_excited(const VibronicCouplingMatrix& veg) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(veg.excited_block());
    if (solver.info() != Eigen::Success) {
        throw NumericalError("excited vibronic block: eigensolver failed to converge");
    }
    VibronicEigensystem eig{solver.eigenvalues(), solver.eigenvectors()};
    normalize_signs(eig.vectors);
    return eig;
}

StokesShiftedState stokes_shifted_state(const VibronicEigensystem& eig) {
    if (eig.energies.size() == 0) throw std::invalid_argument("stokes_shifted_state: empty eigensystem");
    StokesShiftedState ss;
    ss.coefficients = eig.vectors.col(0);
    ss.coefficients.normalize();
    ss.energy = eig.energies(0);
    ss.fc_leak = ss.coefficients(0) * ss.coefficients(0);
    return ss;
}

StokesShiftedState stokes_shifted_state(const VibronicCouplingMatrix& veg) {
    return stokes_shifted_state(diagonalize_excited(veg));
}

BareSpectrum bare_emission(const StokesShiftedState& ss, const VibrationalBasis& basis,
                           double gamma_mol, std::span<const double> grid, bool include_origin) {
    require_increasing(grid, "bare_emission");
    if (static_cast<std::size_t>(ss.coefficients.size()) != basis.size()) {
        throw std::invalid_argument("bare_emission: state/basis size mismatch");
    }
    BareSpectrum out;
    out.broadening = gamma_mol;
    for (std::size_t j = include_origin ? 0 : 1; j < basis.size(); ++j) {
        const double c = ss.coefficients(static_cast<Eigen::Index>(j));
        out.sticks.push_back({ss.energy - basis.energies[j], c * c});
    }
    out.broadened = broaden(out.sticks, grid, gamma_mol);
    return out;
}

BareSpectrum bare_absorption(const VibronicEigensystem& eig, double gamma_mol,
                             std::span<const double> grid, AbsorptionScale scale,
                             double ensemble_coupling_sq) {
    require_increasing(grid, "bare_absorption");
    double prefactor = 1.0;
    if (scale == AbsorptionScale::ensemble) prefactor = 3.14159265358979323846 * ensemble_coupling_sq;
    BareSpectrum out;
    out.broadening = gamma_mol;
    for (Eigen::Index a = 0; a < eig.energies.size(); ++a) {
        const double overlap = eig.vectors(0, a);
        out.sticks.push_back({eig.energies(a), prefactor * overlap * overlap});
    }
    out.broadened = broaden(out.sticks, grid, gamma_mol);
    return out;
}

BareSpectrum bare_absorption(const VibronicCouplingMatrix& veg, double gamma_mol,
                             std::span<const double> grid, AbsorptionScale scale,
                             double ensemble_coupling_sq) {
    return bare_absorption(diagonalize_excited(veg), gamma_mol, grid, scale, ensemble_coupling_sq);
}

ConvergedMolecule fixed_basis(const MoleculeModel& molecule) {
    ConvergedMolecule out;
    out.molecule = molecule;
    out.basis = enumerate_basis(molecule);
    out.veg = build_veg(out.basis, molecule);
    out.eigensystem = diagonalize_excited(out.veg);
    out.converged = true;
    return out;
}

namespace {

std::map<Occupation, double> emission_weights(const ConvergedMolecule& cm) {
    std::map<Occupation, double> w;
    const auto& v = cm.eigensystem.vectors;
    for (std::size_t j = 0; j < cm.basis.size(); ++j) {
        const double c = v(static_cast<Eigen::Index>(j), 0);
        w[cm.basis.states[j]] = c * c;
    }
    return w;
}

double max_change(const std::map<Occupation, double>& a, const std::map<Occupation, double>& b) {
    double worst = 0.0;
    for (const auto& [occ, wa] : a) {
        auto it = b.find(occ);
        worst = std::max(worst, std::abs(wa - (it == b.end() ? 0.0 : it->second)));
    }
    for (const auto& [occ, wb] : b) {
        if (!a.count(occ)) worst = std::max(worst, std::abs(wb));
    }
    return worst;
}

// Grows the caps of the modes whose boundary occupation still carries
// emission weight above `threshold`.
MoleculeModel grow(const ConvergedMolecule& cm, double threshold) {
    const MoleculeModel& mol = cm.molecule;
    const std::size_t nm = mol.modes.size();
    std::vector<double> edge(nm, 0.0);
    double total_edge = 0.0;
    const auto& v = cm.eigensystem.vectors;
    for (std::size_t j = 0; j < cm.basis.size(); ++j) {
        const double w = v(static_cast<Eigen::Index>(j), 0) * v(static_cast<Eigen::Index>(j), 0);
        const auto& occ = cm.basis.states[j];
        for (std::size_t k = 0; k < nm; ++k)
            if (occ[k] == mol.modes[k].max_quanta) edge[k] += w;
        if (cm.basis.quanta(j) == mol.total_quanta_cap) total_edge += w;
    }
    // Without any boundary above the threshold, grow the single worst mode.
    bool any = false;
    std::size_t worst = nm;
    for (std::size_t k = 0; k < nm; ++k) {
        if (mol.modes[k].huang_rhys == 0.0) continue;
        any = any || edge[k] > threshold;
        if (worst == nm || edge[k] > edge[worst]) worst = k;
    }

    MoleculeModel next = mol;
    int sum_caps = 0;
    for (const auto& m : mol.modes) sum_caps += m.max_quanta;
    const bool cap_binding = mol.total_quanta_cap < sum_caps;
    int added = 0;
    for (std::size_t k = 0; k < nm; ++k) {
        auto& m = next.modes[k];
        if (m.huang_rhys == 0.0) continue;
        if (any ? edge[k] <= threshold : k != worst) continue;
        const int inc = std::max(2, (m.max_quanta + 7) / 8);
        m.max_quanta += inc;
        added += inc;
    }
    if (cap_binding) {
        next.total_quanta_cap += std::max(added, total_edge > threshold ? 2 : 0);
    } else {
        int new_sum = 0;
        for (const auto& m : next.modes) new_sum += m.max_quanta;
        next.total_quanta_cap = std::max(next.total_quanta_cap, new_sum);
    }
    return next;
}

}  // namespace

ConvergedMolecule converge_basis(const MoleculeModel& start, double epsilon, int max_iterations) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("converge_basis: epsilon must be positive");
    ConvergedMolecule current = fixed_basis(start);
    current.converged = false;
    auto weights = emission_weights(current);
    for (int it = 1; it <= max_iterations; ++it) {
        ConvergedMolecule next = fixed_basis(grow(current, epsilon));
        auto next_weights = emission_weights(next);
        const double change = max_change(weights, next_weights);
        next.iterations = it;
        next.last_change = change;
        next.converged = change < epsilon;
        current = std::move(next);
        weights = std::move(next_weights);
        if (current.converged) break;
    }
    return current;
}

}  // namespace polrelax
