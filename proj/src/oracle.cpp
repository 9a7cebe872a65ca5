#include "polrelax/oracle.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace polrelax {

namespace {

constexpr double kPi = 3.14159265358979323846;

void enumerate_configs(int molecules, std::size_t m, int excitations, std::vector<int>& local, int excited,
                       std::vector<MolecularConfig>& out) {
    if (static_cast<int>(local.size()) == molecules) {
        out.push_back({local, excitations - excited});
        return;
    }
    for (int l = 0; l < static_cast<int>(2 * m); ++l) {
        const int e = static_cast<std::size_t>(l) >= m ? 1 : 0;
        if (excited + e > excitations) continue;
        local.push_back(l);
        enumerate_configs(molecules, m, excitations, local, excited + e, out);
        local.pop_back();
    }
}

FockState bosonic_label(const FirstQuantizedSystem& sys, const MolecularConfig& c) {
    const ModeLayout L{sys.vib_states};
    FockState s(L.modes(), 0);
    s[ModeLayout::photon()] = c.photons;
    for (int l : c.local) {
        const std::size_t v = sys.vibration(l);
        ++s[sys.excited(l) ? L.excited(v) : L.ground(v)];
    }
    return s;
}

}  // namespace

FirstQuantizedSystem build_first_quantized(const VibrationalBasis& basis, const VibronicCouplingMatrix& veg,
                                           double cavity_frequency, double single_coupling,
                                           int molecules, int excitations) {
    if (molecules < 1 || molecules > 3) throw std::invalid_argument("build_first_quantized: N must be 1..3");
    if (excitations < 0) throw std::invalid_argument("build_first_quantized: negative excitation number");
    const std::size_t m = basis.size();
    if (m == 0 || veg.dimension() != m) throw std::invalid_argument("build_first_quantized: basis/coupling mismatch");

    FirstQuantizedSystem sys;
    sys.molecules = molecules;
    sys.vib_states = m;
    sys.excitations = excitations;
    double full = static_cast<double>(excitations + 1);
    for (int i = 0; i < molecules; ++i) full *= static_cast<double>(2 * m);
    if (full > static_cast<double>(kOracleDimensionCap)) {
        throw std::invalid_argument("build_first_quantized: dimension cap exceeded");
    }
    sys.full_dimension = static_cast<std::size_t>(full);

    std::vector<int> local;
    enumerate_configs(molecules, m, excitations, local, 0, sys.configs);
    for (std::size_t i = 0; i < sys.configs.size(); ++i) sys.index.emplace(sys.configs[i], i);

    std::vector<Eigen::Triplet<double>> t;
    auto push = [&](const MolecularConfig& target, std::size_t col, double v) {
        auto it = sys.index.find(target);
        if (it == sys.index.end()) return;
        t.emplace_back(static_cast<int>(it->second), static_cast<int>(col), v);
    };
    const auto& V = veg.coupling;
    for (std::size_t c = 0; c < sys.configs.size(); ++c) {
        const auto& cfg = sys.configs[c];
        double diag = cavity_frequency * cfg.photons;
        for (std::size_t a = 0; a < cfg.local.size(); ++a) {
            const int l = cfg.local[a];
            const std::size_t v = sys.vibration(l);
            const auto vi = static_cast<Eigen::Index>(v);
            if (sys.excited(l)) {
                diag += veg.excited_energies(vi);
                for (std::size_t w = 0; w < m; ++w) {
                    const double x = V(static_cast<Eigen::Index>(w), vi);
                    if (w == v || x == 0.0) continue;
                    MolecularConfig to = cfg;
                    to.local[a] = static_cast<int>(m + w);
                    push(to, c, x);
                }
                if (single_coupling != 0.0) {
                    MolecularConfig to = cfg;
                    to.local[a] = static_cast<int>(v);
                    to.photons += 1;
                    push(to, c, single_coupling * std::sqrt(static_cast<double>(to.photons)));
                }
            } else {
                diag += basis.energies[v];
                if (single_coupling != 0.0 && cfg.photons > 0) {
                    MolecularConfig to = cfg;
                    to.local[a] = static_cast<int>(m + v);
                    to.photons -= 1;
                    push(to, c, single_coupling * std::sqrt(static_cast<double>(cfg.photons)));
                }
            }
        }
        t.emplace_back(static_cast<int>(c), static_cast<int>(c), diag);
    }
    const auto n = static_cast<Eigen::Index>(sys.configs.size());
    sys.hamiltonian.resize(n, n);
    sys.hamiltonian.setFromTriplets(t.begin(), t.end());
    return sys;
}

FirstQuantizedSystem build_first_quantized(const MoleculeModel& molecule, double cavity_frequency,
                                           double single_coupling, int molecules, int excitations) {
    const auto basis = enumerate_basis(molecule);
    const auto veg = build_veg(basis, molecule);
    return build_first_quantized(basis, veg, cavity_frequency, single_coupling, molecules, excitations);
}

double permutation_deviation(const FirstQuantizedSystem& sys) {
    const Eigen::MatrixXd h = Eigen::MatrixXd(sys.hamiltonian);
    double worst = 0.0;
    for (int a = 0; a < sys.molecules; ++a) {
        for (int b = a + 1; b < sys.molecules; ++b) {
            std::vector<std::size_t> perm(sys.dimension());
            for (std::size_t i = 0; i < sys.dimension(); ++i) {
                MolecularConfig p = sys.configs[i];
                std::swap(p.local[static_cast<std::size_t>(a)], p.local[static_cast<std::size_t>(b)]);
                perm[i] = sys.index.at(p);
            }
            for (std::size_t c = 0; c < sys.dimension(); ++c) {
                for (std::size_t r = 0; r < sys.dimension(); ++r) {
                    const double d = h(static_cast<Eigen::Index>(perm[r]), static_cast<Eigen::Index>(perm[c])) -
                                     h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
                    worst = std::max(worst, std::abs(d));
                }
            }
        }
    }
    return worst;
}

SymmetricSubspace symmetric_projector(const FirstQuantizedSystem& sys) {
    std::map<MolecularConfig, std::vector<std::size_t>> orbits;
    for (std::size_t i = 0; i < sys.dimension(); ++i) {
        MolecularConfig key = sys.configs[i];
        std::sort(key.local.begin(), key.local.end());
        orbits[key].push_back(i);
    }
    SymmetricSubspace sub;
    sub.vectors = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sys.dimension()),
                                        static_cast<Eigen::Index>(orbits.size()));
    Eigen::Index col = 0;
    for (const auto& [key, members] : orbits) {
        const double amp = 1.0 / std::sqrt(static_cast<double>(members.size()));
        for (std::size_t i : members) sub.vectors(static_cast<Eigen::Index>(i), col) = amp;
        sub.labels.push_back(bosonic_label(sys, key));
        sub.orbit_sizes.push_back(members.size());
        ++col;
    }
    return sub;
}

namespace {

Eigen::VectorXd sorted_eigenvalues(const Eigen::MatrixXd& h) {
    if (h.rows() == 0) return {};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("oracle: eigensolver failed to converge");
    return solver.eigenvalues();
}

}  // namespace

MappingReport verify_mapping(const FirstQuantizedSystem& sys, const SymmetricSubspace& sub,
                             const BosonicParameters& params) {
    if (params.ground_energies.size() != sys.vib_states) {
        throw std::invalid_argument("verify_mapping: bosonic parameters do not match the system");
    }
    const FockBasis fock = manifold_basis(sys.vib_states, sys.molecules, sys.excitations);
    const Eigen::MatrixXd hb = assemble_dense(bosonic_hamiltonian_terms(params), fock);
    const Eigen::MatrixXd hp = sub.vectors.transpose() * (sys.hamiltonian * sub.vectors);

    MappingReport rep;
    rep.symmetric_dimension = sub.size();
    rep.bosonic_dimension = fock.size();
    if (rep.symmetric_dimension != rep.bosonic_dimension) {
        rep.max_eigenvalue_deviation = std::numeric_limits<double>::infinity();
        rep.max_element_deviation = std::numeric_limits<double>::infinity();
        return rep;
    }
    const Eigen::VectorXd ep = sorted_eigenvalues(hp);
    const Eigen::VectorXd eb = sorted_eigenvalues(hb);
    rep.max_eigenvalue_deviation = (ep - eb).cwiseAbs().maxCoeff();

    std::vector<std::size_t> map(sub.size());
    for (std::size_t s = 0; s < sub.size(); ++s) {
        auto idx = fock.index_of(sub.labels[s]);
        if (!idx) {
            rep.max_element_deviation = std::numeric_limits<double>::infinity();
            return rep;
        }
        map[s] = *idx;
    }
    for (std::size_t c = 0; c < sub.size(); ++c) {
        for (std::size_t r = 0; r < sub.size(); ++r) {
            const double d = hp(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) -
                             hb(static_cast<Eigen::Index>(map[r]), static_cast<Eigen::Index>(map[c]));
            rep.max_element_deviation = std::max(rep.max_element_deviation, std::abs(d));
        }
    }
    return rep;
}

ConservationReport verify_conservation(const Eigen::SparseMatrix<double>& h, const FockBasis& basis) {
    if (static_cast<std::size_t>(h.rows()) != basis.size() || h.rows() != h.cols()) {
        throw std::invalid_argument("verify_conservation: operator/basis size mismatch");
    }
    const std::size_t modes = basis.modes();
    if (modes % 2 != 1) throw std::invalid_argument("verify_conservation: unexpected mode layout");
    const ModeLayout L{(modes - 1) / 2};
    std::vector<double> nexc(basis.size()), nmol(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto& s = basis[i];
        int e = s[ModeLayout::photon()], n = 0;
        for (std::size_t v = 0; v < L.vib_states; ++v) {
            e += s[L.excited(v)];
            n += s[L.excited(v)] + s[L.ground(v)];
        }
        nexc[i] = e;
        nmol[i] = n;
    }
    // ([H, D])_rc = H_rc (d_c - d_r) for diagonal D.
    double se = 0.0, sn = 0.0;
    for (int c = 0; c < h.outerSize(); ++c) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(h, c); it; ++it) {
            const auto r = static_cast<std::size_t>(it.row());
            const auto cc = static_cast<std::size_t>(c);
            const double de = it.value() * (nexc[cc] - nexc[r]);
            const double dn = it.value() * (nmol[cc] - nmol[r]);
            se += de * de;
            sn += dn * dn;
        }
    }
    return {std::sqrt(se), std::sqrt(sn)};
}

Eigen::MatrixXd reduced_electronic_density(const FirstQuantizedSystem& sys, const Eigen::VectorXd& state) {
    if (static_cast<std::size_t>(state.size()) != sys.dimension()) {
        throw std::invalid_argument("reduced_electronic_density: state size mismatch");
    }
    const auto n = static_cast<std::size_t>(sys.molecules);
    Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(sys.molecules, sys.molecules);
    const int m = static_cast<int>(sys.vib_states);
    for (std::size_t x = 0; x < sys.dimension(); ++x) {
        const auto& cfg = sys.configs[x];
        if (cfg.photons != 0 || state(static_cast<Eigen::Index>(x)) == 0.0) continue;
        std::vector<std::size_t> exc;
        for (std::size_t a = 0; a < n; ++a)
            if (sys.excited(cfg.local[a])) exc.push_back(a);
        if (exc.size() != 1) continue;
        const std::size_t a = exc[0];
        for (std::size_t b = 0; b < n; ++b) {
            MolecularConfig y = cfg;
            if (b != a) {
                y.local[a] -= m;
                y.local[b] += m;
            }
            auto it = sys.index.find(y);
            if (it == sys.index.end()) continue;
            rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +=
                state(static_cast<Eigen::Index>(x)) * state(static_cast<Eigen::Index>(it->second));
        }
    }
    return rho;
}

std::vector<DiagonalBlock> block_diagonalize(const Eigen::MatrixXd& h) {
    const auto n = static_cast<std::size_t>(h.rows());
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t c = 0; c < n; ++c)
        for (std::size_t r = 0; r < c; ++r)
            if (h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) != 0.0 ||
                h(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) != 0.0) {
                const auto a = find(r), b = find(c);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);

    std::vector<DiagonalBlock> blocks;
    for (auto& [root, idx] : groups) {
        const auto d = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXd sub(d, d);
        for (Eigen::Index c = 0; c < d; ++c)
            for (Eigen::Index r = 0; r < d; ++r)
                sub(r, c) = h(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]),
                              static_cast<Eigen::Index>(idx[static_cast<std::size_t>(c)]));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sub);
        if (solver.info() != Eigen::Success) throw NumericalError("oracle: block eigensolver failed to converge");
        blocks.push_back({std::move(idx), solver.eigenvalues(), solver.eigenvectors()});
    }
    return blocks;
}

double fgr_oracle(const Eigen::VectorXd& initial, double initial_energy, const Eigen::MatrixXd& perturbation,
                  const Eigen::VectorXd& final_energies, const Eigen::MatrixXd& final_vectors, double gamma) {
    if (std::abs(initial.norm() - 1.0) > 1e-10) throw std::invalid_argument("fgr_oracle: initial state not normalized");
    if (!(gamma > 0.0)) throw std::invalid_argument("fgr_oracle: gamma must be positive");
    if (perturbation.rows() != initial.size() || perturbation.cols() != initial.size() ||
        final_vectors.rows() != initial.size() || final_vectors.cols() != final_energies.size()) {
        throw std::invalid_argument("fgr_oracle: dimension mismatch");
    }
    const Eigen::VectorXd vi = perturbation * initial;
    double rate = 0.0;
    for (Eigen::Index f = 0; f < final_energies.size(); ++f) {
        const double amp = final_vectors.col(f).dot(vi);
        const double x = final_energies(f) - initial_energy;
        rate += 2.0 * kPi * amp * amp * (gamma / kPi) / (x * x + gamma * gamma);
    }
    return rate;
}

BranchOracle dark_state_relaxation(std::size_t k, const VibrationalBasis& basis,
                                   const VibronicCouplingMatrix& veg, const CavityModel& cavity) {
    const std::size_t m = basis.size();
    if (k == 0 || k >= m) throw std::invalid_argument("dark_state_relaxation: k must be in 1..m-1");
    if (cavity.molecules < 2) throw std::invalid_argument("dark_state_relaxation: need N >= 2");
    const int n = static_cast<int>(cavity.molecules);
    const FockBasis fock = manifold_basis(m, n, 1);
    if (fock.size() > 6000) throw std::invalid_argument("dark_state_relaxation: Fock space too large for dense oracle");

    auto p0 = BosonicParameters::from(basis, veg, cavity.cavity_frequency, cavity.single_coupling());
    p0.include_vibronic_coupling = false;
    const Eigen::MatrixXd h0 = assemble_dense(bosonic_hamiltonian_terms(p0), fock);
    BosonicParameters pv;
    pv.ground_energies.assign(m, 0.0);
    pv.excited_energies = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    pv.vibronic_coupling = veg.coupling;
    pv.include_light_matter = false;
    const Eigen::MatrixXd v = assemble_dense(bosonic_hamiltonian_terms(pv), fock);

    const ModeLayout L{m};
    std::vector<double> photonic(fock.size());
    for (std::size_t i = 0; i < fock.size(); ++i) photonic[i] = fock[i][ModeLayout::photon()] > 0 ? 1.0 : 0.0;
    auto photon_weight = [&](const DiagonalBlock& b, Eigen::Index col) {
        double w = 0.0;
        for (std::size_t r = 0; r < b.indices.size(); ++r)
            if (photonic[b.indices[r]] != 0.0) w += std::pow(b.vectors(static_cast<Eigen::Index>(r), col), 2);
        return w;
    };

    FockState seed(L.modes(), 0);
    seed[L.ground(0)] = n - 1;
    seed[L.excited(k)] = 1;
    const std::size_t seed_index = *fock.index_of(seed);

    const auto blocks = block_diagonalize(h0);
    const auto dim = static_cast<Eigen::Index>(fock.size());
    Eigen::VectorXd dark = Eigen::VectorXd::Zero(dim);
    for (const auto& b : blocks) {
        auto pos = std::find(b.indices.begin(), b.indices.end(), seed_index);
        if (pos == b.indices.end()) continue;
        const auto row = static_cast<Eigen::Index>(pos - b.indices.begin());
        // Projection of the seed onto the photon-free eigenspace of its block.
        for (Eigen::Index c = 0; c < b.energies.size(); ++c) {
            if (photon_weight(b, c) > 1e-10) continue;
            const double overlap = b.vectors(row, c);
            for (std::size_t r = 0; r < b.indices.size(); ++r)
                dark(static_cast<Eigen::Index>(b.indices[r])) += overlap * b.vectors(static_cast<Eigen::Index>(r), c);
        }
    }
    if (dark.norm() < 1e-8) throw NumericalError("dark_state_relaxation: no dark state in the seed block");
    dark.normalize();
    const double e0 = dark.dot(h0 * dark);

    std::vector<double> eu, el;
    std::vector<Eigen::VectorXd> vu, vl;
    for (const auto& b : blocks) {
        Eigen::Index lo = -1, hi = -1;
        for (Eigen::Index c = 0; c < b.energies.size(); ++c) {
            if (photon_weight(b, c) <= 1e-10) continue;
            if (lo < 0) lo = c;
            hi = c;
        }
        if (lo < 0 || lo == hi) continue;
        auto embed = [&](Eigen::Index c) {
            Eigen::VectorXd full = Eigen::VectorXd::Zero(dim);
            for (std::size_t r = 0; r < b.indices.size(); ++r)
                full(static_cast<Eigen::Index>(b.indices[r])) = b.vectors(static_cast<Eigen::Index>(r), c);
            return full;
        };
        el.push_back(b.energies(lo));
        vl.push_back(embed(lo));
        eu.push_back(b.energies(hi));
        vu.push_back(embed(hi));
    }
    auto pack = [&](const std::vector<double>& e, const std::vector<Eigen::VectorXd>& vecs) {
        Eigen::VectorXd energies(static_cast<Eigen::Index>(e.size()));
        Eigen::MatrixXd cols(dim, static_cast<Eigen::Index>(e.size()));
        for (std::size_t i = 0; i < e.size(); ++i) {
            energies(static_cast<Eigen::Index>(i)) = e[i];
            cols.col(static_cast<Eigen::Index>(i)) = vecs[i];
        }
        return std::make_pair(energies, cols);
    };
    const auto [energies_u, vectors_u] = pack(eu, vu);
    const auto [energies_l, vectors_l] = pack(el, vl);

    BranchOracle out;
    out.initial_energy = e0;
    out.fock_dimension = fock.size();
    out.upper = fgr_oracle(dark, e0, v, energies_u, vectors_u, cavity.gamma_xi);
    out.lower = fgr_oracle(dark, e0, v, energies_l, vectors_l, cavity.gamma_xi);
    return out;
}

void OracleReport::add(std::string name, double value, double threshold) {
    checks.push_back({std::move(name), value, threshold, std::abs(value) <= threshold});
}

bool OracleReport::all_passed() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.passed; });
}

std::string OracleReport::to_json() const {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
        arr.push_back({{"check", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.passed}});
    }
    return arr.dump(2);
}

}  // namespace polrelax
