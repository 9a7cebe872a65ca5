#include "doctest.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <vector>

#include "polrelax/oracle.hpp"
#include "polrelax/rates.hpp"

using namespace polrelax;

namespace {

MoleculeModel small_molecule(std::size_t m) {
    MoleculeModel mol;
    mol.electronic_gap = 0.1;
    if (m == 2) {
        mol.modes = {{0.01, 0.3, 1}};
        mol.total_quanta_cap = 1;
    } else if (m == 3) {
        mol.modes = {{0.01, 0.3, 2}};
        mol.total_quanta_cap = 2;
    } else {
        mol.modes = {{0.01, 0.3, 1}, {0.0013, 1.7, 1}};
        mol.total_quanta_cap = 2;
    }
    return mol;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

double multisets(int m, int k) { return binomial(k + m - 1, k); }

std::size_t symmetric_count(int n, int m, int n_exc) {
    double total = 0.0;
    for (int e = 0; e <= std::min(n, n_exc); ++e) total += multisets(m, e) * multisets(m, n - e);
    return static_cast<std::size_t>(total);
}

std::size_t brute_manifold_count(int n, int m, int n_exc) {
    std::size_t count = 0;
    std::size_t tuples = 1;
    for (int i = 0; i < n; ++i) tuples *= static_cast<std::size_t>(2 * m);
    for (std::size_t t = 0; t < tuples; ++t) {
        std::size_t rest = t;
        int excited = 0;
        for (int i = 0; i < n; ++i) {
            excited += static_cast<int>(rest % static_cast<std::size_t>(2 * m)) >= m ? 1 : 0;
            rest /= static_cast<std::size_t>(2 * m);
        }
        for (int photons = 0; photons <= n_exc; ++photons)
            if (excited + photons == n_exc) ++count;
    }
    return count;
}

double factorial(int n) { return std::tgamma(n + 1.0); }

CavityModel resonant_cavity(std::int64_t n) {
    CavityModel c;
    c.electronic_gap = 0.1;
    c.cavity_frequency = 0.1;
    c.collective_coupling = 0.012;
    c.molecules = n;
    c.kappa = 0.003;
    c.gamma_xi = 0.0015;
    return c;
}

}  // namespace

TEST_CASE("symmetric first-quantized and bosonic Hamiltonians are isospectral") {
    const auto start = std::chrono::steady_clock::now();
    for (auto [n, m, e] : {std::tuple{2, 3, 1}, std::tuple{2, 3, 2}, std::tuple{3, 2, 1}}) {
        const auto mol = small_molecule(static_cast<std::size_t>(m));
        const auto basis = enumerate_basis(mol);
        REQUIRE(basis.size() == static_cast<std::size_t>(m));
        const auto veg = build_veg(basis, mol);
        const double g = 0.012 / std::sqrt(static_cast<double>(n));
        const auto sys = build_first_quantized(basis, veg, 0.103, g, n, e);
        CHECK(sys.dimension() == brute_manifold_count(n, m, e));
        double full = e + 1.0;
        for (int i = 0; i < n; ++i) full *= 2.0 * m;
        CHECK(sys.full_dimension == static_cast<std::size_t>(full));

        const auto sub = symmetric_projector(sys);
        CHECK(sub.size() == symmetric_count(n, m, e));
        CHECK(manifold_basis(basis.size(), n, e).size() == symmetric_count(n, m, e));
        for (std::size_t c = 0; c < sub.size(); ++c) {
            double denom = 1.0;
            const ModeLayout L{basis.size()};
            for (std::size_t mode = 1; mode < L.modes(); ++mode) denom *= factorial(sub.labels[c][mode]);
            CHECK(static_cast<double>(sub.orbit_sizes[c]) == doctest::Approx(factorial(n) / denom));
        }
        const Eigen::MatrixXd gram = sub.vectors.transpose() * sub.vectors;
        CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-14);

        const auto rep = verify_mapping(sys, sub, BosonicParameters::from(basis, veg, 0.103, g));
        CHECK(rep.symmetric_dimension == rep.bosonic_dimension);
        CHECK(rep.max_eigenvalue_deviation <= 1e-10);
        CHECK(rep.max_element_deviation <= 1e-10);
        CHECK(permutation_deviation(sys) <= 1e-12);
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(seconds < 10.0);
}

TEST_CASE("single-molecule projector is the identity") {
    const auto mol = small_molecule(3);
    const auto sys = build_first_quantized(mol, 0.1, 0.01, 1, 1);
    const auto sub = symmetric_projector(sys);
    CHECK(sub.size() == sys.dimension());
    CHECK((sub.vectors.cwiseAbs().colwise().sum().array() == 1.0).all());
}

TEST_CASE("uncoupled spectra are sums of bare energies") {
    const auto mol = small_molecule(3);
    const auto basis = enumerate_basis(mol);
    auto veg = build_veg(basis, mol);
    veg.coupling.setZero();
    const auto sys = build_first_quantized(basis, veg, 0.105, 0.0, 2, 1);
    const Eigen::MatrixXd h(sys.hamiltonian);
    CHECK((h - Eigen::MatrixXd(h.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
    for (std::size_t x = 0; x < sys.dimension(); ++x) {
        double e = sys.configs[x].photons * 0.105;
        for (int l : sys.configs[x].local) e += basis.energies[sys.vibration(l)] + (sys.excited(l) ? 0.1 : 0.0);
        CHECK(h(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) == doctest::Approx(e).epsilon(1e-14));
    }
}

TEST_CASE("oracle dimension cap and molecule range are enforced") {
    MoleculeModel big;
    big.electronic_gap = 0.1;
    big.modes = {{0.01, 0.3, 49}};
    big.total_quanta_cap = 49;
    CHECK_THROWS_AS(build_first_quantized(big, 0.1, 0.01, 3, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_first_quantized(small_molecule(2), 0.1, 0.01, 4, 1), std::invalid_argument);
}

TEST_CASE("bosonic Hamiltonian conserves excitations and molecules") {
    const auto mol = small_molecule(4);
    const auto basis = enumerate_basis(mol);
    const auto veg = build_veg(basis, mol);
    auto params = BosonicParameters::from(basis, veg, 0.1, 0.01);
    const auto mixed = mixed_basis(basis.size(), 3, 2);
    auto terms = bosonic_hamiltonian_terms(params);
    const auto good = verify_conservation(assemble(terms, mixed), mixed);
    CHECK(good.excitation_commutator == 0.0);
    CHECK(good.molecule_commutator == 0.0);

    const ModeLayout L{basis.size()};
    terms.push_back({0.01, {{L.excited(1), true}, {L.ground(1), false}}});
    const auto bad = verify_conservation(assemble(terms, mixed), mixed);
    CHECK(bad.excitation_commutator > 0.0);
    CHECK(bad.molecule_commutator == 0.0);

    auto lossy = bosonic_hamiltonian_terms(params);
    lossy.push_back({0.01, {{L.ground(0), false}}});
    CHECK(verify_conservation(assemble(lossy, mixed), mixed).molecule_commutator > 0.0);
}

TEST_CASE("assembled bosonic matrix is symmetric with sqrt(n) factors") {
    const auto mol = small_molecule(2);
    const auto basis = enumerate_basis(mol);
    const auto veg = build_veg(basis, mol);
    const auto fock = manifold_basis(basis.size(), 3, 1);
    const auto h = assemble_dense(bosonic_hamiltonian_terms(BosonicParameters::from(basis, veg, 0.1, 0.01)), fock);
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() <= 1e-16);
    const ModeLayout L{basis.size()};
    FockState photon(L.modes(), 0), exciton(L.modes(), 0);
    photon[ModeLayout::photon()] = 1;
    photon[L.ground(0)] = 3;
    exciton[L.ground(0)] = 2;
    exciton[L.excited(0)] = 1;
    const auto r = *fock.index_of(exciton);
    const auto c = *fock.index_of(photon);
    CHECK(h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) == doctest::Approx(0.01 * std::sqrt(3.0)));
}

TEST_CASE("delocalized exciton has an equal-population reduced density") {
    const auto mol = small_molecule(3);
    const auto sys = build_first_quantized(mol, 0.1, 0.01, 2, 1);
    const auto sub = symmetric_projector(sys);
    const ModeLayout L{3};
    for (std::size_t k = 1; k < 3; ++k) {
        FockState label(L.modes(), 0);
        label[L.ground(0)] = 1;
        label[L.excited(k)] = 1;
        const auto it = std::find(sub.labels.begin(), sub.labels.end(), label);
        REQUIRE(it != sub.labels.end());
        const Eigen::VectorXd psi = sub.vectors.col(it - sub.labels.begin());
        const auto rho = reduced_electronic_density(sys, psi);
        CHECK(rho(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(rho(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(std::abs(rho(0, 1)) <= 1e-12);
        CHECK(std::abs(rho(1, 0)) <= 1e-12);
    }
}

TEST_CASE("golden-rule oracle on a two-level toy") {
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(2, 2);
    v(1, 0) = v(0, 1) = 0.002;
    const Eigen::VectorXd initial = Eigen::VectorXd::Unit(2, 0);
    const Eigen::VectorXd energies = Eigen::VectorXd::Constant(1, 0.001);
    const Eigen::MatrixXd finals = Eigen::VectorXd::Unit(2, 1);
    const double expected = 2.0 * std::numbers::pi * 0.002 * 0.002 * lorentzian(0.001, 0.0, 0.0015);
    CHECK(fgr_oracle(initial, 0.0, v, energies, finals, 0.0015) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(fgr_oracle(initial, 0.0, Eigen::MatrixXd::Zero(2, 2), energies, finals, 0.0015) == 0.0);
    CHECK_THROWS_AS(fgr_oracle(2.0 * initial, 0.0, v, energies, finals, 0.0015), std::invalid_argument);
}

TEST_CASE("block diagonalization follows the coupling pattern") {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(4, 4);
    h(0, 0) = 1.0;
    h(1, 1) = 2.0;
    h(2, 2) = 3.0;
    h(3, 3) = 4.0;
    h(0, 2) = h(2, 0) = 0.5;
    const auto blocks = block_diagonalize(h);
    REQUIRE(blocks.size() == 3);
    std::size_t total = 0;
    for (const auto& b : blocks) total += b.indices.size();
    CHECK(total == 4);
}

TEST_CASE("closed-form vibrational relaxation matches brute-force golden rule") {
    for (std::int64_t n : {2, 5}) {
        for (std::size_t m : {2u, 3u, 4u}) {
            const auto mol = small_molecule(m);
            const auto basis = enumerate_basis(mol);
            const auto veg = build_veg(basis, mol);
            const auto cavity = resonant_cavity(n);
            for (std::size_t k = 1; k < m; ++k) {
                const auto closed = vibrational_relaxation(k, veg, basis, mol, cavity, RelaxationVariant::full4);
                const auto brute = dark_state_relaxation(k, basis, veg, cavity);
                INFO("N = " << n << ", m = " << m << ", k = " << k);
                CHECK(std::abs(closed.upper.total - brute.upper) <= 1e-6 * brute.upper);
                CHECK(std::abs(closed.lower.total - brute.lower) <= 1e-6 * brute.lower);
            }
        }
    }
    CHECK_THROWS_AS(dark_state_relaxation(0, enumerate_basis(small_molecule(3)),
                                          build_veg(enumerate_basis(small_molecule(3)), small_molecule(3)),
                                          resonant_cavity(2)),
                    std::invalid_argument);
}

TEST_CASE("oracle report serializes every check") {
    OracleReport r;
    r.add("a", 1e-12, 1e-10);
    r.add("b", 1.0, 1e-10);
    CHECK_FALSE(r.all_passed());
    const auto j = r.to_json();
    CHECK(j.find("\"check\": \"a\"") != std::string::npos);
    CHECK(j.find("\"pass\": false") != std::string::npos);
}
