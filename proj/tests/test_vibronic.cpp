#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "polrelax/vibronic.hpp"

using namespace polrelax;

namespace {

MoleculeModel two_mode(double sqrt_s1, double sqrt_s2, int n1, int n2, int total) {
    MoleculeModel m;
    m.electronic_gap = 0.1;
    m.modes = {{0.01, sqrt_s1 * sqrt_s1, n1}, {0.0008, sqrt_s2 * sqrt_s2, n2}};
    m.total_quanta_cap = total;
    return m;
}

MoleculeModel single_mode(double s, int n) {
    MoleculeModel m;
    m.electronic_gap = 0.1;
    m.modes = {{0.01, s, n}};
    m.total_quanta_cap = n;
    return m;
}

double poisson(double s, int j) { return std::exp(-s + j * std::log(s) - std::lgamma(j + 1.0)); }

double poisson_cdf(double s, int n) {
    double sum = 0.0;
    for (int j = 0; j <= n; ++j) sum += poisson(s, j);
    return sum;
}

}  // namespace

TEST_CASE("basis enumeration obeys caps and energy order") {
    const auto b = enumerate_basis(two_mode(1.0, 1.0, 1, 1, 2));
    REQUIRE(b.size() == 4);
    CHECK(b.states[0] == Occupation{0, 0});
    CHECK(b.states[1] == Occupation{0, 1});
    CHECK(b.states[2] == Occupation{1, 0});
    CHECK(b.states[3] == Occupation{1, 1});
    CHECK(b.energies[0] == 0.0);
    CHECK(b.energies[3] == doctest::Approx(0.0108));

    const auto capped = enumerate_basis(two_mode(1.0, 1.0, 3, 3, 2));
    CHECK(capped.size() == 6);
    for (std::size_t i = 0; i < capped.size(); ++i) CHECK(capped.quanta(i) <= 2);
    for (std::size_t i = 1; i < capped.size(); ++i) CHECK(capped.energies[i] >= capped.energies[i - 1]);
}

TEST_CASE("zero caps give the single ground state") {
    const auto b = enumerate_basis(single_mode(1.0, 0));
    REQUIRE(b.size() == 1);
    const auto veg = build_veg(b, single_mode(1.0, 0));
    CHECK(veg.off_diagonal_nonzeros() == 0);
    CHECK(stokes_shifted_state(veg).energy == doctest::Approx(0.1));
}

TEST_CASE("invalid molecules are rejected") {
    MoleculeModel empty;
    empty.electronic_gap = 0.1;
    CHECK_THROWS_AS(enumerate_basis(empty), std::invalid_argument);
    auto neg = single_mode(1.0, 3);
    neg.modes[0].huang_rhys = -0.1;
    CHECK_THROWS_AS(enumerate_basis(neg), std::invalid_argument);
    auto badcap = single_mode(1.0, 3);
    badcap.total_quanta_cap = -1;
    CHECK_THROWS_AS(enumerate_basis(badcap), std::invalid_argument);
}

TEST_CASE("vibronic coupling connects single-quantum neighbours only") {
    const auto mol = two_mode(1.0, 3.5, 4, 6, 8);
    const auto b = enumerate_basis(mol);
    const auto veg = build_veg(b, mol);
    std::size_t expected = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            int diff = 0;
            std::size_t mode = 0;
            for (std::size_t k = 0; k < 2; ++k) {
                diff += std::abs(b.states[i][k] - b.states[j][k]);
                if (b.states[i][k] != b.states[j][k]) mode = k;
            }
            const double v = veg.coupling(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (diff == 1) {
                ++expected;
                const int n = std::min(b.states[i][mode], b.states[j][mode]);
                const auto& md = mol.modes[mode];
                CHECK(v == doctest::Approx(md.frequency * std::sqrt(md.huang_rhys) * std::sqrt(n + 1.0)));
            } else {
                CHECK(v == 0.0);
            }
        }
        CHECK(veg.excited_energies(static_cast<Eigen::Index>(i)) == doctest::Approx(b.energies[i] + 0.1));
    }
    CHECK(veg.off_diagonal_nonzeros() == expected);
    CHECK((veg.coupling - veg.coupling.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single-mode emission weights are Poisson") {
    const auto cm = converge_basis(single_mode(1.0, 2), 1e-9);
    REQUIRE(cm.converged);
    const auto ss = stokes_shifted_state(cm.eigensystem);
    CHECK(ss.energy == doctest::Approx(0.1 - 0.01).epsilon(1e-10));
    for (std::size_t j = 0; j < cm.basis.size(); ++j) {
        const double c = ss.coefficients(static_cast<Eigen::Index>(j));
        CHECK(std::abs(c * c - poisson(1.0, cm.basis.states[j][0])) <= 1e-6);
    }
    CHECK(ss.fc_leak == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
}

TEST_CASE("absorption and emission mirror each other about the Stokes-shifted energy") {
    for (const auto& mol : {single_mode(1.0, 30), single_mode(0.3, 20), single_mode(2.5, 40)}) {
        const auto cm = fixed_basis(mol);
        const auto ss = stokes_shifted_state(cm.eigensystem);
        const auto grid = std::vector<double>{0.0, 0.2};
        const auto em = bare_emission(ss, cm.basis, 0.0015, grid, true);
        const auto ab = bare_absorption(cm.eigensystem, 0.0015, grid);
        REQUIRE(em.sticks.size() == ab.sticks.size());
        for (std::size_t j = 0; j < em.sticks.size(); ++j) {
            const double mirrored = 2.0 * ss.energy - em.sticks[j].frequency;
            CHECK(std::abs(ab.sticks[j].weight - em.sticks[j].weight) <= 1e-8);
            if (ab.sticks[j].weight > 1e-8) CHECK(std::abs(ab.sticks[j].frequency - mirrored) <= 1e-8);
        }
        CHECK(total_weight(ab.sticks) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("emission excludes the origin line unless asked") {
    const auto cm = fixed_basis(single_mode(1.0, 10));
    const auto ss = stokes_shifted_state(cm.eigensystem);
    const std::vector<double> grid{0.0, 0.2};
    CHECK(bare_emission(ss, cm.basis, 0.0015, grid).sticks.size() == cm.basis.size() - 1);
    CHECK(bare_emission(ss, cm.basis, 0.0015, grid, true).sticks.size() == cm.basis.size());
    const auto ens = bare_absorption(cm.eigensystem, 0.0015, grid, AbsorptionScale::ensemble, 2.0);
    CHECK(total_weight(ens.sticks) == doctest::Approx(2.0 * 3.14159265358979323846).epsilon(1e-10));
}

TEST_CASE("Stokes-shifted energy decreases monotonically with the caps") {
    double previous = 1.0;
    for (int n = 2; n <= 40; n += 4) {
        const auto e = stokes_shifted_state(fixed_basis(two_mode(1.0, 3.5, 8, n, 8 + n)).veg).energy;
        CHECK(e <= previous + 1e-15);
        previous = e;
    }
}

TEST_CASE("converged caps cover the Poisson tails for the strongest displacement") {
    const auto cm = converge_basis(two_mode(1.0, 5.0, 8, 40, 48), 1e-6);
    REQUIRE(cm.converged);
    MESSAGE("caps (" << cm.molecule.modes[0].max_quanta << ", " << cm.molecule.modes[1].max_quanta
                     << "), total " << cm.molecule.total_quanta_cap << ", m = " << cm.basis.size());
    CHECK(poisson_cdf(1.0, cm.molecule.modes[0].max_quanta) >= 1.0 - 1e-6);
    CHECK(poisson_cdf(25.0, cm.molecule.modes[1].max_quanta) >= 1.0 - 1e-6);
    const auto ss = stokes_shifted_state(cm.eigensystem);
    CHECK(ss.energy == doctest::Approx(cm.molecule.adiabatic_minimum()).epsilon(1e-8));
}

TEST_CASE("undisplaced modes need no growth") {
    const auto cm = converge_basis(two_mode(0.0, 0.0, 1, 1, 2), 1e-6);
    CHECK(cm.converged);
    CHECK(cm.basis.size() == 4);
    CHECK(cm.veg.off_diagonal_nonzeros() == 0);
}
