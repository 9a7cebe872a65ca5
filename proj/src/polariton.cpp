#include "polrelax/polariton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace polrelax {

void CavityModel::validate() const {
    if (!(collective_coupling > 0.0)) throw std::invalid_argument("collective coupling g*sqrt(N) must be positive");
    if (!(kappa > 0.0)) throw std::invalid_argument("cavity linewidth kappa must be positive");
    if (!(gamma_xi > 0.0)) throw std::invalid_argument("eigenstate broadening gamma_xi must be positive");
    if (molecules < 1) throw std::invalid_argument("molecule count N must be >= 1");
}

double CavityModel::single_coupling() const noexcept {
    return collective_coupling / std::sqrt(static_cast<double>(molecules));
}

std::vector<double> LinearResponse::minus_im_green() const {
    std::vector<double> out(green.size());
    for (std::size_t i = 0; i < green.size(); ++i) out[i] = -green[i].imag();
    return out;
}

PolaritonBlock build_block(const Sector& sector, const VibronicCouplingMatrix& veg,
                           const VibrationalBasis& basis, const CavityModel& cavity) {
    const std::size_t m = veg.dimension();
    if (basis.size() != m) throw std::invalid_argument("build_block: basis/coupling size mismatch");
    const auto occupied = static_cast<std::int64_t>(sector.excited_molecules());
    if (occupied > cavity.molecules) {
        throw std::invalid_argument("build_block: sector has more phonon-carrying molecules than N");
    }
    double shift = 0.0;
    for (std::size_t j : sector.phonon_states) {
        if (j == 0 || j >= m) throw std::invalid_argument("build_block: sector index outside 1..m-1");
        shift += basis.energies[j];
    }
    // Photon-FC coupling g sqrt(n_1) with n_1 = N - M ground-state molecules
    // left in the vibrational ground state.
    const double coupling = cavity.single_coupling() * std::sqrt(static_cast<double>(cavity.molecules - occupied));

    PolaritonBlock block;
    block.sector = sector;
    block.effective_coupling = coupling;
    block.sector_energy = shift;
    const auto n = static_cast<Eigen::Index>(m + 1);
    block.matrix = Eigen::MatrixXd::Zero(n, n);
    block.matrix(0, 0) = cavity.cavity_frequency + shift;
    block.matrix.bottomRightCorner(n - 1, n - 1) = veg.excited_block();
    block.matrix.bottomRightCorner(n - 1, n - 1).diagonal().array() += shift;
    block.matrix(0, 1) = coupling;
    block.matrix(1, 0) = coupling;
    return block;
}

PolaritonEigensystem diagonalize(const Eigen::MatrixXd& symmetric) {
    if (symmetric.rows() != symmetric.cols() || symmetric.rows() < 2) {
        throw std::invalid_argument("diagonalize: need a square matrix of dimension >= 2");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("polariton block: eigensolver failed to converge");
    }
    const Eigen::VectorXd& values = solver.eigenvalues();
    const Eigen::MatrixXd& vectors = solver.eigenvectors();
    const Eigen::Index n = values.size();

    // Ascending order; inside a numerically degenerate cluster order by the
    // matter weight on the Franck-Condon state.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
    const double tol = 1e-12 * scale;
    std::size_t start = 0;
    while (start < order.size()) {
        std::size_t stop = start + 1;
        while (stop < order.size() && values(order[stop]) - values(order[stop - 1]) <= tol) ++stop;
        std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(stop),
                         [&](Eigen::Index a, Eigen::Index b) {
                             return std::abs(vectors(1, a)) < std::abs(vectors(1, b));
                         });
        start = stop;
    }

    PolaritonEigensystem eig;
    eig.energies.resize(n);
    eig.vectors.resize(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        eig.energies(c) = values(order[static_cast<std::size_t>(c)]);
        eig.vectors.col(c) = vectors.col(order[static_cast<std::size_t>(c)]);
    }
    normalize_signs(eig.vectors);
    return eig;
}

PolaritonEigensystem diagonalize(const PolaritonBlock& block) { return diagonalize(block.matrix); }

TavisCummingsPolaritons tc_polaritons(const CavityModel& cavity) {
    const double delta = cavity.detuning();
    const double coupling_sq = cavity.collective_coupling * cavity.collective_coupling;  // g^2 N
    const double root = std::sqrt(4.0 * coupling_sq + delta * delta);

    auto coefficients = [&](double branch_root, double& photon, double& matter) {
        const double num = delta + branch_root;
        const double norm = std::sqrt(4.0 * coupling_sq + num * num);
        if (norm == 0.0) {
            photon = 0.0;
            matter = 1.0;
            return;
        }
        photon = num / norm;
        matter = 2.0 * cavity.collective_coupling / norm;
    };

    TavisCummingsPolaritons tc;
    tc.upper = cavity.electronic_gap + 0.5 * (delta + root);
    tc.lower = cavity.electronic_gap + 0.5 * (delta - root);
    coefficients(root, tc.photon_upper, tc.matter_upper);
    coefficients(-root, tc.photon_lower, tc.matter_lower);
    return tc;
}

LinearResponse photon_green_function(const PolaritonEigensystem& eig, double gamma_xi,
                                     std::span<const double> grid) {
    if (grid.empty()) throw std::invalid_argument("photon_green_function: empty grid");
    if (!(gamma_xi > 0.0)) throw std::invalid_argument("photon_green_function: gamma_xi must be positive");
    LinearResponse lr;
    lr.omega.assign(grid.begin(), grid.end());
    lr.green.resize(grid.size());
    const std::size_t n = eig.size();
    std::vector<double> weight(n);
    for (std::size_t xi = 0; xi < n; ++xi) weight[xi] = eig.photon(xi) * eig.photon(xi);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        double re = 0.0, im = 0.0;
        for (std::size_t xi = 0; xi < n; ++xi) {
            if (weight[xi] == 0.0) continue;
            const double d = grid[p] - eig.energies(static_cast<Eigen::Index>(xi));
            const double inv = weight[xi] / (d * d + gamma_xi * gamma_xi);
            re += d * inv;
            im -= gamma_xi * inv;
        }
        lr.green[p] = {re, im};
    }
    return lr;
}

void absorption_transmission(LinearResponse& response, double kappa) {
    if (!(kappa > 0.0)) throw std::invalid_argument("absorption_transmission: kappa must be positive");
    const std::size_t n = response.green.size();
    response.absorption.resize(n);
    response.transmission.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto d = response.green[i];
        const double t = 0.25 * kappa * kappa * std::norm(d);
        response.transmission[i] = t;
        response.absorption[i] = kappa * (-d.imag()) - 2.0 * t;
    }
}

std::vector<double> default_grid(const PolaritonEigensystem& eig, double gamma,
                                 std::span<const double> extra, std::size_t points) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t xi = 0; xi < eig.size(); ++xi) {
        if (eig.photon(xi) * eig.photon(xi) <= 1e-12) continue;
        lo = std::min(lo, eig.energies(static_cast<Eigen::Index>(xi)));
        hi = std::max(hi, eig.energies(static_cast<Eigen::Index>(xi)));
    }
    if (!(hi >= lo)) {
        lo = eig.energies.minCoeff();
        hi = eig.energies.maxCoeff();
    }
    for (double x : extra) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    return uniform_grid(lo - 20.0 * gamma, hi + 20.0 * gamma, points);
}

double lowest_band_peak(std::span<const double> grid, std::span<const double> curve,
                        double fraction) {
    if (grid.size() != curve.size() || grid.size() < 3) {
        throw std::invalid_argument("lowest_band_peak: need matching grid/curve with >= 3 points");
    }
    const double peak = *std::max_element(curve.begin(), curve.end());
    const double threshold = fraction * peak;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        if (curve[i] >= threshold && curve[i] >= curve[i - 1] && curve[i] > curve[i + 1]) return grid[i];
    }
    return grid[static_cast<std::size_t>(std::max_element(curve.begin(), curve.end()) - curve.begin())];
}

}  // namespace polrelax
