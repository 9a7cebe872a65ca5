#include "polrelax/rates.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>

namespace polrelax {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string label_of(const char* fmt, std::size_t a, std::size_t b) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, a, b);
    return buf;
}

void require_sizes(const StokesShiftedState& ss, const VibrationalBasis& basis,
                   const PolaritonEigensystem& eig, const char* what) {
    const auto m = basis.size();
    if (static_cast<std::size_t>(ss.coefficients.size()) != m || eig.matter_states() != m) {
        throw std::invalid_argument(std::string(what) + ": inconsistent basis sizes");
    }
}

// Linear interpolation of f onto grid, zero outside f's support.
std::vector<double> resample(const SpectralFunction& f, std::span<const double> grid) {
    std::vector<double> out(grid.size(), 0.0);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const double x = grid[p];
        if (x < f.omega.front() || x > f.omega.back()) continue;
        auto it = std::upper_bound(f.omega.begin(), f.omega.end(), x);
        std::size_t hi = static_cast<std::size_t>(it - f.omega.begin());
        if (hi == f.omega.size()) hi = f.omega.size() - 1;
        const std::size_t lo = hi - 1;
        const double t = (x - f.omega[lo]) / (f.omega[hi] - f.omega[lo]);
        out[p] = (1.0 - t) * f.value[lo] + t * f.value[hi];
    }
    return out;
}

std::vector<double> emission_on(const SpectralFunction& sigma_em, const LinearResponse& lr,
                                double tolerance) {
    if (sigma_em.omega.size() != sigma_em.value.size()) {
        throw std::invalid_argument("emission spectrum: omega/value size mismatch");
    }
    require_increasing(sigma_em.omega, "emission spectrum");
    require_increasing(lr.omega, "linear response");
    if (lr.absorption.size() != lr.size() || lr.transmission.size() != lr.size()) {
        throw std::invalid_argument("linear response: absorption/transmission not evaluated");
    }
    bool same = sigma_em.omega.size() == lr.omega.size();
    if (same) {
        const double h = lr.omega[1] - lr.omega[0];
        for (std::size_t i = 0; i < lr.size() && same; ++i) {
            same = std::abs(sigma_em.omega[i] - lr.omega[i]) <= 1e-9 * h;
        }
    }
    if (same) return sigma_em.value;
    auto values = resample(sigma_em, lr.omega);
    const double before = trapezoid(sigma_em.omega, sigma_em.value);
    const double after = trapezoid(lr.omega, values);
    if (std::abs(after - before) > tolerance * std::max(std::abs(before), 1e-300)) {
        throw std::invalid_argument("emission spectrum: grid mismatch after resampling exceeds tolerance");
    }
    return values;
}

double lorentz(double x, double gamma) { return (gamma / kPi) / (x * x + gamma * gamma); }

}  // namespace

std::vector<std::pair<std::string, double>> RateResult::records() const {
    std::vector<std::pair<std::string, double>> out;
    out.emplace_back("total", total);
    for (const auto& [name, value] : channels) out.emplace_back("channel:" + name, value);
    for (const auto& c : per_final_state) out.emplace_back(c.label, c.value);
    return out;
}

void finalize(RateResult& result, double relative_cut) {
    auto& items = result.per_final_state;
    std::sort(items.begin(), items.end(), [](const RateContribution& a, const RateContribution& b) {
        if (a.value != b.value) return a.value > b.value;
        return a.label < b.label;
    });
    double total = 0.0;
    for (auto it = items.rbegin(); it != items.rend(); ++it) total += it->value;  // small first
    result.total = total;
    double dropped = 0.0;
    while (!items.empty() && dropped + items.back().value <= relative_cut * total) {
        dropped += items.back().value;
        items.pop_back();
    }
}

RateResult radiative_pumping_sum(const StokesShiftedState& ss, const VibrationalBasis& basis,
                                 const PolaritonEigensystem& eig, const CavityModel& cavity) {
    require_sizes(ss, basis, eig, "radiative_pumping_sum");
    const double g = cavity.single_coupling();
    const double gamma = cavity.gamma_xi;
    RateResult r;
    for (std::size_t xi = 0; xi < eig.size(); ++xi) {
        const double a2 = eig.photon(xi) * eig.photon(xi);
        if (a2 == 0.0) continue;
        const double w = eig.energies(static_cast<Eigen::Index>(xi));
        for (std::size_t j = 1; j < basis.size(); ++j) {
            const double c = ss.coefficients(static_cast<Eigen::Index>(j));
            const double value = 2.0 * kPi * g * g * a2 * c * c * lorentz(w - (ss.energy - basis.energies[j]), gamma);
            if (value > 0.0) r.per_final_state.push_back({label_of("xi=%zu;j=%zu", xi, j), value});
        }
    }
    finalize(r);
    return r;
}

RateResult radiative_pumping_overlap(const SpectralFunction& sigma_em, const LinearResponse& lr,
                                     const CavityModel& cavity, double resample_tolerance) {
    const auto em = emission_on(sigma_em, lr, resample_tolerance);
    const double g = cavity.single_coupling();
    const double pref = 2.0 * g * g / cavity.kappa;
    const std::size_t n = lr.size();
    std::vector<double> reabs(n), trans(n);
    SpectralFunction resolved{lr.omega, std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        reabs[i] = pref * em[i] * lr.absorption[i];
        trans[i] = pref * em[i] * 2.0 * lr.transmission[i];
        resolved.value[i] = reabs[i] + trans[i];
    }
    RateResult r;
    const double a = trapezoid(lr.omega, reabs);
    const double t = trapezoid(lr.omega, trans);
    r.channels["reabsorbed"] = a;
    r.channels["transmitted"] = t;
    r.per_final_state = {{"reabsorbed", a}, {"transmitted", t}};
    r.frequency_resolved = std::move(resolved);
    finalize(r, 0.0);
    return r;
}

RecyclingResult recycling_rate(const SpectralFunction& sigma_em, const LinearResponse& lr,
                               const CavityModel& cavity, double resample_tolerance) {
    const auto em = emission_on(sigma_em, lr, resample_tolerance);
    const double g = cavity.single_coupling();
    const double pref = 2.0 * g * g / cavity.kappa;
    const std::size_t n = lr.size();
    std::vector<double> integrand(n);
    for (std::size_t i = 0; i < n; ++i) integrand[i] = pref * em[i] * lr.absorption[i];

    RecyclingResult out;
    const double a = trapezoid(lr.omega, integrand);
    out.rate.channels["reabsorbed"] = a;
    out.rate.per_final_state = {{"reabsorbed", a}};
    out.rate.frequency_resolved = SpectralFunction{lr.omega, integrand};
    finalize(out.rate, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (lr.transmission[i] > 1e-30) {
            out.reabsorption_ratio.omega.push_back(lr.omega[i]);
            out.reabsorption_ratio.value.push_back(lr.absorption[i] / (2.0 * lr.transmission[i]));
        }
    }
    return out;
}

const char* variant_name(RelaxationVariant v) noexcept {
    switch (v) {
        case RelaxationVariant::full4: return "full4";
        case RelaxationVariant::reduced2: return "reduced2";
        case RelaxationVariant::litinskaya: return "litinskaya";
    }
    return "unknown";
}

BranchRates vibrational_relaxation(std::size_t k, const VibronicCouplingMatrix& veg,
                                   const VibrationalBasis& basis, const MoleculeModel& molecule,
                                   const CavityModel& cavity, RelaxationVariant variant) {
    const std::size_t m = veg.dimension();
    if (basis.size() != m) throw std::invalid_argument("vibrational_relaxation: basis/coupling size mismatch");
    if (k == 0) throw std::invalid_argument("vibrational_relaxation: k must label a phonon-carrying state (k >= 1)");
    if (k >= m) throw std::invalid_argument("vibrational_relaxation: k outside the vibrational basis");
    const double scale = std::max({1.0, std::abs(cavity.cavity_frequency), std::abs(cavity.electronic_gap)});
    if (std::abs(cavity.detuning()) > 1e-12 * scale) {
        throw std::invalid_argument("vibrational_relaxation: requires zero detuning");
    }
    const double n = static_cast<double>(cavity.molecules);
    const double split = cavity.collective_coupling;
    const double gamma = cavity.gamma_xi;
    const auto& V = veg.coupling;
    const auto& w = basis.energies;
    const auto K = static_cast<Eigen::Index>(k);

    auto branch = [&](double sign) {
        RateResult r;
        auto add = [&](const std::string& channel, std::string label, double value) {
            r.channels[channel] += value;
            if (value > 0.0) r.per_final_state.push_back({std::move(label), value});
        };
        r.channels["first-order"] = 0.0;
        r.channels["second-order"] = 0.0;
        if (variant == RelaxationVariant::litinskaya) {
            for (std::size_t a = 0; a < molecule.modes.size(); ++a) {
                const auto& mode = molecule.modes[a];
                const double v2 = mode.frequency * mode.frequency * mode.huang_rhys;
                const double value = 2.0 * kPi * (n - 1.0) / (2.0 * n * n) * v2 * lorentz(mode.frequency + sign * split, gamma);
                add("first-order", "mode=" + std::to_string(a), value);
            }
            finalize(r);
            return r;
        }
        for (std::size_t i = 1; i < m; ++i) {
            if (i == k) continue;
            const auto I = static_cast<Eigen::Index>(i);
            const double vik = V(I, K);
            const double vi1 = V(I, 0);
            if (vik != 0.0) {
                add("first-order", label_of("i=%zu;path=%zu", i, 1),
                    2.0 * kPi * (n - 1.0) / (2.0 * n * n) * vik * vik * lorentz(w[i] - w[k] + sign * split, gamma));
            }
            if (vi1 != 0.0) {
                add("second-order", label_of("i=%zu;path=%zu", i, 2),
                    2.0 * kPi / (2.0 * n * n) * vi1 * vi1 * lorentz(w[i] + sign * split, gamma));
            }
        }
        if (variant == RelaxationVariant::full4) {
            const double v1k = V(0, K);
            r.channels["recurrence"] = 0.0;
            r.channels["same-mode"] = 0.0;
            if (v1k != 0.0) {
                add("recurrence", label_of("i=%zu;path=%zu", std::size_t{0}, 3),
                    2.0 * kPi * (n - 1.0) / n * 0.5 * v1k * v1k * lorentz(w[0] - w[k] + sign * split, gamma));
                add("same-mode", label_of("i=%zu;path=%zu", k, 4),
                    2.0 * kPi / (n * n) * v1k * v1k * lorentz(w[k] + sign * split, gamma));
            }
        }
        finalize(r);
        return r;
    };
    return {branch(+1.0), branch(-1.0)};
}

RateResult raman_scattering(const StokesShiftedState& ss, const PolaritonEigensystem& eig,
                            const VibrationalBasis& basis, const CavityModel& cavity,
                            double weight_cut) {
    require_sizes(ss, basis, eig, "raman_scattering");
    const std::size_t m = basis.size();
    const std::size_t nx = eig.size();
    const double g = cavity.single_coupling();
    const double gamma = cavity.gamma_xi;
    using cd = std::complex<double>;

    std::vector<std::size_t> active;  // emitting-side states with non-negligible weight
    std::vector<char> is_active(m, 0);
    for (std::size_t i = 1; i < m; ++i) {
        const double c = ss.coefficients(static_cast<Eigen::Index>(i));
        if (c * c > weight_cut) {
            active.push_back(i);
            is_active[i] = 1;
        }
    }
    RateResult r;
    if (active.empty() || g == 0.0) {
        finalize(r);
        return r;
    }

    // G(j, i) = sum_xi b^(xi,j) a^(xi) / (w_xi - (w_ss - w_g,i) + i gamma)
    Eigen::MatrixXcd resolvent(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(active.size()));
    for (std::size_t c = 0; c < active.size(); ++c) {
        const double e = ss.energy - basis.energies[active[c]];
        for (std::size_t xi = 0; xi < nx; ++xi) {
            resolvent(static_cast<Eigen::Index>(xi), static_cast<Eigen::Index>(c)) =
                eig.photon(xi) / cd(eig.energies(static_cast<Eigen::Index>(xi)) - e, gamma);
        }
    }
    const Eigen::MatrixXd matter = eig.vectors.bottomRows(static_cast<Eigen::Index>(m));
    const Eigen::MatrixXcd G = matter.cast<cd>() * resolvent;  // m x active

    std::vector<double> photon_weight(nx);
    for (std::size_t xi = 0; xi < nx; ++xi) photon_weight[xi] = eig.photon(xi) * eig.photon(xi);
    auto minus_im_green_over_pi = [&](double e) {
        double s = 0.0;
        for (std::size_t xi = 0; xi < nx; ++xi) {
            if (photon_weight[xi] != 0.0) s += photon_weight[xi] * lorentz(eig.energies(static_cast<Eigen::Index>(xi)) - e, gamma);
        }
        return s;
    };

    std::vector<long> column(m, -1);
    for (std::size_t c = 0; c < active.size(); ++c) column[active[c]] = static_cast<long>(c);
    auto F = [&](std::size_t i, std::size_t j) -> cd {
        if (column[i] < 0) return {0.0, 0.0};
        return ss.coefficients(static_cast<Eigen::Index>(i)) *
               G(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(column[i]));
    };

    const double g4 = g * g * g * g;
    for (std::size_t i = 1; i < m; ++i) {
        for (std::size_t j = 1; j <= i; ++j) {
            if (!is_active[i] && !is_active[j]) continue;
            const cd s = i == j ? std::sqrt(2.0) * F(i, i) : F(i, j) + F(j, i);
            const double amp2 = std::norm(s);
            if (amp2 == 0.0) continue;
            const double e = ss.energy - basis.energies[i] - basis.energies[j];
            const double value = 2.0 * kPi * g4 * amp2 * minus_im_green_over_pi(e);
            if (value > 0.0) r.per_final_state.push_back({label_of("i=%zu;j=%zu", i, j), value});
        }
    }
    finalize(r);
    return r;
}

}  // namespace polrelax
