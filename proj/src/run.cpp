#include "polrelax/run.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <thread>

#include "polrelax/fock.hpp"
#include "polrelax/oracle.hpp"
#include "polrelax/polariton.hpp"
#include "polrelax/rates.hpp"
#include "polrelax/vibronic.hpp"

namespace polrelax {

using json = nlohmann::ordered_json;

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

// Contributions smaller than this fraction of the total are folded into one
// "other" row in the per-task record files.
constexpr double kListingCut = 1e-9;

struct Prepared {
    ConvergedMolecule molecule;
    StokesShiftedState ss;
    CavityModel cavity;
    std::optional<PolaritonEigensystem> polaritons;
    std::vector<double> grid;
};

bool needs_polaritons(const RunConfig& cfg) {
    return cfg.has_task("spectra") || cfg.has_task("rp") || cfg.has_task("rec") || cfg.has_task("scatt");
}

Prepared prepare(const RunConfig& cfg) {
    Prepared p;
    p.molecule = cfg.molecule.auto_converge ? converge_basis(cfg.molecule.model, cfg.molecule.epsilon)
                                            : fixed_basis(cfg.molecule.model);
    p.ss = stokes_shifted_state(p.molecule.eigensystem);
    p.cavity = cfg.cavity_model();
    p.cavity.validate();
    if (!needs_polaritons(cfg)) return p;
    if (p.molecule.basis.size() < 1) throw std::invalid_argument("empty vibrational basis");
    p.polaritons = diagonalize(build_block(Sector{}, p.molecule.veg, p.molecule.basis, p.cavity));
    if (cfg.grid.omega_min) {
        p.grid = uniform_grid(*cfg.grid.omega_min, *cfg.grid.omega_max, cfg.grid.points);
    } else {
        std::vector<double> lines;
        for (std::size_t j = 1; j < p.molecule.basis.size(); ++j) {
            const double c = p.ss.coefficients(static_cast<Eigen::Index>(j));
            if (c * c > 1e-12) lines.push_back(p.ss.energy - p.molecule.basis.energies[j]);
        }
        const double width = std::max(p.cavity.gamma_xi, cfg.cavity.gamma_mol);
        p.grid = default_grid(*p.polaritons, width, lines, cfg.grid.points);
    }
    return p;
}

std::string records_csv(const std::vector<std::pair<std::string, double>>& rows) {
    std::string out = "label,value\n";
    for (const auto& [label, value] : rows) out += label + "," + format_number(value) + "\n";
    return out;
}

std::string records_json(const std::vector<std::pair<std::string, double>>& rows) {
    json arr = json::array();
    for (const auto& [label, value] : rows) arr.push_back({{"label", label}, {"value", value}});
    return arr.dump(2) + "\n";
}

// Record rows of a rate with small contributions folded into "other".
std::vector<std::pair<std::string, double>> listing(const RateResult& r, const std::string& prefix = "") {
    std::vector<std::pair<std::string, double>> rows;
    rows.emplace_back(prefix + "total", r.total);
    for (const auto& [name, value] : r.channels) rows.emplace_back(prefix + "channel:" + name, value);
    double listed = 0.0;
    for (const auto& c : r.per_final_state) {
        if (c.value < kListingCut * r.total) break;
        rows.emplace_back(prefix + c.label, c.value);
        listed += c.value;
    }
    rows.emplace_back(prefix + "other", std::max(0.0, r.total - listed));
    return rows;
}

json channels_json(const RateResult& r) {
    json j = json::object();
    for (const auto& [name, value] : r.channels) j[name] = value;
    return j;
}

struct Evaluation {
    ScalarMap scalars;
    std::vector<Artifact> files;
    json summary = json::object();
};

std::string table_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns) {
    std::string out;
    for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
    out += "\n";
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + format_number(columns[c][r]);
        out += "\n";
    }
    return out;
}

std::string table_json(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns) {
    json j = json::object();
    for (std::size_t c = 0; c < header.size(); ++c) j[header[c]] = columns[c];
    return j.dump(2) + "\n";
}

Evaluation evaluate(const RunConfig& cfg, bool render) {
    Evaluation ev;
    const Prepared p = prepare(cfg);
    const auto& basis = p.molecule.basis;
    const bool csv = cfg.output_format == "csv";
    auto emit_records = [&](const std::string& task, const std::vector<std::pair<std::string, double>>& rows) {
        if (render) ev.files.push_back({task + (csv ? ".csv" : ".json"), csv ? records_csv(rows) : records_json(rows)});
    };
    auto emit_table = [&](const std::string& name, const std::vector<std::string>& header,
                          const std::vector<std::vector<double>>& columns) {
        if (render) {
            ev.files.push_back({name + (csv ? ".csv" : ".json"),
                                csv ? table_csv(header, columns) : table_json(header, columns)});
        }
    };

    json mol = json::object();
    mol["basis_states"] = basis.size();
    json caps = json::array();
    for (const auto& m : p.molecule.molecule.modes) caps.push_back(m.max_quanta);
    mol["n_max"] = caps;
    mol["total_quanta_cap"] = p.molecule.molecule.total_quanta_cap;
    mol["auto_converge"] = cfg.molecule.auto_converge;
    mol["converged"] = p.molecule.converged;
    mol["iterations"] = p.molecule.iterations;
    mol["last_change"] = p.molecule.last_change;
    mol["stokes_shifted_energy"] = p.ss.energy;
    mol["fc_leak"] = p.ss.fc_leak;
    ev.summary["molecule"] = mol;
    ev.summary["cavity"] = {{"omega_c", p.cavity.cavity_frequency},
                            {"detuning", p.cavity.detuning()},
                            {"g_sqrt_n", p.cavity.collective_coupling},
                            {"g", p.cavity.single_coupling()},
                            {"n_molecules", p.cavity.molecules},
                            {"kappa", p.cavity.kappa},
                            {"gamma_xi", p.cavity.gamma_xi},
                            {"gamma_mol", cfg.cavity.gamma_mol}};
    ev.scalars["m"] = static_cast<double>(basis.size());
    ev.scalars["fc_leak"] = p.ss.fc_leak;
    json rates = json::object();

    std::optional<LinearResponse> lr;
    std::vector<Stick> sticks;
    if (p.polaritons) {
        lr = photon_green_function(*p.polaritons, p.cavity.gamma_xi, p.grid);
        absorption_transmission(*lr, p.cavity.kappa);
        for (std::size_t j = 1; j < basis.size(); ++j) {
            const double c = p.ss.coefficients(static_cast<Eigen::Index>(j));
            sticks.push_back({p.ss.energy - basis.energies[j], c * c});
        }
    }
    const auto resolved_emission = [&] { return deposit_sticks(sticks, p.grid); };

    if (cfg.has_task("spectra")) {
        const auto em = broaden(sticks, p.grid, cfg.cavity.gamma_mol);
        const auto ab = bare_absorption(p.molecule.eigensystem, cfg.cavity.gamma_mol, p.grid);
        const double g = p.cavity.single_coupling();
        const double pref = 2.0 * g * g / p.cavity.kappa;
        std::vector<double> rp(p.grid.size());
        for (std::size_t i = 0; i < p.grid.size(); ++i) {
            rp[i] = pref * em.value[i] * (lr->absorption[i] + 2.0 * lr->transmission[i]);
        }
        const auto minus_im = lr->minus_im_green();
        emit_table("spectra", {"omega", "sigma_abs", "sigma_em", "A", "T", "minus_im_DR", "gamma_rp_omega"},
                   {p.grid, ab.broadened.value, em.value, lr->absorption, lr->transmission, minus_im, rp});
        const double lp = lowest_band_peak(p.grid, minus_im);
        const auto peak = std::max_element(rp.begin(), rp.end()) - rp.begin();
        ev.summary["spectra"] = {{"grid_points", p.grid.size()},
                                 {"omega_min", p.grid.front()},
                                 {"omega_max", p.grid.back()},
                                 {"lower_polariton_peak", lp},
                                 {"gamma_rp_omega_peak", p.grid[static_cast<std::size_t>(peak)]},
                                 {"integral_minus_im_DR", trapezoid(p.grid, minus_im)}};
        ev.scalars["spectra.lower_polariton_peak"] = lp;
        ev.scalars["spectra.gamma_rp_omega_peak"] = p.grid[static_cast<std::size_t>(peak)];
    }
    if (cfg.has_task("rp")) {
        const auto sum = radiative_pumping_sum(p.ss, basis, *p.polaritons, p.cavity);
        const auto overlap = radiative_pumping_overlap(resolved_emission(), *lr, p.cavity);
        auto rows = listing(sum);
        rows.insert(rows.begin() + 1, {"overlap_total", overlap.total});
        rows.insert(rows.begin() + 2, {"overlap_channel:reabsorbed", overlap.channels.at("reabsorbed")});
        rows.insert(rows.begin() + 3, {"overlap_channel:transmitted", overlap.channels.at("transmitted")});
        emit_records("rp", rows);
        rates["rp"] = {{"total", sum.total}, {"overlap_total", overlap.total}, {"channels", channels_json(overlap)}};
        ev.scalars["rp"] = sum.total;
    }
    if (cfg.has_task("rec")) {
        const auto rec = recycling_rate(resolved_emission(), *lr, p.cavity);
        emit_records("rec", listing(rec.rate));
        emit_table("rec_ratio", {"omega", "ratio"}, {rec.reabsorption_ratio.omega, rec.reabsorption_ratio.value});
        rates["rec"] = {{"total", rec.rate.total}};
        ev.scalars["rec"] = rec.rate.total;
    }
    if (cfg.has_task("vr")) {
        if (cfg.relaxation.initial_state >= basis.size()) {
            throw std::invalid_argument("vibrational_relaxation.initial_state " + std::to_string(cfg.relaxation.initial_state) +
                                        " is outside the vibrational basis (m = " + std::to_string(basis.size()) + ")");
        }
        const auto br = vibrational_relaxation(cfg.relaxation.initial_state, p.molecule.veg, basis,
                                               p.molecule.molecule, p.cavity, cfg.relaxation.variant);
        auto rows = listing(br.upper, "upper:");
        const auto lower = listing(br.lower, "lower:");
        rows.insert(rows.end(), lower.begin(), lower.end());
        emit_records("vr", rows);
        rates["vr"] = {{"variant", variant_name(cfg.relaxation.variant)},
                       {"initial_state", cfg.relaxation.initial_state},
                       {"upper", {{"total", br.upper.total}, {"channels", channels_json(br.upper)}}},
                       {"lower", {{"total", br.lower.total}, {"channels", channels_json(br.lower)}}}};
        ev.scalars["vr_upper"] = br.upper.total;
        ev.scalars["vr_lower"] = br.lower.total;
    }
    if (cfg.has_task("scatt")) {
        const auto r = raman_scattering(p.ss, *p.polaritons, basis, p.cavity);
        emit_records("scatt", listing(r));
        rates["scatt"] = {{"total", r.total}};
        ev.scalars["scatt"] = r.total;
    }
    if (cfg.has_task("oracle")) {
        MoleculeModel small = cfg.molecule.model;
        for (auto& m : small.modes) m.max_quanta = std::min(m.max_quanta, cfg.oracle.max_quanta);
        small.total_quanta_cap = cfg.oracle.max_quanta;
        const auto sb = enumerate_basis(small);
        const auto sv = build_veg(sb, small);
        const int n = cfg.oracle.molecules;
        const double g = p.cavity.collective_coupling / std::sqrt(static_cast<double>(n));
        OracleReport report;
        const auto sys = build_first_quantized(sb, sv, p.cavity.cavity_frequency, g, n, cfg.oracle.excitations);
        const auto sub = symmetric_projector(sys);
        const auto params = BosonicParameters::from(sb, sv, p.cavity.cavity_frequency, g);
        const auto map = verify_mapping(sys, sub, params);
        report.add("mapping_eigenvalue_deviation", map.max_eigenvalue_deviation, 1e-10);
        report.add("mapping_element_deviation", map.max_element_deviation, 1e-10);
        report.add("symmetric_dimension_mismatch",
                   static_cast<double>(map.symmetric_dimension) - static_cast<double>(map.bosonic_dimension), 0.0);
        report.add("permutation_deviation", permutation_deviation(sys), 1e-12);
        const auto mixed = mixed_basis(sb.size(), n + 1, cfg.oracle.excitations + 1);
        const auto cons = verify_conservation(assemble(bosonic_hamiltonian_terms(params), mixed), mixed);
        report.add("commutator_excitations", cons.excitation_commutator, 1e-14);
        report.add("commutator_molecules", cons.molecule_commutator, 1e-14);
        const double scale = std::max(1.0, std::abs(p.cavity.cavity_frequency));
        if (n >= 2 && sb.size() >= 2 && std::abs(p.cavity.detuning()) <= 1e-12 * scale) {
            CavityModel small_cavity = p.cavity;
            small_cavity.molecules = n;
            for (std::size_t k = 1; k < sb.size(); ++k) {
                const auto closed = vibrational_relaxation(k, sv, sb, small, small_cavity, RelaxationVariant::full4);
                const auto brute = dark_state_relaxation(k, sb, sv, small_cavity);
                auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
                report.add("vr_full4_vs_fgr_upper_k" + std::to_string(k), rel(closed.upper.total, brute.upper), 1e-6);
                report.add("vr_full4_vs_fgr_lower_k" + std::to_string(k), rel(closed.lower.total, brute.lower), 1e-6);
            }
        }
        if (render) {
            if (csv) {
                std::string out = "check,value,threshold,pass\n";
                for (const auto& c : report.checks) {
                    out += c.name + "," + format_number(c.value) + "," + format_number(c.threshold) + "," +
                           (c.passed ? "true" : "false") + "\n";
                }
                ev.files.push_back({"oracle.csv", out});
            } else {
                ev.files.push_back({"oracle.json", report.to_json() + "\n"});
            }
        }
        ev.summary["oracle"] = {{"molecules", n}, {"excitations", cfg.oracle.excitations},
                                {"basis_states", sb.size()}, {"all_passed", report.all_passed()}};
        ev.scalars["oracle_passed"] = report.all_passed() ? 1.0 : 0.0;
    }
    ev.summary["rates"] = rates;
    return ev;
}

std::vector<std::string> sweep_series(const RunConfig& cfg) {
    std::vector<std::string> out;
    for (const char* t : {"rp", "rec", "scatt"})
        if (cfg.has_task(t)) out.emplace_back(t);
    if (cfg.has_task("vr")) {
        out.emplace_back("vr_upper");
        out.emplace_back("vr_lower");
    }
    return out;
}

}  // namespace

RunArtifacts execute(const RunConfig& config, unsigned threads) {
    Evaluation base = evaluate(config, true);
    RunArtifacts out;
    out.files = std::move(base.files);
    json summary = json::object();
    summary["config"] = config.source.empty() ? std::string("-")
                                              : std::filesystem::path(config.source).filename().string();
    json tasks = json::array();
    for (const auto& t : config.tasks) tasks.push_back(t);
    summary["tasks"] = tasks;
    for (auto& [k, v] : base.summary.items()) summary[k] = v;

    if (config.sweep) {
        const auto& sweep = *config.sweep;
        const std::size_t n = sweep.points.size();
        std::vector<Evaluation> results(n);
        std::vector<std::exception_ptr> errors(n);
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    results[i] = evaluate(sweep.points[i], false);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        const unsigned count = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
        if (count == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);

        const bool csv = config.output_format == "csv";
        json sj = json::object();
        sj["parameter"] = sweep.parameter;
        sj["values"] = sweep.values;
        json series = json::object();
        for (const auto& name : sweep_series(config)) {
            std::vector<double> rate(n);
            for (std::size_t i = 0; i < n; ++i) rate[i] = results[i].scalars.at(name);
            series[name] = rate;
            out.files.push_back({"sweep_" + name + (csv ? ".csv" : ".json"),
                                 csv ? table_csv({"sweep_value", "rate"}, {sweep.values, rate})
                                     : table_json({"sweep_value", "rate"}, {sweep.values, rate})});
        }
        sj["rates"] = series;
        json conv = json::array();
        json sizes = json::array();
        for (const auto& r : results) {
            conv.push_back(r.summary["molecule"]["converged"]);
            sizes.push_back(r.summary["molecule"]["basis_states"]);
        }
        sj["converged"] = conv;
        sj["basis_states"] = sizes;
        summary["sweep"] = sj;
    }
    out.files.push_back({"summary.json", summary.dump(2) + "\n"});
    return out;
}

void write_artifacts(const RunArtifacts& artifacts, const std::string& directory) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(directory, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + directory + "': " + ec.message());
    std::vector<fs::path> temps;
    auto cleanup = [&] {
        for (const auto& t : temps) fs::remove(t, ec);
    };
    for (const auto& a : artifacts.files) {
        const fs::path tmp = fs::path(directory) / ("." + a.name + ".tmp");
        temps.push_back(tmp);
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        f.write(a.content.data(), static_cast<std::streamsize>(a.content.size()));
        f.close();
        if (!f) {
            cleanup();
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        }
    }
    for (std::size_t i = 0; i < artifacts.files.size(); ++i) {
        fs::rename(temps[i], fs::path(directory) / artifacts.files[i].name, ec);
        if (ec) {
            cleanup();
            throw std::runtime_error("cannot rename into '" + directory + "': " + ec.message());
        }
    }
}

std::vector<std::string> describe(const RunConfig& config) {
    std::vector<std::string> lines;
    const auto cav = config.cavity_model();
    const auto& mol = config.molecule.model;
    auto line = [&](const std::string& key, const std::string& value) { lines.push_back(key + " = " + value); };
    line("omega_0", format_number(mol.electronic_gap));
    line("reorganization_energy", format_number(mol.reorganization_energy()));
    line("omega_c", format_number(cav.cavity_frequency));
    line("detuning", format_number(cav.detuning()));
    line("g_sqrt_n", format_number(cav.collective_coupling));
    line("g", format_number(cav.single_coupling()));
    line("n_molecules", std::to_string(cav.molecules));
    line("kappa", format_number(cav.kappa));
    line("gamma_xi", format_number(cav.gamma_xi));
    line("gamma_mol", format_number(config.cavity.gamma_mol));
    line("basis_states_estimate", std::to_string(enumerate_basis(mol).size()));
    line("auto_converge", config.molecule.auto_converge ? "true" : "false");
    std::string tasks;
    for (const auto& t : config.tasks) tasks += (tasks.empty() ? "" : ",") + t;
    line("tasks", tasks);
    line("planned_runs", std::to_string(config.sweep ? config.sweep->values.size() : 1));
    if (config.sweep) {
        line("sweep_parameter", config.sweep->parameter);
        line("sweep_points", std::to_string(config.sweep->values.size()));
    }
    line("output_directory", config.output_directory);
    line("output_format", config.output_format);
    return lines;
}

}  // namespace polrelax
