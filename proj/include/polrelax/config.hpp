// config.hpp - run description loaded from YAML.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "polrelax/polariton.hpp"
#include "polrelax/rates.hpp"
#include "polrelax/vibronic.hpp"

namespace YAML {
class Node;
}

namespace polrelax {

// Parse or validation failure; `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& source, int line, const std::string& message);
    int line() const noexcept { return line_; }

private:
    int line_{0};
};

enum class CavitySetting { frequency, detuning, vertical_resonance };

struct MoleculeSection {
    MoleculeModel model;
    bool auto_converge{false};
    double epsilon{1e-6};
};

struct CavitySection {
    CavitySetting setting{CavitySetting::frequency};
    double value{0.0};  // omega_c or detuning
    double g_sqrt_n{0.0};
    std::int64_t n_molecules{1};
    double kappa{0.0};
    double gamma_xi{0.0};
    double gamma_mol{0.0015};
};

struct GridSection {
    std::optional<double> omega_min;
    std::optional<double> omega_max;
    std::size_t points{20001};
};

struct RelaxationSection {
    std::size_t initial_state{1};
    RelaxationVariant variant{RelaxationVariant::full4};
};

struct OracleSection {
    int molecules{2};
    int excitations{1};
    int max_quanta{1};  // per-mode and total cap of the oracle basis
};

struct RunConfig;

struct SweepSection {
    std::string parameter;
    std::vector<double> values;
    std::vector<RunConfig> points;  // one parsed configuration per value
};

struct RunConfig {
    std::string source;  // file name used in messages
    MoleculeSection molecule;
    CavitySection cavity;
    GridSection grid;
    std::vector<std::string> tasks;  // canonical order
    RelaxationSection relaxation;
    OracleSection oracle;
    std::optional<SweepSection> sweep;
    std::string output_directory{"out"};
    std::string output_format{"csv"};

    bool has_task(const std::string& t) const;
    CavityModel cavity_model() const;
};

RunConfig parse_config(const YAML::Node& root, const std::string& source);
RunConfig load_config(const std::string& path);

// Copy of `root` with the numeric key at `path` (e.g. molecule.modes[1].sqrt_s)
// replaced by `value`.
YAML::Node with_parameter(const YAML::Node& root, const std::string& path, double value,
                          const std::string& source);

const std::vector<std::string>& known_tasks();

}  // namespace polrelax
