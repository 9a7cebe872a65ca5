#include "polrelax/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace polrelax {

ConfigError::ConfigError(const std::string& source, int line, const std::string& message)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + message : source + ": " + message),
      line_(line) {}

const std::vector<std::string>& known_tasks() {
    static const std::vector<std::string> tasks{"spectra", "rp", "rec", "vr", "scatt", "oracle"};
    return tasks;
}

bool RunConfig::has_task(const std::string& t) const {
    return std::find(tasks.begin(), tasks.end(), t) != tasks.end();
}

CavityModel RunConfig::cavity_model() const {
    CavityModel c;
    c.electronic_gap = molecule.model.electronic_gap;
    switch (cavity.setting) {
        case CavitySetting::frequency: c.cavity_frequency = cavity.value; break;
        case CavitySetting::detuning: c.cavity_frequency = molecule.model.electronic_gap + cavity.value; break;
        case CavitySetting::vertical_resonance: c.cavity_frequency = molecule.model.vertical_resonance(); break;
    }
    c.collective_coupling = cavity.g_sqrt_n;
    c.molecules = cavity.n_molecules;
    c.kappa = cavity.kappa;
    c.gamma_xi = cavity.gamma_xi;
    return c;
}

namespace {

int line_of(const YAML::Node& n) {
    const auto mark = n.Mark();
    return mark.line >= 0 ? mark.line + 1 : 0;
}

// A mapping node plus the context needed for messages.
class Section {
public:
    Section(YAML::Node node, std::string name, const std::string& source)
        : node_(std::move(node)), name_(std::move(name)), source_(source) {
        if (!node_.IsMap()) fail(node_, "section '" + name_ + "' must be a mapping");
    }

    [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
        throw ConfigError(source_, line_of(at), msg);
    }
    [[noreturn]] void fail(const std::string& msg) const { fail(node_, msg); }

    std::string key_name(const std::string& key) const { return name_ + "." + key; }

    void allow(std::initializer_list<const char*> keys) const {
        std::set<std::string> ok(keys.begin(), keys.end());
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            const auto k = it->first.as<std::string>();
            if (!ok.count(k)) fail(it->first, "unknown key '" + key_name(k) + "'");
        }
    }

    bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }
    YAML::Node at(const std::string& key) const { return node_[key]; }
    const YAML::Node& node() const { return node_; }
    const std::string& source() const { return source_; }

    YAML::Node require(const std::string& key) const {
        auto n = node_[key];
        if (!n) fail("missing required key '" + key_name(key) + "'");
        return n;
    }

    double number(const std::string& key) const { return to_number(require(key), key); }
    double number(const std::string& key, double fallback) const {
        return has(key) ? to_number(at(key), key) : fallback;
    }

    double to_number(const YAML::Node& n, const std::string& key) const {
        if (!n.IsScalar()) fail(n, "key '" + key_name(key) + "' must be a number");
        double v = 0.0;
        try {
            v = n.as<double>();
        } catch (const YAML::Exception&) {
            fail(n, "key '" + key_name(key) + "' must be a number, got '" + n.Scalar() + "'");
        }
        if (!std::isfinite(v)) fail(n, "key '" + key_name(key) + "' must be finite");
        return v;
    }

    long long integer(const std::string& key, long long fallback, bool required = false) const {
        if (!has(key)) {
            if (required) require(key);
            return fallback;
        }
        const double v = to_number(at(key), key);
        if (v != std::floor(v) || std::abs(v) > 9e15) fail(at(key), "key '" + key_name(key) + "' must be an integer");
        return static_cast<long long>(v);
    }

    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        try {
            return at(key).as<bool>();
        } catch (const YAML::Exception&) {
            fail(at(key), "key '" + key_name(key) + "' must be true or false");
        }
    }

    std::string text(const std::string& key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        if (!at(key).IsScalar()) fail(at(key), "key '" + key_name(key) + "' must be a string");
        return at(key).Scalar();
    }

    void positive(const std::string& key, double v) const {
        if (!(v > 0.0)) fail(at(key), "key '" + key_name(key) + "' must be positive");
    }

private:
    YAML::Node node_;
    std::string name_;
    const std::string& source_;
};

MoleculeSection parse_molecule(const Section& s) {
    s.allow({"omega_0", "modes", "total_quanta_cap", "auto_converge", "epsilon"});
    MoleculeSection out;
    out.model.electronic_gap = s.number("omega_0");
    const auto modes = s.require("modes");
    if (!modes.IsSequence() || modes.size() == 0) s.fail(modes, "key 'molecule.modes' must be a non-empty list");
    int sum_caps = 0;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const Section m(modes[i], "molecule.modes[" + std::to_string(i) + "]", s.source());
        m.allow({"omega_nu", "sqrt_s", "s", "n_max"});
        VibrationalMode mode;
        mode.frequency = m.number("omega_nu");
        m.positive("omega_nu", mode.frequency);
        if (m.has("sqrt_s") && m.has("s")) m.fail(m.at("s"), "give only one of 'sqrt_s' and 's' in molecule.modes[" + std::to_string(i) + "]");
        if (m.has("sqrt_s")) {
            const double r = m.number("sqrt_s");
            if (r < 0.0) m.fail(m.at("sqrt_s"), "key '" + m.key_name("sqrt_s") + "' must be non-negative");
            mode.huang_rhys = r * r;
        } else if (m.has("s")) {
            mode.huang_rhys = m.number("s");
            if (mode.huang_rhys < 0.0) m.fail(m.at("s"), "key '" + m.key_name("s") + "' must be non-negative");
        } else {
            m.fail("missing required key '" + m.key_name("sqrt_s") + "' (or 's')");
        }
        const long long n = m.integer("n_max", 0, true);
        if (n < 0 || n > 100000) m.fail(m.at("n_max"), "key '" + m.key_name("n_max") + "' must be a non-negative integer");
        mode.max_quanta = static_cast<int>(n);
        sum_caps += mode.max_quanta;
        out.model.modes.push_back(mode);
    }
    const long long cap = s.integer("total_quanta_cap", sum_caps);
    if (cap < 0 || cap > 1000000) s.fail(s.at("total_quanta_cap"), "key 'molecule.total_quanta_cap' must be a non-negative integer");
    out.model.total_quanta_cap = static_cast<int>(cap);
    out.auto_converge = s.boolean("auto_converge", false);
    out.epsilon = s.number("epsilon", 1e-6);
    if (s.has("epsilon")) s.positive("epsilon", out.epsilon);
    return out;
}

CavitySection parse_cavity(const Section& s) {
    s.allow({"omega_c", "detuning", "vertical_resonance", "g_sqrt_n", "n_molecules", "kappa", "gamma_xi", "gamma_mol"});
    CavitySection c;
    const int settings = int(s.has("omega_c")) + int(s.has("detuning")) + int(s.has("vertical_resonance"));
    if (settings != 1) s.fail("exactly one of 'cavity.omega_c', 'cavity.detuning', 'cavity.vertical_resonance' is required");
    if (s.has("omega_c")) {
        c.setting = CavitySetting::frequency;
        c.value = s.number("omega_c");
    } else if (s.has("detuning")) {
        c.setting = CavitySetting::detuning;
        c.value = s.number("detuning");
    } else {
        if (!s.boolean("vertical_resonance", false)) s.fail(s.at("vertical_resonance"), "key 'cavity.vertical_resonance' must be true when present");
        c.setting = CavitySetting::vertical_resonance;
    }
    c.g_sqrt_n = s.number("g_sqrt_n");
    s.positive("g_sqrt_n", c.g_sqrt_n);
    const long long n = s.integer("n_molecules", 0, true);
    if (n < 1) s.fail(s.at("n_molecules"), "key 'cavity.n_molecules' must be a positive integer");
    c.n_molecules = n;
    c.kappa = s.number("kappa");
    s.positive("kappa", c.kappa);
    c.gamma_xi = s.number("gamma_xi", 0.5 * c.kappa);
    if (s.has("gamma_xi")) s.positive("gamma_xi", c.gamma_xi);
    c.gamma_mol = s.number("gamma_mol", 0.0015);
    if (s.has("gamma_mol")) s.positive("gamma_mol", c.gamma_mol);
    return c;
}

GridSection parse_grid(const Section& s) {
    s.allow({"omega_min", "omega_max", "points"});
    GridSection g;
    if (s.has("omega_min") != s.has("omega_max")) s.fail("'grid.omega_min' and 'grid.omega_max' must be given together");
    if (s.has("omega_min")) {
        g.omega_min = s.number("omega_min");
        g.omega_max = s.number("omega_max");
        if (!(*g.omega_max > *g.omega_min)) s.fail(s.at("omega_max"), "key 'grid.omega_max' must exceed 'grid.omega_min'");
    }
    const long long p = s.integer("points", 20001);
    if (p < 3 || p > 50000000) s.fail(s.at("points"), "key 'grid.points' must be an integer >= 3");
    g.points = static_cast<std::size_t>(p);
    return g;
}

std::vector<std::string> parse_tasks(const YAML::Node& n, const std::string& source) {
    if (!n.IsSequence()) throw ConfigError(source, line_of(n), "key 'tasks' must be a list");
    std::set<std::string> wanted;
    for (const auto& t : n) {
        if (!t.IsScalar()) throw ConfigError(source, line_of(t), "entries of 'tasks' must be task names");
        const auto name = t.Scalar();
        const auto& known = known_tasks();
        if (std::find(known.begin(), known.end(), name) == known.end()) {
            throw ConfigError(source, line_of(t), "unknown task '" + name + "' (expected spectra, rp, rec, vr, scatt or oracle)");
        }
        wanted.insert(name);
    }
    std::vector<std::string> out;
    for (const auto& k : known_tasks())
        if (wanted.count(k)) out.push_back(k);
    return out;
}

RelaxationSection parse_relaxation(const Section& s) {
    s.allow({"initial_state", "variant"});
    RelaxationSection r;
    const long long k = s.integer("initial_state", 1);
    if (k < 1) s.fail(s.at("initial_state"), "key 'vibrational_relaxation.initial_state' must be >= 1");
    r.initial_state = static_cast<std::size_t>(k);
    const auto v = s.text("variant", "full4");
    if (v == "full4") r.variant = RelaxationVariant::full4;
    else if (v == "reduced2") r.variant = RelaxationVariant::reduced2;
    else if (v == "litinskaya") r.variant = RelaxationVariant::litinskaya;
    else s.fail(s.at("variant"), "key 'vibrational_relaxation.variant' must be full4, reduced2 or litinskaya");
    return r;
}

OracleSection parse_oracle(const Section& s) {
    s.allow({"molecules", "excitations", "max_quanta"});
    OracleSection o;
    const long long n = s.integer("molecules", 2);
    if (n < 1 || n > 3) s.fail(s.at("molecules"), "key 'oracle.molecules' must be 1, 2 or 3");
    const long long e = s.integer("excitations", 1);
    if (e < 0 || e > 2) s.fail(s.at("excitations"), "key 'oracle.excitations' must be 0, 1 or 2");
    const long long q = s.integer("max_quanta", 1);
    if (q < 0 || q > 6) s.fail(s.at("max_quanta"), "key 'oracle.max_quanta' must be between 0 and 6");
    o.molecules = static_cast<int>(n);
    o.excitations = static_cast<int>(e);
    o.max_quanta = static_cast<int>(q);
    return o;
}

struct PathStep {
    std::string key;
    std::optional<std::size_t> index;
};

std::vector<PathStep> split_path(const std::string& path) {
    std::vector<PathStep> steps;
    std::size_t pos = 0;
    while (pos <= path.size()) {
        const auto dot = path.find('.', pos);
        const std::string part = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        PathStep step;
        const auto br = part.find('[');
        if (br == std::string::npos) {
            step.key = part;
        } else {
            if (part.back() != ']') return {};
            step.key = part.substr(0, br);
            const auto num = part.substr(br + 1, part.size() - br - 2);
            if (num.empty() || num.find_first_not_of("0123456789") != std::string::npos) return {};
            step.index = static_cast<std::size_t>(std::stoul(num));
        }
        if (step.key.empty()) return {};
        steps.push_back(step);
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    return steps;
}

// Resolves a parameter path; returns the target node or throws.
YAML::Node resolve(YAML::Node node, const std::string& path, const std::string& source, int line) {
    const auto steps = split_path(path);
    if (steps.empty()) throw ConfigError(source, line, "malformed sweep parameter path '" + path + "'");
    for (const auto& st : steps) {
        if (!node.IsMap() || !node[st.key]) {
            throw ConfigError(source, line, "sweep parameter '" + path + "' does not name an existing key");
        }
        node.reset(node[st.key]);
        if (st.index) {
            if (!node.IsSequence() || *st.index >= node.size()) {
                throw ConfigError(source, line, "sweep parameter '" + path + "' index out of range");
            }
            node.reset(node[*st.index]);
        }
    }
    if (!node.IsScalar()) throw ConfigError(source, line, "sweep parameter '" + path + "' is not a numeric key");
    try {
        (void)node.as<double>();
    } catch (const YAML::Exception&) {
        throw ConfigError(source, line, "sweep parameter '" + path + "' is not a numeric key");
    }
    return node;
}

}  // namespace

YAML::Node with_parameter(const YAML::Node& root, const std::string& path, double value,
                          const std::string& source) {
    YAML::Node copy = YAML::Clone(root);
    YAML::Node target = resolve(copy, path, source, 0);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    target = std::string(buf);
    return copy;
}

RunConfig parse_config(const YAML::Node& root, const std::string& source) {
    if (!root.IsMap()) throw ConfigError(source, line_of(root), "configuration must be a mapping");
    const Section top(root, "", source);
    {
        std::set<std::string> ok{"molecule", "cavity", "grid", "tasks", "vibrational_relaxation", "oracle", "sweep", "output"};
        for (auto it = root.begin(); it != root.end(); ++it) {
            const auto k = it->first.as<std::string>();
            if (!ok.count(k)) throw ConfigError(source, line_of(it->first), "unknown section '" + k + "'");
        }
    }
    RunConfig cfg;
    cfg.source = source;
    if (!root["molecule"]) throw ConfigError(source, 1, "missing required section 'molecule'");
    if (!root["cavity"]) throw ConfigError(source, 1, "missing required section 'cavity'");
    cfg.molecule = parse_molecule(Section(root["molecule"], "molecule", source));
    cfg.cavity = parse_cavity(Section(root["cavity"], "cavity", source));
    if (root["grid"]) cfg.grid = parse_grid(Section(root["grid"], "grid", source));
    cfg.tasks = root["tasks"] ? parse_tasks(root["tasks"], source) : std::vector<std::string>{"spectra", "rp"};
    if (root["vibrational_relaxation"]) {
        cfg.relaxation = parse_relaxation(Section(root["vibrational_relaxation"], "vibrational_relaxation", source));
    }
    if (root["oracle"]) cfg.oracle = parse_oracle(Section(root["oracle"], "oracle", source));
    if (root["output"]) {
        const Section out(root["output"], "output", source);
        out.allow({"directory", "format"});
        cfg.output_directory = out.text("directory", cfg.output_directory);
        if (cfg.output_directory.empty()) out.fail(out.at("directory"), "key 'output.directory' must not be empty");
        cfg.output_format = out.text("format", "csv");
        if (cfg.output_format != "csv" && cfg.output_format != "json") {
            out.fail(out.at("format"), "key 'output.format' must be csv or json");
        }
    }
    if (cfg.has_task("vr")) {
        const auto c = cfg.cavity_model();
        const double scale = std::max({1.0, std::abs(c.cavity_frequency), std::abs(c.electronic_gap)});
        if (std::abs(c.detuning()) > 1e-12 * scale) {
            const auto n = root["cavity"];
            throw ConfigError(source, line_of(n), "task 'vr' requires zero detuning (cavity.omega_c = molecule.omega_0)");
        }
    }
    if (root["sweep"]) {
        const Section sw(root["sweep"], "sweep", source);
        sw.allow({"parameter", "values"});
        SweepSection sweep;
        sweep.parameter = sw.text("parameter", "");
        if (sweep.parameter.empty()) sw.fail("missing required key 'sweep.parameter'");
        if (sweep.parameter.rfind("sweep", 0) == 0 || sweep.parameter.rfind("output", 0) == 0) {
            sw.fail(sw.at("parameter"), "sweep parameter must name a molecule, cavity, grid or task key");
        }
        resolve(root, sweep.parameter, source, line_of(sw.at("parameter")));
        const auto values = sw.require("values");
        if (!values.IsSequence() || values.size() == 0) sw.fail(values, "key 'sweep.values' must be a non-empty list");
        for (const auto& v : values) sweep.values.push_back(sw.to_number(v, "values"));
        // Every planned point must itself be a valid configuration.
        for (std::size_t i = 0; i < sweep.values.size(); ++i) {
            YAML::Node point = with_parameter(root, sweep.parameter, sweep.values[i], source);
            point.remove("sweep");
            try {
                sweep.points.push_back(parse_config(point, source));
            } catch (const ConfigError& e) {
                throw ConfigError(source, line_of(values[i]),
                                  "sweep value " + std::to_string(i) + " gives an invalid configuration: " + e.what());
            }
        }
        cfg.sweep = std::move(sweep);
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path);
    } catch (const YAML::BadFile&) {
        throw ConfigError(path, 0, "cannot read configuration file");
    } catch (const YAML::ParserException& e) {
        throw ConfigError(path, e.mark.line + 1, "YAML syntax error: " + e.msg);
    }
    return parse_config(root, path);
}

}  // namespace polrelax
