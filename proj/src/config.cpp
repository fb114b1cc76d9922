#include "oscchain/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

namespace oscchain {

Potential make_potential(const PotentialSpec& spec) {
    if (spec.type == "none") return potentials::zero();
    if (spec.type == "sin_pow") return potentials::sin_pow(spec.n);
    if (spec.type == "rational_well")
        return potentials::rational_well(spec.n, spec.alpha);
    if (spec.type == "soft_well")
        return potentials::soft_well(spec.alpha, spec.delta);
    if (spec.type == "cosine") return potentials::cosine();
    if (spec.type == "sine") return potentials::sine();
    if (spec.type == "quadratic") return potentials::quadratic(spec.k);
    if (spec.type == "quartic") return potentials::quartic(spec.k);
    throw ConfigError("unknown potential type '" + spec.type + "'");
}

namespace {

struct Entry {
    std::string key;
    std::string value;
    int line = 0;
    int col = 0;  // column of the key
};

[[noreturn]] void fail(int line, int col, const std::string& msg) {
    throw ConfigError("config line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + msg);
}

double parse_number(const std::string& tok, int line, int col) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
        fail(line, col, "expected a number, got '" + tok + "'");
    return v;
}

long parse_integer(const std::string& tok, int line, int col) {
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0')
        fail(line, col, "expected an integer, got '" + tok + "'");
    return v;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct ParsedFile {
    std::map<std::string, std::vector<Entry>> sections;
    std::map<std::string, int> section_lines;
};

ParsedFile tokenize(const std::string& text) {
    ParsedFile out;
    std::istringstream is(text);
    std::string raw;
    std::string section;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        std::string line = hash == std::string::npos ? raw : raw.substr(0, hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                fail(lineno, static_cast<int>(line.find('[')) + 1,
                     "unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) fail(lineno, 1, "empty section name");
            out.sections[section];  // record even if empty
            out.section_lines.emplace(section, lineno);
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            fail(lineno, 1, "expected 'key = value'");
        Entry e;
        e.key = trim(t.substr(0, eq));
        e.value = trim(t.substr(eq + 1));
        e.line = lineno;
        e.col = static_cast<int>(line.find_first_not_of(" \t")) + 1;
        if (e.key.empty()) fail(lineno, e.col, "empty key");
        if (section.empty())
            fail(lineno, e.col, "key '" + e.key + "' outside any section");
        out.sections[section].push_back(e);
    }
    return out;
}

const std::set<std::string> kKnownSections = {
    "chain",      "potential.V", "potential.U", "forcing",
    "solver",     "integrator",  "output",      "sweep"};

PotentialSpec parse_potential(const std::vector<Entry>& entries) {
    PotentialSpec spec;
    for (const Entry& e : entries) {
        if (e.key == "type")
            spec.type = e.value;
        else if (e.key == "n")
            spec.n = static_cast<int>(parse_integer(e.value, e.line, e.col));
        else if (e.key == "alpha")
            spec.alpha = parse_number(e.value, e.line, e.col);
        else if (e.key == "delta")
            spec.delta = parse_number(e.value, e.line, e.col);
        else if (e.key == "k")
            spec.k = parse_number(e.value, e.line, e.col);
        else
            fail(e.line, e.col, "unknown potential key '" + e.key + "'");
    }
    static const std::map<std::string, std::set<std::string>> allowed = {
        {"none", {}},           {"sin_pow", {"n"}},
        {"rational_well", {"n", "alpha"}}, {"soft_well", {"alpha", "delta"}},
        {"cosine", {}},         {"sine", {}},
        {"quadratic", {"k"}},   {"quartic", {"k"}},
    };
    const auto it = allowed.find(spec.type);
    if (it == allowed.end()) {
        const Entry* te = nullptr;
        for (const Entry& e : entries)
            if (e.key == "type") te = &e;
        fail(te ? te->line : 0, te ? te->col : 0,
             "unknown potential type '" + spec.type + "'");
    }
    for (const Entry& e : entries) {
        if (e.key == "type") continue;
        if (!it->second.count(e.key))
            fail(e.line, e.col, "key '" + e.key + "' not valid for potential type '" +
                                    spec.type + "'");
    }
    return spec;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

RunSpec parse_config(const std::string& text) {
    const ParsedFile file = tokenize(text);
    for (const auto& [name, _] : file.sections)
        if (!kKnownSections.count(name))
            fail(file.section_lines.at(name), 1,
                 "unknown section [" + name + "]");

    RunSpec spec;
    bool have_n = false, have_w0 = false, have_gamma = false;
    bool have_theta = false, have_omega = false;
    double omega_value = 0.0;

    if (auto it = file.sections.find("chain"); it != file.sections.end()) {
        for (const Entry& e : it->second) {
            if (e.key == "half_width") {
                const long v = parse_integer(e.value, e.line, e.col);
                if (v < 0) fail(e.line, e.col, "half_width must be >= 0");
                spec.cfg.half_width = static_cast<int>(v);
                have_n = true;
            } else if (e.key == "omega0") {
                spec.cfg.omega0 = parse_number(e.value, e.line, e.col);
                if (!(spec.cfg.omega0 > 0.0))
                    fail(e.line, e.col, "omega0 must be > 0");
                have_w0 = true;
            } else if (e.key == "gamma") {
                spec.cfg.gamma = parse_number(e.value, e.line, e.col);
                if (spec.cfg.gamma < 0.0)
                    fail(e.line, e.col, "gamma must be >= 0");
                have_gamma = true;
            } else if (e.key == "nu") {
                spec.cfg.nu = parse_number(e.value, e.line, e.col);
            } else if (e.key == "theta") {
                spec.cfg.theta = parse_number(e.value, e.line, e.col);
                if (!(spec.cfg.theta > 0.0))
                    fail(e.line, e.col, "theta must be > 0");
                have_theta = true;
            } else if (e.key == "omega") {
                omega_value = parse_number(e.value, e.line, e.col);
                if (!(omega_value > 0.0))
                    fail(e.line, e.col, "omega must be > 0");
                have_omega = true;
            } else {
                fail(e.line, e.col, "unknown chain key '" + e.key + "'");
            }
        }
    }
    if (!have_n) throw ConfigError("missing required key chain.half_width");
    if (!have_w0) throw ConfigError("missing required key chain.omega0");
    if (!have_gamma) throw ConfigError("missing required key chain.gamma");
    if (have_theta && have_omega)
        throw ConfigError("give exactly one of chain.theta or chain.omega");
    if (!have_theta && !have_omega)
        throw ConfigError("missing required key chain.theta (or chain.omega)");
    if (have_omega) spec.cfg.theta = 2.0 * M_PI / omega_value;

    if (auto it = file.sections.find("potential.V"); it != file.sections.end())
        spec.pin_spec = parse_potential(it->second);
    if (auto it = file.sections.find("potential.U"); it != file.sections.end())
        spec.coupling_spec = parse_potential(it->second);
    spec.cfg.pin = make_potential(spec.pin_spec);
    spec.cfg.coupling = make_potential(spec.coupling_spec);

    if (auto it = file.sections.find("forcing"); it != file.sections.end()) {
        for (const Entry& e : it->second) {
            if (e.key != "mode")
                fail(e.line, e.col, "unknown forcing key '" + e.key + "'");
            const auto toks = split_ws(e.value);
            if (toks.size() != 3)
                fail(e.line, e.col, "forcing mode needs 'm re im'");
            const long m = parse_integer(toks[0], e.line, e.col);
            if (m == 0) fail(e.line, e.col, "mode m=0 rejected: F0 = 0 required");
            if (m < 0)
                fail(e.line, e.col,
                     "negative modes are implied by conjugation; use m >= 1");
            const double re = parse_number(toks[1], e.line, e.col);
            const double im = parse_number(toks[2], e.line, e.col);
            for (const auto& mode : spec.cfg.forcing.modes)
                if (mode.m == m) fail(e.line, e.col, "duplicate mode entry");
            spec.cfg.forcing.modes.push_back(
                {static_cast<int>(m), cplx(re, im)});
        }
    }
    std::sort(spec.cfg.forcing.modes.begin(), spec.cfg.forcing.modes.end(),
              [](const auto& a, const auto& b) { return a.m < b.m; });
    if (!(spec.cfg.forcing.weighted_power() > 0.0))
        throw ConfigError(
            "forcing spectrum must carry positive power (add a [forcing] "
            "mode)");

    if (auto it = file.sections.find("solver"); it != file.sections.end()) {
        for (const Entry& e : it->second) {
            if (e.key == "method") {
                if (e.value != "series" && e.value != "fixed" &&
                    e.value != "both")
                    fail(e.line, e.col, "method must be series|fixed|both");
                spec.method = e.value;
            } else if (e.key == "tol") {
                spec.solver.tol = parse_number(e.value, e.line, e.col);
                if (!(spec.solver.tol > 0.0))
                    fail(e.line, e.col, "tol must be > 0");
            } else if (e.key == "max_harmonic") {
                spec.solver.max_harmonic =
                    static_cast<int>(parse_integer(e.value, e.line, e.col));
            } else if (e.key == "grid_size") {
                spec.solver.grid_size =
                    static_cast<int>(parse_integer(e.value, e.line, e.col));
            } else if (e.key == "max_order") {
                spec.solver.max_order =
                    static_cast<int>(parse_integer(e.value, e.line, e.col));
            } else if (e.key == "max_iterations") {
                spec.solver.max_iterations =
                    static_cast<int>(parse_integer(e.value, e.line, e.col));
            } else if (e.key == "seed") {
                spec.solver.seed = static_cast<std::uint64_t>(
                    parse_integer(e.value, e.line, e.col));
            } else {
                fail(e.line, e.col, "unknown solver key '" + e.key + "'");
            }
        }
    }

    if (auto it = file.sections.find("integrator"); it != file.sections.end()) {
        for (const Entry& e : it->second) {
            if (e.key == "steps_per_period")
                spec.integrator.steps_per_period =
                    static_cast<int>(parse_integer(e.value, e.line, e.col));
            else if (e.key == "periods")
                spec.integrator.periods =
                    static_cast<int>(parse_integer(e.value, e.line, e.col));
            else if (e.key == "initial") {
                if (e.value != "zero" && e.value != "solution" &&
                    e.value != "perturbed")
                    fail(e.line, e.col,
                         "initial must be zero|solution|perturbed");
                spec.initial = e.value;
            } else if (e.key == "perturbation")
                spec.perturbation = parse_number(e.value, e.line, e.col);
            else
                fail(e.line, e.col, "unknown integrator key '" + e.key + "'");
        }
    }

    if (auto it = file.sections.find("output"); it != file.sections.end()) {
        for (const Entry& e : it->second) {
            if (e.key == "directory")
                spec.out_dir = e.value;
            else
                fail(e.line, e.col, "unknown output key '" + e.key + "'");
        }
    }

    if (auto it = file.sections.find("sweep"); it != file.sections.end()) {
        for (const Entry& e : it->second) {
            if (e.key != "vary")
                fail(e.line, e.col, "unknown sweep key '" + e.key + "'");
            const auto toks = split_ws(e.value);
            if (toks.size() < 2)
                fail(e.line, e.col, "vary needs 'field v1 [v2 ...]'");
            SweepAxis axis;
            axis.key = toks[0];
            for (std::size_t i = 1; i < toks.size(); ++i)
                axis.values.push_back(parse_number(toks[i], e.line, e.col));
            // validate the key now so errors surface at parse time
            RunSpec probe = spec;
            probe.sweep.clear();
            try {
                apply_override(probe, axis.key, axis.values.front());
            } catch (const ConfigError& err) {
                fail(e.line, e.col, err.what());
            }
            spec.sweep.push_back(std::move(axis));
        }
    }

    spec.cfg.validate();
    spec.integrator.validate();
    return spec;
}

void apply_override(RunSpec& spec, const std::string& key, double value) {
    auto as_int = [&](double v, int minv) {
        const double r = std::round(v);
        if (std::abs(v - r) > 1e-9 || r < minv)
            throw ConfigError("sweep value " + format_double(v) +
                              " invalid for integer field " + key);
        return static_cast<int>(r);
    };
    if (key == "chain.nu")
        spec.cfg.nu = value;
    else if (key == "chain.gamma")
        spec.cfg.gamma = value;
    else if (key == "chain.omega0")
        spec.cfg.omega0 = value;
    else if (key == "chain.theta")
        spec.cfg.theta = value;
    else if (key == "chain.omega")
        spec.cfg.theta = 2.0 * M_PI / value;
    else if (key == "chain.half_width")
        spec.cfg.half_width = as_int(value, 0);
    else if (key == "solver.tol")
        spec.solver.tol = value;
    else if (key == "integrator.periods")
        spec.integrator.periods = as_int(value, 1);
    else
        throw ConfigError("unsupported sweep field '" + key + "'");
}

std::string serialize(const RunSpec& spec) {
    std::ostringstream os;
    os << "[chain]\n";
    os << "half_width = " << spec.cfg.half_width << "\n";
    os << "omega0 = " << format_double(spec.cfg.omega0) << "\n";
    os << "gamma = " << format_double(spec.cfg.gamma) << "\n";
    os << "nu = " << format_double(spec.cfg.nu) << "\n";
    os << "theta = " << format_double(spec.cfg.theta) << "\n";
    auto dump_pot = [&os](const char* name, const PotentialSpec& p) {
        os << "\n[potential." << name << "]\n";
        os << "type = " << p.type << "\n";
        if (p.type == "sin_pow" || p.type == "rational_well")
            os << "n = " << p.n << "\n";
        if (p.type == "rational_well" || p.type == "soft_well")
            os << "alpha = " << format_double(p.alpha) << "\n";
        if (p.type == "soft_well")
            os << "delta = " << format_double(p.delta) << "\n";
        if (p.type == "quadratic" || p.type == "quartic")
            os << "k = " << format_double(p.k) << "\n";
    };
    dump_pot("V", spec.pin_spec);
    dump_pot("U", spec.coupling_spec);
    os << "\n[forcing]\n";
    for (const auto& mode : spec.cfg.forcing.modes)
        os << "mode = " << mode.m << " " << format_double(mode.amp.real())
           << " " << format_double(mode.amp.imag()) << "\n";
    os << "\n[solver]\n";
    os << "method = " << spec.method << "\n";
    os << "tol = " << format_double(spec.solver.tol) << "\n";
    os << "max_harmonic = " << spec.solver.max_harmonic << "\n";
    os << "grid_size = " << spec.solver.grid_size << "\n";
    os << "max_order = " << spec.solver.max_order << "\n";
    os << "max_iterations = " << spec.solver.max_iterations << "\n";
    os << "seed = " << spec.solver.seed << "\n";
    os << "\n[integrator]\n";
    os << "steps_per_period = " << spec.integrator.steps_per_period << "\n";
    os << "periods = " << spec.integrator.periods << "\n";
    os << "initial = " << spec.initial << "\n";
    os << "perturbation = " << format_double(spec.perturbation) << "\n";
    os << "\n[output]\n";
    os << "directory = " << spec.out_dir << "\n";
    if (!spec.sweep.empty()) {
        os << "\n[sweep]\n";
        for (const auto& axis : spec.sweep) {
            os << "vary = " << axis.key;
            for (double v : axis.values) os << " " << format_double(v);
            os << "\n";
        }
    }
    return os.str();
}

}  // namespace oscchain
