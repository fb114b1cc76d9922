#include "oscchain/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace oscchain::io {

using ordered_json = nlohmann::ordered_json;

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open '" + path + "' for writing");
    os << content;
    if (!os) throw ConfigError("write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_solution_csv(const std::string& path,
                        const spectral::PeriodicSolution& sol) {
    std::ostringstream os;
    const HarmonicField& f = sol.field;
    os << "# oscchain harmonic solution\n";
    os << "# half_width = " << f.half_width << "\n";
    os << "# max_harmonic = " << f.max_harmonic << "\n";
    os << "# grid_size = " << f.grid_size << "\n";
    os << "# theta = " << format_g17(sol.cfg.theta) << "\n";
    os << "site,m,re,im\n";
    const int N = f.half_width;
    for (int x = -N; x <= N; ++x)
        for (int m = 0; m <= f.max_harmonic; ++m) {
            const cplx c = f.get(x, m);
            os << x << "," << m << "," << format_g17(c.real()) << ","
               << format_g17(c.imag()) << "\n";
        }
    write_text_file(path, os.str());
}

spectral::PeriodicSolution read_solution_csv(const std::string& path,
                                             const ChainConfig& cfg) {
    std::istringstream is(read_text_file(path));
    std::string line;
    int N = -1, M = -1, T = -1;
    double theta = 0.0;
    HarmonicField f;
    bool header_done = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string key, eq;
            ls >> key >> eq;
            if (eq == "=") {
                double v;
                ls >> v;
                if (key == "half_width") N = static_cast<int>(v);
                if (key == "max_harmonic") M = static_cast<int>(v);
                if (key == "grid_size") T = static_cast<int>(v);
                if (key == "theta") theta = v;
            }
            continue;
        }
        if (!header_done) {
            if (line.rfind("site,", 0) != 0)
                throw ConfigError("solution file '" + path +
                                  "': missing column header");
            if (N < 0 || M < 0 || T < 0)
                throw ConfigError("solution file '" + path +
                                  "': incomplete metadata");
            if (N != cfg.half_width)
                throw ConfigError("solution file half_width " +
                                  std::to_string(N) +
                                  " does not match the configuration");
            if (std::abs(theta - cfg.theta) > 1e-14 * cfg.theta)
                throw ConfigError(
                    "solution file period does not match the configuration");
            f = HarmonicField::zeros(N, M, T);
            header_done = true;
            continue;
        }
        int x, m;
        double re, im;
        if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf", &x, &m, &re, &im) != 4)
            throw ConfigError("solution file '" + path + "': bad row '" +
                              line + "'");
        if (m >= 0 && m <= M && x >= -N && x <= N) f.set(x, m, cplx(re, im));
    }
    if (!header_done)
        throw ConfigError("solution file '" + path + "' is empty");
    return spectral::PeriodicSolution{cfg, std::move(f)};
}

void write_trajectory_csv(const std::string& path,
                          const timedomain::Trajectory& traj) {
    std::ostringstream os;
    os << "k,t,site,q,p\n";
    const int n = static_cast<int>(traj.strobe_states.front().q.size());
    const int N = (n - 1) / 2;
    for (std::size_t k = 0; k < traj.strobe_states.size(); ++k) {
        const ChainState& st = traj.strobe_states[k];
        for (int i = 0; i < n; ++i)
            os << k << "," << format_g17(traj.strobe_times[k]) << ","
               << (i - N) << "," << format_g17(st.q[i]) << ","
               << format_g17(st.p[i]) << "\n";
    }
    write_text_file(path, os.str());
}

void write_strobe_csv(const std::string& path,
                      const std::vector<double>& distances, double theta) {
    std::ostringstream os;
    os << "k,t,distance\n";
    for (std::size_t k = 0; k < distances.size(); ++k)
        os << k << "," << format_g17(k * theta) << ","
           << format_g17(distances[k]) << "\n";
    write_text_file(path, os.str());
}

void write_greens_csv(const std::string& path,
                      const greens::GreensKernelSet& set) {
    std::ostringstream os;
    os << "m,x,y,re,im\n";
    const int N = set.half_width;
    for (int m = 0; m <= set.max_harmonic; ++m)
        for (int x = -N; x <= N; ++x)
            for (int y = -N; y <= N; ++y) {
                const cplx v = set.tables[m].at(x, y);
                os << m << "," << x << "," << y << ","
                   << format_g17(v.real()) << "," << format_g17(v.imag())
                   << "\n";
            }
    write_text_file(path, os.str());
}

std::string report_json(const spectral::ConvergenceReport& rep) {
    ordered_json j;
    j["method"] = rep.method;
    j["converged"] = rep.converged;
    j["iterations"] = rep.iterations;
    j["max_harmonic"] = rep.max_harmonic;
    j["grid_size"] = rep.grid_size;
    j["final_residual"] = rep.final_residual;
    j["tail_bound"] = rep.tail_bound;
    j["delta_star"] = rep.delta_star;
    j["nu0"] = rep.nu0;
    j["nu0_bar"] = rep.nu0_bar;
    j["solution_norm"] = rep.solution_norm;
    j["solution_norm_h1"] = rep.solution_norm_h1;
    j["odd_projection"] = rep.odd_projection;
    if (rep.contraction_measured >= 0.0)
        j["contraction_measured"] = rep.contraction_measured;
    j["norms"] = rep.norms;
    j["ratios"] = rep.ratios;
    if (!rep.note.empty()) j["note"] = rep.note;
    return j.dump(2) + "\n";
}

namespace {
ordered_json scan_json(const std::vector<diagnostics::ScanRow>& rows) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : rows) {
        ordered_json o;
        o["half_width"] = r.half_width;
        o["work"] = r.work;
        o["dissipation"] = r.dissipation;
        o["balance_residual"] = r.balance_residual;
        o["mean_energy"] = r.mean_energy;
        if (std::isfinite(r.decay_rate)) o["decay_rate"] = r.decay_rate;
        o["stability_rate"] = r.stability_rate;
        o["stability_rate_ncube"] = r.rate_shape;
        arr.push_back(std::move(o));
    }
    return arr;
}
}  // namespace

std::string diagnostics_json(const diagnostics::DiagnosticsReport& rep) {
    ordered_json j;
    j["half_width"] = rep.half_width;
    j["nu"] = rep.nu;
    j["delta_star"] = rep.delta_star;
    j["delta_bar"] = rep.delta_bar;
    j["nu0"] = rep.nu0;
    j["nu0_bar"] = rep.nu0_bar;
    if (rep.oscillator_gaps) {
        j["oscillator_delta_star"] = rep.oscillator_gaps->first;
        j["oscillator_delta_bar"] = rep.oscillator_gaps->second;
    }
    j["work"] = rep.work;
    j["dissipation_left"] = rep.dissipation_left;
    j["dissipation_right"] = rep.dissipation_right;
    j["balance_residual"] = rep.balance_residual;
    j["even_residual"] = rep.even_residual;
    j["mean_energy"] = rep.mean_energy;
    if (rep.decay) {
        j["decay_amplitude"] = rep.decay->amplitude_q;
        j["decay_rate"] = rep.decay->rate_q;
        j["decay_r2"] = rep.decay->r2_q;
        j["decay_rate_p"] = rep.decay->rate_p;
        j["decay_r2_p"] = rep.decay->r2_p;
    }
    if (!rep.scan.empty()) {
        j["scan"] = scan_json(rep.scan);
        j["work_localizes"] = diagnostics::work_localizes(rep.scan);
        j["mean_energy_saturates"] = diagnostics::mean_energy_saturates(rep.scan);
    }
    return j.dump(2) + "\n";
}

std::string trajectory_json(const timedomain::Trajectory& traj,
                            const std::vector<double>& strobe_distances,
                            double balance_residual) {
    ordered_json j;
    j["periods"] = traj.strobe_times.size() - 1;
    j["theta"] = traj.theta;
    j["energy_initial"] = traj.energy.front();
    j["energy_final"] = traj.energy.back();
    j["work_in"] = traj.work_in.back();
    j["dissipated"] = traj.dissipated.back();
    j["balance_residual"] = balance_residual;
    if (!strobe_distances.empty()) {
        j["strobe_distance_initial"] = strobe_distances.front();
        j["strobe_distance_final"] = strobe_distances.back();
    }
    return j.dump(2) + "\n";
}

std::string diagnostics_text(const diagnostics::DiagnosticsReport& rep) {
    std::ostringstream os;
    auto row = [&os](const std::string& label, const std::string& value) {
        os << "  " << label;
        for (std::size_t i = label.size(); i < 28; ++i) os << ' ';
        os << value << "\n";
    };
    os << "diagnostics report\n";
    row("half_width", std::to_string(rep.half_width));
    row("nu", format_g17(rep.nu));
    row("delta_star", format_g17(rep.delta_star));
    row("delta_bar", format_g17(rep.delta_bar));
    row("nu0", format_g17(rep.nu0));
    row("nu0_bar", format_g17(rep.nu0_bar));
    if (rep.oscillator_gaps) {
        row("oscillator delta_star", format_g17(rep.oscillator_gaps->first));
        row("oscillator delta_bar", format_g17(rep.oscillator_gaps->second));
    }
    row("work W_N", format_g17(rep.work));
    row("dissipation left", format_g17(rep.dissipation_left));
    row("dissipation right", format_g17(rep.dissipation_right));
    row("balance residual", format_g17(rep.balance_residual));
    row("even-harmonic residual", format_g17(rep.even_residual));
    row("mean energy", format_g17(rep.mean_energy));
    if (rep.decay) {
        row("decay rate (q)", format_g17(rep.decay->rate_q));
        row("decay fit R^2 (q)", format_g17(rep.decay->r2_q));
        row("decay rate (p)", format_g17(rep.decay->rate_p));
    }
    if (!rep.scan.empty()) {
        os << "  size scan:\n";
        os << "    N        work          dissipation   mean_energy   "
              "lambda_N      lambda_N*N^3\n";
        for (const auto& r : rep.scan) {
            char buf[200];
            std::snprintf(buf, sizeof(buf),
                          "    %-8d %-13.6g %-13.6g %-13.6g %-13.6g %-.6g\n",
                          r.half_width, r.work, r.dissipation, r.mean_energy,
                          r.stability_rate, r.rate_shape);
            os << buf;
        }
        row("work localizes", diagnostics::work_localizes(rep.scan) ? "yes" : "no");
        row("mean energy saturates",
            diagnostics::mean_energy_saturates(rep.scan) ? "yes" : "no");
    }
    return os.str();
}

}  // namespace oscchain::io
