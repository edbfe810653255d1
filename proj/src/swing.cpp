#include "swingid/swing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace swingid {

void SystemParams::validate() const {
    if (!(std::isfinite(m) && std::isfinite(d) && std::isfinite(B) && std::isfinite(P)))
        throw ValidationError("SystemParams: non-finite entry");
    if (m <= 0.0) throw ValidationError("SystemParams: inertia m must be positive");
    if (B <= 0.0) throw ValidationError("SystemParams: susceptance B must be positive");
    if (d < 0.0) throw ValidationError("SystemParams: damping d must be nonnegative");
}

void Trajectory::validate() const {
    if (times.size() != states.size())
        throw ValidationError("Trajectory: times/states length mismatch");
    if (times.size() < 2) throw ValidationError("Trajectory: need at least 2 samples");
    if (sample_rate <= 0.0) throw ValidationError("Trajectory: sample_rate must be positive");
    const double dt = 1.0 / sample_rate;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        if (std::abs(times[i + 1] - times[i] - dt) > 1e-9)
            throw ValidationError("Trajectory: non-uniform sampling at index " +
                                  std::to_string(i));
    }
}

Scenario preset(std::string_view name) {
    // Table of evaluation scenarios, shared B = 0.2, P = 0.1, x0 = (0, 0).
    SystemParams p;
    if (name == "fd1") {
        p.m = 0.3;
        p.d = 0.15;
    } else if (name == "fd2") {
        p.m = 0.6;
        p.d = 0.3;
    } else if (name == "sd1") {
        p.m = 1.4;
        p.d = 1.1;
    } else if (name == "sd2") {
        p.m = 1.7;
        p.d = 1.4;
    } else {
        throw ValidationError("unknown scenario preset: " + std::string(name));
    }
    return Scenario{std::string(name), p, State{0.0, 0.0}};
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"fd1", "fd2", "sd1", "sd2"};
    return names;
}

State swing_rhs(const State& x, const SystemParams& p) {
    return State{x.omega, (p.P - p.d * x.omega - p.B * std::sin(x.delta)) / p.m};
}

namespace {

State rk4_step(const State& x, double h, const SystemParams& p) {
    const State k1 = swing_rhs(x, p);
    const State k2 = swing_rhs({x.delta + 0.5 * h * k1.delta, x.omega + 0.5 * h * k1.omega}, p);
    const State k3 = swing_rhs({x.delta + 0.5 * h * k2.delta, x.omega + 0.5 * h * k2.omega}, p);
    const State k4 = swing_rhs({x.delta + h * k3.delta, x.omega + h * k3.omega}, p);
    return State{x.delta + h / 6.0 * (k1.delta + 2.0 * k2.delta + 2.0 * k3.delta + k4.delta),
                 x.omega + h / 6.0 * (k1.omega + 2.0 * k2.omega + 2.0 * k3.omega + k4.omega)};
}

}  // namespace

Trajectory simulate(const Scenario& sc, double T, double sample_rate, double internal_step) {
    sc.params.validate();
    if (T <= 0.0) throw ValidationError("simulate: duration must be positive");
    if (sample_rate <= 0.0) throw ValidationError("simulate: sample_rate must be positive");
    if (internal_step <= 0.0) throw ValidationError("simulate: internal_step must be positive");

    const double dt = 1.0 / sample_rate;
    // Internal step adjusted to divide the sample interval exactly.
    const int substeps = std::max(1, static_cast<int>(std::ceil(dt / internal_step - 1e-12)));
    const double h = dt / substeps;
    const auto n_samples = static_cast<std::size_t>(std::floor(T * sample_rate + 1e-9)) + 1;

    Trajectory traj;
    traj.sample_rate = sample_rate;
    traj.times.reserve(n_samples);
    traj.states.reserve(n_samples);

    State x = sc.x0;
    traj.times.push_back(0.0);
    traj.states.push_back(x);
    for (std::size_t i = 1; i < n_samples; ++i) {
        for (int s = 0; s < substeps; ++s) {
            x = rk4_step(x, h, sc.params);
            if (!(std::isfinite(x.delta) && std::isfinite(x.omega))) {
                const double t_fail = (i - 1) * dt + (s + 1) * h;
                throw NumericalError("integration diverged at t = " + std::to_string(t_fail));
            }
        }
        traj.times.push_back(i * dt);
        traj.states.push_back(x);
    }
    return traj;
}

Trajectory add_noise(const Trajectory& traj, const NoiseSpec& spec) {
    traj.validate();
    if (spec.K < 0.0) throw ValidationError("add_noise: noise level K must be nonnegative");
    if (spec.K > 0.05 && !spec.allow_large_K)
        throw ValidationError("add_noise: K > 0.05 requires allow_large_K");
    if (spec.K == 0.0) return traj;

    double abs_delta = 0.0, abs_omega = 0.0;
    for (const State& s : traj.states) {
        abs_delta += std::abs(s.delta);
        abs_omega += std::abs(s.omega);
    }
    const auto n = static_cast<double>(traj.states.size());
    const double gamma_delta = spec.K * abs_delta / n;
    const double gamma_omega = spec.K * abs_omega / n;

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Trajectory out = traj;
    for (State& s : out.states) {
        s.delta += gamma_delta * gauss(rng);
        s.omega += gamma_omega * gauss(rng);
    }
    return out;
}

State equilibrium(const SystemParams& p) {
    p.validate();
    const double ratio = p.P / p.B;
    if (std::abs(ratio) > 1.0)
        throw NumericalError("equilibrium: |P/B| > 1, no synchronous fixed point");
    return State{std::asin(ratio), 0.0};
}

void write_csv(const Trajectory& traj, std::ostream& out) {
    out << "t,delta,omega\n";
    char buf[128];
    for (std::size_t i = 0; i < traj.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", traj.times[i],
                      traj.states[i].delta, traj.states[i].omega);
        out << buf;
    }
}

void write_csv_file(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    write_csv(traj, out);
}

Trajectory read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("trajectory CSV: empty input");
    if (line != "t,delta,omega" && line != "t,delta,omega\r")
        throw ValidationError("trajectory CSV: bad header '" + line + "'");

    Trajectory traj;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        double t, delta, omega;
        char c1, c2;
        if (!(row >> t >> c1 >> delta >> c2 >> omega) || c1 != ',' || c2 != ',')
            throw ValidationError("trajectory CSV: bad row '" + line + "'");
        traj.times.push_back(t);
        traj.states.push_back(State{delta, omega});
    }
    if (traj.times.size() < 2) throw ValidationError("trajectory CSV: need at least 2 rows");
    traj.sample_rate = 1.0 / (traj.times[1] - traj.times[0]);
    traj.validate();
    return traj;
}

Trajectory read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open for reading: " + path);
    return read_csv(in);
}

}  // namespace swingid
