#pragma once
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "swingid/errors.hpp"

namespace swingid {

/// Physical constants of the single-machine infinite-bus model.
struct SystemParams {
    double m = 1.0;  ///< inertia (p.u.)
    double d = 0.0;  ///< damping (p.u.)
    double B = 0.2;  ///< susceptance entry (p.u.)
    double P = 0.1;  ///< active power (p.u.)

    void validate() const;
};

struct State {
    double delta = 0.0;  ///< rotor angle (rad)
    double omega = 0.0;  ///< frequency deviation (rad/s)
};

struct Scenario {
    std::string name;
    SystemParams params;
    State x0;
};

/// Preset lookup for fd1/fd2/sd1/sd2. Throws ValidationError on unknown names.
Scenario preset(std::string_view name);
const std::vector<std::string>& preset_names();

/// Uniformly sampled trajectory. times[i+1]-times[i] == 1/sample_rate.
struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    double sample_rate = 0.0;

    std::size_t size() const { return times.size(); }
    double duration() const { return times.empty() ? 0.0 : times.back() - times.front(); }
    void validate() const;
};

struct NoiseSpec {
    double K = 0.0;           ///< relative noise level, in [0, 0.05] unless overridden
    std::uint64_t seed = 0;
    bool allow_large_K = false;
};

/// Right-hand side of the swing equation: (omega, (P - d*omega - B*sin(delta))/m).
State swing_rhs(const State& x, const SystemParams& p);

/// Fixed-step RK4 integration, subsampled onto the uniform output grid.
/// Throws NumericalError naming the failure time if the state leaves the finite range.
Trajectory simulate(const Scenario& sc, double T, double sample_rate,
                    double internal_step = 1e-3);

/// Additive Gaussian noise, std = K * mean(|channel|) per state dimension.
Trajectory add_noise(const Trajectory& traj, const NoiseSpec& spec);

/// Analytic fixed point (asin(P/B), 0). Throws NumericalError when |P/B| > 1.
State equilibrium(const SystemParams& p);

void write_csv(const Trajectory& traj, std::ostream& out);
void write_csv_file(const Trajectory& traj, const std::string& path);
Trajectory read_csv(std::istream& in);
Trajectory read_csv_file(const std::string& path);

}  // namespace swingid
