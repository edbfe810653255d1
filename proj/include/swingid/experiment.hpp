#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "swingid/bpinn.hpp"
#include "swingid/pinn.hpp"
#include "swingid/swing.hpp"

namespace swingid {

struct ExperimentSpec {
    std::vector<std::string> scenarios = {"fd1", "fd2", "sd1", "sd2"};
    std::vector<double> K_grid = {0.00, 0.01, 0.02, 0.03, 0.04, 0.05};
    std::vector<double> T_grid = {27.0};  ///< paired with K_grid for the length sweep
    int n_runs = 10;
    std::vector<std::string> algorithms = {"sindy", "pinn", "bpinn"};
    std::uint64_t base_seed = 0;
    double sample_rate = 10.0;
    int workers = 0;  ///< 0 = hardware concurrency
    bool average_eps_per_run = false;  ///< average per-run errors instead of estimates
    PinnConfig pinn;
    BpinnConfig bpinn;

    void validate() const;
    static ExperimentSpec from_json(const std::string& text);
    static ExperimentSpec from_json_file(const std::string& path);
    std::string to_json() const;
};

struct ResultRecord {
    std::string scenario;
    double K = 0.0;
    double T = 0.0;
    std::string algorithm;
    double eps_m = 0.0;
    double eps_d = 0.0;
    std::optional<double> tau_m;  ///< bpinn only
    std::optional<double> tau_d;
    double runtime_s = 0.0;
    std::uint64_t seed = 0;
    std::string error;  ///< nonempty marks a failed cell
};

/// |(lambda_hat - lambda_true)/lambda_true| * 100 per component (m, d).
Eigen::Vector2d percent_error(const Eigen::Vector2d& lambda_hat,
                              const Eigen::Vector2d& lambda_true);

/// Deterministic per-(cell, run) seed derivation.
std::uint64_t cell_seed(std::uint64_t base_seed, const std::string& scenario, double K,
                        double T, const std::string& algorithm, int run);

/// Noise sweep at fixed T = T_grid[0] over all K in K_grid.
std::vector<ResultRecord> run_noise_sweep(const ExperimentSpec& spec);

/// Paired (K, T) sweep; K_grid and T_grid must have equal length.
std::vector<ResultRecord> run_length_sweep(const ExperimentSpec& spec);

struct Reconstruction {
    Trajectory traj;
    double rmse_delta = 0.0;
    double rmse_omega = 0.0;
};

/// Simulates the swing dynamics with estimated parameters and reports per-state
/// RMSE against the true-parameter trajectory.
Reconstruction reconstruct(const Scenario& truth, double m_hat, double d_hat, double T,
                           double sample_rate);

/// Writes results.{csv|json} plus the tau-vs-eps scatter data file into out_dir.
void emit_report(const std::vector<ResultRecord>& records, const std::string& out_dir,
                 const std::string& format);

std::string records_to_json(const std::vector<ResultRecord>& records);
std::vector<ResultRecord> records_from_json_file(const std::string& path);

}  // namespace swingid
