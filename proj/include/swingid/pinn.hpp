#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "swingid/net.hpp"
#include "swingid/swing.hpp"

namespace swingid {

struct PinnConfig {
    int epochs = 400000;
    double learning_rate = 1e-2;
    double learning_rate_final = 1e-4;  ///< exponential decay target over the run
    double w_data = 3.0;
    double w_phys = 1.0;
    std::uint64_t seed = 0;
    double m_init = 1.0;
    double d_init = 1.0;
    int hidden = 10;
    bool record_loss_trace = false;

    void validate() const;
};

struct PinnResult {
    double m_hat = 0.0;
    double d_hat = 0.0;
    double final_data_loss = 0.0;
    double final_physics_loss = 0.0;
    NetParams theta;
    int epochs = 0;
    std::uint64_t seed = 0;
    std::vector<double> loss_trace;  ///< per-epoch total loss, when requested

    std::string to_json() const;
};

/// Mean squared error between network outputs and measurements, averaged over
/// samples and both state dimensions. P is the (constant) second network input.
double data_loss(const NetParams& theta, const Trajectory& dataset, double P);

/// ODE residual h = d/dt x_hat - f(x_hat; m, d) at physical time t.
Eigen::Vector2d physics_residual(const NetParams& theta, double m, double d, double t,
                                 double T, double P, double B);

/// Mean of ||h||^2 over the dataset time stamps.
double physics_loss(const NetParams& theta, double m, double d, const Trajectory& dataset,
                    double P, double B);

/// Both loss terms and the full gradient of w_data*L_data + w_phys*L_phys with
/// respect to (Theta, log m, log d).
struct PinnGradients {
    double data_loss = 0.0;
    double phys_loss = 0.0;
    NetParams g_theta;
    double g_log_m = 0.0;
    double g_log_d = 0.0;
};

PinnGradients pinn_loss_and_grad(const NetParams& theta, double log_m, double log_d,
                                 const Trajectory& dataset, double P, double B,
                                 double w_data, double w_phys);

/// Joint Adam minimization of w_data*L_data + w_phys*L_phys over (Theta, log m, log d).
PinnResult train_pinn(const Trajectory& dataset, double P, double B, const PinnConfig& config);

}  // namespace swingid
