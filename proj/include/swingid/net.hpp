#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "swingid/errors.hpp"

namespace swingid {

/// Weights of the 1-hidden-layer surrogate x_hat(t_norm, P) = w2*tanh(w1*u + b1) + b2,
/// with u = (t_norm, P). Also used as the gradient container (same shapes).
struct NetParams {
    Eigen::MatrixXd w1;  ///< hidden x 2
    Eigen::VectorXd b1;  ///< hidden
    Eigen::MatrixXd w2;  ///< 2 x hidden
    Eigen::VectorXd b2;  ///< 2

    int hidden() const { return static_cast<int>(b1.size()); }
    int size() const { return hidden() * 5 + 2; }

    static NetParams zeros(int hidden);
    /// Zero-mean Gaussian entries with std 1/sqrt(fan_in), seeded.
    static NetParams random_init(int hidden, std::uint64_t seed);

    Eigen::VectorXd flatten() const;
    static NetParams unflatten(const Eigen::Ref<const Eigen::VectorXd>& v, int hidden);

    void validate() const;

    std::string to_json() const;
    static NetParams from_json(const std::string& text);
};

/// Network output (delta_hat, omega_hat).
Eigen::Vector2d forward(const NetParams& theta, double t_norm, double P);

/// Exact d/dt of forward in physical time units; T is the trajectory length so
/// dt_norm/dt = 1/T.
Eigen::Vector2d time_derivative(const NetParams& theta, double t_norm, double P, double T);

/// Accumulate d(adj . x_hat)/dTheta into grad (adjoint of forward).
void backprop_output(const NetParams& theta, double t_norm, double P,
                     const Eigen::Vector2d& adj, NetParams& grad);

/// Accumulate d(adj . dx_hat/dt)/dTheta into grad (adjoint of time_derivative).
void backprop_time_derivative(const NetParams& theta, double t_norm, double P, double T,
                              const Eigen::Vector2d& adj, NetParams& grad);

/// Forward pass over a whole batch of inputs U (2 x N, rows t_norm and P),
/// caching the activations needed by the batched backward pass.
struct BatchCache {
    Eigen::MatrixXd a;      ///< hidden x N, tanh activations
    Eigen::MatrixXd sech2;  ///< hidden x N, 1 - a^2
    Eigen::MatrixXd q;      ///< hidden x N, sech2 scaled by w1 time column
    Eigen::MatrixXd xhat;   ///< 2 x N network outputs
    Eigen::MatrixXd v;      ///< 2 x N physical-time derivatives
};

BatchCache batch_forward(const NetParams& theta, const Eigen::MatrixXd& U, double T);

/// Accumulate the adjoints of all columns at once: adj_x against xhat and
/// adj_v against v. Equivalent to summing the per-point backprops.
void batch_backprop(const NetParams& theta, const Eigen::MatrixXd& U, double T,
                    const BatchCache& cache, const Eigen::MatrixXd& adj_x,
                    const Eigen::MatrixXd& adj_v, NetParams& grad);

}  // namespace swingid
