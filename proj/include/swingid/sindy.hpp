#pragma once
#include <Eigen/Dense>
#include <string>

#include "swingid/swing.hpp"

namespace swingid {

/// Coefficients of the regression domega_dt ~ c0*1 + c1*omega + c2*sin(delta).
struct SindyCoefficients {
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double nu = 0.0;
    double residual_norm = 0.0;
};

struct SindyEstimate {
    double m_hat = 0.0;
    double d_hat = 0.0;
    double b_check = 0.0;  ///< implied susceptance, consistency cross-check
    double residual_norm = 0.0;
    bool b_check_flag = false;  ///< set when |b_check - B|/B > 0.2

    std::string to_json() const;
};

struct Derivatives {
    Eigen::VectorXd ddelta;
    Eigen::VectorXd domega;
};

/// Second-order finite differences: central at interior points, one-sided at the ends.
Derivatives finite_diff_derivatives(const Trajectory& traj);

/// Least squares of domega onto [1, omega, sin(delta)]; nu > 0 enables
/// sequential-thresholding sparsification.
SindyCoefficients fit(const Trajectory& traj, double nu = 0.0);

/// Same regression with caller-supplied domega values (analytic-derivative oracle path).
SindyCoefficients fit_with_derivatives(const Trajectory& traj,
                                       const Eigen::VectorXd& domega, double nu = 0.0);

/// Maps regression coefficients back to physical parameters via the known P and B.
SindyEstimate extract_params(const SindyCoefficients& coeffs, double P, double B);

/// Convenience: finite differences + fit + extraction in one call.
SindyEstimate estimate_sindy(const Trajectory& traj, double P, double B, double nu = 0.0);

}  // namespace swingid
