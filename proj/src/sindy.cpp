#include "swingid/sindy.hpp"

#include <cmath>

#include "json.hpp"

namespace swingid {

std::string SindyEstimate::to_json() const {
    nlohmann::json j;
    j["m_hat"] = m_hat;
    j["d_hat"] = d_hat;
    j["b_check"] = b_check;
    j["residual_norm"] = residual_norm;
    j["flags"] = nlohmann::json::array();
    if (b_check_flag) j["flags"].push_back("b_check_mismatch");
    return j.dump(2);
}

Derivatives finite_diff_derivatives(const Trajectory& traj) {
    traj.validate();
    const auto n = static_cast<Eigen::Index>(traj.size());
    if (n < 3) throw ValidationError("finite_diff_derivatives: need at least 3 samples");
    const double h = 1.0 / traj.sample_rate;

    Derivatives d;
    d.ddelta.resize(n);
    d.domega.resize(n);
    auto stencil = [&](auto value) {
        Eigen::VectorXd out(n);
        // second-order one-sided at the boundaries
        out(0) = (-3.0 * value(0) + 4.0 * value(1) - value(2)) / (2.0 * h);
        for (Eigen::Index i = 1; i + 1 < n; ++i)
            out(i) = (value(i + 1) - value(i - 1)) / (2.0 * h);
        out(n - 1) = (3.0 * value(n - 1) - 4.0 * value(n - 2) + value(n - 3)) / (2.0 * h);
        return out;
    };
    d.ddelta = stencil([&](Eigen::Index i) { return traj.states[i].delta; });
    d.domega = stencil([&](Eigen::Index i) { return traj.states[i].omega; });
    return d;
}

namespace {

Eigen::MatrixXd candidate_library(const Trajectory& traj) {
    const auto n = static_cast<Eigen::Index>(traj.size());
    Eigen::MatrixXd lib(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        lib(i, 0) = 1.0;
        lib(i, 1) = traj.states[i].omega;
        lib(i, 2) = std::sin(traj.states[i].delta);
    }
    return lib;
}

SindyCoefficients solve(const Eigen::MatrixXd& lib, const Eigen::VectorXd& rhs, double nu) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(lib);
    if (qr.rank() < 3) {
        static const char* names[3] = {"constant", "omega", "sin_delta"};
        std::string msg = "singular candidate library; dependent columns:";
        for (int c = qr.rank(); c < 3; ++c)
            msg += std::string(" ") + names[qr.colsPermutation().indices()(c)];
        throw NumericalError(msg);
    }
    Eigen::Vector3d xi = qr.solve(rhs);
    if (nu > 0.0) {
        // sequential thresholded least squares, threshold = nu
        Eigen::Array<bool, 3, 1> active = xi.array().abs() >= nu;
        for (int iter = 0; iter < 10; ++iter) {
            std::vector<int> idx;
            for (int c = 0; c < 3; ++c)
                if (active(c)) idx.push_back(c);
            if (idx.empty()) {
                xi.setZero();
                break;
            }
            Eigen::MatrixXd sub(lib.rows(), static_cast<Eigen::Index>(idx.size()));
            for (std::size_t k = 0; k < idx.size(); ++k) sub.col(k) = lib.col(idx[k]);
            Eigen::VectorXd sol = sub.colPivHouseholderQr().solve(rhs);
            xi.setZero();
            for (std::size_t k = 0; k < idx.size(); ++k) xi(idx[k]) = sol(k);
            Eigen::Array<bool, 3, 1> next = xi.array().abs() >= nu;
            if ((next == active).all()) break;
            active = next;
        }
    }
    SindyCoefficients out;
    out.c0 = xi(0);
    out.c1 = xi(1);
    out.c2 = xi(2);
    out.nu = nu;
    out.residual_norm = (lib * xi - rhs).norm();
    return out;
}

}  // namespace

SindyCoefficients fit(const Trajectory& traj, double nu) {
    if (traj.size() < 4) throw ValidationError("sindy fit: need at least 4 samples");
    const Derivatives d = finite_diff_derivatives(traj);
    return solve(candidate_library(traj), d.domega, nu);
}

SindyCoefficients fit_with_derivatives(const Trajectory& traj, const Eigen::VectorXd& domega,
                                       double nu) {
    if (traj.size() < 4) throw ValidationError("sindy fit: need at least 4 samples");
    if (domega.size() != static_cast<Eigen::Index>(traj.size()))
        throw ValidationError("sindy fit: derivative length mismatch");
    return solve(candidate_library(traj), domega, nu);
}

SindyEstimate extract_params(const SindyCoefficients& coeffs, double P, double B) {
    if (std::abs(coeffs.c0) <= 1e-12)
        throw NumericalError("extract_params: constant coefficient ~ 0, inertia unidentifiable");
    SindyEstimate est;
    est.m_hat = P / coeffs.c0;
    est.d_hat = -coeffs.c1 * est.m_hat;
    est.b_check = -coeffs.c2 * est.m_hat;
    est.residual_norm = coeffs.residual_norm;
    est.b_check_flag = std::abs(est.b_check - B) / B > 0.2;
    return est;
}

SindyEstimate estimate_sindy(const Trajectory& traj, double P, double B, double nu) {
    return extract_params(fit(traj, nu), P, B);
}

}  // namespace swingid
