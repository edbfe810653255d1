#include "swingid/pinn.hpp"

#include <cmath>

#include "json.hpp"

namespace swingid {

void PinnConfig::validate() const {
    if (epochs < 1) throw ValidationError("PinnConfig: epochs must be >= 1");
    if (learning_rate <= 0.0) throw ValidationError("PinnConfig: learning_rate must be positive");
    if (learning_rate_final <= 0.0 || learning_rate_final > learning_rate)
        throw ValidationError("PinnConfig: learning_rate_final must be in (0, learning_rate]");
    if (w_data < 0.0 || w_phys < 0.0) throw ValidationError("PinnConfig: negative loss weight");
    if (w_data == 0.0 && w_phys == 0.0)
        throw ValidationError("PinnConfig: at least one loss weight must be positive");
    if (m_init <= 0.0 || d_init <= 0.0)
        throw ValidationError("PinnConfig: lambda_init must be positive");
    if (hidden < 1) throw ValidationError("PinnConfig: hidden must be >= 1");
}

std::string PinnResult::to_json() const {
    nlohmann::json j;
    j["m_hat"] = m_hat;
    j["d_hat"] = d_hat;
    j["final_data_loss"] = final_data_loss;
    j["final_physics_loss"] = final_physics_loss;
    j["epochs"] = epochs;
    j["seed"] = seed;
    return j.dump(2);
}

double data_loss(const NetParams& theta, const Trajectory& dataset, double P) {
    dataset.validate();
    const double T = dataset.duration();
    const double t0 = dataset.times.front();
    double acc = 0.0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const Eigen::Vector2d xhat = forward(theta, (dataset.times[i] - t0) / T, P);
        const double rd = xhat(0) - dataset.states[i].delta;
        const double ro = xhat(1) - dataset.states[i].omega;
        acc += rd * rd + ro * ro;
    }
    return acc / (2.0 * static_cast<double>(dataset.size()));
}

Eigen::Vector2d physics_residual(const NetParams& theta, double m, double d, double t,
                                 double T, double P, double B) {
    if (m <= 0.0) throw ValidationError("physics_residual: m must be positive");
    const double t_norm = t / T;
    const Eigen::Vector2d xhat = forward(theta, t_norm, P);
    const Eigen::Vector2d v = time_derivative(theta, t_norm, P, T);
    return Eigen::Vector2d(v(0) - xhat(1),
                           v(1) - (P - d * xhat(1) - B * std::sin(xhat(0))) / m);
}

double physics_loss(const NetParams& theta, double m, double d, const Trajectory& dataset,
                    double P, double B) {
    const double T = dataset.duration();
    const double t0 = dataset.times.front();
    double acc = 0.0;
    for (double t : dataset.times)
        acc += physics_residual(theta, m, d, t - t0, T, P, B).squaredNorm();
    return acc / static_cast<double>(dataset.size());
}

PinnGradients pinn_loss_and_grad(const NetParams& theta, double log_m, double log_d,
                                 const Trajectory& dataset, double P, double B,
                                 double w_data, double w_phys) {
    const double m = std::exp(log_m);
    const double d = std::exp(log_d);
    const double T = dataset.duration();
    const double t0 = dataset.times.front();
    const auto n = static_cast<double>(dataset.size());

    PinnGradients out;
    out.g_theta = NetParams::zeros(theta.hidden());

    Eigen::MatrixXd U(2, dataset.size());
    Eigen::MatrixXd data(2, dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        U(0, col) = (dataset.times[i] - t0) / T;
        U(1, col) = P;
        data(0, col) = dataset.states[i].delta;
        data(1, col) = dataset.states[i].omega;
    }
    const BatchCache c = batch_forward(theta, U, T);
    const Eigen::MatrixXd r = c.xhat - data;
    out.data_loss = r.squaredNorm() / (2.0 * n);

    const Eigen::Array<double, 1, Eigen::Dynamic> f2 =
        (P - d * c.xhat.row(1).array() - B * c.xhat.row(0).array().sin()) / m;
    Eigen::MatrixXd h(2, U.cols());
    h.row(0) = c.v.row(0) - c.xhat.row(1);
    h.row(1) = c.v.row(1).array() - f2;
    out.phys_loss = h.squaredNorm() / n;

    Eigen::MatrixXd gx = (w_data / n) * r;  // data loss adjoint, incl. the 1/2
    Eigen::MatrixXd gh = Eigen::MatrixXd::Zero(2, U.cols());
    if (w_phys > 0.0) {
        gh = (2.0 * w_phys / n) * h;
        // x_hat adjoint of h = v - f(x_hat)
        gx.row(0).array() += (B / m) * c.xhat.row(0).array().cos() * gh.row(1).array();
        gx.row(1) += -gh.row(0) + (d / m) * gh.row(1);
        out.g_log_m = (gh.row(1).array() * f2).sum();
        out.g_log_d = (d / m) * gh.row(1).dot(c.xhat.row(1));
    }
    batch_backprop(theta, U, T, c, gx, gh, out.g_theta);
    return out;
}

PinnResult train_pinn(const Trajectory& dataset, double P, double B, const PinnConfig& config) {
    dataset.validate();
    config.validate();

    const int h = config.hidden;
    NetParams theta = NetParams::random_init(h, config.seed);
    const int nt = theta.size();
    Eigen::VectorXd p(nt + 2);
    p.head(nt) = theta.flatten();
    p(nt) = std::log(config.m_init);
    p(nt + 1) = std::log(config.d_init);

    // Adam state
    Eigen::VectorXd m1 = Eigen::VectorXd::Zero(p.size());
    Eigen::VectorXd m2 = Eigen::VectorXd::Zero(p.size());
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    PinnResult res;
    res.seed = config.seed;
    if (config.record_loss_trace) res.loss_trace.reserve(config.epochs);

    double last_data = 0.0, last_phys = 0.0;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        theta = NetParams::unflatten(p.head(nt), h);
        const PinnGradients lg = pinn_loss_and_grad(theta, p(nt), p(nt + 1), dataset, P,
                                                    B, config.w_data, config.w_phys);
        const double total = config.w_data * lg.data_loss + config.w_phys * lg.phys_loss;
        if (!std::isfinite(total))
            throw NumericalError("pinn training diverged at epoch " + std::to_string(epoch));
        last_data = lg.data_loss;
        last_phys = lg.phys_loss;
        if (config.record_loss_trace) res.loss_trace.push_back(total);

        Eigen::VectorXd g(p.size());
        g.head(nt) = lg.g_theta.flatten();
        g(nt) = lg.g_log_m;
        g(nt + 1) = lg.g_log_d;

        m1 = beta1 * m1 + (1.0 - beta1) * g;
        m2 = beta2 * m2 + (1.0 - beta2) * g.cwiseProduct(g);
        const double c1 = 1.0 - std::pow(beta1, epoch);
        const double c2 = 1.0 - std::pow(beta2, epoch);
        const double lr =
            config.learning_rate *
            std::pow(config.learning_rate_final / config.learning_rate,
                     static_cast<double>(epoch - 1) / std::max(1, config.epochs - 1));
        p -= lr * (m1 / c1).cwiseQuotient(((m2 / c2).cwiseSqrt().array() + eps).matrix());
    }

    res.theta = NetParams::unflatten(p.head(nt), h);
    res.m_hat = std::exp(p(nt));
    res.d_hat = std::exp(p(nt + 1));
    res.final_data_loss = last_data;
    res.final_physics_loss = last_phys;
    res.epochs = config.epochs;
    return res;
}

}  // namespace swingid
