#include "swingid/bpinn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json.hpp"

namespace swingid {

namespace {
constexpr double kHalfLog2Pi = 0.9189385332046727;  // log(2*pi)/2
constexpr double kPriorRate = 0.1;                  // Gamma(1, 0.1) rate for all precisions
constexpr double kLambdaPriorMean = 1.0;
constexpr double kLambdaPriorScaleNum = 5.0;        // scale = 5.0 / P_prec
constexpr double kBandwidthFloor = 1e-6;
}  // namespace

void BpinnConfig::validate() const {
    if (n_particles < 1) throw ValidationError("BpinnConfig: n_particles must be >= 1");
    if (iterations < 0) throw ValidationError("BpinnConfig: iterations must be nonnegative");
    if (stepsize <= 0.0) throw ValidationError("BpinnConfig: stepsize must be positive");
    if (stepsize_final <= 0.0 || stepsize_final > stepsize)
        throw ValidationError("BpinnConfig: stepsize_final must be in (0, stepsize]");
    if (hidden < 1) throw ValidationError("BpinnConfig: hidden must be >= 1");
}

std::string PosteriorSummary::to_json() const {
    nlohmann::json j;
    j["m_mean"] = m_mean;
    j["m_std"] = m_std;
    j["tau_m"] = tau_m;
    j["d_mean"] = d_mean;
    j["d_std"] = d_std;
    j["tau_d"] = tau_d;
    j["sigma_x_mean"] = sigma_x_mean;
    j["blind"] = blind;
    j["n_particles"] = n_particles;
    j["iterations"] = iterations;
    j["seed"] = seed;
    return j.dump(2);
}

double log_normal_pdf(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return -std::log(sigma) - kHalfLog2Pi - 0.5 * z * z;
}

double log_gamma_pdf(double x, double shape, double rate) {
    if (x <= 0.0) return -std::numeric_limits<double>::infinity();
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) -
           rate * x;
}

BpinnModel::BpinnModel(Trajectory dataset, double P, double B, int hidden)
    : dataset_(std::move(dataset)), P_(P), B_(B) {
    dataset_.validate();
    layout_.hidden = hidden;
    T_ = dataset_.duration();
    const double t0 = dataset_.times.front();
    t_norms_.reserve(dataset_.size());
    for (double t : dataset_.times) t_norms_.push_back((t - t0) / T_);
    const auto n = static_cast<Eigen::Index>(dataset_.size());
    U_.resize(2, n);
    data_.resize(2, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        U_(0, i) = t_norms_[static_cast<std::size_t>(i)];
        U_(1, i) = P_;
        data_(0, i) = dataset_.states[static_cast<std::size_t>(i)].delta;
        data_(1, i) = dataset_.states[static_cast<std::size_t>(i)].omega;
    }
}

double BpinnModel::log_likelihood_data(const Eigen::VectorXd& particle) const {
    const NetParams theta = NetParams::unflatten(particle.head(layout_.theta_size()),
                                                 layout_.hidden);
    const auto n = static_cast<double>(dataset_.size());
    const BatchCache c = batch_forward(theta, U_, T_);
    const Eigen::MatrixXd r = c.xhat - data_;
    double ll = 0.0;
    for (int k = 0; k < 2; ++k) {
        const double ls = particle(layout_.idx_log_sigma_x() + k);
        const double inv_var = std::exp(-2.0 * ls);
        ll += -n * (ls + kHalfLog2Pi) - 0.5 * inv_var * r.row(k).squaredNorm();
    }
    return ll;
}

double BpinnModel::log_likelihood_physics(const Eigen::VectorXd& particle) const {
    const NetParams theta = NetParams::unflatten(particle.head(layout_.theta_size()),
                                                 layout_.hidden);
    const double m = std::exp(particle(layout_.idx_log_m()));
    const double d = std::exp(particle(layout_.idx_log_d()));
    const auto n = static_cast<double>(dataset_.size());
    const BatchCache c = batch_forward(theta, U_, T_);
    Eigen::MatrixXd h(2, U_.cols());
    h.row(0) = c.v.row(0) - c.xhat.row(1);
    h.row(1) = c.v.row(1).array() -
               (P_ - d * c.xhat.row(1).array() - B_ * c.xhat.row(0).array().sin()) / m;
    double ll = 0.0;
    for (int k = 0; k < 2; ++k) {
        const double ls = particle(layout_.idx_log_sigma_h() + k);
        const double inv_var = std::exp(-2.0 * ls);
        ll += -n * (ls + kHalfLog2Pi) - 0.5 * inv_var * h.row(k).squaredNorm();
    }
    return ll;
}

double BpinnModel::log_prior(const Eigen::VectorXd& particle) const {
    const int ts = layout_.theta_size();
    const int h = layout_.hidden;
    double lp = 0.0;
    // Gaussian over the network weights: unit scale everywhere except the W1
    // time column, whose scale is T. In t_norm = t/T coordinates this equals a
    // standard-normal prior on a network reading raw time, which is what the
    // trajectory's oscillation content requires.
    lp += -0.5 * particle.head(h).squaredNorm() / (T_ * T_) - h * std::log(T_) -
          0.5 * particle.segment(h, ts - h).squaredNorm() - ts * kHalfLog2Pi;
    // precision hyperparameter, Gamma(1, 0.1) with log-space Jacobian
    const double y_prec = particle(layout_.idx_log_p_prec());
    const double p_prec = std::exp(y_prec);
    lp += log_gamma_pdf(p_prec, 1.0, kPriorRate) + y_prec;
    // physical parameters, N(1, 5/P_prec) over (m, d) with log-space Jacobians
    const double lambda_scale = kLambdaPriorScaleNum / p_prec;
    for (int k = 0; k < 2; ++k) {
        const double y = particle(layout_.idx_log_m() + k);
        lp += log_normal_pdf(std::exp(y), kLambdaPriorMean, lambda_scale) + y;
    }
    // noise scales: Gamma(1, 0.1) over the precisions 1/sigma^2, with Jacobians
    for (int k = 0; k < 4; ++k) {
        const double y = particle(layout_.idx_log_sigma_x() + k);
        const double prec = std::exp(-2.0 * y);
        lp += log_gamma_pdf(prec, 1.0, kPriorRate) + std::log(2.0) + std::log(prec);
    }
    return lp;
}

double BpinnModel::log_posterior(const Eigen::VectorXd& particle) const {
    return log_likelihood_data(particle) + log_likelihood_physics(particle) +
           log_prior(particle);
}

Eigen::VectorXd BpinnModel::grad_log_posterior(const Eigen::VectorXd& particle) const {
    const int ts = layout_.theta_size();
    const NetParams theta = NetParams::unflatten(particle.head(ts), layout_.hidden);
    const double m = std::exp(particle(layout_.idx_log_m()));
    const double d = std::exp(particle(layout_.idx_log_d()));
    const double sx[2] = {std::exp(particle(layout_.idx_log_sigma_x())),
                          std::exp(particle(layout_.idx_log_sigma_x() + 1))};
    const double sh[2] = {std::exp(particle(layout_.idx_log_sigma_h())),
                          std::exp(particle(layout_.idx_log_sigma_h() + 1))};

    NetParams g_theta = NetParams::zeros(layout_.hidden);
    double g_log_sx[2], g_log_sh[2];

    const auto n = static_cast<double>(dataset_.size());
    const BatchCache c = batch_forward(theta, U_, T_);
    const Eigen::MatrixXd r = c.xhat - data_;
    const Eigen::Array<double, 1, Eigen::Dynamic> f2 =
        (P_ - d * c.xhat.row(1).array() - B_ * c.xhat.row(0).array().sin()) / m;
    Eigen::MatrixXd h(2, U_.cols());
    h.row(0) = c.v.row(0) - c.xhat.row(1);
    h.row(1) = c.v.row(1).array() - f2;

    Eigen::MatrixXd gx(2, U_.cols()), gh(2, U_.cols());
    for (int k = 0; k < 2; ++k) {
        gx.row(k) = -r.row(k) / (sx[k] * sx[k]);
        gh.row(k) = -h.row(k) / (sh[k] * sh[k]);
        g_log_sx[k] = r.row(k).squaredNorm() / (sx[k] * sx[k]) - n;
        g_log_sh[k] = h.row(k).squaredNorm() / (sh[k] * sh[k]) - n;
    }
    gx.row(0).array() += (B_ / m) * c.xhat.row(0).array().cos() * gh.row(1).array();
    gx.row(1) += -gh.row(0) + (d / m) * gh.row(1);
    const double g_log_m = (gh.row(1).array() * f2).sum();
    const double g_log_d = (d / m) * gh.row(1).dot(c.xhat.row(1));

    batch_backprop(theta, U_, T_, c, gx, gh, g_theta);

    Eigen::VectorXd grad(layout_.dim());
    grad.head(ts) = g_theta.flatten() - particle.head(ts);  // includes the Theta prior
    // the W1 time column carries the wider prior scale T
    const int hh = layout_.hidden;
    grad.head(hh) += particle.head(hh) - particle.head(hh) / (T_ * T_);

    const double y_prec = particle(layout_.idx_log_p_prec());
    const double p_prec = std::exp(y_prec);
    double g_y_prec = -kPriorRate * p_prec + 1.0;

    const double lambda_scale = kLambdaPriorScaleNum / p_prec;
    const double lam[2] = {m, d};
    double g_log_lambda[2] = {g_log_m, g_log_d};
    for (int k = 0; k < 2; ++k) {
        const double z = (lam[k] - kLambdaPriorMean) / lambda_scale;
        g_log_lambda[k] += -z / lambda_scale * lam[k] + 1.0;
        g_y_prec += 1.0 - z * z;
    }
    grad(layout_.idx_log_m()) = g_log_lambda[0];
    grad(layout_.idx_log_d()) = g_log_lambda[1];

    const double g_sigma_like[4] = {g_log_sx[0], g_log_sx[1], g_log_sh[0], g_log_sh[1]};
    for (int k = 0; k < 4; ++k) {
        const double y = particle(layout_.idx_log_sigma_x() + k);
        const double prec = std::exp(-2.0 * y);
        grad(layout_.idx_log_sigma_x() + k) = g_sigma_like[k] + 2.0 * kPriorRate * prec - 2.0;
    }
    grad(layout_.idx_log_p_prec()) = g_y_prec;
    return grad;
}

Eigen::VectorXd BpinnModel::sample_prior(std::mt19937_64& rng) const {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::exponential_distribution<double> expo(kPriorRate);  // Gamma(1, rate)
    Eigen::VectorXd p(layout_.dim());
    for (int i = 0; i < layout_.theta_size(); ++i) p(i) = gauss(rng);
    p.head(layout_.hidden) *= T_;  // W1 time column prior scale

    const double p_prec = std::max(expo(rng), 1e-8);
    p(layout_.idx_log_p_prec()) = std::log(p_prec);
    const double lambda_scale = kLambdaPriorScaleNum / p_prec;
    for (int k = 0; k < 2; ++k) {
        double lam = 0.0;
        for (int attempt = 0; attempt < 100 && lam <= 0.0; ++attempt)
            lam = kLambdaPriorMean + lambda_scale * gauss(rng);
        if (lam <= 0.0) lam = kLambdaPriorMean;
        p(layout_.idx_log_m() + k) = std::log(lam);
    }
    for (int k = 0; k < 4; ++k) {
        const double prec = std::max(expo(rng), 1e-8);
        p(layout_.idx_log_sigma_x() + k) = -0.5 * std::log(prec);
    }
    return p;
}

double svgd_bandwidth(const Eigen::MatrixXd& particles) {
    const auto n = particles.cols();
    if (n < 2) return 1.0;
    std::vector<double> sq;
    sq.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            sq.push_back((particles.col(i) - particles.col(j)).squaredNorm());
    const auto mid = sq.begin() + static_cast<std::ptrdiff_t>(sq.size() / 2);
    std::nth_element(sq.begin(), mid, sq.end());
    const double h = *mid / std::log(static_cast<double>(n) + 1.0);
    return std::max(h, kBandwidthFloor);
}

Eigen::MatrixXd svgd_direction(const Eigen::MatrixXd& particles,
                               const Eigen::MatrixXd& grads) {
    const auto n = particles.cols();
    const double h = svgd_bandwidth(particles);
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(particles.rows(), n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const Eigen::VectorXd diff = particles.col(i) - particles.col(j);
            const double k = std::exp(-diff.squaredNorm() / h);
            phi.col(i) += k * grads.col(j) + (2.0 / h) * k * diff;
        }
        phi.col(i) /= static_cast<double>(n);
    }
    return phi;
}

void svgd_step(Eigen::MatrixXd& particles,
               const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad_log_p,
               double stepsize) {
    if (stepsize <= 0.0) throw ValidationError("svgd_step: stepsize must be positive");
    Eigen::MatrixXd grads(particles.rows(), particles.cols());
    for (Eigen::Index i = 0; i < particles.cols(); ++i)
        grads.col(i) = grad_log_p(particles.col(i));
    particles += stepsize * svgd_direction(particles, grads);
}

PosteriorSummary run_bpinn(const Trajectory& dataset, double P, double B,
                           const BpinnConfig& config,
                           std::optional<std::pair<double, double>> lambda_true,
                           const SnapshotCallback& snapshot) {
    config.validate();
    const BpinnModel model(dataset, P, B, config.hidden);
    const ParticleLayout& layout = model.layout();
    const int dim = layout.dim();
    const int n = config.n_particles;

    std::mt19937_64 rng(config.seed);
    Eigen::MatrixXd particles(dim, n);
    for (int i = 0; i < n; ++i) particles.col(i) = model.sample_prior(rng);

    // Adam-scaled SVGD: the ensemble follows the Stein direction with
    // per-particle, per-coordinate moment normalization. The scaling is a
    // positive diagonal, so the phi = 0 fixed point is intact, and it tames
    // the posterior's stiffness (score magnitudes span several orders across
    // coordinates) well enough to carry prior draws into the posterior bulk.
    Eigen::MatrixXd m1 = Eigen::MatrixXd::Zero(dim, n);
    Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(dim, n);
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    Eigen::MatrixXd grads(dim, n);
    Eigen::MatrixXd prev = particles;
    for (int it = 1; it <= config.iterations; ++it) {
        const double step =
            config.stepsize * std::pow(config.stepsize_final / config.stepsize,
                                       static_cast<double>(it - 1) /
                                           std::max(1, config.iterations - 1));

        bool finite = true;
        for (int i = 0; i < n; ++i) {
            grads.col(i) = model.grad_log_posterior(particles.col(i));
            finite = finite && grads.col(i).allFinite();
        }
        if (!finite) {
            // step-size backoff: retry from the previous ensemble with smaller moves
            bool recovered = false;
            for (int back = 0; back < 20 && !recovered; ++back) {
                particles = prev + 0.5 * (particles - prev);
                recovered = true;
                for (int i = 0; i < n && recovered; ++i) {
                    grads.col(i) = model.grad_log_posterior(particles.col(i));
                    recovered = grads.col(i).allFinite();
                }
            }
            if (!recovered)
                throw NumericalError("bpinn training diverged at iteration " +
                                     std::to_string(it));
        }

        const Eigen::MatrixXd phi = svgd_direction(particles, grads);
        m1 = beta1 * m1 + (1.0 - beta1) * phi;
        m2 = beta2 * m2 + (1.0 - beta2) * phi.cwiseProduct(phi);
        const double c1 = 1.0 - std::pow(beta1, it);
        const double c2 = 1.0 - std::pow(beta2, it);
        prev = particles;
        particles +=
            step * ((m1 / c1).array() / ((m2 / c2).array().sqrt() + eps)).matrix();
        if (snapshot) snapshot(it - 1, particles);
    }

    PosteriorSummary out;
    Eigen::ArrayXd m_vals(n), d_vals(n), sx_vals(n);
    for (int i = 0; i < n; ++i) {
        m_vals(i) = std::exp(particles(layout.idx_log_m(), i));
        d_vals(i) = std::exp(particles(layout.idx_log_d(), i));
        sx_vals(i) = 0.5 * (std::exp(particles(layout.idx_log_sigma_x(), i)) +
                            std::exp(particles(layout.idx_log_sigma_x() + 1, i)));
    }
    auto sd = [n](const Eigen::ArrayXd& v) {
        if (n < 2) return 0.0;
        const double mu = v.mean();
        return std::sqrt((v - mu).square().sum() / (n - 1));
    };
    out.m_mean = m_vals.mean();
    out.d_mean = d_vals.mean();
    out.m_std = sd(m_vals);
    out.d_std = sd(d_vals);
    out.sigma_x_mean = sx_vals.mean();
    if (lambda_true) {
        out.blind = false;
        out.tau_m = out.m_std * 100.0 / lambda_true->first;
        out.tau_d = out.d_std * 100.0 / lambda_true->second;
    } else {
        out.blind = true;
        out.tau_m = out.m_std * 100.0 / out.m_mean;
        out.tau_d = out.d_std * 100.0 / out.d_mean;
    }
    out.n_particles = n;
    out.iterations = config.iterations;
    out.seed = config.seed;
    return out;
}

}  // namespace swingid
