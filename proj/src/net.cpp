#include "swingid/net.hpp"

#include <cmath>
#include <random>

#include "json.hpp"

namespace swingid {

NetParams NetParams::zeros(int hidden) {
    if (hidden < 1) throw ValidationError("NetParams: hidden_size must be >= 1");
    NetParams p;
    p.w1 = Eigen::MatrixXd::Zero(hidden, 2);
    p.b1 = Eigen::VectorXd::Zero(hidden);
    p.w2 = Eigen::MatrixXd::Zero(2, hidden);
    p.b2 = Eigen::VectorXd::Zero(2);
    return p;
}

NetParams NetParams::random_init(int hidden, std::uint64_t seed) {
    NetParams p = zeros(hidden);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double s1 = 1.0 / std::sqrt(2.0);
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (int i = 0; i < hidden; ++i)
        for (int j = 0; j < 2; ++j) p.w1(i, j) = s1 * gauss(rng);
    for (int i = 0; i < hidden; ++i) p.b1(i) = s1 * gauss(rng);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < hidden; ++j) p.w2(i, j) = s2 * gauss(rng);
    // b2 left at zero
    return p;
}

Eigen::VectorXd NetParams::flatten() const {
    Eigen::VectorXd v(size());
    const int h = hidden();
    int off = 0;
    v.segment(off, 2 * h) = Eigen::Map<const Eigen::VectorXd>(w1.data(), 2 * h);
    off += 2 * h;
    v.segment(off, h) = b1;
    off += h;
    v.segment(off, 2 * h) = Eigen::Map<const Eigen::VectorXd>(w2.data(), 2 * h);
    off += 2 * h;
    v.segment(off, 2) = b2;
    return v;
}

NetParams NetParams::unflatten(const Eigen::Ref<const Eigen::VectorXd>& v, int hidden) {
    if (v.size() != hidden * 5 + 2) throw ValidationError("NetParams::unflatten: size mismatch");
    NetParams p = zeros(hidden);
    int off = 0;
    Eigen::Map<Eigen::VectorXd>(p.w1.data(), 2 * hidden) = v.segment(off, 2 * hidden);
    off += 2 * hidden;
    p.b1 = v.segment(off, hidden);
    off += hidden;
    Eigen::Map<Eigen::VectorXd>(p.w2.data(), 2 * hidden) = v.segment(off, 2 * hidden);
    off += 2 * hidden;
    p.b2 = v.segment(off, 2);
    return p;
}

void NetParams::validate() const {
    if (hidden() < 1) throw ValidationError("NetParams: hidden_size must be >= 1");
    if (w1.rows() != hidden() || w1.cols() != 2 || w2.rows() != 2 || w2.cols() != hidden() ||
        b2.size() != 2)
        throw ValidationError("NetParams: inconsistent shapes");
    if (!w1.allFinite() || !b1.allFinite() || !w2.allFinite() || !b2.allFinite())
        throw ValidationError("NetParams: non-finite entry");
}

std::string NetParams::to_json() const {
    nlohmann::json j;
    j["hidden_size"] = hidden();
    auto mat = [](const Eigen::MatrixXd& m) {
        std::vector<std::vector<double>> rows;
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            std::vector<double> row;
            for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    j["w1"] = mat(w1);
    j["b1"] = std::vector<double>(b1.data(), b1.data() + b1.size());
    j["w2"] = mat(w2);
    j["b2"] = std::vector<double>(b2.data(), b2.data() + b2.size());
    return j.dump(2);
}

NetParams NetParams::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("NetParams: bad JSON: ") + e.what());
    }
    const int h = j.at("hidden_size").get<int>();
    NetParams p = zeros(h);
    auto mat = [](const nlohmann::json& arr, Eigen::MatrixXd& m) {
        if (static_cast<Eigen::Index>(arr.size()) != m.rows())
            throw ValidationError("NetParams: matrix row count mismatch");
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            const auto& row = arr[r];
            if (static_cast<Eigen::Index>(row.size()) != m.cols())
                throw ValidationError("NetParams: matrix column count mismatch");
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = row[c].get<double>();
        }
    };
    mat(j.at("w1"), p.w1);
    mat(j.at("w2"), p.w2);
    const auto b1 = j.at("b1").get<std::vector<double>>();
    const auto b2 = j.at("b2").get<std::vector<double>>();
    if (static_cast<int>(b1.size()) != h || b2.size() != 2)
        throw ValidationError("NetParams: bias length mismatch");
    p.b1 = Eigen::Map<const Eigen::VectorXd>(b1.data(), h);
    p.b2 = Eigen::Map<const Eigen::VectorXd>(b2.data(), 2);
    p.validate();
    return p;
}

Eigen::Vector2d forward(const NetParams& theta, double t_norm, double P) {
    const Eigen::Vector2d u(t_norm, P);
    const Eigen::VectorXd a = (theta.w1 * u + theta.b1).array().tanh();
    return theta.w2 * a + theta.b2;
}

Eigen::Vector2d time_derivative(const NetParams& theta, double t_norm, double P, double T) {
    if (T <= 0.0) throw ValidationError("time_derivative: T must be positive");
    const Eigen::Vector2d u(t_norm, P);
    const Eigen::ArrayXd a = (theta.w1 * u + theta.b1).array().tanh();
    const Eigen::ArrayXd sech2 = 1.0 - a.square();
    const Eigen::VectorXd q = (sech2 * theta.w1.col(0).array()).matrix();
    return (theta.w2 * q) / T;
}

void backprop_output(const NetParams& theta, double t_norm, double P,
                     const Eigen::Vector2d& adj, NetParams& grad) {
    const Eigen::Vector2d u(t_norm, P);
    const Eigen::ArrayXd a = (theta.w1 * u + theta.b1).array().tanh();
    const Eigen::ArrayXd sech2 = 1.0 - a.square();

    grad.w2 += adj * a.matrix().transpose();
    grad.b2 += adj;
    const Eigen::ArrayXd gz = (theta.w2.transpose() * adj).array() * sech2;
    grad.w1 += gz.matrix() * u.transpose();
    grad.b1 += gz.matrix();
}

void backprop_time_derivative(const NetParams& theta, double t_norm, double P, double T,
                              const Eigen::Vector2d& adj, NetParams& grad) {
    if (T <= 0.0) throw ValidationError("backprop_time_derivative: T must be positive");
    const double s = 1.0 / T;
    const Eigen::Vector2d u(t_norm, P);
    const Eigen::ArrayXd a = (theta.w1 * u + theta.b1).array().tanh();
    const Eigen::ArrayXd sech2 = 1.0 - a.square();
    const Eigen::ArrayXd w1t = theta.w1.col(0).array();
    const Eigen::ArrayXd q = sech2 * w1t;  // v = s * w2 * q

    grad.w2 += s * adj * q.matrix().transpose();
    const Eigen::ArrayXd gq = s * (theta.w2.transpose() * adj).array();
    // q_k = (1 - a_k^2) * w1(k,0): a direct w1 column term plus the path through z.
    grad.w1.col(0) += (gq * sech2).matrix();
    const Eigen::ArrayXd gz = gq * (-2.0 * a * sech2 * w1t);
    grad.w1 += gz.matrix() * u.transpose();
    grad.b1 += gz.matrix();
}

BatchCache batch_forward(const NetParams& theta, const Eigen::MatrixXd& U, double T) {
    if (T <= 0.0) throw ValidationError("batch_forward: T must be positive");
    if (U.rows() != 2) throw ValidationError("batch_forward: U must be 2 x N");
    BatchCache c;
    c.a = ((theta.w1 * U).colwise() + theta.b1).array().tanh();
    c.sech2 = 1.0 - c.a.array().square();
    c.q = c.sech2.array().colwise() * theta.w1.col(0).array();
    c.xhat = (theta.w2 * c.a).colwise() + theta.b2;
    c.v = (theta.w2 * c.q) / T;
    return c;
}

void batch_backprop(const NetParams& theta, const Eigen::MatrixXd& U, double T,
                    const BatchCache& cache, const Eigen::MatrixXd& adj_x,
                    const Eigen::MatrixXd& adj_v, NetParams& grad) {
    if (T <= 0.0) throw ValidationError("batch_backprop: T must be positive");
    const double s = 1.0 / T;
    // output path
    grad.w2 += adj_x * cache.a.transpose();
    grad.b2 += adj_x.rowwise().sum();
    Eigen::MatrixXd gz = (theta.w2.transpose() * adj_x).cwiseProduct(cache.sech2);
    // derivative path
    grad.w2 += s * adj_v * cache.q.transpose();
    const Eigen::MatrixXd gq = s * (theta.w2.transpose() * adj_v);
    grad.w1.col(0) += gq.cwiseProduct(cache.sech2).rowwise().sum();
    const Eigen::ArrayXXd gz2 =
        gq.array() * ((-2.0 * cache.a.array() * cache.sech2.array()).colwise() *
                      theta.w1.col(0).array());
    gz.array() += gz2;
    grad.w1 += gz * U.transpose();
    grad.b1 += gz.rowwise().sum();
}

}  // namespace swingid
