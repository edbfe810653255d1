#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "swingid/net.hpp"

using namespace swingid;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

NetParams random_theta(int hidden, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, scale);
    NetParams p = NetParams::zeros(hidden);
    for (int i = 0; i < hidden; ++i)
        for (int j = 0; j < 2; ++j) p.w1(i, j) = g(rng);
    for (int i = 0; i < hidden; ++i) p.b1(i) = g(rng);
    for (int j = 0; j < hidden; ++j)
        for (int i = 0; i < 2; ++i) p.w2(i, j) = g(rng);
    for (int i = 0; i < 2; ++i) p.b2(i) = g(rng);
    return p;
}

// independent matrix-arithmetic oracle, plain loops only
Vector2d forward_oracle(const NetParams& t, double tn, double P) {
    const int h = t.hidden();
    Vector2d out(t.b2(0), t.b2(1));
    for (int k = 0; k < h; ++k) {
        const double z = t.w1(k, 0) * tn + t.w1(k, 1) * P + t.b1(k);
        const double a = std::tanh(z);
        out(0) += t.w2(0, k) * a;
        out(1) += t.w2(1, k) * a;
    }
    return out;
}

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

}  // namespace

TEST_CASE("forward degenerate cases") {
    NetParams zero = NetParams::zeros(10);
    zero.b2 << 0.7, -0.2;
    const Vector2d out = forward(zero, 0.3, 0.1);
    CHECK(out(0) == 0.7);
    CHECK(out(1) == -0.2);

    NetParams constant = random_theta(6, 1);
    constant.w1.setZero();
    const Vector2d a = forward(constant, 0.0, 0.1);
    const Vector2d b = forward(constant, 0.9, 0.1);
    CHECK(a(0) == b(0));
    CHECK(a(1) == b(1));
}

TEST_CASE("forward matches the loop oracle") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const NetParams t = random_theta(10, s);
        const double tn = 0.05 * static_cast<double>(s);
        const Vector2d got = forward(t, tn, 0.1);
        const Vector2d want = forward_oracle(t, tn, 0.1);
        CHECK(std::abs(got(0) - want(0)) < 1e-12);
        CHECK(std::abs(got(1) - want(1)) < 1e-12);
    }
}

TEST_CASE("time_derivative against central finite differences") {
    const double T = 27.0;
    const double eps = 1e-6;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int trial = 0; trial < 100; ++trial) {
        const NetParams t = random_theta(10, 1000 + trial);
        const double tn = u(rng);
        const Vector2d analytic = time_derivative(t, tn, 0.1, T);
        const Vector2d fd =
            (forward(t, tn + eps, 0.1) - forward(t, tn - eps, 0.1)) / (2.0 * eps * T);
        CHECK(rel_err(analytic(0), fd(0)) < 1e-5);
        CHECK(rel_err(analytic(1), fd(1)) < 1e-5);
    }
}

TEST_CASE("time_derivative degenerate cases") {
    const NetParams zero = NetParams::zeros(10);
    const Vector2d d = time_derivative(zero, 0.4, 0.1, 27.0);
    CHECK(d(0) == 0.0);
    CHECK(d(1) == 0.0);

    // tiny-weight linear regime: derivative ~ (1/T) * w2 * w1[:,0]
    const double T = 10.0;
    NetParams tiny = random_theta(8, 3, 1e-5);
    tiny.b1.setZero();
    const Vector2d lin = (tiny.w2 * tiny.w1.col(0)) / T;
    const Vector2d got = time_derivative(tiny, 0.5, 0.0, T);
    CHECK(std::abs(got(0) - lin(0)) < 1e-6);
    CHECK(std::abs(got(1) - lin(1)) < 1e-6);
}

TEST_CASE("backprop_output gradient matches finite differences") {
    const double eps = 1e-6;
    for (int trial = 0; trial < 100; ++trial) {
        const NetParams theta = random_theta(10, 2000 + trial);
        const double tn = 0.37, P = 0.1;
        // scalar = squared first output + 2 * second output
        auto scalar = [&](const NetParams& t) {
            const Vector2d o = forward(t, tn, P);
            return o(0) * o(0) + 2.0 * o(1);
        };
        const Vector2d o = forward(theta, tn, P);
        NetParams grad = NetParams::zeros(10);
        backprop_output(theta, tn, P, Vector2d(2.0 * o(0), 2.0), grad);

        const VectorXd g = grad.flatten();
        const VectorXd x = theta.flatten();
        for (int k = 0; k < x.size(); ++k) {
            VectorXd xp = x, xm = x;
            xp(k) += eps;
            xm(k) -= eps;
            const double fd = (scalar(NetParams::unflatten(xp, 10)) -
                               scalar(NetParams::unflatten(xm, 10))) /
                              (2.0 * eps);
            REQUIRE(rel_err(g(k), fd) < 1e-5);
        }
    }
}

TEST_CASE("backprop_time_derivative gradient matches finite differences") {
    const double eps = 1e-6, T = 27.0;
    for (int trial = 0; trial < 100; ++trial) {
        const NetParams theta = random_theta(10, 3000 + trial);
        const double tn = 0.61, P = 0.1;
        // scalar = squared norm of the time derivative (second-order path)
        auto scalar = [&](const NetParams& t) {
            return time_derivative(t, tn, P, T).squaredNorm();
        };
        const Vector2d v = time_derivative(theta, tn, P, T);
        NetParams grad = NetParams::zeros(10);
        backprop_time_derivative(theta, tn, P, T, 2.0 * v, grad);

        const VectorXd g = grad.flatten();
        const VectorXd x = theta.flatten();
        for (int k = 0; k < x.size(); ++k) {
            VectorXd xp = x, xm = x;
            xp(k) += eps;
            xm(k) -= eps;
            const double fd = (scalar(NetParams::unflatten(xp, 10)) -
                               scalar(NetParams::unflatten(xm, 10))) /
                              (2.0 * eps);
            REQUIRE(rel_err(g(k), fd) < 1e-4);
        }
    }
}

TEST_CASE("gradient of a theta-independent scalar is zero") {
    const NetParams theta = random_theta(10, 77);
    NetParams grad = NetParams::zeros(10);
    backprop_output(theta, 0.5, 0.1, Vector2d::Zero(), grad);
    backprop_time_derivative(theta, 0.5, 0.1, 27.0, Vector2d::Zero(), grad);
    CHECK(grad.flatten().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("directional-derivative consistency") {
    // moving along the gradient changes the scalar by eps * ||g||^2 + O(eps^2)
    const NetParams theta = random_theta(10, 11);
    const double tn = 0.25, P = 0.1;
    auto scalar = [&](const NetParams& t) { return forward(t, tn, P).squaredNorm(); };
    NetParams grad = NetParams::zeros(10);
    backprop_output(theta, tn, P, 2.0 * forward(theta, tn, P), grad);
    const VectorXd g = grad.flatten();
    const double eps = 1e-7;
    const NetParams moved = NetParams::unflatten(theta.flatten() + eps * g, 10);
    const double change = scalar(moved) - scalar(theta);
    CHECK(std::abs(change - eps * g.squaredNorm()) < 1e-9);
}

TEST_CASE("evaluation is deterministic") {
    const NetParams theta = random_theta(10, 8);
    const Vector2d a = forward(theta, 0.123, 0.1);
    const Vector2d b = forward(theta, 0.123, 0.1);
    CHECK(a(0) == b(0));
    CHECK(a(1) == b(1));
    const Vector2d c = time_derivative(theta, 0.123, 0.1, 27.0);
    const Vector2d d = time_derivative(theta, 0.123, 0.1, 27.0);
    CHECK(c(0) == d(0));
    CHECK(c(1) == d(1));
}

TEST_CASE("JSON round trip") {
    const NetParams theta = random_theta(10, 21);
    const NetParams back = NetParams::from_json(theta.to_json());
    CHECK((back.flatten() - theta.flatten()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.hidden() == 10);
    CHECK_THROWS_AS(NetParams::from_json("{not json"), ValidationError);
}

TEST_CASE("flatten/unflatten are inverse") {
    const NetParams theta = random_theta(7, 4);
    const NetParams back = NetParams::unflatten(theta.flatten(), 7);
    CHECK((back.w1 - theta.w1).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.b1 - theta.b1).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.w2 - theta.w2).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.b2 - theta.b2).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(NetParams::unflatten(VectorXd::Zero(5), 7), ValidationError);
}

TEST_CASE("batched forward and backprop match the per-point path") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const NetParams theta = NetParams::random_init(6, 1000 + trial);
        const double T = 13.0, P = 0.1;
        const int N = 17;
        Eigen::MatrixXd U(2, N), adj_x(2, N), adj_v(2, N);
        for (int i = 0; i < N; ++i) {
            U(0, i) = i / static_cast<double>(N - 1);
            U(1, i) = P;
            adj_x(0, i) = gauss(rng);
            adj_x(1, i) = gauss(rng);
            adj_v(0, i) = gauss(rng);
            adj_v(1, i) = gauss(rng);
        }
        const BatchCache c = batch_forward(theta, U, T);
        NetParams g_batch = NetParams::zeros(6);
        batch_backprop(theta, U, T, c, adj_x, adj_v, g_batch);

        NetParams g_loop = NetParams::zeros(6);
        for (int i = 0; i < N; ++i) {
            const Eigen::Vector2d x = forward(theta, U(0, i), P);
            const Eigen::Vector2d v = time_derivative(theta, U(0, i), P, T);
            CHECK((c.xhat.col(i) - x).cwiseAbs().maxCoeff() < 1e-13);
            CHECK((c.v.col(i) - v).cwiseAbs().maxCoeff() < 1e-13);
            backprop_output(theta, U(0, i), P, adj_x.col(i), g_loop);
            backprop_time_derivative(theta, U(0, i), P, T, adj_v.col(i), g_loop);
        }
        CHECK((g_batch.flatten() - g_loop.flatten()).cwiseAbs().maxCoeff() < 1e-11);
    }
}
