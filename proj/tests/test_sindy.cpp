#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "swingid/sindy.hpp"

using namespace swingid;

namespace {

Trajectory sampled(double (*fd)(double), double (*fo)(double), double h, int n) {
    Trajectory t;
    t.sample_rate = 1.0 / h;
    for (int i = 0; i < n; ++i) {
        t.times.push_back(i * h);
        t.states.push_back(State{fd(i * h), fo(i * h)});
    }
    return t;
}

}  // namespace

TEST_CASE("finite differences: degenerate and polynomial cases") {
    SUBCASE("constant trajectory has zero derivatives") {
        const Trajectory t = sampled([](double) { return 0.7; }, [](double) { return -0.2; },
                                     0.1, 20);
        const Derivatives d = finite_diff_derivatives(t);
        CHECK(d.ddelta.cwiseAbs().maxCoeff() < 1e-13);
        CHECK(d.domega.cwiseAbs().maxCoeff() < 1e-13);
    }
    SUBCASE("central and one-sided stencils are exact for quadratics") {
        const Trajectory t = sampled([](double x) { return x * x; },
                                     [](double x) { return 3.0 * x * x - x; }, 0.1, 15);
        const Derivatives d = finite_diff_derivatives(t);
        for (int i = 0; i < 15; ++i) {
            const double x = 0.1 * i;
            CHECK(d.ddelta(i) == doctest::Approx(2.0 * x).epsilon(1e-10));
            CHECK(d.domega(i) == doctest::Approx(6.0 * x - 1.0).epsilon(1e-10));
        }
    }
    SUBCASE("too-short trajectory is rejected") {
        Trajectory t;
        t.sample_rate = 10.0;
        t.times = {0.0, 0.1};
        t.states = {State{}, State{}};
        CHECK_THROWS_AS(finite_diff_derivatives(t), ValidationError);
    }
}

TEST_CASE("finite differences track the true derivative on a clean fd1 trajectory") {
    const Scenario sc = preset("fd1");
    const Trajectory t = simulate(sc, 27.0, 10.0);
    const Derivatives d = finite_diff_derivatives(t);
    double max_err = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const State rhs = swing_rhs(t.states[i], sc.params);
        max_err = std::max(max_err, std::abs(d.domega(static_cast<Eigen::Index>(i)) - rhs.omega));
    }
    CHECK(max_err < 1e-2);
}

TEST_CASE("regression with analytic derivatives recovers the exact coefficients") {
    const Scenario sc = preset("fd1");
    const Trajectory t = simulate(sc, 27.0, 10.0);
    Eigen::VectorXd domega(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        domega(static_cast<Eigen::Index>(i)) = swing_rhs(t.states[i], sc.params).omega;
    const SindyCoefficients c = fit_with_derivatives(t, domega);
    CHECK(c.c0 == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK(c.c1 == doctest::Approx(-0.5).epsilon(1e-10));
    CHECK(c.c2 == doctest::Approx(-2.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("analytic-derivative recovery is exact for all presets") {
    for (const auto& name : preset_names()) {
        const Scenario sc = preset(name);
        const Trajectory t = simulate(sc, 27.0, 10.0);
        Eigen::VectorXd domega(t.size());
        for (std::size_t i = 0; i < t.size(); ++i)
            domega(static_cast<Eigen::Index>(i)) = swing_rhs(t.states[i], sc.params).omega;
        const SindyEstimate est =
            extract_params(fit_with_derivatives(t, domega), sc.params.P, sc.params.B);
        CHECK(std::abs(est.m_hat - sc.params.m) < 1e-9);
        CHECK(std::abs(est.d_hat - sc.params.d) < 1e-9);
        CHECK(std::abs(est.b_check - sc.params.B) < 1e-9);
        CHECK_FALSE(est.b_check_flag);
    }
}

TEST_CASE("clean fd1 trajectory with finite differences lands within 5 percent") {
    const Scenario sc = preset("fd1");
    const Trajectory t = simulate(sc, 27.0, 10.0);
    const SindyEstimate est = estimate_sindy(t, sc.params.P, sc.params.B);
    CHECK(std::abs(est.m_hat - 0.3) / 0.3 < 0.05);
}

TEST_CASE("zero response gives zero coefficients") {
    const Trajectory t = simulate(preset("fd1"), 10.0, 10.0);
    const SindyCoefficients c =
        fit_with_derivatives(t, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(t.size())));
    CHECK(std::abs(c.c0) < 1e-12);
    CHECK(std::abs(c.c1) < 1e-12);
    CHECK(std::abs(c.c2) < 1e-12);
}

TEST_CASE("rank-deficient library is reported") {
    // constant trajectory: all three columns collinear
    Trajectory t;
    t.sample_rate = 10.0;
    for (int i = 0; i < 10; ++i) {
        t.times.push_back(0.1 * i);
        t.states.push_back(State{0.5, 0.25});
    }
    CHECK_THROWS_AS(fit(t), NumericalError);
}

TEST_CASE("extract_params") {
    SUBCASE("fd1 coefficients invert to the Table values") {
        const SindyEstimate est =
            extract_params(SindyCoefficients{1.0 / 3.0, -0.5, -2.0 / 3.0}, 0.1, 0.2);
        CHECK(est.m_hat == doctest::Approx(0.3).epsilon(1e-12));
        CHECK(est.d_hat == doctest::Approx(0.15).epsilon(1e-12));
        CHECK(est.b_check == doctest::Approx(0.2).epsilon(1e-12));
        CHECK_FALSE(est.b_check_flag);
    }
    SUBCASE("unit inertia, undamped") {
        const SindyEstimate est = extract_params(SindyCoefficients{0.1, 0.0, -0.2}, 0.1, 0.2);
        CHECK(est.m_hat == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(est.d_hat == 0.0);
    }
    SUBCASE("vanishing constant coefficient") {
        CHECK_THROWS_AS(extract_params(SindyCoefficients{0.0, 1.0, 1.0}, 0.1, 0.2),
                        NumericalError);
    }
    SUBCASE("b_check mismatch raises the flag") {
        const SindyEstimate est = extract_params(SindyCoefficients{0.1, 0.0, -0.1}, 0.1, 0.2);
        CHECK(est.b_check_flag);
    }
}

TEST_CASE("noise strictly degrades the inertia estimate") {
    for (const auto& name : preset_names()) {
        const Scenario sc = preset(name);
        const Trajectory clean = simulate(sc, 27.0, 10.0);
        const double eps_clean =
            std::abs(estimate_sindy(clean, sc.params.P, sc.params.B).m_hat - sc.params.m) /
            sc.params.m;
        double sum_noisy = 0.0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const Trajectory noisy = add_noise(clean, NoiseSpec{0.05, seed});
            sum_noisy += std::abs(estimate_sindy(noisy, sc.params.P, sc.params.B).m_hat -
                                  sc.params.m) /
                         sc.params.m;
        }
        CHECK(sum_noisy / 10.0 > eps_clean);
    }
}

TEST_CASE("denser sampling never hurts the noiseless fit") {
    const Scenario sc = preset("fd1");
    double prev = 1e9;
    for (double rate : {10.0, 20.0, 40.0}) {
        const Trajectory t = simulate(sc, 27.0, rate);
        const double err =
            std::abs(estimate_sindy(t, sc.params.P, sc.params.B).m_hat - sc.params.m);
        CHECK(err <= prev * (1.0 + 1e-9));
        prev = err;
    }
}

TEST_CASE("thresholding path prunes small coefficients") {
    const Scenario sc = preset("fd1");
    const Trajectory t = simulate(sc, 27.0, 10.0);
    Eigen::VectorXd domega(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        domega(static_cast<Eigen::Index>(i)) = swing_rhs(t.states[i], sc.params).omega;
    // threshold above all true coefficient magnitudes kills everything
    const SindyCoefficients c = fit_with_derivatives(t, domega, 10.0);
    CHECK(c.c0 == 0.0);
    CHECK(c.c1 == 0.0);
    CHECK(c.c2 == 0.0);
    // mild threshold leaves the true model intact
    const SindyCoefficients c2 = fit_with_derivatives(t, domega, 0.01);
    CHECK(c2.c0 == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("estimate JSON carries the flags") {
    const SindyEstimate est = extract_params(SindyCoefficients{0.1, 0.0, -0.1}, 0.1, 0.2);
    const std::string j = est.to_json();
    CHECK(j.find("b_check_mismatch") != std::string::npos);
    CHECK(j.find("m_hat") != std::string::npos);
}
