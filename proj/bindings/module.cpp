#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "swingid/bpinn.hpp"
#include "swingid/experiment.hpp"
#include "swingid/pinn.hpp"
#include "swingid/sindy.hpp"
#include "swingid/swing.hpp"

namespace py = pybind11;
using namespace swingid;

namespace {

py::dict traj_to_dict(const Trajectory& t) {
    py::list times, deltas, omegas;
    for (std::size_t i = 0; i < t.size(); ++i) {
        times.append(t.times[i]);
        deltas.append(t.states[i].delta);
        omegas.append(t.states[i].omega);
    }
    py::dict d;
    d["t"] = times;
    d["delta"] = deltas;
    d["omega"] = omegas;
    d["sample_rate"] = t.sample_rate;
    return d;
}

Trajectory traj_from_dict(const py::dict& d) {
    Trajectory t;
    for (auto v : d["t"]) t.times.push_back(v.cast<double>());
    auto deltas = d["delta"];
    auto omegas = d["omega"];
    auto it_d = deltas.begin();
    auto it_o = omegas.begin();
    for (; it_d != deltas.end() && it_o != omegas.end(); ++it_d, ++it_o)
        t.states.push_back(State{it_d->cast<double>(), it_o->cast<double>()});
    t.sample_rate = d["sample_rate"].cast<double>();
    t.validate();
    return t;
}

}  // namespace

PYBIND11_MODULE(_swingid, m) {
    m.doc() = "Swing-equation system identification: SINDy, PINN and SVGD-trained BPINN";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    m.def("scenario_names", [] { return preset_names(); });

    m.def(
        "simulate",
        [](const std::string& scenario, double duration, double rate, double noise,
           std::uint64_t seed) {
            Trajectory t = simulate(preset(scenario), duration, rate);
            if (noise > 0.0) t = add_noise(t, NoiseSpec{noise, seed});
            return traj_to_dict(t);
        },
        py::arg("scenario"), py::arg("duration") = 27.0, py::arg("rate") = 10.0,
        py::arg("noise") = 0.0, py::arg("seed") = 0);

    m.def(
        "equilibrium",
        [](const std::string& scenario) {
            const State eq = equilibrium(preset(scenario).params);
            return py::make_tuple(eq.delta, eq.omega);
        },
        py::arg("scenario"));

    m.def(
        "estimate_sindy",
        [](const py::dict& traj, double P, double B) {
            const SindyEstimate est = estimate_sindy(traj_from_dict(traj), P, B);
            py::dict d;
            d["m_hat"] = est.m_hat;
            d["d_hat"] = est.d_hat;
            d["b_check"] = est.b_check;
            d["residual_norm"] = est.residual_norm;
            return d;
        },
        py::arg("trajectory"), py::arg("P") = 0.1, py::arg("B") = 0.2);

    m.def(
        "estimate_pinn",
        [](const py::dict& traj, double P, double B, int epochs, double learning_rate,
           std::uint64_t seed) {
            PinnConfig cfg;
            cfg.epochs = epochs;
            cfg.learning_rate = learning_rate;
            cfg.seed = seed;
            const PinnResult res = train_pinn(traj_from_dict(traj), P, B, cfg);
            py::dict d;
            d["m_hat"] = res.m_hat;
            d["d_hat"] = res.d_hat;
            d["final_data_loss"] = res.final_data_loss;
            d["final_physics_loss"] = res.final_physics_loss;
            return d;
        },
        py::arg("trajectory"), py::arg("P") = 0.1, py::arg("B") = 0.2,
        py::arg("epochs") = PinnConfig{}.epochs,
        py::arg("learning_rate") = PinnConfig{}.learning_rate, py::arg("seed") = 0);

    m.def(
        "estimate_bpinn",
        [](const py::dict& traj, double P, double B, int n_particles, int iterations,
           double stepsize, double stepsize_final, std::uint64_t seed,
           std::optional<std::pair<double, double>> lambda_true) {
            BpinnConfig cfg;
            cfg.n_particles = n_particles;
            cfg.iterations = iterations;
            cfg.stepsize = stepsize;
            cfg.stepsize_final = stepsize_final;
            cfg.seed = seed;
            const PosteriorSummary post =
                run_bpinn(traj_from_dict(traj), P, B, cfg, lambda_true);
            py::dict d;
            d["m_mean"] = post.m_mean;
            d["m_std"] = post.m_std;
            d["tau_m"] = post.tau_m;
            d["d_mean"] = post.d_mean;
            d["d_std"] = post.d_std;
            d["tau_d"] = post.tau_d;
            d["sigma_x_mean"] = post.sigma_x_mean;
            d["blind"] = post.blind;
            return d;
        },
        py::arg("trajectory"), py::arg("P") = 0.1, py::arg("B") = 0.2,
        py::arg("n_particles") = BpinnConfig{}.n_particles,
        py::arg("iterations") = BpinnConfig{}.iterations,
        py::arg("stepsize") = BpinnConfig{}.stepsize,
        py::arg("stepsize_final") = BpinnConfig{}.stepsize_final,
        py::arg("seed") = 0, py::arg("lambda_true") = std::nullopt);

    m.def(
        "percent_error",
        [](std::pair<double, double> lambda_hat, std::pair<double, double> lambda_true) {
            const Eigen::Vector2d e =
                percent_error(Eigen::Vector2d(lambda_hat.first, lambda_hat.second),
                              Eigen::Vector2d(lambda_true.first, lambda_true.second));
            return std::make_pair(e(0), e(1));
        },
        py::arg("lambda_hat"), py::arg("lambda_true"));
}
