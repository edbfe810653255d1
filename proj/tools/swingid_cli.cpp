#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "swingid/bpinn.hpp"
#include "swingid/experiment.hpp"
#include "swingid/pinn.hpp"
#include "swingid/sindy.hpp"
#include "swingid/swing.hpp"

namespace {

struct ScenarioConstants {
    double P = 0.1;
    double B = 0.2;
    std::optional<double> m_true;
    std::optional<double> d_true;
};

ScenarioConstants load_constants(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw swingid::ValidationError("cannot open scenario-constants file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw swingid::ValidationError(std::string("scenario-constants: bad JSON: ") + e.what());
    }
    ScenarioConstants c;
    c.P = j.at("P").get<double>();
    c.B = j.at("B").get<double>();
    if (j.contains("m_true")) c.m_true = j["m_true"].get<double>();
    if (j.contains("d_true")) c.d_true = j["d_true"].get<double>();
    return c;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw swingid::ValidationError("cannot open for writing: " + path);
    out << text << '\n';
}

int run(int argc, char** argv) {
    CLI::App app{"Swing-equation system identification toolkit"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Integrate a scenario and write a trajectory CSV");
    std::string sim_scenario = "fd1", sim_out = "trajectory.csv";
    double sim_duration = 27.0, sim_rate = 10.0, sim_noise = 0.0;
    std::uint64_t sim_seed = 0;
    sim->add_option("--scenario", sim_scenario, "Preset name (fd1, fd2, sd1, sd2)");
    sim->add_option("--duration", sim_duration, "Trajectory length in seconds");
    sim->add_option("--rate", sim_rate, "Sampling rate in Hz");
    sim->add_option("--noise", sim_noise, "Relative noise level K");
    sim->add_option("--seed", sim_seed, "Noise RNG seed");
    sim->add_option("--out", sim_out, "Output CSV path");

    // estimate
    auto* est = app.add_subcommand("estimate", "Estimate (m, d) from a trajectory CSV");
    std::string est_algo, est_input, est_constants, est_out;
    std::uint64_t est_seed = 0;
    est->add_option("--algo", est_algo, "Estimator")
        ->required()
        ->check(CLI::IsMember({"sindy", "pinn", "bpinn"}));
    est->add_option("--input", est_input, "Trajectory CSV")->required();
    est->add_option("--scenario-constants", est_constants,
                    "JSON file with P, B and optional m_true/d_true")
        ->required();
    est->add_option("--seed", est_seed, "Training seed");
    est->add_option("--out", est_out, "Write the JSON estimate here instead of stdout");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run a noise or length sweep");
    std::string sweep_kind, sweep_config, sweep_out_dir = "sweep-out";
    sweep->add_option("--kind", sweep_kind, "Sweep kind")
        ->required()
        ->check(CLI::IsMember({"noise", "length"}));
    sweep->add_option("--config", sweep_config, "Experiment config JSON")->required();
    sweep->add_option("--out-dir", sweep_out_dir, "Output directory");

    // report
    auto* report = app.add_subcommand("report", "Emit result tables from sweep records");
    std::string report_in, report_format = "csv";
    report->add_option("--in", report_in, "Directory containing records.json")->required();
    report->add_option("--format", report_format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // bad arguments are validation failures; --help stays a clean exit
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (sim->parsed()) {
        const swingid::Scenario sc = swingid::preset(sim_scenario);
        swingid::Trajectory traj = swingid::simulate(sc, sim_duration, sim_rate);
        if (sim_noise > 0.0)
            traj = swingid::add_noise(traj, swingid::NoiseSpec{sim_noise, sim_seed});
        swingid::write_csv_file(traj, sim_out);
    } else if (est->parsed()) {
        const swingid::Trajectory traj = swingid::read_csv_file(est_input);
        const ScenarioConstants c = load_constants(est_constants);
        std::string json;
        if (est_algo == "sindy") {
            json = swingid::estimate_sindy(traj, c.P, c.B).to_json();
        } else if (est_algo == "pinn") {
            swingid::PinnConfig cfg;
            cfg.seed = est_seed;
            json = swingid::train_pinn(traj, c.P, c.B, cfg).to_json();
        } else {
            swingid::BpinnConfig cfg;
            cfg.seed = est_seed;
            std::optional<std::pair<double, double>> truth;
            if (c.m_true && c.d_true) truth = std::make_pair(*c.m_true, *c.d_true);
            json = swingid::run_bpinn(traj, c.P, c.B, cfg, truth).to_json();
        }
        if (est_out.empty())
            std::cout << json << '\n';
        else
            write_text(est_out, json);
    } else if (sweep->parsed()) {
        const swingid::ExperimentSpec spec = swingid::ExperimentSpec::from_json_file(sweep_config);
        const auto records = sweep_kind == "noise" ? swingid::run_noise_sweep(spec)
                                                   : swingid::run_length_sweep(spec);
        std::error_code ec;
        std::filesystem::create_directories(sweep_out_dir, ec);
        write_text((std::filesystem::path(sweep_out_dir) / "records.json").string(),
                   swingid::records_to_json(records));
        write_text((std::filesystem::path(sweep_out_dir) / "config.json").string(),
                   spec.to_json());
    } else if (report->parsed()) {
        const auto records = swingid::records_from_json_file(
            (std::filesystem::path(report_in) / "records.json").string());
        swingid::emit_report(records, report_in, report_format);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const swingid::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const swingid::NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
