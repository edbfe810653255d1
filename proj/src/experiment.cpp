#include "swingid/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "swingid/sindy.hpp"

namespace swingid {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t double_bits(double v) {
    std::uint64_t b;
    static_assert(sizeof(b) == sizeof(v));
    std::memcpy(&b, &v, sizeof(b));
    return b;
}

}  // namespace

std::uint64_t cell_seed(std::uint64_t base_seed, const std::string& scenario, double K,
                        double T, const std::string& algorithm, int run) {
    std::uint64_t h = splitmix64(base_seed);
    h = splitmix64(h ^ fnv1a(scenario));
    h = splitmix64(h ^ double_bits(K));
    h = splitmix64(h ^ double_bits(T));
    h = splitmix64(h ^ fnv1a(algorithm));
    h = splitmix64(h ^ static_cast<std::uint64_t>(run));
    return h;
}

void ExperimentSpec::validate() const {
    if (scenarios.empty()) throw ValidationError("ExperimentSpec: empty scenario list");
    if (K_grid.empty()) throw ValidationError("ExperimentSpec: empty K_grid");
    if (T_grid.empty()) throw ValidationError("ExperimentSpec: empty T_grid");
    if (n_runs < 1) throw ValidationError("ExperimentSpec: n_runs must be >= 1");
    if (sample_rate <= 0.0) throw ValidationError("ExperimentSpec: sample_rate must be positive");
    for (const auto& s : scenarios) preset(s);  // throws on unknown names
    for (const auto& a : algorithms)
        if (a != "sindy" && a != "pinn" && a != "bpinn")
            throw ValidationError("ExperimentSpec: unknown algorithm '" + a + "'");
    for (double k : K_grid)
        if (k < 0.0) throw ValidationError("ExperimentSpec: negative noise level");
    for (double t : T_grid)
        if (t <= 0.0) throw ValidationError("ExperimentSpec: nonpositive trajectory length");
}

ExperimentSpec ExperimentSpec::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("ExperimentSpec: bad JSON: ") + e.what());
    }
    ExperimentSpec spec;
    if (j.contains("scenarios")) spec.scenarios = j["scenarios"].get<std::vector<std::string>>();
    if (j.contains("K_grid")) spec.K_grid = j["K_grid"].get<std::vector<double>>();
    if (j.contains("T_grid")) spec.T_grid = j["T_grid"].get<std::vector<double>>();
    if (j.contains("n_runs")) spec.n_runs = j["n_runs"].get<int>();
    if (j.contains("algorithms"))
        spec.algorithms = j["algorithms"].get<std::vector<std::string>>();
    if (j.contains("base_seed")) spec.base_seed = j["base_seed"].get<std::uint64_t>();
    if (j.contains("sample_rate")) spec.sample_rate = j["sample_rate"].get<double>();
    if (j.contains("workers")) spec.workers = j["workers"].get<int>();
    if (j.contains("average_eps_per_run"))
        spec.average_eps_per_run = j["average_eps_per_run"].get<bool>();
    if (j.contains("pinn")) {
        const auto& p = j["pinn"];
        if (p.contains("epochs")) spec.pinn.epochs = p["epochs"].get<int>();
        if (p.contains("learning_rate")) spec.pinn.learning_rate = p["learning_rate"].get<double>();
        if (p.contains("learning_rate_final"))
            spec.pinn.learning_rate_final = p["learning_rate_final"].get<double>();
        if (p.contains("w_data")) spec.pinn.w_data = p["w_data"].get<double>();
        if (p.contains("w_phys")) spec.pinn.w_phys = p["w_phys"].get<double>();
        if (p.contains("hidden")) spec.pinn.hidden = p["hidden"].get<int>();
    }
    if (j.contains("bpinn")) {
        const auto& b = j["bpinn"];
        if (b.contains("n_particles")) spec.bpinn.n_particles = b["n_particles"].get<int>();
        if (b.contains("iterations")) spec.bpinn.iterations = b["iterations"].get<int>();
        if (b.contains("stepsize")) spec.bpinn.stepsize = b["stepsize"].get<double>();
        if (b.contains("stepsize_final"))
            spec.bpinn.stepsize_final = b["stepsize_final"].get<double>();
        if (b.contains("hidden")) spec.bpinn.hidden = b["hidden"].get<int>();
    }
    spec.validate();
    return spec;
}

ExperimentSpec ExperimentSpec::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json(text);
}

std::string ExperimentSpec::to_json() const {
    nlohmann::json j;
    j["scenarios"] = scenarios;
    j["K_grid"] = K_grid;
    j["T_grid"] = T_grid;
    j["n_runs"] = n_runs;
    j["algorithms"] = algorithms;
    j["base_seed"] = base_seed;
    j["sample_rate"] = sample_rate;
    j["workers"] = workers;
    j["average_eps_per_run"] = average_eps_per_run;
    j["pinn"] = {{"epochs", pinn.epochs},
                 {"learning_rate", pinn.learning_rate},
                 {"learning_rate_final", pinn.learning_rate_final},
                 {"w_data", pinn.w_data},
                 {"w_phys", pinn.w_phys},
                 {"hidden", pinn.hidden}};
    j["bpinn"] = {{"n_particles", bpinn.n_particles},
                  {"iterations", bpinn.iterations},
                  {"stepsize", bpinn.stepsize},
                  {"stepsize_final", bpinn.stepsize_final},
                  {"hidden", bpinn.hidden}};
    return j.dump(2);
}

Eigen::Vector2d percent_error(const Eigen::Vector2d& lambda_hat,
                              const Eigen::Vector2d& lambda_true) {
    if (lambda_true(0) == 0.0 || lambda_true(1) == 0.0)
        throw ValidationError("percent_error: true parameter is zero");
    return ((lambda_hat - lambda_true).cwiseQuotient(lambda_true)).cwiseAbs() * 100.0;
}

namespace {

struct Cell {
    std::string scenario;
    double K;
    double T;
    std::string algorithm;
};

ResultRecord run_cell(const Cell& cell, const ExperimentSpec& spec) {
    ResultRecord rec;
    rec.scenario = cell.scenario;
    rec.K = cell.K;
    rec.T = cell.T;
    rec.algorithm = cell.algorithm;
    rec.seed = cell_seed(spec.base_seed, cell.scenario, cell.K, cell.T, cell.algorithm, 0);
    try {
        const Scenario sc = preset(cell.scenario);
        const Trajectory clean = simulate(sc, cell.T, spec.sample_rate);
        const Eigen::Vector2d lambda_true(sc.params.m, sc.params.d);

        double sum_m = 0.0, sum_d = 0.0, sum_std_m = 0.0, sum_std_d = 0.0;
        Eigen::Vector2d sum_eps = Eigen::Vector2d::Zero();
        double total_time = 0.0;
        for (int run = 0; run < spec.n_runs; ++run) {
            const std::uint64_t seed =
                cell_seed(spec.base_seed, cell.scenario, cell.K, cell.T, cell.algorithm, run);
            Trajectory data = clean;
            if (cell.K > 0.0) data = add_noise(clean, NoiseSpec{cell.K, seed});

            const auto t_start = std::chrono::steady_clock::now();
            double m_hat = 0.0, d_hat = 0.0;
            if (cell.algorithm == "sindy") {
                const SindyEstimate est = estimate_sindy(data, sc.params.P, sc.params.B);
                m_hat = est.m_hat;
                d_hat = est.d_hat;
            } else if (cell.algorithm == "pinn") {
                PinnConfig cfg = spec.pinn;
                cfg.seed = seed;
                const PinnResult res = train_pinn(data, sc.params.P, sc.params.B, cfg);
                m_hat = res.m_hat;
                d_hat = res.d_hat;
            } else {
                BpinnConfig cfg = spec.bpinn;
                cfg.seed = seed;
                const PosteriorSummary post =
                    run_bpinn(data, sc.params.P, sc.params.B, cfg,
                              std::make_pair(sc.params.m, sc.params.d));
                m_hat = post.m_mean;
                d_hat = post.d_mean;
                sum_std_m += post.m_std;
                sum_std_d += post.d_std;
            }
            total_time += std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                        t_start)
                              .count();
            sum_m += m_hat;
            sum_d += d_hat;
            sum_eps += percent_error(Eigen::Vector2d(m_hat, d_hat), lambda_true);
        }
        const double inv = 1.0 / spec.n_runs;
        if (spec.average_eps_per_run) {
            rec.eps_m = sum_eps(0) * inv;
            rec.eps_d = sum_eps(1) * inv;
        } else {
            const Eigen::Vector2d eps =
                percent_error(Eigen::Vector2d(sum_m * inv, sum_d * inv), lambda_true);
            rec.eps_m = eps(0);
            rec.eps_d = eps(1);
        }
        if (cell.algorithm == "bpinn") {
            rec.tau_m = sum_std_m * inv * 100.0 / lambda_true(0);
            rec.tau_d = sum_std_d * inv * 100.0 / lambda_true(1);
        }
        rec.runtime_s = total_time * inv;
    } catch (const std::exception& e) {
        rec.error = e.what();
        rec.eps_m = rec.eps_d = std::nan("");
    }
    return rec;
}

std::vector<ResultRecord> run_cells(std::vector<Cell> cells, const ExperimentSpec& spec) {
    std::vector<ResultRecord> records(cells.size());
    unsigned workers = spec.workers > 0 ? static_cast<unsigned>(spec.workers)
                                        : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, cells.size() == 0 ? 1 : cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= cells.size()) return;
            records[idx] = run_cell(cells[idx], spec);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::sort(records.begin(), records.end(), [](const ResultRecord& a, const ResultRecord& b) {
        return std::tie(a.scenario, a.K, a.T, a.algorithm) <
               std::tie(b.scenario, b.K, b.T, b.algorithm);
    });
    return records;
}

}  // namespace

std::vector<ResultRecord> run_noise_sweep(const ExperimentSpec& spec) {
    spec.validate();
    const double T = spec.T_grid.front();
    std::vector<Cell> cells;
    for (const auto& s : spec.scenarios)
        for (double K : spec.K_grid)
            for (const auto& a : spec.algorithms) cells.push_back({s, K, T, a});
    return run_cells(std::move(cells), spec);
}

std::vector<ResultRecord> run_length_sweep(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.K_grid.size() != spec.T_grid.size())
        throw ValidationError("run_length_sweep: K_grid and T_grid must be paired");
    std::vector<Cell> cells;
    for (const auto& s : spec.scenarios)
        for (std::size_t i = 0; i < spec.K_grid.size(); ++i)
            for (const auto& a : spec.algorithms)
                cells.push_back({s, spec.K_grid[i], spec.T_grid[i], a});
    return run_cells(std::move(cells), spec);
}

Reconstruction reconstruct(const Scenario& truth, double m_hat, double d_hat, double T,
                           double sample_rate) {
    if (m_hat <= 0.0 || d_hat < 0.0)
        throw ValidationError("reconstruct: estimated parameters out of range");
    const Trajectory ref = simulate(truth, T, sample_rate);
    Scenario est = truth;
    est.params.m = m_hat;
    est.params.d = d_hat;

    Reconstruction rec;
    rec.traj = simulate(est, T, sample_rate);
    double acc_d = 0.0, acc_o = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double ed = rec.traj.states[i].delta - ref.states[i].delta;
        const double eo = rec.traj.states[i].omega - ref.states[i].omega;
        acc_d += ed * ed;
        acc_o += eo * eo;
    }
    const auto n = static_cast<double>(ref.size());
    rec.rmse_delta = std::sqrt(acc_d / n);
    rec.rmse_omega = std::sqrt(acc_o / n);
    return rec;
}

namespace {

std::string fmt_opt(const std::optional<double>& v) {
    if (!v) return "";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", *v);
    return buf;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string records_to_json(const std::vector<ResultRecord>& records) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records) {
        nlohmann::json j;
        j["scenario"] = r.scenario;
        j["K"] = r.K;
        j["T"] = r.T;
        j["algorithm"] = r.algorithm;
        j["eps_m"] = std::isfinite(r.eps_m) ? nlohmann::json(r.eps_m) : nlohmann::json();
        j["eps_d"] = std::isfinite(r.eps_d) ? nlohmann::json(r.eps_d) : nlohmann::json();
        if (r.tau_m) j["tau_m"] = *r.tau_m;
        if (r.tau_d) j["tau_d"] = *r.tau_d;
        j["runtime_s"] = r.runtime_s;
        j["seed"] = r.seed;
        if (!r.error.empty()) j["error"] = r.error;
        arr.push_back(std::move(j));
    }
    return arr.dump(2);
}

std::vector<ResultRecord> records_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open records file: " + path);
    nlohmann::json arr;
    try {
        in >> arr;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("records: bad JSON: ") + e.what());
    }
    std::vector<ResultRecord> records;
    for (const auto& j : arr) {
        ResultRecord r;
        r.scenario = j.at("scenario").get<std::string>();
        r.K = j.at("K").get<double>();
        r.T = j.at("T").get<double>();
        r.algorithm = j.at("algorithm").get<std::string>();
        r.eps_m = j.at("eps_m").is_null() ? std::nan("") : j.at("eps_m").get<double>();
        r.eps_d = j.at("eps_d").is_null() ? std::nan("") : j.at("eps_d").get<double>();
        if (j.contains("tau_m")) r.tau_m = j["tau_m"].get<double>();
        if (j.contains("tau_d")) r.tau_d = j["tau_d"].get<double>();
        r.runtime_s = j.at("runtime_s").get<double>();
        r.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("error")) r.error = j["error"].get<std::string>();
        records.push_back(std::move(r));
    }
    return records;
}

void emit_report(const std::vector<ResultRecord>& records, const std::string& out_dir,
                 const std::string& format) {
    if (records.empty()) throw ValidationError("emit_report: no records");
    if (format != "csv" && format != "json")
        throw ValidationError("emit_report: format must be csv or json");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);

    if (format == "csv") {
        std::ofstream out(std::filesystem::path(out_dir) / "results.csv");
        if (!out) throw ValidationError("emit_report: cannot write results.csv");
        out << "scenario,K,T,algorithm,eps_m,tau_m,eps_d,tau_d,runtime_s,seed\n";
        for (const auto& r : records) {
            out << r.scenario << ',' << fmt(r.K) << ',' << fmt(r.T) << ',' << r.algorithm
                << ',' << fmt(r.eps_m) << ',' << fmt_opt(r.tau_m) << ',' << fmt(r.eps_d)
                << ',' << fmt_opt(r.tau_d) << ',' << fmt(r.runtime_s) << ',' << r.seed
                << '\n';
        }
    } else {
        std::ofstream out(std::filesystem::path(out_dir) / "results.json");
        if (!out) throw ValidationError("emit_report: cannot write results.json");
        out << records_to_json(records) << '\n';
    }

    // tau-vs-eps scatter data, one row per (bpinn cell, parameter)
    std::ofstream scatter(std::filesystem::path(out_dir) / "tau_vs_eps.csv");
    if (!scatter) throw ValidationError("emit_report: cannot write tau_vs_eps.csv");
    scatter << "tau,eps\n";
    for (const auto& r : records)
        if (r.algorithm == "bpinn" && r.tau_m && r.error.empty())
            scatter << fmt(*r.tau_m) << ',' << fmt(r.eps_m) << '\n';
    for (const auto& r : records)
        if (r.algorithm == "bpinn" && r.tau_d && r.error.empty())
            scatter << fmt(*r.tau_d) << ',' << fmt(r.eps_d) << '\n';
}

}  // namespace swingid
