// qperceptron: response curves, ramp benchmark, network training and gate synthesis.

#include "qperceptron/qperceptron.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qp = qperceptron;

namespace {

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

void require(bool ok, const std::string& msg)
{
    if (!ok) {
        throw UsageError(msg);
    }
}

std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out.precision(17);
    return out;
}

struct ResponseArgs {
    std::string schedule = "faquad";
    double tf = 10;
    double omega0 = 100;
    double xmax = 10;
    std::size_t points = 201;
    double epsilon_ctrl = 0;
    std::string out;
};

int cmd_response(const ResponseArgs& a, unsigned threads)
{
    require(a.schedule == "faquad" || a.schedule == "linear", "--schedule must be linear or faquad");
    require(a.tf > 0 && std::isfinite(a.tf), "--tf must be positive");
    require(a.omega0 > 1 && std::isfinite(a.omega0), "--omega0 must exceed the final field 1");
    require(a.xmax > 0 && std::isfinite(a.xmax), "--xmax must be positive");
    require(a.points >= 2, "--points must be at least 2");
    require(a.epsilon_ctrl >= 0 && std::isfinite(a.epsilon_ctrl), "--epsilon-ctrl must be nonnegative");
    require(a.epsilon_ctrl == 0 || a.schedule == "faquad", "--epsilon-ctrl perturbs the faquad schedule only");

    auto schedule = a.schedule == "linear"
                        ? qp::linear_schedule(a.omega0, 1.0, a.tf)
                        : qp::faquad_schedule(a.omega0, 1.0, a.tf, qp::optimal_design_field(1.0));
    if (a.epsilon_ctrl > 0) {
        schedule = qp::perturbed_schedule(schedule, a.epsilon_ctrl);
    }
    const auto grid = qp::symmetric_grid(a.xmax, a.points);
    const auto curve = qp::response_curve(schedule, grid, threads);
    auto out = open_output(a.out);
    out << qp::kUnitsComment << '\n' << "x,p_excite,g_ideal\n";
    for (const auto& p : curve) {
        out << p.x << ',' << p.p_excite << ',' << qp::eval_f(qp::ActivationKind::algebraic(), p.x) << '\n';
    }
    return 0;
}

struct BenchmarkArgs {
    double tf_min = 0.1;
    double tf_max = 50;
    std::size_t tf_points = 12;
    std::string out;
};

int cmd_benchmark(const BenchmarkArgs& a, unsigned threads)
{
    require(a.tf_points >= 1, "--tf-points must be at least 1 (empty grid)");
    require(a.tf_min > 0 && std::isfinite(a.tf_min), "--tf-min must be positive");
    require(a.tf_max >= a.tf_min && std::isfinite(a.tf_max), "--tf-max must be at least --tf-min");
    require(a.tf_points == 1 || a.tf_max > a.tf_min, "several --tf-points need --tf-max > --tf-min");

    std::vector<double> grid(a.tf_points);
    for (std::size_t i = 0; i < a.tf_points; ++i) {
        const double s = a.tf_points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(a.tf_points - 1);
        grid[i] = a.tf_min * std::pow(a.tf_max / a.tf_min, s);
    }
    qp::BenchmarkParams params;
    params.threads = threads;
    const auto report = qp::benchmark_ramps(grid, params);
    {
        auto out = open_output(a.out);
        out << qp::kUnitsComment << '\n';
        qp::write_benchmark_csv(out, report);
    }
    if (!report.fit) {
        std::cerr << "error: stretched-exponential fit needs at least 4 usable points\n";
        return 1;
    }
    std::cout << qp::fit_to_json(*report.fit).dump() << '\n';
    return 0;
}

struct TrainArgs {
    std::size_t bits = 3;
    std::size_t hidden = 4;
    std::size_t iters = 5000;
    std::size_t restarts = 10;
    std::uint64_t seed = 1;
    std::string out;
};

std::filesystem::path model_path(const std::filesystem::path& report)
{
    auto p = report;
    p.replace_filename(report.stem().string() + ".model.json");
    return p;
}

int cmd_train(const TrainArgs& a)
{
    require(a.bits >= 2 && a.bits <= 8, "--bits must lie in [2, 8]");
    require(a.restarts >= 1, "--restarts must be at least 1");
    require(a.bits + a.hidden + 1 <= qp::kDefaultMaxQubits, "network exceeds the register size cap");

    const auto data = qp::prime_dataset(a.bits);
    std::vector<std::size_t> layers;
    if (a.hidden > 0) {
        layers.push_back(a.hidden);
    }
    layers.push_back(1);
    qp::TrainConfig config;
    config.max_iters = a.iters;
    config.restarts = a.restarts;
    config.seed = a.seed;
    const auto net0 = qp::random_initialization(qp::NetworkSpec::layered(a.bits, layers), config.init_scale,
                                                qp::restart_seed(a.seed, 0));
    const auto report = qp::train(net0, data, config);

    const std::filesystem::path report_path(a.out);
    {
        auto out = open_output(report_path.string());
        out << qp::train_report_to_json(report).dump(2) << '\n';
    }
    {
        auto out = open_output(model_path(report_path).string());
        out << qp::network_to_json(report.final_params).dump(2) << '\n';
    }
    std::cerr << "accuracy " << report.accuracy << " after restart " << report.restart << '\n';
    return 0;
}

struct SynthesizeArgs {
    std::string target = "rect";
    double m1 = 0;
    double m2 = 2;
    std::size_t cycles = 2;
    std::string out;
};

int cmd_synthesize(const SynthesizeArgs& a, unsigned threads)
{
    require(a.target == "rect" || a.target == "peak", "--target must be rect or peak");
    require(std::isfinite(a.m1) && std::isfinite(a.m2), "--m1 and --m2 must be finite");
    require(a.m1 < a.m2, "--m1 must be smaller than --m2");
    require(a.cycles >= 1, "--cycles must be at least 1");

    const bool rect = a.target == "rect";
    const auto target = rect ? qp::TargetResponse::rectangle(a.m1, a.m2)
                             : qp::TargetResponse::peak(0.5 * (a.m1 + a.m2), 0.5 * (a.m2 - a.m1));
    const double span = a.m2 - a.m1;
    const auto grid = rect ? qp::rectangle_grid(a.m1, a.m2) : qp::linear_grid(a.m1 - span, a.m2 + span, 61);
    qp::SynthesisOptions opt;
    opt.threads = threads;
    const auto result = qp::synthesize(target, a.cycles, grid, opt);

    auto out = open_output(a.out);
    out << "# x: weighted count of excited controls; angles in rad\n"
        << "x,target_angle,fitted_angle,fitted_excitation\n";
    for (double x : grid) {
        out << x << ',' << target.angle(x) << ',' << qp::composition_angle(result.spec, x) << ','
            << qp::composition_excitation(result.spec, x) << '\n';
    }
    nlohmann::json summary = {{"residual", result.residual}, {"converged", result.converged}};
    for (const auto& c : result.spec.cycles) {
        summary["cycles"].push_back({{"w", c.w}, {"theta", c.theta}, {"orientation", c.orientation}});
    }
    std::cout << summary.dump() << '\n';
    if (!result.converged) {
        std::cerr << "warning: fit residual " << result.residual << " rad is above the convergence threshold\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Quantum perceptron toolkit"};
    app.require_subcommand(1);
    unsigned threads = qp::default_thread_count();
    app.add_option("--threads", threads, "worker threads (0 = all cores)")->capture_default_str();

    ResponseArgs ra;
    auto* response = app.add_subcommand("response", "perceptron response curve of one passage");
    response->add_option("--schedule", ra.schedule, "linear or faquad")->capture_default_str();
    response->add_option("--tf", ra.tf, "protocol duration")->capture_default_str();
    response->add_option("--omega0", ra.omega0, "initial transverse field")->capture_default_str();
    response->add_option("--xmax", ra.xmax, "largest |x| on the grid")->capture_default_str();
    response->add_option("--points", ra.points, "grid points")->capture_default_str();
    response->add_option("--epsilon-ctrl", ra.epsilon_ctrl, "control error amplitude")->capture_default_str();
    response->add_option("--out", ra.out, "output CSV")->required();
    response->add_option("--threads", threads, "worker threads (0 = all cores)");

    BenchmarkArgs ba;
    auto* benchmark = app.add_subcommand("benchmark", "average infidelity of linear and FAQUAD ramps");
    benchmark->add_option("--tf-min", ba.tf_min, "shortest duration")->capture_default_str();
    benchmark->add_option("--tf-max", ba.tf_max, "longest duration")->capture_default_str();
    benchmark->add_option("--tf-points", ba.tf_points, "log-spaced durations")->capture_default_str();
    benchmark->add_option("--out", ba.out, "output CSV")->required();
    benchmark->add_option("--threads", threads, "worker threads (0 = all cores)");

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "train a prime classifier");
    train->add_option("--bits", ta.bits, "input bits")->capture_default_str();
    train->add_option("--hidden", ta.hidden, "hidden perceptrons")->capture_default_str();
    train->add_option("--iters", ta.iters, "gradient steps per restart")->capture_default_str();
    train->add_option("--restarts", ta.restarts, "random restarts")->capture_default_str();
    train->add_option("--seed", ta.seed, "initialization seed")->capture_default_str();
    train->add_option("--out", ta.out, "report JSON; the model goes to <stem>.model.json")->required();
    train->add_option("--threads", threads, "worker threads (0 = all cores)");

    SynthesizeArgs sa;
    auto* synth = app.add_subcommand("synthesize", "fit a composed conditional rotation");
    synth->add_option("--target", sa.target, "rect or peak")->capture_default_str();
    synth->add_option("--m1", sa.m1, "lower threshold")->capture_default_str();
    synth->add_option("--m2", sa.m2, "upper threshold")->capture_default_str();
    synth->add_option("--cycles", sa.cycles, "number of passages")->capture_default_str();
    synth->add_option("--out", sa.out, "output CSV")->required();
    synth->add_option("--threads", threads, "worker threads (0 = all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*response) {
            return cmd_response(ra, threads);
        }
        if (*benchmark) {
            return cmd_benchmark(ba, threads);
        }
        if (*train) {
            return cmd_train(ta);
        }
        return cmd_synthesize(sa, threads);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
