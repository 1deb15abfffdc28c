// Scenario front end for the quantum-trajectory lab.
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qtraj/lab/runner.hpp"

namespace {

using namespace qtraj;

int exit_code_for(const Error& e)
{
    switch (e.kind()) {
        case ErrorKind::Config:
        case ErrorKind::NotFound:
        case ErrorKind::InvalidArgument:
        case ErrorKind::InvalidCoefficients:
        case ErrorKind::Domain:
            return 2;
        default:
            return 3;
    }
}

struct Common
{
    std::string config;
    std::string out = "runs";
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

void add_common(CLI::App* cmd, Common& c, bool config_required)
{
    auto* opt = cmd->add_option("--config", c.config, "scenario file (YAML)");
    if (config_required)
        opt->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", c.out, "registry root for artifacts and run records")->capture_default_str();
    cmd->add_option("--seed", c.seed, "seed for randomized check points (overrides the file)");
    cmd->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"quantum trajectory lab: Bohm, Floyd and classical trajectories in one dimension"};
    app.require_subcommand(1);

    Common common;
    std::map<CLI::App*, lab::Task> tasks;
    for (auto t : {lab::Task::Solve, lab::Task::Microstate, lab::Task::DTdESweep, lab::Task::Trajectory,
                   lab::Task::Compare, lab::Task::BeatScan}) {
        auto* cmd = app.add_subcommand(lab::to_string(t), std::string("run a ") + lab::to_string(t) + " scenario");
        add_common(cmd, common, true);
        tasks[cmd] = t;
    }

    std::string run_id;
    auto* describe = app.add_subcommand("describe", "describe a scenario file or a stored run");
    add_common(describe, common, false);
    describe->add_option("run", run_id, "run id in the registry under --out");

    std::string kind;
    auto* exporter = app.add_subcommand("export", "write tidy plot data for a stored run");
    add_common(exporter, common, false);
    exporter->add_option("run", run_id, "run id")->required();
    exporter->add_option("--kind", kind, "trajectory, field or sweep")->required();

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (const auto& [cmd, task] : tasks) {
            if (!cmd->parsed())
                continue;
            const auto cfg = lab::load_scenario(common.config, task);
            lab::RunOptions opt;
            opt.out = cfg.output.empty() || cmd->count("--out") ? common.out : cfg.output;
            opt.seed = common.seed;
            opt.threads = common.threads;
            opt.events = &std::cerr;
            const auto rec = lab::run_scenario(cfg, opt);
            std::cout << rec.id << "\n";
            for (const auto& a : rec.artifacts)
                std::cout << "  " << a.kind << ": " << (opt.out / a.path).string() << "\n";
            return 0;
        }
        if (describe->parsed()) {
            if (!common.config.empty()) {
                lab::describe_config(lab::load_scenario(common.config), std::cout);
                return 0;
            }
            if (run_id.empty()) {
                const lab::Registry reg(common.out);
                for (const auto& line : reg.index())
                    std::cout << line["id"].get<std::string>() << "  " << line["created"].get<std::string>() << "\n";
                return 0;
            }
            lab::describe_run(lab::Registry(common.out), run_id, std::cout);
            return 0;
        }
        if (exporter->parsed()) {
            for (const auto& p : lab::export_plot_data(lab::Registry(common.out), run_id, kind))
                std::cout << p.string() << "\n";
            return 0;
        }
    }
    catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
