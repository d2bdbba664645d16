#include <CLI11.hpp>

#include <cstdio>
#include <exception>

#include "otfs/experiments.hpp"
#include "otfs/parallel.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Delay-Doppler multi-user massive MIMO link-level simulator"};
    app.require_subcommand(1);

    std::string spec_path, out_dir = "out";
    int threads = 0;
    long long seed_override = -1;

    auto* run = app.add_subcommand("run", "Run an experiment spec");
    run->add_option("--spec", spec_path, "Experiment spec JSON")->required();
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--threads", threads, "Worker threads (default: env/hardware)");
    run->add_option("--seed", seed_override, "Override the spec master seed");

    auto* verify = app.add_subcommand("verify", "Run the oracle suite; exit 0 iff all pass");
    verify->add_option("--threads", threads, "Worker threads (default: env/hardware)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            otfs::ExperimentSpec spec = otfs::ExperimentSpec::load(spec_path);
            if (threads > 0) spec.threads = threads;
            if (seed_override >= 0) spec.seed = static_cast<uint64_t>(seed_override);
            otfs::ResultTable table = otfs::run_experiment(spec);
            otfs::emit(table, out_dir, spec.id);
            std::printf("%s", otfs::to_csv(table).c_str());
            std::printf("wrote %s/%s.{csv,json,dat}\n", out_dir.c_str(), spec.id.c_str());
        } else if (verify->parsed()) {
            const int failures = otfs::run_oracle_suite(otfs::resolve_threads(threads));
            std::printf("%s (%d failure%s)\n", failures == 0 ? "ALL CHECKS PASSED" : "CHECKS FAILED",
                        failures, failures == 1 ? "" : "s");
            return failures == 0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
