#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "otfs/config.hpp"

namespace otfs {

// Config-driven Monte-Carlo experiment. The id selects the procedure and the
// default sweep; "system"/"profile"/"sweep" keys override per run.
struct ExperimentSpec {
    std::string id;
    uint64_t seed = 1;
    int realizations = 20;
    int threads = 0;  // 0: OTFS_SIM_THREADS env, then hardware
    SystemConfig sys;
    ProfileConfig prof;
    nlohmann::json sweep;
    nlohmann::json extra;

    static ExperimentSpec from_json(const nlohmann::json& j);
    static ExperimentSpec load(const std::string& path);
};

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    nlohmann::json meta;
};

ResultTable run_experiment(const ExperimentSpec& spec);

// Writes <id>.csv, <id>.json and <id>.dat (gnuplot) into out_dir.
void emit(const ResultTable& table, const std::string& out_dir, const std::string& id);

std::string to_csv(const ResultTable& table);

// Invariant checks behind the `verify` CLI subcommand: prints one pass/fail
// line per check, returns the number of failures.
int run_oracle_suite(int threads, bool print = true);

}  // namespace otfs
