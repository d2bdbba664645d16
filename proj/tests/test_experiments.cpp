#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "otfs/experiments.hpp"

using namespace otfs;

namespace {

nlohmann::json small_fig4_spec() {
    return nlohmann::json{{"id", "fig4_near_opt"},
                          {"seed", 5},
                          {"realizations", 3},
                          {"system", {{"M", 16}, {"N", 2}, {"K", 2}}},
                          {"profile", {{"num_paths", 3}}},
                          {"sweep", {{"Qh", {2, 4}}, {"rho_q", 0.1}}}};
}

}  // namespace

TEST_CASE("fixed seed runs are bit-identical") {
    ExperimentSpec spec = ExperimentSpec::from_json(small_fig4_spec());
    spec.threads = 1;
    const std::string a = to_csv(run_experiment(spec));
    const std::string b = to_csv(run_experiment(spec));
    CHECK(a == b);
}

TEST_CASE("results are independent of the worker count") {
    ExperimentSpec spec = ExperimentSpec::from_json(small_fig4_spec());
    spec.realizations = 6;
    spec.threads = 1;
    const std::string serial = to_csv(run_experiment(spec));
    spec.threads = 4;
    const std::string parallel = to_csv(run_experiment(spec));
    CHECK(serial == parallel);
}

TEST_CASE("empty table serializes to a header-only CSV") {
    ResultTable t;
    t.columns = {"a", "b"};
    CHECK(to_csv(t) == "a,b\n");
}

TEST_CASE("emitted JSON round-trips the table") {
    ExperimentSpec spec = ExperimentSpec::from_json(small_fig4_spec());
    spec.threads = 2;
    ResultTable t = run_experiment(spec);
    const std::string dir = "emit_test_out";
    emit(t, dir, spec.id);

    std::ifstream in(dir + "/" + spec.id + ".json");
    REQUIRE(in.good());
    nlohmann::json j;
    in >> j;
    CHECK(j["columns"].get<std::vector<std::string>>() == t.columns);
    const auto rows = j["rows"].get<std::vector<std::vector<double>>>();
    REQUIRE(rows.size() == t.rows.size());
    for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c < rows[r].size(); ++c)
            CHECK(rows[r][c] == t.rows[r][c]);
    CHECK(j["meta"]["seed"] == 5);
    std::filesystem::remove_all(dir);
}

TEST_CASE("CSV column count matches the metric schema") {
    nlohmann::json j{{"id", "fig5_se_vs_doppler"},
                     {"seed", 2},
                     {"realizations", 2},
                     {"system", {{"M", 16}, {"N", 2}, {"K", 2}, {"Qh", 2}, {"Qv", 2}}},
                     {"profile", {{"num_paths", 2}}},
                     {"sweep", {{"nu_max_hz", {0, 800}}}},
                     {"extra", {{"ofdm_frames", 2}}}};
    ExperimentSpec spec = ExperimentSpec::from_json(j);
    spec.threads = 2;
    ResultTable t = run_experiment(spec);
    REQUIRE(t.columns.size() == 7);
    for (const auto& row : t.rows) CHECK(row.size() == t.columns.size());
    // Every averaged metric carries a standard-error column.
    CHECK(t.columns[2] == "se_lcd");
    CHECK(t.columns[4] == "se_mmse_sic");
    CHECK(t.columns[6] == "se_ofdm");
}

TEST_CASE("spec validation") {
    nlohmann::json j = small_fig4_spec();
    j["sweep"]["Qh"] = nlohmann::json::array();
    CHECK_THROWS(ExperimentSpec::from_json(j));

    j = small_fig4_spec();
    j["realizations"] = 0;
    CHECK_THROWS(ExperimentSpec::from_json(j));

    j = small_fig4_spec();
    j["id"] = "not_an_experiment";
    ExperimentSpec spec = ExperimentSpec::from_json(j);
    CHECK_THROWS(run_experiment(spec));
}

TEST_CASE("ser_run reports calibrated statistics") {
    nlohmann::json j{{"id", "ser_run"},
                     {"seed", 3},
                     {"realizations", 1},
                     {"system", {{"M", 16}, {"N", 4}, {"Qh", 3}, {"Qv", 3}}},
                     {"sweep", {{"rho_q_db", {6}}}},
                     {"extra", {{"symbols", 20000}}}};
    ExperimentSpec spec = ExperimentSpec::from_json(j);
    spec.threads = 2;
    ResultTable t = run_experiment(spec);
    REQUIRE(t.rows.size() == 1);
    const double z = t.rows[0][5];
    CHECK(std::abs(z) < 4.0);  // statistically consistent with the analytic SER
}
