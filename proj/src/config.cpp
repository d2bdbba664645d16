#include "otfs/config.hpp"

#include <fstream>

namespace otfs {

void SystemConfig::validate() const {
    require(M >= 1 && N >= 1, "M and N must be >= 1");
    require(Qh >= 1 && Qv >= 1, "Qh and Qv must be >= 1");
    require(K >= 1, "K must be >= 1");
    require(delta_f > 0 && tau_max >= 0, "delta_f must be positive, tau_max non-negative");
    require(rho > 0 || rho == 0, "rho must be non-negative");
    require(N0 > 0, "N0 must be positive");
    // CP must stay shorter than one delay span.
    require(cp_len() < M, "ceil(tau_max*M*delta_f) must be < M");
    require(exclusion_radius_m < cell_radius_m, "exclusion radius must be inside the cell");
}

void ProfileConfig::validate() const {
    require(r_tau >= 1.0, "r_tau must be >= 1");
    require(num_paths >= 1, "num_paths must be >= 1");
    require(mu_tau > 0, "mu_tau must be positive");
    require(nu_max >= 0, "nu_max must be non-negative");
    require(zenith_min_deg < zenith_max_deg, "zenith sector must be non-empty");
    require(angle_retry_limit >= 1, "angle_retry_limit must be >= 1");
}

namespace {

template <typename T>
void get_opt(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void to_json(nlohmann::json& j, const SystemConfig& c) {
    j = nlohmann::json{
        {"M", c.M},
        {"N", c.N},
        {"delta_f_hz", c.delta_f},
        {"fc_hz", c.fc},
        {"Qh", c.Qh},
        {"Qv", c.Qv},
        {"d_over_lambda", c.d_over_lambda},
        {"K", c.K},
        {"tau_max_s", c.tau_max},
        {"rho", c.rho},
        {"N0", c.N0},
        {"Ep", c.Ep},
        {"doppler_grid_points", c.doppler_grid_points},
        {"cell_radius_m", c.cell_radius_m},
        {"exclusion_radius_m", c.exclusion_radius_m},
    };
}

void from_json(const nlohmann::json& j, SystemConfig& c) {
    get_opt(j, "M", c.M);
    get_opt(j, "N", c.N);
    get_opt(j, "delta_f_hz", c.delta_f);
    get_opt(j, "fc_hz", c.fc);
    get_opt(j, "Qh", c.Qh);
    get_opt(j, "Qv", c.Qv);
    get_opt(j, "d_over_lambda", c.d_over_lambda);
    get_opt(j, "K", c.K);
    get_opt(j, "tau_max_s", c.tau_max);
    get_opt(j, "rho", c.rho);
    get_opt(j, "N0", c.N0);
    get_opt(j, "Ep", c.Ep);
    get_opt(j, "doppler_grid_points", c.doppler_grid_points);
    get_opt(j, "cell_radius_m", c.cell_radius_m);
    get_opt(j, "exclusion_radius_m", c.exclusion_radius_m);
    c.validate();
}

void to_json(nlohmann::json& j, const ProfileConfig& c) {
    j = nlohmann::json{
        {"mu_tau_s", c.mu_tau},
        {"r_tau", c.r_tau},
        {"num_paths", c.num_paths},
        {"nu_max_hz", c.nu_max},
        {"pathloss_mode", c.pathloss_mode == PathlossMode::unit ? "unit" : "rma_nlos_normalized"},
        {"pathloss_exponent", c.pathloss_exponent},
        {"zenith_min_deg", c.zenith_min_deg},
        {"zenith_max_deg", c.zenith_max_deg},
        {"angle_retry_limit", c.angle_retry_limit},
    };
}

void from_json(const nlohmann::json& j, ProfileConfig& c) {
    get_opt(j, "mu_tau_s", c.mu_tau);
    get_opt(j, "r_tau", c.r_tau);
    get_opt(j, "num_paths", c.num_paths);
    get_opt(j, "nu_max_hz", c.nu_max);
    if (j.contains("pathloss_mode")) {
        const auto mode = j.at("pathloss_mode").get<std::string>();
        if (mode == "unit") {
            c.pathloss_mode = PathlossMode::unit;
        } else if (mode == "rma_nlos_normalized") {
            c.pathloss_mode = PathlossMode::rma_nlos_normalized;
        } else {
            throw std::invalid_argument("unknown pathloss_mode: " + mode);
        }
    }
    get_opt(j, "pathloss_exponent", c.pathloss_exponent);
    get_opt(j, "zenith_min_deg", c.zenith_min_deg);
    get_opt(j, "zenith_max_deg", c.zenith_max_deg);
    get_opt(j, "angle_retry_limit", c.angle_retry_limit);
    c.validate();
}

namespace {

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

}  // namespace

SystemConfig load_system_config(const std::string& path) {
    return load_json_file(path).get<SystemConfig>();
}

ProfileConfig load_profile_config(const std::string& path) {
    return load_json_file(path).get<ProfileConfig>();
}

}  // namespace otfs
