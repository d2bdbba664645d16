#pragma once

#include <cmath>
#include <string>

#include <json.hpp>

#include "otfs/types.hpp"

namespace otfs {

enum class PathlossMode { unit, rma_nlos_normalized };

// Deterministic system constants for one simulation setup. Units in field names
// where not dimensionless; N0 is the reference noise PSD (1.0 by convention).
struct SystemConfig {
    int M = 32;                    // delay bins
    int N = 4;                     // Doppler bins
    double delta_f = 15e3;         // subcarrier spacing, Hz
    double fc = 4.8e9;             // carrier, Hz
    int Qh = 14;                   // URA columns
    int Qv = 14;                   // URA rows
    double d_over_lambda = 0.5;    // antenna spacing / wavelength
    int K = 4;                     // user terminals
    double tau_max = 4.7e-6;       // max path delay, s (fixed CP design)
    double rho = 0.1 / 196.0;      // E_T / (M N N0)
    double N0 = 1.0;               // noise PSD reference
    double Ep = 0.0;               // pilot energy; 0 means derive from rho_p elsewhere
    int doppler_grid_points = 400;
    double cell_radius_m = 5000.0;
    double exclusion_radius_m = 35.0;

    int Q() const { return Qh * Qv; }
    int mn() const { return M * N; }
    double T() const { return 1.0 / delta_f; }
    double frame_duration() const { return N * T(); }
    // CP length in samples at rate M*delta_f.
    int cp_len() const { return static_cast<int>(std::ceil(tau_max * M * delta_f)); }
    double E_T() const { return rho * M * N * N0; }
    // Time-bandwidth overhead 1 + tau_max/(NT).
    double overhead() const { return 1.0 + tau_max * delta_f / N; }

    void validate() const;
};

// Channel statistics profile (delay power profile, Doppler and angle laws).
struct ProfileConfig {
    double mu_tau = 0.37e-6;      // mean delay spread, s
    double r_tau = 1.7;           // delay scaling factor
    int num_paths = 10;           // paths per UT
    double nu_max = 1600.0;       // max Doppler, Hz
    PathlossMode pathloss_mode = PathlossMode::unit;
    double pathloss_exponent = 3.86;  // RMa-NLOS distance slope, 38.6 dB/decade
    double zenith_min_deg = 60.0;
    double zenith_max_deg = 120.0;
    int angle_retry_limit = 64;

    void validate() const;
};

void to_json(nlohmann::json& j, const SystemConfig& c);
void from_json(const nlohmann::json& j, SystemConfig& c);
void to_json(nlohmann::json& j, const ProfileConfig& c);
void from_json(const nlohmann::json& j, ProfileConfig& c);

SystemConfig load_system_config(const std::string& path);
ProfileConfig load_profile_config(const std::string& path);

}  // namespace otfs
