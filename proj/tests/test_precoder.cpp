#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "otfs/precoder.hpp"

using namespace otfs;

namespace {

DDGrid random_grid(int M, int N, uint64_t seed) {
    Rng rng(seed);
    DDGrid g(M, N);
    for (auto& v : g.v) v = rng.cgaussian(1.0);
    return g;
}

ChannelParams unit_single_path() {
    ChannelParams params;
    params.uts.resize(1);
    params.pathloss = {1.0};
    Path p;
    p.g = Complex(1.0, 0.0);
    p.beta = 1.0;
    params.uts[0].push_back(p);
    return params;
}

}  // namespace

TEST_CASE("identity channel scales the symbols by sqrt(E_T/eta)") {
    SystemConfig cfg;
    cfg.M = 8;
    cfg.N = 4;
    cfg.Qh = cfg.Qv = 1;
    cfg.K = 1;
    cfg.rho = 0.25;
    ChannelParams params = unit_single_path();
    auto channels = build_all_channels(params, cfg);
    const double eta = precoder_eta(params, cfg);
    CHECK(eta == doctest::Approx(cfg.mn()).epsilon(1e-14));  // Q=1, sum beta = 1

    std::vector<DDGrid> u{random_grid(cfg.M, cfg.N, 1)};
    PrecodedFrame f = precode(u, channels, cfg.E_T(), eta);
    const double scale = std::sqrt(cfg.E_T() / eta);
    for (int r = 0; r < cfg.mn(); ++r)
        CHECK(std::abs(f.x[0][static_cast<size_t>(r)] - scale * u[0][static_cast<size_t>(r)]) <
              1e-13);
}

TEST_CASE("zero symbols produce zero transmit grids") {
    SystemConfig cfg;
    cfg.M = 8;
    cfg.N = 2;
    cfg.Qh = cfg.Qv = 2;
    cfg.K = 2;
    ProfileConfig prof;
    prof.num_paths = 3;
    ChannelParams params = sample_channel_params(cfg, prof, 2);
    auto channels = build_all_channels(params, cfg);
    std::vector<DDGrid> u(2, DDGrid(cfg.M, cfg.N));
    PrecodedFrame f = precode(u, channels, cfg.E_T(), precoder_eta(params, cfg));
    for (const auto& x : f.x)
        for (const auto& v : x.v) CHECK(v == Complex(0.0, 0.0));
}

TEST_CASE("sparse precoding equals the dense-matrix computation") {
    SystemConfig cfg;
    cfg.M = 6;
    cfg.N = 2;
    cfg.Qh = cfg.Qv = 2;
    cfg.K = 2;
    ProfileConfig prof;
    prof.num_paths = 3;
    prof.nu_max = 1250.0;
    ChannelParams params = sample_channel_params(cfg, prof, 3);
    auto channels = build_all_channels(params, cfg);
    const double eta = precoder_eta(params, cfg);
    std::vector<DDGrid> u{random_grid(cfg.M, cfg.N, 4), random_grid(cfg.M, cfg.N, 5)};
    PrecodedFrame f = precode(u, channels, cfg.E_T(), eta);

    const double scale = std::sqrt(cfg.E_T() / eta);
    for (int q = 1; q <= cfg.Q(); ++q) {
        Eigen::VectorXcd ref = Eigen::VectorXcd::Zero(cfg.mn());
        for (int s = 0; s < cfg.K; ++s) {
            MatrixXc H = dense(effective_channel(params, q, s, cfg));
            ref += H.adjoint() * Eigen::Map<Eigen::VectorXcd>(u[static_cast<size_t>(s)].v.data(),
                                                              cfg.mn());
        }
        ref *= scale;
        for (int r = 0; r < cfg.mn(); ++r)
            CHECK(std::abs(f.x[static_cast<size_t>(q) - 1][static_cast<size_t>(r)] - ref(r)) <
                  1e-12);
    }
}

TEST_CASE("precoding is linear in the symbols") {
    SystemConfig cfg;
    cfg.M = 8;
    cfg.N = 2;
    cfg.Qh = cfg.Qv = 2;
    cfg.K = 1;
    ProfileConfig prof;
    prof.num_paths = 2;
    ChannelParams params = sample_channel_params(cfg, prof, 6);
    auto channels = build_all_channels(params, cfg);
    const double eta = precoder_eta(params, cfg);

    std::vector<DDGrid> u{random_grid(cfg.M, cfg.N, 7)};
    const Complex alpha(0.3, -1.7);
    std::vector<DDGrid> ua = u;
    for (auto& v : ua[0].v) v *= alpha;

    PrecodedFrame f = precode(u, channels, cfg.E_T(), eta);
    PrecodedFrame fa = precode(ua, channels, cfg.E_T(), eta);
    for (int q = 0; q < cfg.Q(); ++q)
        for (int r = 0; r < cfg.mn(); ++r)
            CHECK(std::abs(fa.x[static_cast<size_t>(q)][static_cast<size_t>(r)] -
                           alpha * f.x[static_cast<size_t>(q)][static_cast<size_t>(r)]) < 1e-12);
}

TEST_CASE("precode input validation") {
    SystemConfig cfg;
    cfg.M = 4;
    cfg.N = 2;
    cfg.Qh = cfg.Qv = 1;
    cfg.K = 2;
    ProfileConfig prof;
    prof.num_paths = 1;
    ChannelParams params = sample_channel_params(cfg, prof, 8);
    auto channels = build_all_channels(params, cfg);

    std::vector<DDGrid> too_few(1, DDGrid(cfg.M, cfg.N));
    CHECK_THROWS(precode(too_few, channels, cfg.E_T(), 1.0));

    std::vector<DDGrid> bad(2, DDGrid(cfg.M, cfg.N));
    bad[0][0] = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
    CHECK_THROWS(precode(bad, channels, cfg.E_T(), 1.0));
}

TEST_CASE("mean transmit energy approaches E_T and the CP term is analytic") {
    SystemConfig cfg;
    cfg.M = 32;
    cfg.N = 4;
    cfg.Qh = cfg.Qv = 3;
    cfg.K = 2;
    cfg.rho = 0.05;
    ProfileConfig prof;
    prof.num_paths = 5;
    auto [mean, with_cp] = mean_frame_energy(cfg, prof, 500, 9, 2);
    CHECK(std::abs(mean / cfg.E_T() - 1.0) < 0.03);
    CHECK(with_cp - mean == doctest::Approx(cfg.E_T() * cfg.tau_max * cfg.delta_f / cfg.N)
                                .epsilon(1e-14));
    // Analytic total: E_T (1 + tau_max/(NT)).
    CHECK(cfg.E_T() + cfg.E_T() * cfg.tau_max * cfg.delta_f / cfg.N ==
          doctest::Approx(cfg.E_T() * cfg.overhead()).epsilon(1e-14));
}

TEST_CASE("instrumented multiply-add count scales linearly in Q and total paths") {
    SystemConfig cfg;
    cfg.M = 16;
    cfg.N = 4;
    cfg.K = 2;
    ProfileConfig prof;
    prof.num_paths = 3;

    auto count_for = [&](int qh, int paths) {
        SystemConfig c = cfg;
        c.Qh = c.Qv = qh;
        ProfileConfig pf = prof;
        pf.num_paths = paths;
        ChannelParams params = sample_channel_params(c, pf, 10);
        auto channels = build_all_channels(params, c);
        std::vector<DDGrid> u(2);
        u[0] = random_grid(c.M, c.N, 11);
        u[1] = random_grid(c.M, c.N, 12);
        uint64_t cmacs = 0;
        precode(u, channels, c.E_T(), precoder_eta(params, c), &cmacs);
        return cmacs;
    };

    const uint64_t base = count_for(2, 3);
    CHECK(count_for(4, 3) == 4 * base);  // Q: 4 -> 16
    CHECK(count_for(2, 6) == 2 * base);  // sum L_s doubled
}
