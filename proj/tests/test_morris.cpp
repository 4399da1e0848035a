#include <cmath>
#include <cstring>

#include "doctest.h"
#include "ecmsense/morris.hpp"
#include "ecmsense/synth.hpp"

using namespace ecmsense;

namespace {

struct EcmFixture {
    CurrentProfile profile;
    OcvCurve curve;
    double q = coulombs_from_mah(740.0);
    ParameterDistribution dist;

    EcmFixture() {
        CycleSpec spec;
        spec.kind = CycleKind::fuds_like;
        spec.duration_s = 600.0;
        spec.scale_a = 1.2;
        spec.mean_a = 0.2;
        spec.seed = 5;
        profile = generate_synthetic_cycle(spec);
        curve = fit_polynomial(synthetic_ocv_sweep(SweepDirection::averaged), 10);
        const ParameterSchedule truth = synthetic_cell_schedule();
        dist = ParameterDistribution::from_schedule(truth);
    }
};

double mean_current(const CurrentProfile& p) {
    double s = 0.0;
    for (double i : p.samples) s += i;
    return s / static_cast<double>(p.samples.size());
}

}  // namespace

TEST_CASE("sampling with zero sigmas returns exactly the mean set") {
    ParameterDistribution dist;
    dist.mu = {10.0, 100.0, 500.0, 5000.0, 0.03};
    dist.sigma = {0, 0, 0, 0, 0};
    rng::Xoshiro256pp gen(1);
    const ParameterSet p = sample_start_point(dist, gen);
    CHECK(p.to_array() == dist.mu);
}

TEST_CASE("sampling is deterministic for a fixed seed") {
    ParameterDistribution dist;
    dist.mu = {10.0, 100.0, 500.0, 5000.0, 0.03};
    dist.sigma = {1.0, 10.0, 50.0, 500.0, 0.003};
    rng::Xoshiro256pp gen_a(42);
    rng::Xoshiro256pp gen_b(42);
    for (int k = 0; k < 20; ++k) {
        const auto a = sample_start_point(dist, gen_a).to_array();
        const auto b = sample_start_point(dist, gen_b).to_array();
        CHECK(a == b);
    }
}

TEST_CASE("sample mean of the rs marginal satisfies the CLT bound") {
    ParameterDistribution dist;
    dist.mu = {10.0, 100.0, 500.0, 5000.0, 0.03};
    dist.sigma = {0, 0, 0, 0, 0.003};
    rng::Xoshiro256pp gen(2024);
    double sum = 0.0;
    const int n = 100000;
    for (int k = 0; k < n; ++k) sum += sample_start_point(dist, gen).rs;
    const double mean = sum / n;
    CHECK(std::abs(mean - 0.03) < 2.8460498941515414e-05);  // 3 sigma / sqrt(n)
}

TEST_CASE("rejection budget exhaustion raises a sampling error") {
    // A hopeless marginal: positivity required but the mass sits at -5.
    const std::vector<ScreenParam> params{{"x", -5.0, 0.1, true}};
    rng::Xoshiro256pp gen(7);
    CHECK_THROWS_AS(sample_start_point(params, gen, 100), SamplingError);
    try {
        rng::Xoshiro256pp gen2(7);
        sample_start_point(params, gen2, 100);
    } catch (const SamplingError& e) {
        CHECK(std::string(e.what()).find("sigma") != std::string::npos);
    }
}

TEST_CASE("linear demo: every run reproduces the analytic elementary effects") {
    for (const double delta : {0.5, 1.0, 2.0}) {
        for (const int n : {1, 16, 64}) {
            MorrisConfig cfg;
            cfg.n_runs = n;
            cfg.delta = delta;
            cfg.seed = 99 + n;
            const LinearDemoResult res = run_linear_demo(cfg);
            CHECK(std::abs(res.morris_mean[0] - (-10.0)) <= 1e-12);
            CHECK(std::abs(res.morris_mean[1] - (-5.0)) <= 1e-12);
            CHECK(std::abs(res.enhanced_mean[0] - 10.0) <= 1e-12);
            CHECK(std::abs(res.enhanced_mean[1] - 5.0) <= 1e-12);
            CHECK(res.stdev[0] <= 1e-12);
            CHECK(res.stdev[1] <= 1e-12);
            CHECK(res.n_effective[0] == n);
        }
    }
}

TEST_CASE("linear demo is insensitive to sigma scaling in its rank order") {
    // Scaling every sigma by lambda scales both rows by lambda exactly.
    const std::vector<ScreenParam> base{{"theta1", 0.0, 10.0, false},
                                        {"theta2", 0.0, 1.0, false}};
    const ScreenModel model = [](const std::vector<double>& t, std::vector<double>& y) {
        y[0] = t[0] + 5.0 * t[1];
        return true;
    };
    MorrisConfig cfg;
    cfg.n_runs = 32;
    cfg.seed = 5;
    const auto cells = morris_screen(base, model, 1, cfg, 0);
    auto scaled_params = base;
    for (auto& p : scaled_params) p.sigma *= 3.0;
    const auto scaled = morris_screen(scaled_params, model, 1, cfg, 0);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(scaled[i].enhanced_mean ==
              doctest::Approx(3.0 * cells[i].enhanced_mean).epsilon(1e-12));
    }
    CHECK(scaled[0].enhanced_mean > scaled[1].enhanced_mean);
}

TEST_CASE("zero sigma yields exactly zero effect") {
    EcmFixture fx;
    ParameterDistribution dist = fx.dist;
    dist.sigma = {0, 0, 0, 0, 0};
    MorrisConfig cfg;
    cfg.n_runs = 8;
    cfg.seed = 3;
    const auto report =
        run_morris(dist, cfg, {fx.profile, fx.curve, fx.q}, standard_intervals());
    for (const auto& row : report.cells) {
        for (const auto& cell : row) {
            CHECK(cell.morris_mean == 0.0);
            CHECK(cell.enhanced_mean == 0.0);
            CHECK(cell.stdev == 0.0);
            CHECK(cell.n_effective == cfg.n_runs);
        }
    }
}

TEST_CASE("rs elementary effect equals sigma_rs * mean(I) for any seed and delta") {
    EcmFixture fx;
    const double expected_rate = mean_current(fx.profile);
    const SimCache cache = build_sim_cache(fx.profile, fx.curve, fx.q, 0.95);
    for (const double delta : {0.5, 1.0, 2.0}) {
        for (const std::uint64_t seed : {1ull, 77ull, 123456789ull}) {
            MorrisConfig cfg;
            cfg.delta = delta;
            cfg.seed = seed;
            rng::Xoshiro256pp gen(seed);
            const auto theta = sample_start_point(fx.dist, gen).to_array();
            const double xi = elementary_effect(theta, kRs, fx.dist, cfg, cache);
            CHECK(std::abs(xi - fx.dist.sigma[kRs] * expected_rate) <= 1e-12);
        }
    }
}

TEST_CASE("report-level rs row equals the affine prediction and scales linearly") {
    EcmFixture fx;
    MorrisConfig cfg;
    cfg.n_runs = 16;
    cfg.seed = 10;
    const std::vector<SocInterval> intervals{{100, 90}, {60, 50}};
    const MorrisContext ctx{fx.profile, fx.curve, fx.q};
    const auto report = run_morris(fx.dist, cfg, ctx, intervals);
    const double affine = fx.dist.sigma[kRs] * mean_current(fx.profile);
    for (std::size_t j = 0; j < intervals.size(); ++j) {
        CHECK(std::abs(report.cell(j, kRs).morris_mean - affine) <= 1e-12);
        CHECK(report.cell(j, kRs).stdev <= 1e-12);
    }

    ParameterDistribution scaled = fx.dist;
    const double lambda = 2.5;
    for (auto& s : scaled.sigma) s *= lambda;
    const auto scaled_report = run_morris(scaled, cfg, ctx, intervals);
    for (std::size_t j = 0; j < intervals.size(); ++j) {
        CHECK(std::abs(scaled_report.cell(j, kRs).morris_mean - lambda * affine) <=
              1e-12);
    }
}

TEST_CASE("enhanced mean dominates the plain mean in every cell") {
    EcmFixture fx;
    MorrisConfig cfg;
    cfg.n_runs = 48;
    cfg.seed = 8;
    const auto report = run_morris(fx.dist, cfg, {fx.profile, fx.curve, fx.q},
                                   standard_intervals());
    for (const auto& row : report.cells) {
        for (const auto& cell : row) {
            CHECK(cell.enhanced_mean >= std::abs(cell.morris_mean));
            CHECK(cell.n_effective <= cfg.n_runs);
        }
    }
}

TEST_CASE("report is bitwise identical across worker counts") {
    EcmFixture fx;
    MorrisConfig cfg;
    cfg.n_runs = 64;
    cfg.seed = 4242;
    const std::vector<SocInterval> intervals{{100, 90}, {50, 40}};
    const MorrisContext ctx{fx.profile, fx.curve, fx.q};
    const auto serial = run_morris(fx.dist, cfg, ctx, intervals, /*workers=*/1);
    const auto parallel = run_morris(fx.dist, cfg, ctx, intervals, /*workers=*/8);
    for (std::size_t j = 0; j < intervals.size(); ++j) {
        for (std::size_t i = 0; i < kNumParams; ++i) {
            CHECK(serial.cell(j, i).morris_mean == parallel.cell(j, i).morris_mean);
            CHECK(serial.cell(j, i).enhanced_mean == parallel.cell(j, i).enhanced_mean);
            CHECK(serial.cell(j, i).stdev == parallel.cell(j, i).stdev);
            CHECK(serial.cell(j, i).xi == parallel.cell(j, i).xi);
        }
    }
}

TEST_CASE("delta invariance of the affine rs effect") {
    EcmFixture fx;
    const SimCache cache = build_sim_cache(fx.profile, fx.curve, fx.q, 0.55);
    rng::Xoshiro256pp gen(31);
    const auto theta = sample_start_point(fx.dist, gen).to_array();
    MorrisConfig a, b;
    a.delta = 0.5;
    b.delta = 2.0;
    const double xa = elementary_effect(theta, kRs, fx.dist, a, cache);
    const double xb = elementary_effect(theta, kRs, fx.dist, b, cache);
    CHECK(std::abs(xa - xb) <= 1e-12);
}

TEST_CASE("ranking sorts by enhanced mean with alphabetical tie-break") {
    SensitivityReport report;
    report.intervals = {{100, 90}};
    std::array<SensitivityCell, kNumParams> row;
    auto set = [&](std::size_t i, double v) { row[i].enhanced_mean = v; };
    set(kRs, 0.030);
    set(kTau2, 0.010);
    set(kTau1, 0.001);
    set(kC1, 0.0005);
    set(kC2, 0.0004);
    report.cells.push_back(row);
    auto ranks = rank_parameters(report);
    const std::array<std::size_t, kNumParams> want{kRs, kTau2, kTau1, kC1, kC2};
    CHECK(ranks[0] == want);

    for (auto& cell : row) cell.enhanced_mean = 1.0;
    report.cells[0] = row;
    ranks = rank_parameters(report);
    const std::array<std::size_t, kNumParams> alpha{kC1, kC2, kRs, kTau1, kTau2};
    CHECK(ranks[0] == alpha);
}

TEST_CASE("only-rs uncertainty ranks rs first in every interval") {
    EcmFixture fx;
    ParameterDistribution dist = fx.dist;
    dist.sigma = {0, 0, 0, 0, fx.dist.sigma[kRs]};
    MorrisConfig cfg;
    cfg.n_runs = 8;
    cfg.seed = 1;
    const auto report = run_morris(dist, cfg, {fx.profile, fx.curve, fx.q},
                                   standard_intervals());
    const auto ranks = rank_parameters(report);
    for (const auto& order : ranks) CHECK(order[0] == kRs);
}

TEST_CASE("a clamping context invalidates every run and names the cell") {
    EcmFixture fx;
    OcvCurve wide = fx.curve;
    wide.z_lo = 0.0;  // keep OCV evaluable while SOC clamps at zero
    MorrisConfig cfg;
    cfg.n_runs = 4;
    cfg.seed = 6;
    // Midpoint 5% SOC against a ~20%-depth discharge: clamps at zero.
    CurrentProfile deep;
    deep.dt = 1.0;
    deep.samples.assign(600, 1.0);
    const std::vector<SocInterval> intervals{{10, 0}};
    try {
        run_morris(fx.dist, cfg, {deep, wide, fx.q}, intervals);
        FAIL("expected RangeError");
    } catch (const RangeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("tau1") != std::string::npos);
        CHECK(msg.find("10") != std::string::npos);
    }
}

TEST_CASE("resampling rescues runs whose validity depends on the draw") {
    const std::vector<ScreenParam> params{{"x", 1.0, 0.5, false}};
    // Valid only for draws above the mean: roughly half the start points.
    const ScreenModel model = [](const std::vector<double>& t, std::vector<double>& y) {
        if (t[0] < 1.0) return false;
        y[0] = 2.0 * t[0];
        return true;
    };
    MorrisConfig cfg;
    cfg.n_runs = 32;
    cfg.seed = 17;
    const auto plain = morris_screen(params, model, 1, cfg, 0);
    CHECK(plain[0].n_effective < cfg.n_runs);
    cfg.resample_on_invalid = true;
    const auto resampled = morris_screen(params, model, 1, cfg, 0);
    CHECK(resampled[0].n_effective == cfg.n_runs);
}

TEST_CASE("config validation") {
    MorrisConfig cfg;
    cfg.n_runs = 0;
    CHECK_THROWS_AS(run_linear_demo(cfg), InvalidInput);
    cfg.n_runs = 4;
    cfg.delta = 0.0;
    CHECK_THROWS_AS(run_linear_demo(cfg), InvalidInput);
}
