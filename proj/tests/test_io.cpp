#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "ecmsense/io.hpp"
#include "ecmsense/synth.hpp"

using namespace ecmsense;
namespace fs = std::filesystem;

namespace {

fs::path test_dir() {
    const fs::path dir = fs::temp_directory_path() / "ecmsense_io_tests";
    fs::create_directories(dir);
    return dir;
}

std::string write_file(const std::string& name, const std::string& content) {
    const fs::path p = test_dir() / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("drive cycle load: zero-order hold onto a finer grid") {
    const auto path = write_file("hold.csv", "time_s,current_a\n0,1\n1,1\n");
    const LoadedCycle lc = load_drive_cycle(path, 0.5);
    CHECK(lc.original_rows == 2);
    REQUIRE(lc.profile.samples.size() == 3);
    CHECK(lc.profile.samples == std::vector<double>{1.0, 1.0, 1.0});
    CHECK_FALSE(lc.voltage.has_value());
}

TEST_CASE("drive cycle load: a skipped sample warns, uniform spacing does not") {
    const auto path = write_file("gap.csv", "time_s,current_a\n0,1\n1,2\n3,3\n");
    const LoadedCycle lc = load_drive_cycle(path, 1.0);
    REQUIRE(lc.warnings.size() == 1);  // only the 1 s -> 3 s jump
    CHECK(lc.warnings[0].find("gap") != std::string::npos);
    CHECK(lc.warnings[0].find("line 4") != std::string::npos);
}

TEST_CASE("drive cycle load: errors carry line numbers") {
    const auto bad_time =
        write_file("nonmono.csv", "time_s,current_a\n0,1\n2,1\n1,1\n");
    CHECK_THROWS_AS(load_drive_cycle(bad_time), ParseError);
    try {
        load_drive_cycle(bad_time);
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":4") != std::string::npos);
    }
    const auto bad_schema = write_file("schema.csv", "time_s,amps\n0,1\n1,1\n");
    CHECK_THROWS_AS(load_drive_cycle(bad_schema), ParseError);
    const auto missing_col =
        write_file("col.csv", "time_s,current_a,voltage_v\n0,1,3.7\n1,1\n");
    CHECK_THROWS_AS(load_drive_cycle(missing_col), ParseError);
}

TEST_CASE("drive cycle round-trip is bitwise exact") {
    CycleSpec spec;
    spec.duration_s = 120.0;
    spec.seed = 8;
    spec.scale_a = 1.7;
    const CurrentProfile profile = generate_synthetic_cycle(spec);
    const auto path = (test_dir() / "roundtrip.csv").string();
    save_drive_cycle(path, profile);
    const LoadedCycle lc = load_drive_cycle(path, profile.dt);
    REQUIRE(lc.profile.samples.size() == profile.samples.size());
    CHECK(lc.profile.samples == profile.samples);
    CHECK(lc.profile.dt == profile.dt);
}

TEST_CASE("voltage column round-trips alongside current") {
    CurrentProfile profile;
    profile.dt = 2.0;
    profile.samples = {0.5, -0.25, 1.0};
    VoltageTrace volts{2.0, {3.71, 3.695, 3.68}};
    const auto path = (test_dir() / "withv.csv").string();
    save_drive_cycle(path, profile, &volts);
    const LoadedCycle lc = load_drive_cycle(path, 2.0);
    REQUIRE(lc.voltage.has_value());
    CHECK(lc.voltage->samples == volts.samples);
}

TEST_CASE("ocv sweep and curve files round-trip") {
    const OcvSweep sweep = synthetic_ocv_sweep(SweepDirection::averaged, 51);
    const auto spath = (test_dir() / "sweep.csv").string();
    save_ocv_sweep(spath, sweep);
    const OcvSweep back = load_ocv_sweep(spath, SweepDirection::averaged);
    REQUIRE(back.grid.size() == sweep.grid.size());
    for (std::size_t i = 0; i < sweep.grid.size(); ++i) {
        CHECK(back.grid[i] == doctest::Approx(sweep.grid[i]).epsilon(1e-14));
        CHECK(back.voltages[i] == sweep.voltages[i]);
    }

    const OcvCurve curve = fit_polynomial(sweep, 10);
    const auto cpath = (test_dir() / "curve.txt").string();
    save_ocv_curve(cpath, curve);
    const OcvCurve cback = load_ocv_curve(cpath);
    CHECK(cback.coefficients == curve.coefficients);  // %.17g round-trip
    CHECK(cback.z_lo == doctest::Approx(curve.z_lo).epsilon(1e-15));
    CHECK(cback.z_hi == doctest::Approx(curve.z_hi).epsilon(1e-15));
}

TEST_CASE("schedule file round-trips entries, mask and interp") {
    ParameterSchedule sched = synthetic_cell_schedule();
    std::array<bool, kNumParams> mask{};
    mask[kTau1] = mask[kC1] = mask[kC2] = true;
    sched.set_fixed_mask(mask);
    sched.set_interp(ScheduleInterp::midpoint_linear);
    const auto path = (test_dir() / "schedule.txt").string();
    save_schedule(path, sched);
    const ParameterSchedule back = load_schedule(path);
    REQUIRE(back.entries().size() == sched.entries().size());
    for (std::size_t j = 0; j < sched.entries().size(); ++j) {
        CHECK(back.entries()[j].first.hi_pct == sched.entries()[j].first.hi_pct);
        CHECK(back.entries()[j].second.to_array() ==
              sched.entries()[j].second.to_array());
    }
    CHECK(back.fixed_mask() == mask);
    CHECK(back.interp() == ScheduleInterp::midpoint_linear);
    CHECK(back.means() == sched.means());
    CHECK(back.stdevs() == sched.stdevs());
}

TEST_CASE("run config parses, serializes and round-trips") {
    const std::string text =
        "# sample\n"
        "cycle_csv = data/cycle.csv\n"
        "capacity_mah = 740\n"
        "soc_edges_pct = 100,90,80\n"
        "morris_runs = 64\n"
        "morris_reduction = rms\n"
        "case2_fixed = c1,c2,tau1\n"
        "seed = 1234\n";
    const RunConfig cfg = parse_run_config(text, "/base");
    CHECK(cfg.cycle_csv == "/base/data/cycle.csv");
    CHECK(cfg.capacity_mah == 740.0);
    CHECK(cfg.soc_edges_pct == std::vector<double>{100, 90, 80});
    CHECK(cfg.morris_runs == 64);
    CHECK(cfg.morris_reduction == TimeReduction::time_rms);
    CHECK(cfg.case2_fixed[kC1]);
    CHECK(cfg.case2_fixed[kTau1]);
    CHECK_FALSE(cfg.case2_fixed[kRs]);
    REQUIRE(cfg.seed.has_value());
    CHECK(*cfg.seed == 1234);

    const RunConfig back = parse_run_config(serialize_run_config(cfg));
    CHECK(back.cycle_csv == cfg.cycle_csv);
    CHECK(back.soc_edges_pct == cfg.soc_edges_pct);
    CHECK(back.morris_runs == cfg.morris_runs);
    CHECK(back.morris_reduction == cfg.morris_reduction);
    CHECK(back.case2_fixed == cfg.case2_fixed);
    CHECK(back.seed == cfg.seed);
    CHECK(back.workers == cfg.workers);
}

TEST_CASE("unknown config keys are rejected with the line number") {
    try {
        parse_run_config("capacity_mah = 740\nbogus_key = 3\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("bogus_key") != std::string::npos);
    }
}

TEST_CASE("synthetic cycle generators") {
    SUBCASE("constant") {
        CycleSpec spec;
        spec.kind = CycleKind::constant;
        spec.duration_s = 100.0;
        spec.scale_a = 1.0;
        const CurrentProfile p = generate_synthetic_cycle(spec);
        REQUIRE(p.samples.size() == 100);
        for (double i : p.samples) CHECK(i == 1.0);
    }
    SUBCASE("prbs alphabet and bit period") {
        CycleSpec spec;
        spec.kind = CycleKind::prbs;
        spec.duration_s = 200.0;
        spec.scale_a = 0.8;
        spec.prbs_bit_s = 5.0;
        spec.seed = 3;
        const CurrentProfile p = generate_synthetic_cycle(spec);
        bool saw_pos = false, saw_neg = false;
        for (double i : p.samples) {
            CHECK((i == 0.8 || i == -0.8));
            saw_pos = saw_pos || i > 0;
            saw_neg = saw_neg || i < 0;
        }
        CHECK(saw_pos);
        CHECK(saw_neg);
        for (std::size_t k = 0; k < p.samples.size(); k += 5) {
            for (std::size_t j = 1; j < 5 && k + j < p.samples.size(); ++j) {
                CHECK(p.samples[k + j] == p.samples[k]);
            }
        }
    }
    SUBCASE("same seed reproduces, different seeds differ") {
        CycleSpec spec;
        spec.duration_s = 300.0;
        spec.seed = 12;
        const CurrentProfile a = generate_synthetic_cycle(spec);
        const CurrentProfile b = generate_synthetic_cycle(spec);
        CHECK(a.samples == b.samples);
        spec.seed = 13;
        const CurrentProfile c = generate_synthetic_cycle(spec);
        CHECK(a.samples != c.samples);
    }
}

TEST_CASE("synthetic cell voltage") {
    const OcvCurve curve =
        fit_polynomial(synthetic_ocv_sweep(SweepDirection::averaged), 10);
    const ParameterSchedule truth = synthetic_cell_schedule();
    const double q = coulombs_from_mah(740.0);
    CycleSpec spec;
    spec.duration_s = 400.0;
    spec.mean_a = 0.2;
    spec.scale_a = 1.0;
    spec.seed = 6;
    const CurrentProfile profile = generate_synthetic_cycle(spec);

    SUBCASE("zero noise equals the plain simulation") {
        const VoltageTrace v = generate_synthetic_cell(truth, curve, q, profile, 0.0, 9,
                                                       CellState{0, 0, 0.9});
        const SimResult sim = simulate(profile, CellConfig{q, curve, truth},
                                       CellState{0, 0, 0.9});
        CHECK(v.samples == sim.trace.samples);
    }
    SUBCASE("noise RMS concentrates around the requested level") {
        CycleSpec long_spec = spec;
        long_spec.duration_s = 100000.0;
        long_spec.mean_a = 0.0005;  // barely discharges over the long window
        long_spec.scale_a = 0.01;
        const CurrentProfile lp = generate_synthetic_cycle(long_spec);
        const VoltageTrace clean =
            generate_synthetic_cell(truth, curve, q, lp, 0.0, 1, CellState{0, 0, 0.9});
        const VoltageTrace noisy = generate_synthetic_cell(truth, curve, q, lp, 0.001,
                                                           1, CellState{0, 0, 0.9});
        double ss = 0.0;
        for (std::size_t k = 0; k < clean.samples.size(); ++k) {
            const double d = noisy.samples[k] - clean.samples[k];
            ss += d * d;
        }
        const double rms = std::sqrt(ss / static_cast<double>(clean.samples.size()));
        CHECK(rms > 0.00098);
        CHECK(rms < 0.00102);
    }
    SUBCASE("different seeds give different noise") {
        const VoltageTrace a = generate_synthetic_cell(truth, curve, q, profile, 0.001,
                                                       1, CellState{0, 0, 0.9});
        const VoltageTrace b = generate_synthetic_cell(truth, curve, q, profile, 0.001,
                                                       2, CellState{0, 0, 0.9});
        CHECK(a.samples != b.samples);
    }
}

TEST_CASE("sensitivity CSVs have the documented shape") {
    SensitivityReport report;
    report.intervals = {{100, 90}, {90, 80}};
    for (int j = 0; j < 2; ++j) {
        std::array<SensitivityCell, kNumParams> row;
        for (auto& c : row) {
            c.morris_mean = 0.001;
            c.enhanced_mean = 0.002;
            c.stdev = 0.0005;
            c.n_effective = 3;
            c.xi = {0.001, 0.002, 0.0005, -0.001};
            c.valid = {1, 1, 1, 0};
        }
        report.cells.push_back(row);
    }
    const auto p1 = (test_dir() / "sens.csv").string();
    const auto p2 = (test_dir() / "sens_runs.csv").string();
    save_sensitivity_csv(p1, report);
    save_sensitivity_runs_csv(p2, report);

    const std::string head = slurp(p1);
    CHECK(head.rfind("soc_interval,parameter,morris_mean_v,enhanced_mean_v,stdev_v,"
                     "n_effective\n", 0) == 0);
    CHECK(head.find("100-90,tau1,") != std::string::npos);
    const std::string runs = slurp(p2);
    // 2 intervals x 5 parameters x 3 valid runs + header
    std::size_t lines = 0;
    for (char ch : runs) lines += ch == '\n' ? 1 : 0;
    CHECK(lines == 2 * 5 * 3 + 1);
}
