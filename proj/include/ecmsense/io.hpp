#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecmsense/ident.hpp"
#include "ecmsense/morris.hpp"
#include "ecmsense/ocv.hpp"
#include "ecmsense/profile.hpp"
#include "ecmsense/schedule.hpp"

namespace ecmsense {

/// Full-precision round-trippable decimal form of a double.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Drive-cycle CSV: header `time_s,current_a[,voltage_v]`, strictly
// increasing time, '.' decimal separator, LF newlines.
// ---------------------------------------------------------------------------

struct LoadedCycle {
    CurrentProfile profile;
    std::optional<VoltageTrace> voltage;
    std::size_t original_rows = 0;
    std::vector<std::string> warnings;  // missing-sample gaps in the input
};

/// Read and zero-order-hold resample onto a uniform grid. resample_dt <= 0
/// infers dt from the median input spacing.
LoadedCycle load_drive_cycle(const std::string& path, double resample_dt = 0.0);

void save_drive_cycle(const std::string& path, const CurrentProfile& profile,
                      const VoltageTrace* voltage = nullptr);

// ---------------------------------------------------------------------------
// OCV sweep CSV (`soc_percent,voltage_v`) and curve/schedule text files.
// ---------------------------------------------------------------------------

OcvSweep load_ocv_sweep(const std::string& path,
                        SweepDirection direction = SweepDirection::discharge);
void save_ocv_sweep(const std::string& path, const OcvSweep& sweep);

OcvCurve load_ocv_curve(const std::string& path);
void save_ocv_curve(const std::string& path, const OcvCurve& curve);

ParameterSchedule load_schedule(const std::string& path);
void save_schedule(const std::string& path, const ParameterSchedule& schedule);

// ---------------------------------------------------------------------------
// Sensitivity report CSVs.
// ---------------------------------------------------------------------------

/// `soc_interval,parameter,morris_mean_v,enhanced_mean_v,stdev_v,n_effective`.
void save_sensitivity_csv(const std::string& path, const SensitivityReport& report);

/// Long-format per-run effects for distribution plots:
/// `soc_interval,parameter,run,xi_v` (valid runs only).
void save_sensitivity_runs_csv(const std::string& path, const SensitivityReport& report);

std::string interval_label(const SocInterval& interval);

// ---------------------------------------------------------------------------
// Run configuration: `key = value` text, '#' comments. Relative paths are
// resolved against the config file's directory.
// ---------------------------------------------------------------------------

struct RunConfig {
    // inputs
    std::string cycle_csv;
    std::string validation_cycle_csv;
    std::string morris_cycle_csv;  // defaults to cycle_csv
    std::string ocv_charge_csv;
    std::string ocv_discharge_csv;
    std::string ocv_sweep_csv;  // single pre-averaged sweep
    std::string ocv_curve;      // fitted curve file
    std::string schedule;       // parameter schedule file

    // cell and segmentation
    double capacity_mah = 740.0;
    double z0_pct = 100.0;
    std::vector<double> soc_edges_pct{100, 90, 80, 70, 60, 50, 40, 30, 20, 10};
    double resample_dt_s = 0.0;  // 0 = infer from data
    double rest_current_a = 0.0;  // 0 = C/500 rate
    double rest_min_duration_s = 60.0;

    // OCV fit
    int ocv_degree = 10;

    // identification
    int ident_max_iterations = 200;
    double ident_rel_objective_tol = 1e-10;
    double ident_rel_step_tol = 1e-8;
    std::array<double, kNumParams> init_guess{};  // 0 = heuristic default

    // sensitivity
    int morris_runs = 1024;
    double morris_delta = 1.0;
    TimeReduction morris_reduction = TimeReduction::signed_mean;
    bool morris_resample_invalid = false;

    // validation
    std::array<bool, kNumParams> case2_fixed{/*tau1*/ true, false, /*c1*/ true,
                                             /*c2*/ true, false};

    // execution
    std::optional<std::uint64_t> seed;
    int workers = 0;
    ScheduleInterp schedule_interp = ScheduleInterp::piecewise_constant;

    [[nodiscard]] double capacity_coulombs() const {
        return coulombs_from_mah(capacity_mah);
    }
};

RunConfig parse_run_config(const std::string& text, const std::string& base_dir = "");
RunConfig load_run_config(const std::string& path);
std::string serialize_run_config(const RunConfig& cfg);

/// Key-value summary writer shared by the CLI subcommands.
void save_summary(const std::string& path,
                  const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace ecmsense
