#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ecmsense/ecm.hpp"

namespace ecmsense {

/// One contiguous stretch of drive-cycle data inside a single SOC interval,
/// rest periods removed. z_start is the Coulomb-counted SOC at the first
/// sample; identification simulates from the rested state (0, 0, z_start).
struct Segment {
    CurrentProfile profile;
    VoltageTrace voltage;
    SocInterval soc_interval;
    double z_start = 1.0;
    std::size_t start_index = 0;  // into the source profile
};

struct SegmentationOptions {
    /// Rest detection: |I| below this for longer than rest_min_duration_s.
    /// <= 0 derives the threshold from capacity as the C/500 rate.
    double rest_current_a = 0.0;
    double rest_min_duration_s = 60.0;
};

struct SegmentationResult {
    std::vector<Segment> segments;
    std::vector<std::string> warnings;
    bool full_coverage = false;  // data reached the last edge
};

/// Cut a drive cycle into per-interval segments. SOC is Coulomb-counted from
/// z0 (unclamped); the cut for edge e is the first sample whose SOC is <= e,
/// so each segment's samples satisfy lo < z <= hi. Rest periods are excluded;
/// if that splits a segment, the longest contiguous run is kept. Data ending
/// before the last edge yields the segments produced plus a partial-coverage
/// warning.
SegmentationResult segment_by_soc(const CurrentProfile& profile,
                                  const VoltageTrace& voltage, double capacity_q,
                                  double z0, const std::vector<double>& edges_pct,
                                  const SegmentationOptions& options = {});

struct IdentOptions {
    int max_iterations = 200;
    double rel_objective_tol = 1e-10;
    double rel_step_tol = 1e-8;
    double fd_step = 1e-6;  // forward-difference step in log-parameter space
};

/// Identification outcome for one segment. converged means a tolerance
/// criterion stopped the optimizer (not the iteration cap). The objective
/// history holds the accepted sum-of-squares values, which are
/// non-increasing by construction.
struct FitReport {
    ParameterSet params;
    double rmse = 0.0;     // volts
    double max_abs = 0.0;  // volts
    int iterations = 0;
    bool converged = false;
    std::vector<std::string> warnings;
    std::vector<double> objective_history;
};

/// Data-driven starting point: Rs from the voltage jump at the largest
/// current step, round-number RC constants (tau 10/100 s, C 1000 F).
ParameterSet default_initial_guess(const Segment& segment);

/// Grey-box fit of {tau1, tau2, c1, c2, rs} to one segment by
/// simulation-error least squares: Levenberg-Marquardt on a forward-difference
/// Jacobian over the log of the parameters (positivity by construction),
/// simulating from rest at z_start. The result is canonicalized tau1 <= tau2.
/// Warnings flag indistinguishable time constants and RC pairs whose
/// contribution to the fit is negligible.
FitReport identify_segment(const Segment& segment, const OcvCurve& ocv,
                           double capacity_q, const ParameterSet& init_guess,
                           const IdentOptions& options = {});

/// Assemble per-interval fits into a schedule (means and sample standard
/// deviations recomputed across intervals). Throws StructuralError for
/// overlapping intervals.
ParameterSchedule build_schedule(
    const std::vector<std::pair<SocInterval, FitReport>>& reports);

struct CaseMetrics {
    double rmse = 0.0;
    double max_abs = 0.0;
};

/// Replay the measured cycle once per case, where a case is the set of
/// parameters frozen at their across-interval means (empty set = the full
/// schedule, all five = a constant-parameter model), and score each replay
/// against the measurement.
std::vector<CaseMetrics> validate_cases(
    const CurrentProfile& profile, const VoltageTrace& voltage,
    const ParameterSchedule& schedule, const OcvCurve& ocv, double capacity_q,
    double z0, const std::vector<std::array<bool, kNumParams>>& fix_masks);

/// The standard three validation cases: nothing fixed; the given mask fixed
/// (defaults to c1, c2, tau1); everything fixed.
std::vector<std::array<bool, kNumParams>> standard_cases(
    std::optional<std::array<bool, kNumParams>> case2_mask = std::nullopt);

}  // namespace ecmsense
