#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ecmsense/ecm.hpp"
#include "ecmsense/rng.hpp"
#include "ecmsense/schedule.hpp"

namespace ecmsense {

/// Independent normal marginals N(mu_i, sigma_i) for the five parameters,
/// with sigma the standard deviation (not the variance). The nominal point
/// mu must itself be a valid ParameterSet.
struct ParameterDistribution {
    std::array<double, kNumParams> mu{};
    std::array<double, kNumParams> sigma{};

    /// Means and across-interval standard deviations of a schedule.
    static ParameterDistribution from_schedule(const ParameterSchedule& schedule) {
        return {schedule.means(), schedule.stdevs()};
    }
};

/// How the voltage-difference trace of one elementary effect is reduced to a
/// scalar. The signed time mean keeps opposite-sign effects visible (the
/// cancellation diagnostic); time RMS is sign-blind.
enum class TimeReduction { signed_mean, time_rms };

std::string to_string(TimeReduction r);

struct MorrisConfig {
    int n_runs = 1024;
    double delta = 1.0;  // perturbation in units of sigma_i
    std::uint64_t seed = 0;
    TimeReduction reduction = TimeReduction::signed_mean;
    bool resample_on_invalid = false;  // default: exclude and count
    int max_sample_attempts = 100;     // rejection / resampling budget
};

/// Per-(interval, parameter) aggregation over the N runs. xi/valid keep the
/// raw per-run effects for distribution plots; invalid entries hold NaN.
struct SensitivityCell {
    double morris_mean = 0.0;    // mean of xi over valid runs, volts
    double enhanced_mean = 0.0;  // mean of |xi| over valid runs, volts
    double stdev = 0.0;          // sample stdev of xi (n-1), volts
    int n_effective = 0;         // valid runs
    std::vector<double> xi;
    std::vector<std::uint8_t> valid;
};

struct SensitivityReport {
    std::vector<SocInterval> intervals;
    std::vector<std::array<SensitivityCell, kNumParams>> cells;  // per interval
    MorrisConfig config;

    [[nodiscard]] const SensitivityCell& cell(std::size_t interval,
                                              std::size_t param) const {
        return cells[interval][param];
    }
};

// ---------------------------------------------------------------------------
// Generic screening engine.
//
// One run: draw a start point theta by sampling every component from its
// marginal, then for each parameter i form theta_hat_i by adding
// delta * sigma_i to component i alone and score
//
//     xi_i = reduce( y(t; theta) - y(t; theta_hat_i) ) / delta.
//
// Note the sign: the unperturbed output comes first, so an output that grows
// with the parameter yields negative xi. Repeating over n_runs start points
// turns the one-at-a-time measurement into a global screen; the enhanced
// variant averages |xi| so opposite-sign effects cannot cancel.
// ---------------------------------------------------------------------------

/// One screened parameter of the generic engine.
struct ScreenParam {
    std::string name;
    double mu = 0.0;
    double sigma = 1.0;
    bool require_positive = false;
};

/// Model under screening: fills `out` (fixed length per problem) for the
/// given parameter vector and returns false when the run must be discarded
/// (e.g. the simulation clamped SOC).
using ScreenModel =
    std::function<bool(const std::vector<double>& theta, std::vector<double>& out)>;

/// Runs the engine for one context. `stream` salts the per-run substream
/// seeds so different contexts (SOC intervals) draw independent points while
/// remaining reproducible; results are bitwise independent of `workers`.
std::vector<SensitivityCell> morris_screen(const std::vector<ScreenParam>& params,
                                           const ScreenModel& model,
                                           std::size_t trace_len,
                                           const MorrisConfig& cfg,
                                           std::uint64_t stream, int workers = 0);

/// Start point sampled from the marginals; draws with any non-positive
/// component (where positivity is required) are rejected and redrawn, up to
/// cfg.max_sample_attempts. Throws SamplingError when the budget runs out.
std::vector<double> sample_start_point(const std::vector<ScreenParam>& params,
                                       rng::Xoshiro256pp& gen, int max_attempts);

// ---------------------------------------------------------------------------
// ECM screening.
// ---------------------------------------------------------------------------

/// Shared simulation context: profile, OCV and capacity. Each interval run
/// starts rested (v1 = v2 = 0) at the interval midpoint SOC.
struct MorrisContext {
    const CurrentProfile& profile;
    const OcvCurve& ocv;
    double capacity_q;
};

/// ECM parameter draw as a ParameterSet (positivity enforced by rejection).
ParameterSet sample_start_point(const ParameterDistribution& dist,
                                rng::Xoshiro256pp& gen, int max_attempts = 100);

/// One elementary effect of parameter `index` from start point `theta` for a
/// single simulation context. Exposed for the affinity diagnostics; the
/// batched path is run_morris.
double elementary_effect(const std::array<double, kNumParams>& theta, std::size_t index,
                         const ParameterDistribution& dist, const MorrisConfig& cfg,
                         const SimCache& cache);

/// Morris / enhanced-Morris screen of the terminal voltage for every SOC
/// interval. Throws RangeError when every run of some (interval, parameter)
/// cell is invalid.
SensitivityReport run_morris(const ParameterDistribution& dist, const MorrisConfig& cfg,
                             const MorrisContext& ctx,
                             const std::vector<SocInterval>& intervals, int workers = 0);

/// Parameter indices per interval, sorted by descending enhanced mean; ties
/// break alphabetically by parameter name.
std::vector<std::array<std::size_t, kNumParams>> rank_parameters(
    const SensitivityReport& report);

// ---------------------------------------------------------------------------
// Linear demonstration: y = theta1 + 5 theta2 with theta1 ~ N(0,10),
// theta2 ~ N(0,1). Every elementary effect equals -sigma_i dy/dtheta_i
// (-10 and -5) exactly, for any start point and any delta, which pins the
// engine's sign convention and scaling.
// ---------------------------------------------------------------------------

struct LinearDemoResult {
    std::array<double, 2> morris_mean{};
    std::array<double, 2> enhanced_mean{};
    std::array<double, 2> stdev{};
    std::array<int, 2> n_effective{};
};

LinearDemoResult run_linear_demo(const MorrisConfig& cfg, int workers = 0);

}  // namespace ecmsense
