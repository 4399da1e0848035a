#pragma once

#include <cstddef>
#include <vector>

#include "ecmsense/ocv.hpp"
#include "ecmsense/params.hpp"
#include "ecmsense/profile.hpp"
#include "ecmsense/schedule.hpp"

namespace ecmsense {

/// Instantaneous cell state: RC pair voltages (volts) and SOC fraction.
struct CellState {
    double v1 = 0.0;
    double v2 = 0.0;
    double z = 1.0;
};

/// Everything the simulator needs besides the input current: capacity in
/// coulombs plus non-owning views of the OCV curve and parameter schedule.
struct CellConfig {
    double capacity_q;  // coulombs
    const OcvCurve& ocv;
    const ParameterSchedule& schedule;
};

struct StepResult {
    CellState state;
    bool clamped = false;  // SOC hit the [0,1] bound and was clamped
};

/// One exact zero-order-hold step of the RC states and Coulomb-counted SOC:
///   v' = v e^(-dt/tau) + (tau/c)(1 - e^(-dt/tau)) i
///   z' = clamp(z - i dt / q)
/// The update is the closed-form matrix exponential of the (diagonal)
/// continuous model, so constant-current simulation is exact at every sample
/// regardless of dt.
StepResult step(const CellState& state, const ParameterSet& params, double capacity_q,
                double i_amps, double dt);

struct SimResult {
    VoltageTrace trace;
    std::size_t clamp_events = 0;
    std::ptrdiff_t first_clamp_index = -1;

    [[nodiscard]] bool clamped() const { return clamp_events > 0; }
};

/// Terminal voltage over a current profile with schedule-driven parameters:
///   V[k] = OCV(z[k]) - v1[k] - v2[k] - I[k] * Rs(z[k])
/// evaluated with the state before step k. Parameters are looked up from the
/// schedule at the current SOC each sample. SOC clamping is flagged in the
/// result, not raised; leaving the OCV valid range or schedule coverage
/// raises RangeError naming the sample.
SimResult simulate(const CurrentProfile& profile, const CellConfig& cfg,
                   const CellState& init);

/// Same output equation with one fixed ParameterSet (no schedule), used by
/// identification and the sensitivity runs.
SimResult simulate_constant(const CurrentProfile& profile, const ParameterSet& params,
                            const OcvCurve& ocv, double capacity_q, const CellState& init);

/// Coulomb-counted SOC sequence, one value per sample plus the final state:
/// z[k] = z0 - (dt/q) * sum_{j<k} I[j]. Not clamped, so out-of-range
/// excursions stay visible to segmentation.
std::vector<double> coulomb_count(const CurrentProfile& profile, double capacity_q,
                                  double z0);

/// Parameter-independent per-sample context for repeated constant-parameter
/// simulations from a rested state (v1 = v2 = 0): the clamped SOC path, the
/// OCV along it, and whether clamping occurred. The SOC dynamics do not
/// depend on the five parameters, so this is shared across optimizer
/// iterations and Monte Carlo runs.
struct SimCache {
    std::vector<double> current;   // copy of the profile samples
    std::vector<double> ocv_of_z;  // OCV(z[k]) per sample
    double dt = 1.0;
    bool clamped = false;

    [[nodiscard]] std::size_t size() const { return current.size(); }
};

SimCache build_sim_cache(const CurrentProfile& profile, const OcvCurve& ocv,
                         double capacity_q, double z0);

/// Voltage trace for one parameter set against a prebuilt cache; out must
/// have cache.size() elements.
void simulate_cached(const SimCache& cache, const ParameterSet& params, double* out);

}  // namespace ecmsense
