#pragma once

#include <cstdint>
#include <optional>

#include "ecmsense/ecm.hpp"

namespace ecmsense {

enum class CycleKind { fuds_like, udc_like, constant, prbs };

CycleKind cycle_kind_from_string(const std::string& s);
std::string to_string(CycleKind k);

/// Synthetic drive-cycle recipe. fuds_like and udc_like are seeded sums of
/// smoothed random pulses (urban stop-and-go surrogates, net discharge);
/// when mean_a is set the sample mean is normalized to it exactly, which
/// makes the total charge throughput a closed-form quantity.
struct CycleSpec {
    CycleKind kind = CycleKind::fuds_like;
    double duration_s = 1332.0;
    double dt = 1.0;
    double scale_a = 1.0;                // fluctuation amplitude (peak-ish)
    std::optional<double> mean_a;        // exact sample mean; default 0.25*scale
    double prbs_bit_s = 10.0;
    std::uint64_t seed = 0;
    double start_time = 0.0;
};

CurrentProfile generate_synthetic_cycle(const CycleSpec& spec);

/// Ground-truth voltage factory for tests and demos: simulate a known cell
/// and overlay seeded Gaussian noise of the given RMS.
VoltageTrace generate_synthetic_cell(const ParameterSchedule& truth, const OcvCurve& ocv,
                                     double capacity_q, const CurrentProfile& profile,
                                     double noise_rms, std::uint64_t seed,
                                     const CellState& init = {0.0, 0.0, 1.0});

/// Reference OCV shape shipped with the toolkit: a linear ramp plus a
/// logistic low-SOC knee, spanning roughly 3.1-4.2 V.
double synthetic_ocv_voltage(double z);

/// Sampled sweep of the reference shape with a +/- hysteresis_v offset
/// (charge above, discharge below).
OcvSweep synthetic_ocv_sweep(SweepDirection direction, int n_points = 231,
                             double z_lo = 0.08, double z_hi = 1.0,
                             double hysteresis_v = 0.010);

/// Built-in synthetic cell: nine identification intervals [100,90)...[20,10)
/// plus a [10,0) guard so simulations may run slightly past 10% SOC. The
/// values ramp with SOC and are sized so the series resistance dominates the
/// output uncertainty and tau2 comes second.
ParameterSchedule synthetic_cell_schedule();

/// The nine identification intervals of synthetic_cell_schedule (guard
/// interval excluded), matching edges 100..10 step 10.
std::vector<SocInterval> standard_intervals();

std::vector<double> standard_edges_pct();

}  // namespace ecmsense
