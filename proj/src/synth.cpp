#include "ecmsense/synth.hpp"

#include <algorithm>
#include <cmath>

#include "ecmsense/rng.hpp"

namespace ecmsense {

namespace {

void boxcar_smooth(std::vector<double>& w, std::size_t half) {
    if (half == 0 || w.size() < 3) return;
    std::vector<double> out(w.size());
    const std::size_t n = w.size();
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t a = k >= half ? k - half : 0;
        const std::size_t b = std::min(n - 1, k + half);
        double s = 0.0;
        for (std::size_t j = a; j <= b; ++j) s += w[j];
        out[k] = s / static_cast<double>(b - a + 1);
    }
    w.swap(out);
}

struct PulseShape {
    double min_len_s, max_len_s;
    double positive_fraction;
    std::size_t smooth_half;  // boxcar half-width in samples at dt = 1 s
};

CurrentProfile pulse_train(const CycleSpec& spec, const PulseShape& shape) {
    const std::size_t n =
        std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(
                                     spec.duration_s / spec.dt)));
    rng::Xoshiro256pp gen(rng::substream_seed(spec.seed, 0x6379636cULL, 0));

    std::vector<double> w(n, 0.0);
    const std::size_t pulses = std::max<std::size_t>(
        4, static_cast<std::size_t>(spec.duration_s / (0.6 * shape.max_len_s)));
    for (std::size_t p = 0; p < pulses; ++p) {
        const double start_s = gen.uniform(0.0, spec.duration_s);
        const double len_s = gen.uniform(shape.min_len_s, shape.max_len_s);
        const double sign = gen.uniform01() < shape.positive_fraction ? 1.0 : -1.0;
        const double amp = sign * std::abs(gen.normal(1.0, 0.4));
        const std::size_t a = static_cast<std::size_t>(start_s / spec.dt);
        const std::size_t b =
            std::min(n, a + std::max<std::size_t>(
                             1, static_cast<std::size_t>(len_s / spec.dt)));
        for (std::size_t k = a; k < b; ++k) w[k] += amp;
    }
    const std::size_t half = std::max<std::size_t>(
        1, static_cast<std::size_t>(static_cast<double>(shape.smooth_half) / spec.dt));
    boxcar_smooth(w, half);
    boxcar_smooth(w, half);

    // Exact-mean normalization: fluctuation is zero-mean with unit peak, so
    // the sample mean equals mean_a and the charge throughput is closed-form.
    double mean = 0.0;
    for (double v : w) mean += v;
    mean /= static_cast<double>(n);
    double peak = 0.0;
    for (double& v : w) {
        v -= mean;
        peak = std::max(peak, std::abs(v));
    }
    const double target = spec.mean_a.value_or(0.25 * spec.scale_a);
    CurrentProfile out;
    out.dt = spec.dt;
    out.start_time = spec.start_time;
    out.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double f = peak > 0.0 ? w[k] / peak : 0.0;
        out.samples[k] = target + spec.scale_a * f;
    }
    return out;
}

}  // namespace

CycleKind cycle_kind_from_string(const std::string& s) {
    if (s == "fuds" || s == "fuds-like") return CycleKind::fuds_like;
    if (s == "udc" || s == "udc-like") return CycleKind::udc_like;
    if (s == "constant") return CycleKind::constant;
    if (s == "prbs") return CycleKind::prbs;
    throw InvalidInput("unknown cycle kind: " + s);
}

std::string to_string(CycleKind k) {
    switch (k) {
        case CycleKind::fuds_like: return "fuds-like";
        case CycleKind::udc_like: return "udc-like";
        case CycleKind::constant: return "constant";
        case CycleKind::prbs: return "prbs";
    }
    return "unknown";
}

CurrentProfile generate_synthetic_cycle(const CycleSpec& spec) {
    if (!(spec.duration_s > 0.0) || !(spec.dt > 0.0)) {
        throw InvalidInput("generate_synthetic_cycle: duration and dt must be > 0");
    }
    switch (spec.kind) {
        case CycleKind::fuds_like:
            // short stop-and-go pulses, occasional regenerative spikes
            return pulse_train(spec, {4.0, 30.0, 0.82, 3});
        case CycleKind::udc_like:
            // longer, smoother accelerations
            return pulse_train(spec, {15.0, 80.0, 0.85, 5});
        case CycleKind::constant: {
            CurrentProfile out;
            out.dt = spec.dt;
            out.start_time = spec.start_time;
            out.samples.assign(
                std::max<std::size_t>(
                    2, static_cast<std::size_t>(std::llround(spec.duration_s / spec.dt))),
                spec.scale_a);
            return out;
        }
        case CycleKind::prbs: {
            CurrentProfile out;
            out.dt = spec.dt;
            out.start_time = spec.start_time;
            const std::size_t n = std::max<std::size_t>(
                2, static_cast<std::size_t>(std::llround(spec.duration_s / spec.dt)));
            out.samples.resize(n);
            rng::Xoshiro256pp gen(rng::substream_seed(spec.seed, 0x70726273ULL, 0));
            const std::size_t bit =
                std::max<std::size_t>(1, static_cast<std::size_t>(spec.prbs_bit_s / spec.dt));
            double level = spec.scale_a;
            for (std::size_t k = 0; k < n; ++k) {
                if (k % bit == 0) {
                    level = (gen.next() & 1u) ? spec.scale_a : -spec.scale_a;
                }
                out.samples[k] = level;
            }
            return out;
        }
    }
    throw InvalidInput("generate_synthetic_cycle: bad kind");
}

VoltageTrace generate_synthetic_cell(const ParameterSchedule& truth, const OcvCurve& ocv,
                                     double capacity_q, const CurrentProfile& profile,
                                     double noise_rms, std::uint64_t seed,
                                     const CellState& init) {
    if (noise_rms < 0.0 || !std::isfinite(noise_rms)) {
        throw InvalidInput("generate_synthetic_cell: noise_rms must be >= 0");
    }
    const CellConfig cfg{capacity_q, ocv, truth};
    SimResult sim = simulate(profile, cfg, init);
    if (noise_rms > 0.0) {
        rng::Xoshiro256pp gen(rng::substream_seed(seed, 0x6e6f697365ULL, 0));
        for (double& v : sim.trace.samples) v += noise_rms * gen.normal();
    }
    return std::move(sim.trace);
}

double synthetic_ocv_voltage(double z) {
    return 3.1 + 0.6 * z + 0.5 / (1.0 + std::exp(-(z - 0.10) / 0.04));
}

OcvSweep synthetic_ocv_sweep(SweepDirection direction, int n_points, double z_lo,
                             double z_hi, double hysteresis_v) {
    if (n_points < 2 || !(z_hi > z_lo)) {
        throw InvalidInput("synthetic_ocv_sweep: bad grid");
    }
    const double offset = direction == SweepDirection::charge
                              ? hysteresis_v
                              : direction == SweepDirection::discharge ? -hysteresis_v
                                                                       : 0.0;
    OcvSweep sweep;
    sweep.direction = direction;
    sweep.grid.resize(n_points);
    sweep.voltages.resize(n_points);
    for (int i = 0; i < n_points; ++i) {
        const double z = z_lo + (z_hi - z_lo) * static_cast<double>(i) /
                                    static_cast<double>(n_points - 1);
        sweep.grid[i] = z;
        sweep.voltages[i] = synthetic_ocv_voltage(z) + offset;
    }
    return sweep;
}

ParameterSchedule synthetic_cell_schedule() {
    std::vector<std::pair<SocInterval, ParameterSet>> entries;
    auto params_at = [](double midpoint_fraction) {
        const double u = 1.0 - midpoint_fraction;  // grows toward empty
        return ParameterSet(8.0 + 6.0 * u,     // tau1: 8.3 .. 13.1 s
                            60.0 + 120.0 * u,  // tau2: 66 .. 162 s
                            640.0 + 120.0 * u,  // c1
                            2200.0 + 600.0 * u,  // c2
                            0.05 + 0.06 * u);  // rs: 53 .. 101 mOhm
    };
    for (int hi = 100; hi >= 20; hi -= 10) {
        const SocInterval iv{static_cast<double>(hi), static_cast<double>(hi - 10)};
        entries.emplace_back(iv, params_at(iv.midpoint_fraction()));
    }
    // Guard interval so simulations may run slightly past 10% SOC; reuses the
    // lowest identification interval's values.
    entries.emplace_back(SocInterval{10.0, 0.0},
                         params_at(SocInterval{20.0, 10.0}.midpoint_fraction()));
    return ParameterSchedule(std::move(entries));
}

std::vector<SocInterval> standard_intervals() {
    std::vector<SocInterval> intervals;
    for (int hi = 100; hi >= 20; hi -= 10) {
        intervals.push_back({static_cast<double>(hi), static_cast<double>(hi - 10)});
    }
    return intervals;
}

std::vector<double> standard_edges_pct() {
    std::vector<double> edges;
    for (int e = 100; e >= 10; e -= 10) edges.push_back(e);
    return edges;
}

}  // namespace ecmsense
