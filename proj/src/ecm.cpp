#include "ecmsense/ecm.hpp"

#include <cmath>
#include <string>

namespace ecmsense {

namespace {

void validate_state(const CellState& s) {
    if (!std::isfinite(s.v1) || !std::isfinite(s.v2) || !std::isfinite(s.z) ||
        s.z < 0.0 || s.z > 1.0) {
        throw InvalidInput("CellState: v1/v2 must be finite and z in [0,1]");
    }
}

void validate_capacity(double q) {
    if (!std::isfinite(q) || q <= 0.0) {
        throw InvalidInput("capacity must be finite and > 0 coulombs");
    }
}

struct RcGains {
    double a1, g1, a2, g2;  // decay factors and ZOH input gains

    RcGains(const ParameterSet& p, double dt)
        : a1(std::exp(-dt / p.tau1)),
          g1(p.tau1 / p.c1 * (1.0 - a1)),
          a2(std::exp(-dt / p.tau2)),
          g2(p.tau2 / p.c2 * (1.0 - a2)) {}
};

}  // namespace

void validate_profile(const CurrentProfile& profile) {
    if (!std::isfinite(profile.dt) || profile.dt <= 0.0) {
        throw InvalidInput("CurrentProfile: dt must be finite and > 0");
    }
    if (profile.samples.size() < 2) {
        throw InvalidInput("CurrentProfile: need at least 2 samples");
    }
    for (double v : profile.samples) {
        if (!std::isfinite(v)) throw InvalidInput("CurrentProfile: non-finite sample");
    }
}

void validate_aligned(const CurrentProfile& profile, const VoltageTrace& trace) {
    if (trace.samples.size() != profile.samples.size() || trace.dt != profile.dt) {
        throw StructuralError("VoltageTrace is not aligned to its CurrentProfile");
    }
}

StepResult step(const CellState& state, const ParameterSet& params, double capacity_q,
                double i_amps, double dt) {
    validate_state(state);
    validate_capacity(capacity_q);
    if (!std::isfinite(i_amps) || !std::isfinite(dt) || dt <= 0.0) {
        throw InvalidInput("step: current and dt must be finite, dt > 0");
    }
    const RcGains g(params, dt);
    StepResult out;
    out.state.v1 = state.v1 * g.a1 + g.g1 * i_amps;
    out.state.v2 = state.v2 * g.a2 + g.g2 * i_amps;
    double z = state.z - i_amps * dt / capacity_q;
    if (z < 0.0 || z > 1.0) {
        out.clamped = true;
        z = z < 0.0 ? 0.0 : 1.0;
    }
    out.state.z = z;
    return out;
}

SimResult simulate(const CurrentProfile& profile, const CellConfig& cfg,
                   const CellState& init) {
    validate_profile(profile);
    validate_state(init);
    validate_capacity(cfg.capacity_q);

    const std::size_t n = profile.samples.size();
    SimResult res;
    res.trace.dt = profile.dt;
    res.trace.samples.resize(n);

    CellState s = init;
    std::size_t k = 0;
    try {
        for (k = 0; k < n; ++k) {
            const double i = profile.samples[k];
            const ParameterSet p = cfg.schedule.lookup(s.z);
            res.trace.samples[k] = eval_ocv(cfg.ocv, s.z) - s.v1 - s.v2 - i * p.rs;

            const RcGains g(p, profile.dt);
            s.v1 = s.v1 * g.a1 + g.g1 * i;
            s.v2 = s.v2 * g.a2 + g.g2 * i;
            double z = s.z - i * profile.dt / cfg.capacity_q;
            if (z < 0.0 || z > 1.0) {
                ++res.clamp_events;
                if (res.first_clamp_index < 0) {
                    res.first_clamp_index = static_cast<std::ptrdiff_t>(k);
                }
                z = z < 0.0 ? 0.0 : 1.0;
            }
            s.z = z;
        }
    } catch (const RangeError& e) {
        throw RangeError(std::string(e.what()) + " at sample " + std::to_string(k));
    }
    return res;
}

SimResult simulate_constant(const CurrentProfile& profile, const ParameterSet& params,
                            const OcvCurve& ocv, double capacity_q,
                            const CellState& init) {
    validate_profile(profile);
    validate_state(init);
    validate_capacity(capacity_q);

    const std::size_t n = profile.samples.size();
    SimResult res;
    res.trace.dt = profile.dt;
    res.trace.samples.resize(n);

    const RcGains g(params, profile.dt);
    double v1 = init.v1;
    double v2 = init.v2;
    double z = init.z;
    std::size_t k = 0;
    try {
        for (k = 0; k < n; ++k) {
            const double i = profile.samples[k];
            res.trace.samples[k] = eval_ocv(ocv, z) - v1 - v2 - i * params.rs;
            v1 = v1 * g.a1 + g.g1 * i;
            v2 = v2 * g.a2 + g.g2 * i;
            double zn = z - i * profile.dt / capacity_q;
            if (zn < 0.0 || zn > 1.0) {
                ++res.clamp_events;
                if (res.first_clamp_index < 0) {
                    res.first_clamp_index = static_cast<std::ptrdiff_t>(k);
                }
                zn = zn < 0.0 ? 0.0 : 1.0;
            }
            z = zn;
        }
    } catch (const RangeError& e) {
        throw RangeError(std::string(e.what()) + " at sample " + std::to_string(k));
    }
    return res;
}

std::vector<double> coulomb_count(const CurrentProfile& profile, double capacity_q,
                                  double z0) {
    validate_profile(profile);
    validate_capacity(capacity_q);
    if (!std::isfinite(z0) || z0 < 0.0 || z0 > 1.0) {
        throw InvalidInput("coulomb_count: z0 must be in [0,1]");
    }
    std::vector<double> z(profile.samples.size() + 1);
    z[0] = z0;
    double acc = 0.0;  // running charge in coulombs
    for (std::size_t k = 0; k < profile.samples.size(); ++k) {
        acc += profile.samples[k] * profile.dt;
        z[k + 1] = z0 - acc / capacity_q;
    }
    return z;
}

SimCache build_sim_cache(const CurrentProfile& profile, const OcvCurve& ocv,
                         double capacity_q, double z0) {
    validate_profile(profile);
    validate_capacity(capacity_q);
    if (!std::isfinite(z0) || z0 < 0.0 || z0 > 1.0) {
        throw InvalidInput("build_sim_cache: z0 must be in [0,1]");
    }
    const std::size_t n = profile.samples.size();
    SimCache cache;
    cache.current = profile.samples;
    cache.dt = profile.dt;
    cache.ocv_of_z.resize(n);
    double z = z0;
    std::size_t k = 0;
    try {
        for (k = 0; k < n; ++k) {
            cache.ocv_of_z[k] = eval_ocv(ocv, z);
            double zn = z - profile.samples[k] * profile.dt / capacity_q;
            if (zn < 0.0 || zn > 1.0) {
                cache.clamped = true;
                zn = zn < 0.0 ? 0.0 : 1.0;
            }
            z = zn;
        }
    } catch (const RangeError& e) {
        throw RangeError(std::string(e.what()) + " at sample " + std::to_string(k));
    }
    return cache;
}

void simulate_cached(const SimCache& cache, const ParameterSet& params, double* out) {
    const RcGains g(params, cache.dt);
    double v1 = 0.0;
    double v2 = 0.0;
    const std::size_t n = cache.size();
    for (std::size_t k = 0; k < n; ++k) {
        const double i = cache.current[k];
        out[k] = cache.ocv_of_z[k] - v1 - v2 - i * params.rs;
        v1 = v1 * g.a1 + g.g1 * i;
        v2 = v2 * g.a2 + g.g2 * i;
    }
}

}  // namespace ecmsense
