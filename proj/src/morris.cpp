#include "ecmsense/morris.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "ecmsense/rng.hpp"
#include "ecmsense/threads.hpp"

namespace ecmsense {

namespace {

void validate_config(const MorrisConfig& cfg) {
    if (cfg.n_runs < 1) throw InvalidInput("MorrisConfig: n_runs must be >= 1");
    if (!std::isfinite(cfg.delta) || cfg.delta <= 0.0) {
        throw InvalidInput("MorrisConfig: delta must be finite and > 0");
    }
    if (cfg.max_sample_attempts < 1) {
        throw InvalidInput("MorrisConfig: max_sample_attempts must be >= 1");
    }
}

double reduce_difference(const std::vector<double>& base, const std::vector<double>& pert,
                         TimeReduction reduction) {
    const std::size_t n = base.size();
    if (reduction == TimeReduction::signed_mean) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += base[k] - pert[k];
        return s / static_cast<double>(n);
    }
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = base[k] - pert[k];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(n));
}

}  // namespace

std::string to_string(TimeReduction r) {
    return r == TimeReduction::signed_mean ? "mean" : "rms";
}

std::vector<double> sample_start_point(const std::vector<ScreenParam>& params,
                                       rng::Xoshiro256pp& gen, int max_attempts) {
    std::vector<double> theta(params.size());
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        bool ok = true;
        for (std::size_t i = 0; i < params.size(); ++i) {
            theta[i] = gen.normal(params[i].mu, params[i].sigma);
            if (params[i].require_positive && theta[i] <= 0.0) ok = false;
        }
        if (ok) return theta;
    }
    throw SamplingError(
        "sample_start_point: rejection budget exhausted; a sigma is too large "
        "relative to its mean (consider truncating sigma)");
}

ParameterSet sample_start_point(const ParameterDistribution& dist,
                                rng::Xoshiro256pp& gen, int max_attempts) {
    std::vector<ScreenParam> specs(kNumParams);
    for (std::size_t i = 0; i < kNumParams; ++i) {
        specs[i] = {kParamNames[i], dist.mu[i], dist.sigma[i], true};
    }
    const auto theta = sample_start_point(specs, gen, max_attempts);
    return ParameterSet(theta[kTau1], theta[kTau2], theta[kC1], theta[kC2],
                        theta[kRs]);
}

std::vector<SensitivityCell> morris_screen(const std::vector<ScreenParam>& params,
                                           const ScreenModel& model,
                                           std::size_t trace_len,
                                           const MorrisConfig& cfg,
                                           std::uint64_t stream, int workers) {
    validate_config(cfg);
    const std::size_t q = params.size();
    const std::size_t n_runs = static_cast<std::size_t>(cfg.n_runs);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    std::vector<SensitivityCell> cells(q);
    for (auto& c : cells) {
        c.xi.assign(n_runs, nan);
        c.valid.assign(n_runs, 0);
    }

    parallel_for_indexed(n_runs, workers, [&](std::size_t run) {
        rng::Xoshiro256pp gen(rng::substream_seed(cfg.seed, stream, run));
        std::vector<double> base(trace_len);
        std::vector<double> pert(trace_len);
        std::vector<double> run_xi(q, nan);
        std::vector<std::uint8_t> run_valid(q, 0);

        const int attempts = cfg.resample_on_invalid ? cfg.max_sample_attempts : 1;
        for (int attempt = 0; attempt < attempts; ++attempt) {
            std::vector<double> theta =
                sample_start_point(params, gen, cfg.max_sample_attempts);
            const bool base_ok = model(theta, base);
            bool all_ok = true;
            for (std::size_t i = 0; i < q; ++i) {
                run_xi[i] = nan;
                run_valid[i] = 0;
                if (!base_ok) {
                    all_ok = false;
                    continue;
                }
                if (params[i].sigma == 0.0) {
                    // No perturbation: the effect is identically zero.
                    run_xi[i] = 0.0;
                    run_valid[i] = 1;
                    continue;
                }
                const double save = theta[i];
                theta[i] = save + cfg.delta * params[i].sigma;
                bool ok = !(params[i].require_positive && theta[i] <= 0.0);
                if (ok) ok = model(theta, pert);
                theta[i] = save;
                if (!ok) {
                    all_ok = false;
                    continue;
                }
                run_xi[i] = reduce_difference(base, pert, cfg.reduction) / cfg.delta;
                run_valid[i] = 1;
            }
            if (all_ok) break;
            // resample_on_invalid: fall through and redraw a fresh start point;
            // after the budget the last (partially invalid) attempt stands.
        }
        for (std::size_t i = 0; i < q; ++i) {
            cells[i].xi[run] = run_xi[i];
            cells[i].valid[run] = run_valid[i];
        }
    });

    // Deterministic ordered reduction over run index.
    for (std::size_t i = 0; i < q; ++i) {
        SensitivityCell& c = cells[i];
        double sum = 0.0;
        double sum_abs = 0.0;
        int n_eff = 0;
        for (std::size_t run = 0; run < n_runs; ++run) {
            if (!c.valid[run]) continue;
            sum += c.xi[run];
            sum_abs += std::abs(c.xi[run]);
            ++n_eff;
        }
        c.n_effective = n_eff;
        if (n_eff == 0) {
            throw RangeError("morris_screen: all runs invalid for parameter " +
                             params[i].name);
        }
        c.morris_mean = sum / n_eff;
        c.enhanced_mean = sum_abs / n_eff;
        if (n_eff >= 2) {
            double ss = 0.0;
            for (std::size_t run = 0; run < n_runs; ++run) {
                if (!c.valid[run]) continue;
                const double d = c.xi[run] - c.morris_mean;
                ss += d * d;
            }
            c.stdev = std::sqrt(ss / (n_eff - 1));
        }
    }
    return cells;
}

double elementary_effect(const std::array<double, kNumParams>& theta, std::size_t index,
                         const ParameterDistribution& dist, const MorrisConfig& cfg,
                         const SimCache& cache) {
    validate_config(cfg);
    if (index >= kNumParams) throw InvalidInput("elementary_effect: bad index");
    if (cache.clamped) {
        throw RangeError("elementary_effect: SOC clamped; run is invalid");
    }
    if (dist.sigma[index] == 0.0) return 0.0;

    auto pert = theta;
    pert[index] += cfg.delta * dist.sigma[index];
    if (pert[index] <= 0.0) {
        throw InvalidInput("elementary_effect: perturbed parameter is non-positive");
    }
    const std::size_t n = cache.size();
    std::vector<double> base(n);
    std::vector<double> shifted(n);
    simulate_cached(cache, ParameterSet::from_array(theta), base.data());
    simulate_cached(cache, ParameterSet::from_array(pert), shifted.data());
    return reduce_difference(base, shifted, cfg.reduction) / cfg.delta;
}

SensitivityReport run_morris(const ParameterDistribution& dist, const MorrisConfig& cfg,
                             const MorrisContext& ctx,
                             const std::vector<SocInterval>& intervals, int workers) {
    validate_config(cfg);
    if (intervals.empty()) throw InvalidInput("run_morris: no SOC intervals");
    // The nominal point must be a usable parameter set; sigmas must be sane.
    (void)ParameterSet::from_array(dist.mu);
    for (double s : dist.sigma) {
        if (!std::isfinite(s) || s < 0.0) {
            throw InvalidInput("run_morris: sigma must be finite and >= 0");
        }
    }

    std::vector<ScreenParam> specs(kNumParams);
    for (std::size_t i = 0; i < kNumParams; ++i) {
        specs[i] = {kParamNames[i], dist.mu[i], dist.sigma[i], true};
    }

    SensitivityReport report;
    report.intervals = intervals;
    report.config = cfg;
    report.cells.reserve(intervals.size());

    for (std::size_t j = 0; j < intervals.size(); ++j) {
        const double z0 = intervals[j].midpoint_fraction();
        const SimCache cache =
            build_sim_cache(ctx.profile, ctx.ocv, ctx.capacity_q, z0);
        const ScreenModel model = [&cache](const std::vector<double>& theta,
                                           std::vector<double>& out) {
            if (cache.clamped) return false;
            simulate_cached(cache,
                            ParameterSet(theta[kTau1], theta[kTau2], theta[kC1],
                                         theta[kC2], theta[kRs]),
                            out.data());
            return true;
        };
        try {
            auto cells = morris_screen(specs, model, cache.size(), cfg,
                                       /*stream=*/j, workers);
            std::array<SensitivityCell, kNumParams> row;
            for (std::size_t i = 0; i < kNumParams; ++i) row[i] = std::move(cells[i]);
            report.cells.push_back(std::move(row));
        } catch (const RangeError& e) {
            throw RangeError(std::string(e.what()) + " in SOC interval [" +
                             std::to_string(intervals[j].hi_pct) + "," +
                             std::to_string(intervals[j].lo_pct) + ")");
        }
    }
    return report;
}

std::vector<std::array<std::size_t, kNumParams>> rank_parameters(
    const SensitivityReport& report) {
    if (report.cells.empty()) throw InvalidInput("rank_parameters: empty report");
    std::vector<std::array<std::size_t, kNumParams>> ranks;
    ranks.reserve(report.cells.size());
    for (const auto& row : report.cells) {
        std::array<std::size_t, kNumParams> order{0, 1, 2, 3, 4};
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (row[a].enhanced_mean != row[b].enhanced_mean) {
                return row[a].enhanced_mean > row[b].enhanced_mean;
            }
            return std::strcmp(kParamNames[a], kParamNames[b]) < 0;
        });
        ranks.push_back(order);
    }
    return ranks;
}

LinearDemoResult run_linear_demo(const MorrisConfig& cfg, int workers) {
    const std::vector<ScreenParam> specs{{"theta1", 0.0, 10.0, false},
                                         {"theta2", 0.0, 1.0, false}};
    const ScreenModel model = [](const std::vector<double>& theta,
                                 std::vector<double>& out) {
        out[0] = theta[0] + 5.0 * theta[1];
        return true;
    };
    const auto cells = morris_screen(specs, model, 1, cfg, /*stream=*/0, workers);
    LinearDemoResult res;
    for (std::size_t i = 0; i < 2; ++i) {
        res.morris_mean[i] = cells[i].morris_mean;
        res.enhanced_mean[i] = cells[i].enhanced_mean;
        res.stdev[i] = cells[i].stdev;
        res.n_effective[i] = cells[i].n_effective;
    }
    return res;
}

}  // namespace ecmsense
