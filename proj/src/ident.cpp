#include "ecmsense/ident.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace ecmsense {

namespace {

std::vector<std::uint8_t> rest_mask(const CurrentProfile& profile, double threshold_a,
                                    double min_duration_s) {
    const std::size_t n = profile.samples.size();
    std::vector<std::uint8_t> mask(n, 0);
    std::size_t k = 0;
    while (k < n) {
        if (std::abs(profile.samples[k]) >= threshold_a) {
            ++k;
            continue;
        }
        std::size_t e = k;
        while (e < n && std::abs(profile.samples[e]) < threshold_a) ++e;
        if (static_cast<double>(e - k) * profile.dt > min_duration_s) {
            std::fill(mask.begin() + k, mask.begin() + e, std::uint8_t{1});
        }
        k = e;
    }
    return mask;
}

// Longest contiguous non-rest run within [begin, end); returns {begin, begin}
// when everything is rest.
std::pair<std::size_t, std::size_t> longest_active_run(
    const std::vector<std::uint8_t>& rest, std::size_t begin, std::size_t end) {
    std::size_t best_a = begin;
    std::size_t best_b = begin;
    std::size_t k = begin;
    while (k < end) {
        if (rest[k]) {
            ++k;
            continue;
        }
        std::size_t e = k;
        while (e < end && !rest[e]) ++e;
        if (e - k > best_b - best_a) {
            best_a = k;
            best_b = e;
        }
        k = e;
    }
    return {best_a, best_b};
}

double peak_pair_voltage(const CurrentProfile& profile, double tau, double c) {
    const double a = std::exp(-profile.dt / tau);
    const double g = tau / c * (1.0 - a);
    double v = 0.0;
    double peak = 0.0;
    for (double i : profile.samples) {
        v = v * a + g * i;
        peak = std::max(peak, std::abs(v));
    }
    return peak;
}

}  // namespace

SegmentationResult segment_by_soc(const CurrentProfile& profile,
                                  const VoltageTrace& voltage, double capacity_q,
                                  double z0, const std::vector<double>& edges_pct,
                                  const SegmentationOptions& options) {
    validate_profile(profile);
    validate_aligned(profile, voltage);
    if (edges_pct.size() < 2) {
        throw InvalidInput("segment_by_soc: need at least two SOC edges");
    }
    for (std::size_t j = 1; j < edges_pct.size(); ++j) {
        if (!(edges_pct[j] < edges_pct[j - 1])) {
            throw InvalidInput("segment_by_soc: edges must be strictly descending");
        }
    }
    if (z0 * 100.0 < edges_pct.front()) {
        throw InvalidInput("segment_by_soc: z0 below the first edge");
    }

    const std::vector<double> z = coulomb_count(profile, capacity_q, z0);
    const double thr = options.rest_current_a > 0.0
                           ? options.rest_current_a
                           : capacity_q / 3600.0 / 500.0;  // C/500 rate
    const auto rest = rest_mask(profile, thr, options.rest_min_duration_s);

    const std::size_t n = profile.samples.size();
    SegmentationResult result;

    // cut[j]: first sample whose pre-sample SOC is <= edges[j].
    std::vector<std::size_t> cut(edges_pct.size(), n);
    std::size_t k = 0;
    for (std::size_t j = 0; j < edges_pct.size(); ++j) {
        while (k < n && z[k] * 100.0 > edges_pct[j]) ++k;
        cut[j] = k;
    }
    if (cut[1] >= n) {
        result.warnings.push_back(
            "SOC never crossed an interval edge; no segments produced");
        return result;
    }
    result.full_coverage = cut.back() < n;

    for (std::size_t j = 0; j + 1 < edges_pct.size(); ++j) {
        const std::size_t a = cut[j];
        const std::size_t b = cut[j + 1];  // == n when data ended early
        if (a >= n) break;
        const auto [ra, rb] = longest_active_run(rest, a, std::min(b, n));
        if (rb - ra < 2) continue;
        // Detect a rest that split the span (more active samples than kept).
        std::size_t active = 0;
        for (std::size_t i = a; i < std::min(b, n); ++i) active += rest[i] ? 0u : 1u;
        if (active > rb - ra) {
            result.warnings.push_back("mid-segment rest in interval [" +
                                      std::to_string(edges_pct[j]) + "," +
                                      std::to_string(edges_pct[j + 1]) +
                                      "); kept the longest contiguous run");
        }

        Segment seg;
        seg.profile.dt = profile.dt;
        seg.profile.start_time =
            profile.start_time + static_cast<double>(ra) * profile.dt;
        seg.profile.samples.assign(profile.samples.begin() + ra,
                                   profile.samples.begin() + rb);
        seg.voltage.dt = voltage.dt;
        seg.voltage.samples.assign(voltage.samples.begin() + ra,
                                   voltage.samples.begin() + rb);
        seg.soc_interval = {edges_pct[j], edges_pct[j + 1]};
        seg.z_start = z[ra];
        seg.start_index = ra;
        result.segments.push_back(std::move(seg));
    }
    if (!result.full_coverage) {
        result.warnings.push_back("data ends before the last SOC edge; produced " +
                                  std::to_string(result.segments.size()) +
                                  " segment(s)");
    }
    return result;
}

ParameterSet default_initial_guess(const Segment& segment) {
    const auto& i = segment.profile.samples;
    const auto& v = segment.voltage.samples;
    double rs = 0.01;
    double best_di = 0.0;
    for (std::size_t k = 1; k < i.size() && k < v.size(); ++k) {
        const double di = i[k] - i[k - 1];
        if (std::abs(di) > std::abs(best_di)) {
            best_di = di;
            const double cand = -(v[k] - v[k - 1]) / di;
            if (std::isfinite(cand) && cand > 0.0) {
                rs = std::clamp(cand, 1e-5, 10.0);
            }
        }
    }
    return ParameterSet(10.0, 100.0, 1000.0, 1000.0, rs);
}

FitReport identify_segment(const Segment& segment, const OcvCurve& ocv,
                           double capacity_q, const ParameterSet& init_guess,
                           const IdentOptions& options) {
    validate_profile(segment.profile);
    validate_aligned(segment.profile, segment.voltage);
    if (segment.profile.samples.size() < 50) {
        throw InvalidInput("identify_segment: segment must have >= 50 samples");
    }

    const SimCache cache =
        build_sim_cache(segment.profile, ocv, capacity_q, segment.z_start);
    const std::size_t n = cache.size();
    const Eigen::Map<const Eigen::VectorXd> v_meas(segment.voltage.samples.data(), n);

    using Vec5 = Eigen::Matrix<double, 5, 1>;
    std::vector<double> buf(n);
    const auto residuals = [&](const Vec5& x, Eigen::VectorXd& r) {
        std::array<double, kNumParams> p{};
        for (std::size_t i = 0; i < kNumParams; ++i) p[i] = std::exp(x(i));
        simulate_cached(cache, ParameterSet::from_array(p), buf.data());
        r = Eigen::Map<const Eigen::VectorXd>(buf.data(), n) - v_meas;
    };

    Vec5 x;
    {
        const auto g = init_guess.to_array();
        for (std::size_t i = 0; i < kNumParams; ++i) x(i) = std::log(g[i]);
    }

    Eigen::VectorXd r(n), r_trial(n), r_fd(n);
    residuals(x, r);
    double f = r.squaredNorm();

    FitReport report{init_guess};
    report.objective_history.push_back(f);

    double lambda = 1e-3;
    bool converged = false;
    int iter = 0;
    Eigen::MatrixXd jac(n, 5);
    while (iter < options.max_iterations && !converged) {
        ++iter;
        // Forward-difference Jacobian in log-parameter space.
        for (int i = 0; i < 5; ++i) {
            Vec5 xp = x;
            xp(i) += options.fd_step;
            residuals(xp, r_fd);
            jac.col(i) = (r_fd - r) / options.fd_step;
        }
        const Eigen::Matrix<double, 5, 5> hess = jac.transpose() * jac;
        const Vec5 grad = jac.transpose() * r;

        bool accepted = false;
        while (!accepted) {
            Eigen::Matrix<double, 5, 5> damped = hess;
            for (int i = 0; i < 5; ++i) {
                damped(i, i) += lambda * std::max(hess(i, i), 1e-30);
            }
            const Vec5 delta = damped.ldlt().solve(-grad);
            const Vec5 x_trial = x + delta;
            residuals(x_trial, r_trial);
            const double f_trial = r_trial.squaredNorm();
            if (f_trial < f) {
                accepted = true;
                const double decrease =
                    (f - f_trial) / std::max(f, std::numeric_limits<double>::min());
                const double step_rel = delta.norm() / std::max(1.0, x.norm());
                x = x_trial;
                r.swap(r_trial);
                f = f_trial;
                report.objective_history.push_back(f);
                lambda = std::max(lambda / 3.0, 1e-12);
                if (decrease < options.rel_objective_tol ||
                    step_rel < options.rel_step_tol) {
                    converged = true;
                }
            } else {
                lambda *= 4.0;
                if (lambda > 1e12) {
                    // No descent direction left at this point: the step has
                    // collapsed below any meaningful size.
                    converged = true;
                    break;
                }
            }
        }
    }

    std::array<double, kNumParams> p{};
    for (std::size_t i = 0; i < kNumParams; ++i) p[i] = std::exp(x(i));
    report.params = ParameterSet::from_array(p);
    report.iterations = iter;
    report.converged = converged;
    report.rmse = std::sqrt(f / static_cast<double>(n));
    report.max_abs = r.cwiseAbs().maxCoeff();

    if (std::abs(std::log(report.params.tau1) - std::log(report.params.tau2)) < 1e-3) {
        report.warnings.push_back(
            "degenerate fit: time constants tau1 and tau2 are indistinguishable");
    }
    const double scale = std::max(report.max_abs, 1e-6);
    if (peak_pair_voltage(segment.profile, report.params.tau1, report.params.c1) <
        std::max(1e-9, 1e-4 * scale)) {
        report.warnings.push_back(
            "degenerate fit: first RC pair contributes negligibly to the output");
    }
    if (peak_pair_voltage(segment.profile, report.params.tau2, report.params.c2) <
        std::max(1e-9, 1e-4 * scale)) {
        report.warnings.push_back(
            "degenerate fit: second RC pair contributes negligibly to the output");
    }
    return report;
}

ParameterSchedule build_schedule(
    const std::vector<std::pair<SocInterval, FitReport>>& reports) {
    if (reports.empty()) throw InvalidInput("build_schedule: no reports");
    std::vector<std::pair<SocInterval, ParameterSet>> entries;
    entries.reserve(reports.size());
    for (const auto& [iv, rep] : reports) entries.emplace_back(iv, rep.params);
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first.hi_pct > b.first.hi_pct; });
    return ParameterSchedule(std::move(entries));
}

std::vector<CaseMetrics> validate_cases(
    const CurrentProfile& profile, const VoltageTrace& voltage,
    const ParameterSchedule& schedule, const OcvCurve& ocv, double capacity_q,
    double z0, const std::vector<std::array<bool, kNumParams>>& fix_masks) {
    validate_profile(profile);
    validate_aligned(profile, voltage);
    std::vector<CaseMetrics> out;
    out.reserve(fix_masks.size());
    for (const auto& mask : fix_masks) {
        const ParameterSchedule sched = schedule.with_fixed(mask);
        const CellConfig cfg{capacity_q, ocv, sched};
        const SimResult sim = simulate(profile, cfg, CellState{0.0, 0.0, z0});
        CaseMetrics m;
        double ss = 0.0;
        for (std::size_t k = 0; k < voltage.samples.size(); ++k) {
            const double r = sim.trace.samples[k] - voltage.samples[k];
            ss += r * r;
            m.max_abs = std::max(m.max_abs, std::abs(r));
        }
        m.rmse = std::sqrt(ss / static_cast<double>(voltage.samples.size()));
        out.push_back(m);
    }
    return out;
}

std::vector<std::array<bool, kNumParams>> standard_cases(
    std::optional<std::array<bool, kNumParams>> case2_mask) {
    std::array<bool, kNumParams> case2{};
    if (case2_mask) {
        case2 = *case2_mask;
    } else {
        case2[kTau1] = true;
        case2[kC1] = true;
        case2[kC2] = true;
    }
    std::array<bool, kNumParams> none{};
    std::array<bool, kNumParams> all{};
    all.fill(true);
    return {none, case2, all};
}

}  // namespace ecmsense
