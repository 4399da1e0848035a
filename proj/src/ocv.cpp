#include "ecmsense/ocv.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace ecmsense {

namespace {

void validate_sweep(const OcvSweep& sweep, bool require_monotone) {
    if (sweep.grid.size() != sweep.voltages.size()) {
        throw StructuralError("OcvSweep: grid and voltages differ in length");
    }
    if (sweep.grid.size() < 2) throw InvalidInput("OcvSweep: need at least 2 points");
    for (std::size_t i = 0; i < sweep.grid.size(); ++i) {
        if (!std::isfinite(sweep.grid[i]) || !std::isfinite(sweep.voltages[i])) {
            throw InvalidInput("OcvSweep: non-finite entry");
        }
    }
    if (require_monotone) {
        const bool ascending = sweep.grid.back() > sweep.grid.front();
        for (std::size_t i = 1; i < sweep.grid.size(); ++i) {
            const double d = sweep.grid[i] - sweep.grid[i - 1];
            if ((ascending && d <= 0.0) || (!ascending && d >= 0.0)) {
                throw InvalidInput("OcvSweep: grid must be strictly monotone");
            }
        }
    }
}

// Ascending-grid view of a sweep (copies only when reversed).
OcvSweep ascending(const OcvSweep& sweep) {
    if (sweep.grid.front() <= sweep.grid.back()) return sweep;
    OcvSweep out = sweep;
    std::reverse(out.grid.begin(), out.grid.end());
    std::reverse(out.voltages.begin(), out.voltages.end());
    return out;
}

double interp_linear(const std::vector<double>& xs, const std::vector<double>& ys,
                     double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    const std::size_t lo = hi - 1;
    const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + t * (ys[hi] - ys[lo]);
}

}  // namespace

std::string to_string(SweepDirection d) {
    switch (d) {
        case SweepDirection::charge: return "charge";
        case SweepDirection::discharge: return "discharge";
        case SweepDirection::averaged: return "averaged";
    }
    return "unknown";
}

OcvSweep average_sweeps(const OcvSweep& charge, const OcvSweep& discharge) {
    validate_sweep(charge, true);
    validate_sweep(discharge, true);
    const OcvSweep a = ascending(charge);
    const OcvSweep b = ascending(discharge);

    const double lo = std::max(a.grid.front(), b.grid.front());
    const double hi = std::min(a.grid.back(), b.grid.back());
    if (lo >= hi) throw RangeError("average_sweeps: sweep SOC ranges are disjoint");

    const std::size_t n = std::max(a.grid.size(), b.grid.size());
    OcvSweep out;
    out.direction = SweepDirection::averaged;
    out.grid.resize(n);
    out.voltages.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = lo + (hi - lo) * static_cast<double>(i) /
                                  static_cast<double>(n - 1);
        out.grid[i] = z;
        out.voltages[i] = 0.5 * (interp_linear(a.grid, a.voltages, z) +
                                 interp_linear(b.grid, b.voltages, z));
    }
    return out;
}

OcvCurve fit_polynomial(const OcvSweep& sweep, int degree) {
    validate_sweep(sweep, false);
    if (degree < 1) throw InvalidInput("fit_polynomial: degree must be >= 1");
    const std::size_t m = sweep.grid.size();
    const std::size_t cols = static_cast<std::size_t>(degree) + 1;
    if (m < cols) {
        throw InvalidInput("fit_polynomial: need at least degree+1 samples");
    }

    Eigen::MatrixXd vand(m, cols);
    Eigen::VectorXd rhs(m);
    for (std::size_t r = 0; r < m; ++r) {
        double p = 1.0;
        for (std::size_t c = 0; c < cols; ++c) {
            vand(r, c) = p;
            p *= sweep.grid[r];
        }
        rhs(r) = sweep.voltages[r];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vand);
    // Vandermonde columns on [0,1] are poorly scaled; judge rank against a
    // threshold that only trips on genuinely repeated abscissae.
    qr.setThreshold(1e-13);
    if (qr.rank() < static_cast<Eigen::Index>(cols)) {
        throw ConditioningError(
            "fit_polynomial: rank-deficient design (fewer distinct SOC points than "
            "coefficients)");
    }
    const Eigen::VectorXd coeffs = qr.solve(rhs);

    OcvCurve curve;
    curve.coefficients.assign(coeffs.data(), coeffs.data() + cols);
    const auto [mn, mx] = std::minmax_element(sweep.grid.begin(), sweep.grid.end());
    curve.z_lo = *mn;
    curve.z_hi = *mx;
    return curve;
}

double eval_ocv(const OcvCurve& curve, double z) {
    if (curve.coefficients.empty()) throw InvalidInput("eval_ocv: empty curve");
    if (!std::isfinite(z) || z < curve.z_lo || z > curve.z_hi) {
        throw RangeError("eval_ocv: z outside curve valid range");
    }
    double v = 0.0;
    for (std::size_t i = curve.coefficients.size(); i-- > 0;) {
        v = v * z + curve.coefficients[i];
    }
    return v;
}

double eval_ocv_derivative(const OcvCurve& curve, double z) {
    if (curve.coefficients.empty()) throw InvalidInput("eval_ocv: empty curve");
    if (!std::isfinite(z) || z < curve.z_lo || z > curve.z_hi) {
        throw RangeError("eval_ocv_derivative: z outside curve valid range");
    }
    double v = 0.0;
    for (std::size_t i = curve.coefficients.size(); i-- > 1;) {
        v = v * z + curve.coefficients[i] * static_cast<double>(i);
    }
    return v;
}

FitQuality fit_metrics(const OcvCurve& curve, const OcvSweep& sweep) {
    validate_sweep(sweep, false);
    FitQuality q;
    double ss = 0.0;
    for (std::size_t i = 0; i < sweep.grid.size(); ++i) {
        const double r = eval_ocv(curve, sweep.grid[i]) - sweep.voltages[i];
        ss += r * r;
        q.max_abs = std::max(q.max_abs, std::abs(r));
    }
    q.rmse = std::sqrt(ss / static_cast<double>(sweep.grid.size()));
    return q;
}

}  // namespace ecmsense
