#pragma once

#include <string>
#include <vector>

#include "ecmsense/errors.hpp"

namespace ecmsense {

enum class SweepDirection { charge, discharge, averaged };

std::string to_string(SweepDirection d);

/// One OCV(Z) sweep: SOC grid (fractions, strictly monotone) with voltages.
struct OcvSweep {
    std::vector<double> grid;      // SOC fractions
    std::vector<double> voltages;  // volts
    SweepDirection direction = SweepDirection::discharge;
};

/// Polynomial OCV(Z) model, monomial coefficients in ascending powers of the
/// SOC fraction. Evaluation is restricted to [z_lo, z_hi]; there is no
/// extrapolation.
struct OcvCurve {
    std::vector<double> coefficients;  // volts per Z^k, k = 0..degree
    double z_lo = 0.0;
    double z_hi = 1.0;

    [[nodiscard]] int degree() const {
        return static_cast<int>(coefficients.size()) - 1;
    }
};

/// Pointwise mean of a charge and a discharge sweep, taken on a common
/// uniform grid over the intersection of their SOC ranges (linear
/// interpolation before averaging). Throws RangeError for disjoint ranges.
OcvSweep average_sweeps(const OcvSweep& charge, const OcvSweep& discharge);

/// Least-squares polynomial fit of a sweep, solved by Householder QR (not
/// normal equations). The returned curve is valid over the sweep's range.
/// Throws ConditioningError when the grid does not support the degree.
OcvCurve fit_polynomial(const OcvSweep& sweep, int degree = 10);

/// Horner evaluation; z must lie inside the curve's valid range.
double eval_ocv(const OcvCurve& curve, double z);

/// Analytic derivative dV/dZ at z (same range restriction as eval_ocv).
double eval_ocv_derivative(const OcvCurve& curve, double z);

struct FitQuality {
    double rmse = 0.0;     // volts
    double max_abs = 0.0;  // volts
};

/// Residual statistics of a curve against a sweep inside the valid range.
FitQuality fit_metrics(const OcvCurve& curve, const OcvSweep& sweep);

}  // namespace ecmsense
