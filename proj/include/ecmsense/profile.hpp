#pragma once

#include <vector>

#include "ecmsense/errors.hpp"

namespace ecmsense {

/// Uniformly sampled current time series. Sign convention: positive while
/// the cell is discharging, negative while charging.
struct CurrentProfile {
    double dt = 1.0;          // seconds
    double start_time = 0.0;  // seconds
    std::vector<double> samples;  // amperes

    [[nodiscard]] double duration() const {
        return samples.empty() ? 0.0 : dt * static_cast<double>(samples.size());
    }
};

/// Terminal voltage samples aligned to a CurrentProfile (same dt and length).
struct VoltageTrace {
    double dt = 1.0;
    std::vector<double> samples;  // volts
};

void validate_profile(const CurrentProfile& profile);
void validate_aligned(const CurrentProfile& profile, const VoltageTrace& trace);

/// Capacity unit conversion used at every interface boundary: capacities are
/// entered in mAh, stored and integrated in coulombs.
inline double coulombs_from_mah(double mah) { return mah * 3.6; }

}  // namespace ecmsense
