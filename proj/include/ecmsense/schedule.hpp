#pragma once

#include <array>
#include <vector>

#include "ecmsense/params.hpp"

namespace ecmsense {

/// Half-open SOC interval in percent, descending: contains z with
/// lo_pct < z <= hi_pct.
struct SocInterval {
    double hi_pct = 100.0;
    double lo_pct = 90.0;

    [[nodiscard]] bool contains_pct(double z_pct) const {
        return z_pct > lo_pct && z_pct <= hi_pct;
    }
    [[nodiscard]] double midpoint_fraction() const {
        return 0.5 * (hi_pct + lo_pct) / 100.0;
    }
};

enum class ScheduleInterp { piecewise_constant, midpoint_linear };

/// Per-SOC-interval parameter table. Intervals are contiguous,
/// non-overlapping and descending; across-interval means and sample standard
/// deviations (n-1) are recomputed whenever the entries change. fixed_mask
/// marks parameters that validation replaces by their means.
class ParameterSchedule {
public:
    ParameterSchedule(std::vector<std::pair<SocInterval, ParameterSet>> entries,
                      std::array<bool, kNumParams> fixed_mask = {},
                      ScheduleInterp interp = ScheduleInterp::piecewise_constant);

    [[nodiscard]] const std::vector<std::pair<SocInterval, ParameterSet>>& entries() const {
        return entries_;
    }
    [[nodiscard]] const std::array<double, kNumParams>& means() const { return means_; }
    [[nodiscard]] const std::array<double, kNumParams>& stdevs() const { return stdevs_; }
    [[nodiscard]] ParameterSet mean_set() const { return ParameterSet::from_array(means_); }
    [[nodiscard]] const std::array<bool, kNumParams>& fixed_mask() const { return fixed_mask_; }
    [[nodiscard]] ScheduleInterp interp() const { return interp_; }
    void set_interp(ScheduleInterp interp) { interp_ = interp; }
    void set_fixed_mask(const std::array<bool, kNumParams>& mask) { fixed_mask_ = mask; }

    /// Coverage in percent: (lowest lo, highest hi].
    [[nodiscard]] double hi_pct() const { return entries_.front().first.hi_pct; }
    [[nodiscard]] double lo_pct() const { return entries_.back().first.lo_pct; }

    /// Parameters at SOC fraction z. Piecewise constant over the intervals by
    /// default; in midpoint_linear mode values are anchored at interval
    /// midpoints and interpolated linearly between them (constant beyond the
    /// outer midpoints). Throws RangeError outside coverage.
    [[nodiscard]] ParameterSet lookup(double z_fraction) const;

    /// Copy with every masked parameter replaced by its across-interval mean.
    [[nodiscard]] ParameterSchedule with_fixed(const std::array<bool, kNumParams>& mask) const;

private:
    std::vector<std::pair<SocInterval, ParameterSet>> entries_;
    std::array<bool, kNumParams> fixed_mask_{};
    ScheduleInterp interp_ = ScheduleInterp::piecewise_constant;
    std::array<double, kNumParams> means_{};
    std::array<double, kNumParams> stdevs_{};

    void recompute_stats();
    [[nodiscard]] std::size_t interval_index(double z_pct) const;
};

}  // namespace ecmsense
