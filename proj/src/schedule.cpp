#include "ecmsense/schedule.hpp"

#include <cmath>

#include "ecmsense/errors.hpp"

namespace ecmsense {

ParameterSchedule::ParameterSchedule(
    std::vector<std::pair<SocInterval, ParameterSet>> entries,
    std::array<bool, kNumParams> fixed_mask, ScheduleInterp interp)
    : entries_(std::move(entries)), fixed_mask_(fixed_mask), interp_(interp) {
    if (entries_.empty()) throw StructuralError("ParameterSchedule: no intervals");
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const SocInterval& iv = entries_[i].first;
        if (!(iv.hi_pct > iv.lo_pct)) {
            throw StructuralError("ParameterSchedule: interval bounds not descending");
        }
        if (i > 0) {
            const SocInterval& prev = entries_[i - 1].first;
            const double gap = prev.lo_pct - iv.hi_pct;
            if (gap < -1e-9) {
                throw StructuralError("ParameterSchedule: overlapping intervals");
            }
            if (gap > 1e-9) {
                throw StructuralError("ParameterSchedule: intervals not contiguous");
            }
        }
    }
    recompute_stats();
}

void ParameterSchedule::recompute_stats() {
    const double n = static_cast<double>(entries_.size());
    means_.fill(0.0);
    stdevs_.fill(0.0);
    // Shifted summation: identical entries give exactly their common value
    // (and exactly zero standard deviation) instead of a rounded mean.
    const auto anchor = entries_.front().second.to_array();
    for (const auto& [iv, p] : entries_) {
        const auto a = p.to_array();
        for (std::size_t i = 0; i < kNumParams; ++i) means_[i] += a[i] - anchor[i];
    }
    for (std::size_t i = 0; i < kNumParams; ++i) {
        means_[i] = anchor[i] + means_[i] / n;
    }
    if (entries_.size() >= 2) {
        for (const auto& [iv, p] : entries_) {
            const auto a = p.to_array();
            for (std::size_t i = 0; i < kNumParams; ++i) {
                const double d = a[i] - means_[i];
                stdevs_[i] += d * d;
            }
        }
        for (auto& s : stdevs_) s = std::sqrt(s / (n - 1.0));
    }
}

std::size_t ParameterSchedule::interval_index(double z_pct) const {
    if (z_pct > hi_pct() || z_pct <= lo_pct()) {
        throw RangeError("ParameterSchedule: SOC outside schedule coverage");
    }
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].first.contains_pct(z_pct)) return i;
    }
    // z sits exactly on an internal boundary shared with the next interval.
    throw RangeError("ParameterSchedule: SOC outside schedule coverage");
}

ParameterSet ParameterSchedule::lookup(double z_fraction) const {
    if (!std::isfinite(z_fraction)) {
        throw InvalidInput("ParameterSchedule::lookup: non-finite SOC");
    }
    const double z_pct = z_fraction * 100.0;
    const std::size_t idx = interval_index(z_pct);
    if (interp_ == ScheduleInterp::piecewise_constant) return entries_[idx].second;

    // Midpoint-anchored linear interpolation; constant beyond outer midpoints.
    const double m_here = entries_[idx].first.midpoint_fraction() * 100.0;
    std::size_t a = idx;
    std::size_t b = idx;
    if (z_pct > m_here && idx > 0) {
        a = idx - 1;
    } else if (z_pct < m_here && idx + 1 < entries_.size()) {
        b = idx + 1;
    }
    if (a == b) return entries_[idx].second;
    const double ma = entries_[a].first.midpoint_fraction() * 100.0;
    const double mb = entries_[b].first.midpoint_fraction() * 100.0;
    const double t = (ma - z_pct) / (ma - mb);
    const auto pa = entries_[a].second.to_array();
    const auto pb = entries_[b].second.to_array();
    std::array<double, kNumParams> out{};
    for (std::size_t i = 0; i < kNumParams; ++i) out[i] = pa[i] + t * (pb[i] - pa[i]);
    return ParameterSet::from_array(out);
}

ParameterSchedule ParameterSchedule::with_fixed(
    const std::array<bool, kNumParams>& mask) const {
    std::vector<std::pair<SocInterval, ParameterSet>> entries;
    entries.reserve(entries_.size());
    for (const auto& [iv, p] : entries_) {
        auto a = p.to_array();
        for (std::size_t i = 0; i < kNumParams; ++i) {
            if (mask[i]) a[i] = means_[i];
        }
        entries.emplace_back(iv, ParameterSet::from_array(a));
    }
    return ParameterSchedule(std::move(entries), mask, interp_);
}

}  // namespace ecmsense
