#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "ecmsense/errors.hpp"

namespace ecmsense {

inline constexpr std::size_t kNumParams = 5;

// Canonical parameter order used everywhere (vectors, files, reports).
inline constexpr std::size_t kTau1 = 0;
inline constexpr std::size_t kTau2 = 1;
inline constexpr std::size_t kC1 = 2;
inline constexpr std::size_t kC2 = 3;
inline constexpr std::size_t kRs = 4;

inline constexpr std::array<const char*, kNumParams> kParamNames{
    "tau1", "tau2", "c1", "c2", "rs"};

/// Index for a parameter name ("tau1", ..., "rs"); throws on unknown names.
std::size_t param_index(const std::string& name);

/// The five model parameters of one SOC interval: two RC time constants
/// (seconds), the pair capacitances (farads) and the series resistance
/// (ohms). All strictly positive; the pairs are stored fast-first
/// (tau1 <= tau2), swapping the (tau, c) labels at construction if needed.
struct ParameterSet {
    double tau1;
    double tau2;
    double c1;
    double c2;
    double rs;

    ParameterSet(double tau1_s, double tau2_s, double c1_f, double c2_f, double rs_ohm)
        : tau1(tau1_s), tau2(tau2_s), c1(c1_f), c2(c2_f), rs(rs_ohm) {
        validate_fields();
        if (tau1 > tau2) {
            std::swap(tau1, tau2);
            std::swap(c1, c2);
        }
    }

    static ParameterSet from_array(const std::array<double, kNumParams>& a) {
        return ParameterSet(a[kTau1], a[kTau2], a[kC1], a[kC2], a[kRs]);
    }

    [[nodiscard]] std::array<double, kNumParams> to_array() const {
        return {tau1, tau2, c1, c2, rs};
    }

    [[nodiscard]] double r1() const { return tau1 / c1; }
    [[nodiscard]] double r2() const { return tau2 / c2; }

private:
    void validate_fields() const {
        const std::array<double, kNumParams> v{tau1, tau2, c1, c2, rs};
        for (std::size_t i = 0; i < kNumParams; ++i) {
            if (!std::isfinite(v[i]) || v[i] <= 0.0) {
                throw InvalidInput(std::string("ParameterSet: ") + kParamNames[i] +
                                   " must be finite and > 0");
            }
        }
    }
};

}  // namespace ecmsense
