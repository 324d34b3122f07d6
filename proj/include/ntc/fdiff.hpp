// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ntc/tensor.hpp"

#include <cmath>
#include <utility>

namespace ntc {

// Central-difference gradient checking. Lives next to the library so the CLI
// verification suite and the tests share one implementation; it never calls
// any VJP it is used to check.

inline constexpr double kFdStep = 1e-5;

// Relative error with an absolute floor in the denominator. The floor absorbs
// central-difference roundoff (~|f| * eps / step) on entries whose true
// gradient is near zero.
inline double rel_err(double analytic, double numeric, double floor = 1e-4) {
    const double denom = std::max({std::fabs(analytic), std::fabs(numeric), floor});
    return std::fabs(analytic - numeric) / denom;
}

// f: callable () -> double re-evaluating the objective; slot: the perturbed
// parameter entry. Restores the slot before returning.
template <class F>
double central_diff(F&& f, double& slot, double step = kFdStep) {
    const double saved = slot;
    slot = saved + step;
    const double up = f();
    slot = saved - step;
    const double down = f();
    slot = saved;
    return (up - down) / (2.0 * step);
}

// Max relative error between an analytic gradient tensor and finite
// differences of `f` over every entry of `param`.
template <class F>
double max_rel_err_fd(F&& f, Tensor& param, const Tensor& analytic, double step = kFdStep,
                      double floor = 1e-4) {
    double worst = 0.0;
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double numeric = central_diff(f, param[i], step);
        const double e = rel_err(analytic[i], numeric, floor);
        if (e > worst) worst = e;
    }
    return worst;
}

} // namespace ntc
