// SPDX-License-Identifier: Apache-2.0
//
// NEON variants (2 x f64 lanes, aarch64 only). Same lane discipline as the
// AVX2 file: lanes are independent output elements, reference accumulation
// order per element, mul+add without fusion.

#include "ntc/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace ntc::kernels {

namespace {

inline float64x2_t load_strided2(const double* xrow, std::size_t s) {
    if (s == 1) return vld1q_f64(xrow);
    float64x2_t v = vdupq_n_f64(xrow[0]);
    return vsetq_lane_f64(xrow[s], v, 1);
}

void conv_gather_neon(const double* kernels, const double* xpad, double* z,
                      const ConvDims& d) {
    const std::size_t k = d.k, s = d.stride;
    const std::size_t pw = d.pad_w();
    for (std::size_t a = 0; a < d.a_channels; ++a) {
        for (std::size_t i = 0; i < d.out_h; ++i) {
            double* zrow = z + (a * d.out_h + i) * d.out_w;
            std::size_t j = 0;
            for (; j + 2 <= d.out_w; j += 2) {
                float64x2_t acc = vdupq_n_f64(0.0);
                for (std::size_t b = 0; b < d.b_channels; ++b) {
                    const double* kr = kernels + ((a * d.b_channels + b) * k) * k;
                    const double* xb = xpad + b * d.pad_h() * pw;
                    for (std::size_t u = 0; u < k; ++u) {
                        const double* xrow = xb + (i * s + u) * pw + j * s;
                        const double* krow = kr + u * k;
                        for (std::size_t v = 0; v < k; ++v) {
                            const float64x2_t kv = vdupq_n_f64(krow[v]);
                            const float64x2_t xv = load_strided2(xrow + v, s);
                            acc = vaddq_f64(acc, vmulq_f64(kv, xv));
                        }
                    }
                }
                vst1q_f64(zrow + j, acc);
            }
            for (; j < d.out_w; ++j) {
                double acc = 0.0;
                for (std::size_t b = 0; b < d.b_channels; ++b) {
                    const double* kr = kernels + ((a * d.b_channels + b) * k) * k;
                    const double* xb = xpad + b * d.pad_h() * pw;
                    for (std::size_t u = 0; u < k; ++u) {
                        const double* xrow = xb + (i * s + u) * pw + j * s;
                        const double* krow = kr + u * k;
                        for (std::size_t v = 0; v < k; ++v) acc += krow[v] * xrow[v];
                    }
                }
                zrow[j] = acc;
            }
        }
    }
}

void conv_scatter_neon(const double* kernels, const double* z, double* xpad,
                       const ConvDims& d) {
    const std::size_t k = d.k, s = d.stride;
    const std::size_t pw = d.pad_w();
    for (std::size_t a = 0; a < d.a_channels; ++a) {
        for (std::size_t b = 0; b < d.b_channels; ++b) {
            const double* kr = kernels + ((a * d.b_channels + b) * k) * k;
            double* xb = xpad + b * d.pad_h() * pw;
            for (std::size_t i = 0; i < d.out_h; ++i) {
                for (std::size_t j = 0; j < d.out_w; ++j) {
                    const double w = z[(a * d.out_h + i) * d.out_w + j];
                    const float64x2_t wv = vdupq_n_f64(w);
                    for (std::size_t u = 0; u < k; ++u) {
                        double* xrow = xb + (i * s + u) * pw + j * s;
                        const double* krow = kr + u * k;
                        std::size_t v = 0;
                        for (; v + 2 <= k; v += 2) {
                            const float64x2_t kv = vld1q_f64(krow + v);
                            const float64x2_t xv = vld1q_f64(xrow + v);
                            vst1q_f64(xrow + v, vaddq_f64(xv, vmulq_f64(kv, wv)));
                        }
                        for (; v < k; ++v) xrow[v] += krow[v] * w;
                    }
                }
            }
        }
    }
}

void conv_kernel_grad_neon(const double* z, const double* xpad, double* dk,
                           const ConvDims& d) {
    const std::size_t k = d.k, s = d.stride;
    const std::size_t pw = d.pad_w();
    for (std::size_t a = 0; a < d.a_channels; ++a) {
        for (std::size_t b = 0; b < d.b_channels; ++b) {
            const double* xb = xpad + b * d.pad_h() * pw;
            double* dkr = dk + ((a * d.b_channels + b) * k) * k;
            for (std::size_t u = 0; u < k; ++u) {
                std::size_t v = 0;
                for (; v + 2 <= k; v += 2) {
                    float64x2_t acc = vdupq_n_f64(0.0);
                    for (std::size_t i = 0; i < d.out_h; ++i) {
                        const double* zrow = z + (a * d.out_h + i) * d.out_w;
                        const double* xrow = xb + (i * s + u) * pw + v;
                        for (std::size_t j = 0; j < d.out_w; ++j) {
                            const float64x2_t zv = vdupq_n_f64(zrow[j]);
                            const float64x2_t xv = vld1q_f64(xrow + j * s);
                            acc = vaddq_f64(acc, vmulq_f64(zv, xv));
                        }
                    }
                    vst1q_f64(dkr + u * k + v, vaddq_f64(vld1q_f64(dkr + u * k + v), acc));
                }
                for (; v < k; ++v) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < d.out_h; ++i) {
                        const double* zrow = z + (a * d.out_h + i) * d.out_w;
                        const double* xrow = xb + (i * s + u) * pw + v;
                        for (std::size_t j = 0; j < d.out_w; ++j)
                            acc += zrow[j] * xrow[j * s];
                    }
                    dkr[u * k + v] += acc;
                }
            }
        }
    }
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t av = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t xv = vld1q_f64(x + i);
        const float64x2_t yv = vld1q_f64(y + i);
        vst1q_f64(y + i, vaddq_f64(yv, vmulq_f64(av, xv)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

} // namespace

const Ops* neon_ops_table() {
    static const Ops table{"neon", conv_gather_neon, conv_scatter_neon,
                           conv_kernel_grad_neon, axpy_neon};
    return &table;
}

} // namespace ntc::kernels

#else

namespace ntc::kernels {
const Ops* neon_ops_table() { return nullptr; }
} // namespace ntc::kernels

#endif
