// SPDX-License-Identifier: Apache-2.0
//
// AVX2 variants (4 x f64 lanes). Lanes always map to independent output
// elements and each lane accumulates in the reference order, so outputs are
// bit-identical to kernels_scalar.cpp. No FMA: mul+add keeps rounding
// identical to the reference (this file is built with -ffp-contract=off).

#include "ntc/kernels.hpp"

#if defined(__AVX2__) && defined(__x86_64__)

#include <immintrin.h>

namespace ntc::kernels {

namespace {

// Loads xrow[0], xrow[s], xrow[2s], xrow[3s] into one vector.
inline __m256d load_strided4(const double* xrow, std::size_t s) {
    if (s == 1) return _mm256_loadu_pd(xrow);
    return _mm256_set_pd(xrow[3 * s], xrow[2 * s], xrow[s], xrow[0]);
}

void conv_gather_avx2(const double* kernels, const double* xpad, double* z,
                      const ConvDims& d) {
    const std::size_t k = d.k, s = d.stride;
    const std::size_t pw = d.pad_w();
    for (std::size_t a = 0; a < d.a_channels; ++a) {
        for (std::size_t i = 0; i < d.out_h; ++i) {
            double* zrow = z + (a * d.out_h + i) * d.out_w;
            std::size_t j = 0;
            for (; j + 4 <= d.out_w; j += 4) {
                __m256d acc = _mm256_setzero_pd();
                for (std::size_t b = 0; b < d.b_channels; ++b) {
                    const double* kr = kernels + ((a * d.b_channels + b) * k) * k;
                    const double* xb = xpad + b * d.pad_h() * pw;
                    for (std::size_t u = 0; u < k; ++u) {
                        const double* xrow = xb + (i * s + u) * pw + j * s;
                        const double* krow = kr + u * k;
                        for (std::size_t v = 0; v < k; ++v) {
                            const __m256d kv = _mm256_set1_pd(krow[v]);
                            const __m256d xv = load_strided4(xrow + v, s);
                            acc = _mm256_add_pd(acc, _mm256_mul_pd(kv, xv));
                        }
                    }
                }
                _mm256_storeu_pd(zrow + j, acc);
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

void conv_scatter_avx2(const double* kernels, const double* z, double* xpad,
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
                    const __m256d wv = _mm256_set1_pd(w);
                    for (std::size_t u = 0; u < k; ++u) {
                        double* xrow = xb + (i * s + u) * pw + j * s;
                        const double* krow = kr + u * k;
                        std::size_t v = 0;
                        for (; v + 4 <= k; v += 4) {
                            const __m256d kv = _mm256_loadu_pd(krow + v);
                            const __m256d xv = _mm256_loadu_pd(xrow + v);
                            _mm256_storeu_pd(xrow + v,
                                             _mm256_add_pd(xv, _mm256_mul_pd(kv, wv)));
                        }
                        for (; v < k; ++v) xrow[v] += krow[v] * w;
                    }
                }
            }
        }
    }
}

void conv_kernel_grad_avx2(const double* z, const double* xpad, double* dk,
                           const ConvDims& d) {
    const std::size_t k = d.k, s = d.stride;
    const std::size_t pw = d.pad_w();
    for (std::size_t a = 0; a < d.a_channels; ++a) {
        for (std::size_t b = 0; b < d.b_channels; ++b) {
            const double* xb = xpad + b * d.pad_h() * pw;
            double* dkr = dk + ((a * d.b_channels + b) * k) * k;
            for (std::size_t u = 0; u < k; ++u) {
                std::size_t v = 0;
                for (; v + 4 <= k; v += 4) {
                    __m256d acc = _mm256_setzero_pd();
                    for (std::size_t i = 0; i < d.out_h; ++i) {
                        const double* zrow = z + (a * d.out_h + i) * d.out_w;
                        const double* xrow = xb + (i * s + u) * pw + v;
                        for (std::size_t j = 0; j < d.out_w; ++j) {
                            const __m256d zv = _mm256_set1_pd(zrow[j]);
                            const __m256d xv = _mm256_loadu_pd(xrow + j * s);
                            acc = _mm256_add_pd(acc, _mm256_mul_pd(zv, xv));
                        }
                    }
                    const __m256d prev = _mm256_loadu_pd(dkr + u * k + v);
                    _mm256_storeu_pd(dkr + u * k + v, _mm256_add_pd(prev, acc));
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

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d xv = _mm256_loadu_pd(x + i);
        const __m256d yv = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(yv, _mm256_mul_pd(av, xv)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

} // namespace

const Ops* avx2_ops_table() {
    static const Ops table{"avx2", conv_gather_avx2, conv_scatter_avx2,
                           conv_kernel_grad_avx2, axpy_avx2};
    return &table;
}

} // namespace ntc::kernels

#else

namespace ntc::kernels {
const Ops* avx2_ops_table() { return nullptr; }
} // namespace ntc::kernels

#endif
