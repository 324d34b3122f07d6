// SPDX-License-Identifier: Apache-2.0
//
// Reference kernels. These define the arithmetic contract: every SIMD variant
// must reproduce them bit-for-bit, which pins the accumulation order per
// output element. Keep the loop nests in sync with the SIMD files.

#include "ntc/kernels.hpp"

namespace ntc::kernels {

namespace {

void conv_gather_scalar(const double* kernels, const double* xpad, double* z,
                        const ConvDims& d) {
    const std::size_t k = d.k, s = d.stride;
    const std::size_t pw = d.pad_w();
    for (std::size_t a = 0; a < d.a_channels; ++a) {
        for (std::size_t i = 0; i < d.out_h; ++i) {
            for (std::size_t j = 0; j < d.out_w; ++j) {
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
                z[(a * d.out_h + i) * d.out_w + j] = acc;
            }
        }
    }
}

void conv_scatter_scalar(const double* kernels, const double* z, double* xpad,
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
                    for (std::size_t u = 0; u < k; ++u) {
                        double* xrow = xb + (i * s + u) * pw + j * s;
                        const double* krow = kr + u * k;
                        for (std::size_t v = 0; v < k; ++v) xrow[v] += krow[v] * w;
                    }
                }
            }
        }
    }
}

void conv_kernel_grad_scalar(const double* z, const double* xpad, double* dk,
                             const ConvDims& d) {
    const std::size_t k = d.k, s = d.stride;
    const std::size_t pw = d.pad_w();
    for (std::size_t a = 0; a < d.a_channels; ++a) {
        for (std::size_t b = 0; b < d.b_channels; ++b) {
            const double* xb = xpad + b * d.pad_h() * pw;
            double* dkr = dk + ((a * d.b_channels + b) * k) * k;
            for (std::size_t u = 0; u < k; ++u) {
                for (std::size_t v = 0; v < k; ++v) {
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

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

} // namespace

const Ops& scalar_ops() {
    static const Ops table{"scalar", conv_gather_scalar, conv_scatter_scalar,
                           conv_kernel_grad_scalar, axpy_scalar};
    return table;
}

} // namespace ntc::kernels
