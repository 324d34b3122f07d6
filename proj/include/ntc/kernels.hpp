// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ntc::kernels {

// Geometry shared by the three convolution primitives. All kernels are square
// (k x k) and the padded field extents are pinned to the strided side:
// pad_h = (out_h - 1) * stride + k, likewise for width.
struct ConvDims {
    std::size_t a_channels; // channels on the strided side (first kernel axis)
    std::size_t b_channels; // channels on the padded side (second kernel axis)
    std::size_t k;          // kernel extent per spatial axis
    std::size_t stride;
    std::size_t out_h; // spatial extents of the strided side
    std::size_t out_w;

    std::size_t pad_h() const { return (out_h - 1) * stride + k; }
    std::size_t pad_w() const { return (out_w - 1) * stride + k; }
    std::size_t kernel_count() const { return a_channels * b_channels * k * k; }
};

// z[a,i,j] = sum_{b,u,v} kernels[a,b,u,v] * xpad[b, i*s+u, j*s+v]   (overwrites z)
using ConvGatherFn = void (*)(const double* kernels, const double* xpad, double* z,
                              const ConvDims& d);

// xpad[b, i*s+u, j*s+v] += sum_a kernels[a,b,u,v] * z[a,i,j]        (accumulates)
using ConvScatterFn = void (*)(const double* kernels, const double* z, double* xpad,
                               const ConvDims& d);

// dk[a,b,u,v] += sum_{i,j} z[a,i,j] * xpad[b, i*s+u, j*s+v]         (accumulates)
using ConvKernelGradFn = void (*)(const double* z, const double* xpad, double* dk,
                                  const ConvDims& d);

// y[i] += a * x[i]
using AxpyFn = void (*)(double a, const double* x, double* y, std::size_t n);

struct Ops {
    const char* name;
    ConvGatherFn conv_gather;
    ConvScatterFn conv_scatter;
    ConvKernelGradFn conv_kernel_grad;
    AxpyFn axpy;
};

enum class Backend { scalar, avx2, neon };

const char* backend_name(Backend b);

// Variant tables. Every SIMD variant accumulates per output element in the
// same order as the scalar reference, so results are bit-identical; the
// equivalence tests assert exact equality.
const Ops& scalar_ops();
bool backend_available(Backend b);
const Ops& backend_ops(Backend b); // throws if unavailable
std::vector<Backend> available_backends();

// Active table used by the rest of the library. The initial selection is the
// best available backend, or the one named by the NTC_KERNELS environment
// variable (scalar | avx2 | neon | auto).
const Ops& ops();
Backend active();
void select(Backend b); // throws if unavailable
void select_auto();

} // namespace ntc::kernels
