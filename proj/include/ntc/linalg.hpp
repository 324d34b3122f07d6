// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ntc/tensor.hpp"

namespace ntc {

Tensor matmul(const Tensor& a, const Tensor& b); // [m,k] x [k,n] -> [m,n]
Tensor transpose(const Tensor& a);               // [m,n] -> [n,m]

struct SymEig {
    Tensor values;  // [n], unsorted
    Tensor vectors; // [n,n], column i pairs with values[i]
};

// Cyclic Jacobi rotations; fine for the small symmetric matrices used here.
SymEig jacobi_eigensymm(const Tensor& a, int max_sweeps = 64);

} // namespace ntc
