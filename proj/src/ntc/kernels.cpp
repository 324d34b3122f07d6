// SPDX-License-Identifier: Apache-2.0

#include "ntc/kernels.hpp"

#include "ntc/error.hpp"
#include "ntc/tensor.hpp"

#include <cstdlib>
#include <string>

namespace ntc::kernels {

const Ops* avx2_ops_table(); // kernels_avx2.cpp; nullptr off-target
const Ops* neon_ops_table(); // kernels_neon.cpp; nullptr off-target

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const Ops* table_for(Backend b) {
    switch (b) {
    case Backend::scalar: return &scalar_ops();
    case Backend::avx2: return cpu_has_avx2() ? avx2_ops_table() : nullptr;
    case Backend::neon: return neon_ops_table();
    }
    return nullptr;
}

Backend best_available() {
    if (table_for(Backend::avx2)) return Backend::avx2;
    if (table_for(Backend::neon)) return Backend::neon;
    return Backend::scalar;
}

Backend initial_backend() {
    if (const char* env = std::getenv("NTC_KERNELS")) {
        const std::string v(env);
        if (v == "scalar") return Backend::scalar;
        if (v == "avx2" && table_for(Backend::avx2)) return Backend::avx2;
        if (v == "neon" && table_for(Backend::neon)) return Backend::neon;
        // "auto" or anything unusable falls through to detection
    }
    return best_available();
}

struct Active {
    Backend backend;
    const Ops* table;
    Active() : backend(initial_backend()), table(table_for(backend)) {}
};

Active& active_state() {
    static Active a;
    return a;
}

} // namespace

const char* backend_name(Backend b) {
    switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
    }
    return "?";
}

bool backend_available(Backend b) { return table_for(b) != nullptr; }

const Ops& backend_ops(Backend b) {
    const Ops* t = table_for(b);
    require(t != nullptr, std::string("kernel backend unavailable: ") + backend_name(b));
    return *t;
}

std::vector<Backend> available_backends() {
    std::vector<Backend> v;
    for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon})
        if (table_for(b)) v.push_back(b);
    return v;
}

const Ops& ops() { return *active_state().table; }

Backend active() { return active_state().backend; }

void select(Backend b) {
    const Ops* t = table_for(b);
    require(t != nullptr, std::string("kernel backend unavailable: ") + backend_name(b));
    active_state().backend = b;
    active_state().table = t;
}

void select_auto() { select(best_available()); }

} // namespace ntc::kernels

namespace ntc {

double dot(const Tensor& a, const Tensor& b) {
    require(a.size() == b.size(), "dot: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double max_abs(const Tensor& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double v = std::fabs(a[i]);
        if (v > m) m = v;
    }
    return m;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    require(a.size() == b.size(), "max_abs_diff: size mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double v = std::fabs(a[i] - b[i]);
        if (v > m) m = v;
    }
    return m;
}

double sum(const Tensor& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i];
    return acc;
}

void add_scaled(Tensor& y, const Tensor& x, double a) {
    require(y.size() == x.size(), "add_scaled: size mismatch");
    kernels::ops().axpy(a, x.data(), y.data(), y.size());
}

void scale(Tensor& t, double a) {
    for (std::size_t i = 0; i < t.size(); ++i) t[i] *= a;
}

} // namespace ntc
