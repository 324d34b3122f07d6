// SPDX-License-Identifier: Apache-2.0

#include "ntc/pink.hpp"

#include "ntc/error.hpp"
#include "ntc/rdft.hpp"

#include <cmath>
#include <map>

namespace ntc {

namespace {

// One basis per extent, cached; generation is called per training step.
const RdftBasis& cached_basis(std::size_t n) {
    static std::map<std::size_t, RdftBasis> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, RdftBasis::make(n)).first;
    return it->second;
}

} // namespace

Tensor gen_pink_field(std::size_t size, Rng& rng) {
    require(size >= 4, "gen_pink_field: size must be >= 4");
    const RdftBasis& basis = cached_basis(size);
    Tensor coeff({1, 1, size, size});
    for (std::size_t a = 0; a < size; ++a) {
        const double fh = static_cast<double>(RdftBasis::harmonic(a));
        for (std::size_t b = 0; b < size; ++b) {
            const double fw = static_cast<double>(RdftBasis::harmonic(b));
            const double f = std::sqrt(fh * fh + fw * fw);
            const double amplitude = 1.0 / (f > 1.0 ? f : 1.0);
            coeff[a * size + b] = amplitude * rng.normal();
        }
    }
    return rdft2_apply(coeff, basis, /*inverse=*/true).reshaped({size, size});
}

Tensor gen_pink_patch(std::size_t size, std::size_t channels, Rng& rng) {
    Tensor out({channels, size, size});
    for (std::size_t ch = 0; ch < channels; ++ch) {
        const Tensor field = gen_pink_field(size, rng);

        double mean = 0.0;
        for (std::size_t i = 0; i < field.size(); ++i) mean += field[i];
        mean /= static_cast<double>(field.size());
        double var = 0.0;
        for (std::size_t i = 0; i < field.size(); ++i) {
            const double c = field[i] - mean;
            var += c * c;
        }
        var /= static_cast<double>(field.size());
        const double inv_std = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;

        double* dst = out.data() + ch * size * size;
        for (std::size_t i = 0; i < field.size(); ++i) dst[i] = (field[i] - mean) * inv_std;
    }
    return out;
}

std::vector<Tensor> gen_pink_patches(std::size_t count, std::size_t size, std::uint64_t seed,
                                     std::size_t channels) {
    Rng rng(seed);
    std::vector<Tensor> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(gen_pink_patch(size, channels, rng));
    return out;
}

} // namespace ntc
