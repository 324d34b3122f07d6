// SPDX-License-Identifier: Apache-2.0

#include "ntc/conv.hpp"

#include "ntc/error.hpp"
#include "ntc/kernels.hpp"

#include <string>

namespace ntc {

namespace {

std::string shape_str(const Shape& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

struct LayerGeom {
    std::size_t a_ch; // first kernel axis
    std::size_t b_ch; // second kernel axis
    std::size_t k;
    std::size_t s;
};

LayerGeom check_params(const ConvLayerParams& p, bool kernels_first_axis_is_output) {
    require(p.kernels.rank() == 4, "conv: kernels must have rank 4, got shape " +
                                       shape_str(p.kernels.shape()));
    const std::size_t kh = p.kernels.extent(2);
    const std::size_t kw = p.kernels.extent(3);
    require(kh == kw, "conv: kernel support must be square, got " + shape_str(p.kernels.shape()));
    require(p.stride >= 1, "conv: stride must be positive");
    require(p.bias.rank() == 1, "conv: bias must have rank 1");
    const std::size_t out_ch =
        kernels_first_axis_is_output ? p.kernels.extent(0) : p.kernels.extent(1);
    require(p.bias.extent(0) == out_ch, "conv: bias length " + std::to_string(p.bias.extent(0)) +
                                            " does not match output channels " +
                                            std::to_string(out_ch));
    return {p.kernels.extent(0), p.kernels.extent(1), kh, p.stride};
}

// Offset of the field origin. For k >= s this is the zero-padding amount; a
// kernel narrower than the stride pads nothing and the field is simply
// truncated at the trailing edge, which reproduces plain subsampling.
std::size_t field_begin(std::size_t k, std::size_t s) { return k >= s ? (k - s) / 2 : 0; }

// Copies [C,H,W] into the zero-padded (k >= s) or truncated (k < s) field of
// extents (H/s - 1)*s + k per spatial axis.
Tensor pad_field(const Tensor& x, std::size_t k, std::size_t s) {
    const std::size_t begin = field_begin(k, s);
    const std::size_t c = x.extent(0), h = x.extent(1), w = x.extent(2);
    const std::size_t ph = h + k - s, pw = w + k - s; // wraps are impossible: h % s == 0, h >= s
    Tensor out({c, ph, pw});
    for (std::size_t ci = 0; ci < c; ++ci)
        for (std::size_t i = 0; i < h && i + begin < ph; ++i) {
            const double* src = x.data() + (ci * h + i) * w;
            double* dst = out.data() + (ci * ph + i + begin) * pw + begin;
            for (std::size_t j = 0; j < w && j + begin < pw; ++j) dst[j] = src[j];
        }
    return out;
}

// Adjoint of pad_field: rebuilds [C,H,W] from the field (zeros where the
// field was truncated).
Tensor crop_field(const Tensor& xp, std::size_t h, std::size_t w, std::size_t k, std::size_t s) {
    const std::size_t begin = field_begin(k, s);
    const std::size_t c = xp.extent(0), ph = xp.extent(1), pw = xp.extent(2);
    require(ph == h + k - s && pw == w + k - s, "crop: padded extents inconsistent");
    Tensor out({c, h, w});
    for (std::size_t ci = 0; ci < c; ++ci)
        for (std::size_t i = 0; i < h && i + begin < ph; ++i) {
            const double* src = xp.data() + (ci * ph + i + begin) * pw + begin;
            double* dst = out.data() + (ci * h + i) * w;
            for (std::size_t j = 0; j < w && j + begin < pw; ++j) dst[j] = src[j];
        }
    return out;
}

void check_input(const Tensor& input, std::size_t channels, const char* what) {
    require(input.rank() == 3, std::string(what) + ": input must be [C,H,W], got " +
                                   shape_str(input.shape()));
    require(input.extent(0) == channels, std::string(what) + ": input has " +
                                             std::to_string(input.extent(0)) +
                                             " channels, expected " + std::to_string(channels));
}

} // namespace

PadSpec pad_for(std::size_t k, std::size_t s) {
    require(k >= s, "pad_for: kernel extent must be >= stride");
    const std::size_t total = k - s;
    return {total / 2, total - total / 2};
}

Tensor conv2d_forward(const Tensor& input, const ConvLayerParams& p) {
    const LayerGeom g = check_params(p, /*kernels_first_axis_is_output=*/true);
    check_input(input, g.b_ch, "conv2d_forward");
    const std::size_t h = input.extent(1), w = input.extent(2);
    require(h > 0 && w > 0, "conv2d_forward: empty spatial extents");
    require(h % g.s == 0 && w % g.s == 0,
            "conv2d_forward: spatial extents " + std::to_string(h) + "x" + std::to_string(w) +
                " not divisible by stride " + std::to_string(g.s));

    const Tensor xp = pad_field(input, g.k, g.s);
    const kernels::ConvDims dims{g.a_ch, g.b_ch, g.k, g.s, h / g.s, w / g.s};
    Tensor out({g.a_ch, dims.out_h, dims.out_w});
    kernels::ops().conv_gather(p.kernels.data(), xp.data(), out.data(), dims);
    for (std::size_t o = 0; o < g.a_ch; ++o) {
        const double b = p.bias[o];
        double* row = out.data() + o * dims.out_h * dims.out_w;
        for (std::size_t e = 0; e < dims.out_h * dims.out_w; ++e) row[e] += b;
    }
    return out;
}

ConvGrads conv2d_vjp(const Tensor& input, const ConvLayerParams& p, const Tensor& upstream) {
    const LayerGeom g = check_params(p, true);
    check_input(input, g.b_ch, "conv2d_vjp");
    const std::size_t h = input.extent(1), w = input.extent(2);
    require(h > 0 && w > 0, "conv2d_vjp: empty spatial extents");
    require(h % g.s == 0 && w % g.s == 0, "conv2d_vjp: extents not divisible by stride");
    const std::size_t oh = h / g.s, ow = w / g.s;
    require(upstream.rank() == 3 && upstream.extent(0) == g.a_ch && upstream.extent(1) == oh &&
                upstream.extent(2) == ow,
            "conv2d_vjp: upstream shape " + shape_str(upstream.shape()) + " does not match output");

    const kernels::ConvDims dims{g.a_ch, g.b_ch, g.k, g.s, oh, ow};
    ConvGrads grads;

    Tensor xpg({g.b_ch, dims.pad_h(), dims.pad_w()});
    kernels::ops().conv_scatter(p.kernels.data(), upstream.data(), xpg.data(), dims);
    grads.d_input = crop_field(xpg, h, w, g.k, g.s);

    const Tensor xp = pad_field(input, g.k, g.s);
    grads.d_kernels = Tensor(p.kernels.shape());
    kernels::ops().conv_kernel_grad(upstream.data(), xp.data(), grads.d_kernels.data(), dims);

    grads.d_bias = Tensor({g.a_ch});
    for (std::size_t o = 0; o < g.a_ch; ++o) {
        double acc = 0.0;
        const double* row = upstream.data() + o * oh * ow;
        for (std::size_t e = 0; e < oh * ow; ++e) acc += row[e];
        grads.d_bias[o] = acc;
    }
    return grads;
}

Tensor upconv2d_forward(const Tensor& input, const ConvLayerParams& p) {
    const LayerGeom g = check_params(p, /*kernels_first_axis_is_output=*/false);
    check_input(input, g.a_ch, "upconv2d_forward");
    const std::size_t h = input.extent(1), w = input.extent(2);
    require(h > 0 && w > 0, "upconv2d_forward: empty spatial extents");

    const kernels::ConvDims dims{g.a_ch, g.b_ch, g.k, g.s, h, w};
    Tensor xpg({g.b_ch, dims.pad_h(), dims.pad_w()});
    kernels::ops().conv_scatter(p.kernels.data(), input.data(), xpg.data(), dims);
    Tensor out = crop_field(xpg, h * g.s, w * g.s, g.k, g.s);
    for (std::size_t o = 0; o < g.b_ch; ++o) {
        const double b = p.bias[o];
        double* row = out.data() + o * (h * g.s) * (w * g.s);
        for (std::size_t e = 0; e < h * g.s * w * g.s; ++e) row[e] += b;
    }
    return out;
}

ConvGrads upconv2d_vjp(const Tensor& input, const ConvLayerParams& p, const Tensor& upstream) {
    const LayerGeom g = check_params(p, false);
    check_input(input, g.a_ch, "upconv2d_vjp");
    const std::size_t h = input.extent(1), w = input.extent(2);
    require(h > 0 && w > 0, "upconv2d_vjp: empty spatial extents");
    require(upstream.rank() == 3 && upstream.extent(0) == g.b_ch &&
                upstream.extent(1) == h * g.s && upstream.extent(2) == w * g.s,
            "upconv2d_vjp: upstream shape " + shape_str(upstream.shape()) +
                " does not match output");

    const kernels::ConvDims dims{g.a_ch, g.b_ch, g.k, g.s, h, w};
    const Tensor up_pad = pad_field(upstream, g.k, g.s);

    ConvGrads grads;
    grads.d_input = Tensor({g.a_ch, h, w});
    kernels::ops().conv_gather(p.kernels.data(), up_pad.data(), grads.d_input.data(), dims);

    grads.d_kernels = Tensor(p.kernels.shape());
    kernels::ops().conv_kernel_grad(input.data(), up_pad.data(), grads.d_kernels.data(), dims);

    grads.d_bias = Tensor({g.b_ch});
    for (std::size_t o = 0; o < g.b_ch; ++o) {
        double acc = 0.0;
        const double* row = upstream.data() + o * (h * g.s) * (w * g.s);
        for (std::size_t e = 0; e < h * g.s * w * g.s; ++e) acc += row[e];
        grads.d_bias[o] = acc;
    }
    return grads;
}

} // namespace ntc
