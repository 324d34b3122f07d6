// SPDX-License-Identifier: Apache-2.0

#include "ntc/evaluate.hpp"

#include "ntc/error.hpp"
#include "ntc/loss.hpp"
#include "ntc/pnm.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace ntc {

Tensor center_crop_to_multiple(const Tensor& image, std::size_t multiple) {
    const std::size_t c = image.extent(0);
    const std::size_t h = image.extent(1), w = image.extent(2);
    const std::size_t ch = (h / multiple) * multiple;
    const std::size_t cw = (w / multiple) * multiple;
    require(ch > 0 && cw > 0, "center_crop: image smaller than " + std::to_string(multiple));
    if (ch == h && cw == w) return image;
    const std::size_t i0 = (h - ch) / 2, j0 = (w - cw) / 2;
    Tensor out({c, ch, cw});
    for (std::size_t ci = 0; ci < c; ++ci)
        for (std::size_t i = 0; i < ch; ++i)
            for (std::size_t j = 0; j < cw; ++j) out(ci, i, j) = image(ci, i0 + i, j0 + j);
    return out;
}

EvalSummary evaluate(const Model& m, const std::vector<std::string>& paths) {
    EvalSummary summary;
    for (const std::string& path : paths) {
        try {
            const Tensor image =
                center_crop_to_multiple(load_image(path), TransformConfig::kTotalDownsampling);
            EvalRecord rec;
            rec.name = path;

            const Tensor y = analysis_forward(image, m);
            rec.latents = quantize(y, QuantizerMode::eval, nullptr);
            const Tensor p = likelihood(rec.latents, m.density);
            rec.bpp = rate_bits(p) / static_cast<double>(image.extent(1) * image.extent(2));

            const Tensor x_hat = synthesis_forward(rec.latents, m);
            double sq = 0.0;
            for (std::size_t i = 0; i < image.size(); ++i) {
                const double d = image[i] - x_hat[i];
                sq += d * d;
            }
            rec.psnr = psnr_db(sq / static_cast<double>(image.size()));
            summary.rows.push_back(std::move(rec));
        } catch (const Error& e) {
            summary.skipped.push_back(e.what());
        }
    }
    if (!summary.rows.empty()) {
        double b = 0.0, p = 0.0;
        for (const EvalRecord& r : summary.rows) {
            b += r.bpp;
            p += r.psnr;
        }
        summary.mean_bpp = b / static_cast<double>(summary.rows.size());
        summary.mean_psnr = p / static_cast<double>(summary.rows.size());
    }
    return summary;
}

namespace {

std::string num6(double v) {
    if (std::isinf(v)) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace

std::string format_eval_csv(const EvalSummary& summary) {
    std::string out = "image,bpp,psnr\n";
    for (const EvalRecord& r : summary.rows)
        out += r.name + "," + num6(r.bpp) + "," + num6(r.psnr) + "\n";
    out += "MEAN," + num6(summary.mean_bpp) + "," + num6(summary.mean_psnr) + "\n";
    return out;
}

void dump_latents(const Model& m, const EvalSummary& summary, std::ostream& out) {
    const std::size_t c = m.density.channels();
    for (const EvalRecord& r : summary.rows) {
        const std::size_t lh = r.latents.extent(1), lw = r.latents.extent(2);
        out << "image " << r.name << " channels " << c << " lh " << lh << " lw " << lw
            << " pixels "
            << lh * TransformConfig::kTotalDownsampling * lw * TransformConfig::kTotalDownsampling
            << "\n";
        out << "mu";
        for (std::size_t i = 0; i < c; ++i) {
            char buf[40];
            std::snprintf(buf, sizeof buf, " %.17g", m.density.mu[i]);
            out << buf;
        }
        out << "\nscale";
        for (std::size_t i = 0; i < c; ++i) {
            char buf[40];
            std::snprintf(buf, sizeof buf, " %.17g", m.density.scale(i));
            out << buf;
        }
        out << "\nlatents";
        for (std::size_t i = 0; i < r.latents.size(); ++i) {
            char buf[40];
            std::snprintf(buf, sizeof buf, " %.17g", r.latents[i]);
            out << buf;
        }
        out << "\n";
    }
}

} // namespace ntc
