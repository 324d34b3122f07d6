// SPDX-License-Identifier: Apache-2.0

#include "ntc/pnm.hpp"

#include "ntc/error.hpp"

#include <cmath>
#include <fstream>
#include <vector>

namespace ntc {

namespace {

struct ByteReader {
    std::vector<unsigned char> bytes;
    std::size_t pos = 0;
    std::string path;

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(path + ": " + what + " at byte " + std::to_string(pos));
    }

    bool eof() const { return pos >= bytes.size(); }

    unsigned char peek() const {
        if (eof()) fail("unexpected end of file");
        return bytes[pos];
    }

    unsigned char take() {
        if (eof()) fail("unexpected end of file");
        return bytes[pos++];
    }

    // Whitespace and '#' comments between header tokens.
    void skip_separators() {
        while (!eof()) {
            const unsigned char c = peek();
            if (c == '#') {
                while (!eof() && take() != '\n') {
                }
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
                       c == '\f') {
                ++pos;
            } else {
                break;
            }
        }
    }

    std::size_t read_number() {
        skip_separators();
        if (eof()) fail("expected header number");
        if (peek() < '0' || peek() > '9') fail("expected digit");
        std::size_t value = 0;
        while (!eof() && peek() >= '0' && peek() <= '9') {
            value = value * 10 + static_cast<std::size_t>(take() - '0');
            if (value > (std::size_t{1} << 31)) fail("header number out of range");
        }
        return value;
    }
};

ByteReader slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    ByteReader r;
    r.path = path;
    r.bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    return r;
}

struct PnmPayload {
    std::size_t channels; // 3 for P6, 1 for P5
    std::size_t width;
    std::size_t height;
    std::size_t data_offset;
};

PnmPayload parse_header(ByteReader& r) {
    if (r.bytes.size() < 2 || r.bytes[0] != 'P' || (r.bytes[1] != '5' && r.bytes[1] != '6'))
        r.fail("bad magic, expected P5 or P6");
    const std::size_t channels = r.bytes[1] == '6' ? 3 : 1;
    r.pos = 2;
    const std::size_t width = r.read_number();
    const std::size_t height = r.read_number();
    const std::size_t maxval = r.read_number();
    if (maxval != 255) r.fail("unsupported maxval " + std::to_string(maxval) + ", expected 255");
    if (width == 0 || height == 0) r.fail("degenerate image extents");
    // exactly one whitespace byte before the binary payload
    if (r.eof()) r.fail("missing payload");
    const unsigned char sep = r.take();
    if (!(sep == ' ' || sep == '\t' || sep == '\r' || sep == '\n')) r.fail("expected whitespace before payload");
    const std::size_t need = width * height * channels;
    if (r.bytes.size() - r.pos < need)
        throw ParseError(r.path + ": truncated payload, expected " + std::to_string(need) +
                         " bytes at byte " + std::to_string(r.pos) + ", have " +
                         std::to_string(r.bytes.size() - r.pos));
    return {channels, width, height, r.pos};
}

// P6 payload is interleaved RGB; tensors are planar.
Tensor decode(const ByteReader& r, const PnmPayload& h, std::size_t out_channels) {
    Tensor out({out_channels, h.height, h.width});
    const unsigned char* src = r.bytes.data() + h.data_offset;
    const double scale = 1.0 / 255.0;
    for (std::size_t i = 0; i < h.height; ++i)
        for (std::size_t j = 0; j < h.width; ++j)
            for (std::size_t c = 0; c < out_channels; ++c) {
                const std::size_t sc = h.channels == 1 ? 0 : c;
                out(c, i, j) = scale * src[(i * h.width + j) * h.channels + sc];
            }
    return out;
}

} // namespace

Tensor load_image(const std::string& path) {
    ByteReader r = slurp(path);
    const PnmPayload h = parse_header(r);
    return decode(r, h, 3);
}

Tensor load_gray(const std::string& path) {
    ByteReader r = slurp(path);
    const PnmPayload h = parse_header(r);
    if (h.channels != 1) throw ParseError(path + ": expected P5 grayscale");
    return decode(r, h, 1);
}

void save_ppm(const std::string& path, const Tensor& image) {
    require(image.rank() == 3 && image.extent(0) == 3, "save_ppm: image must be [3,H,W]");
    const std::size_t h = image.extent(1), w = image.extent(2);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(path + ": cannot open for writing");
    out << "P6\n" << w << " " << h << "\n255\n";
    std::vector<unsigned char> row(w * 3);
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j < w; ++j)
            for (std::size_t c = 0; c < 3; ++c) {
                double v = image(c, i, j);
                v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
                row[j * 3 + c] = static_cast<unsigned char>(std::lround(v * 255.0));
            }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw Error(path + ": write failed");
}

} // namespace ntc
