// SPDX-License-Identifier: Apache-2.0

#include "ntc/checkpoint.hpp"

#include "ntc/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

namespace ntc {

namespace {

constexpr char kMagic[4] = {'N', 'T', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

struct Reader {
    std::string path;
    std::string bytes;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(path + ": " + what + " at byte " + std::to_string(pos));
    }

    void need(std::size_t n) const {
        if (bytes.size() - pos < n) fail("truncated file, need " + std::to_string(n) + " bytes");
    }

    std::uint16_t u16() {
        need(2);
        const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
        pos += 2;
        return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
    }

    std::uint32_t u32() {
        need(4);
        const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
        pos += 4;
        return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
               (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
    }

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(bytes[pos++]);
    }

    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + i]))
                    << (8 * i);
        pos += 8;
        return std::bit_cast<double>(bits);
    }
};

} // namespace

void write_tensor_file(const std::string& path, const NamedTensors& entries) {
    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kVersion);
    require(entries.size() <= std::numeric_limits<std::uint32_t>::max(), "too many entries");
    put_u32(out, static_cast<std::uint32_t>(entries.size()));
    for (const auto& [name, tensor] : entries) {
        require(name.size() <= std::numeric_limits<std::uint16_t>::max(), "entry name too long");
        require(tensor.rank() <= 255, "tensor rank too large");
        put_u16(out, static_cast<std::uint16_t>(name.size()));
        out.append(name);
        out.push_back(static_cast<char>(tensor.rank()));
        for (std::size_t e : tensor.shape()) {
            require(e <= std::numeric_limits<std::uint32_t>::max(), "extent too large");
            put_u32(out, static_cast<std::uint32_t>(e));
        }
        for (std::size_t i = 0; i < tensor.size(); ++i) put_f64(out, tensor[i]);
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(path + ": cannot open for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw Error(path + ": write failed");
}

NamedTensors read_tensor_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParseError(path + ": cannot open file");
    Reader r;
    r.path = path;
    r.bytes.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());

    r.need(4);
    if (std::memcmp(r.bytes.data(), kMagic, 4) != 0) r.fail("bad magic, expected NTCK");
    r.pos = 4;
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        r.fail("unsupported version " + std::to_string(version) + ", expected " +
               std::to_string(kVersion));
    const std::uint32_t count = r.u32();

    NamedTensors out;
    out.reserve(count);
    for (std::uint32_t e = 0; e < count; ++e) {
        const std::uint16_t name_len = r.u16();
        r.need(name_len);
        std::string name = r.bytes.substr(r.pos, name_len);
        r.pos += name_len;
        const std::uint8_t rank = r.u8();
        Shape shape(rank);
        std::size_t total = 1;
        for (std::uint8_t d = 0; d < rank; ++d) {
            shape[d] = r.u32();
            if (shape[d] != 0 && total > std::numeric_limits<std::size_t>::max() / 8 / shape[d])
                r.fail("dimension overflow in entry '" + name + "'");
            total *= shape[d];
        }
        Tensor t(shape);
        for (std::size_t i = 0; i < total; ++i) t[i] = r.f64();
        out.emplace_back(std::move(name), std::move(t));
    }
    return out;
}

namespace {

constexpr const char* kMetaFilters = "meta.n_filters";
constexpr const char* kMetaNonlinearity = "meta.nonlinearity";

} // namespace

void save_checkpoint(const Model& m, const std::string& path) {
    NamedTensors entries;
    entries.emplace_back(kMetaFilters,
                         Tensor::scalar(static_cast<double>(m.config.n_filters)));
    entries.emplace_back(kMetaNonlinearity,
                         Tensor::scalar(static_cast<double>(static_cast<int>(m.config.kind))));
    for (const ParamRef& p : model_parameters(const_cast<Model&>(m)))
        entries.emplace_back(p.name, *p.tensor);
    write_tensor_file(path, entries);
}

Model load_checkpoint(const std::string& path) {
    const NamedTensors entries = read_tensor_file(path);
    auto find = [&](const std::string& name) -> const Tensor& {
        for (const auto& [n, t] : entries)
            if (n == name) return t;
        throw ParseError(path + ": missing entry '" + name + "'");
    };

    TransformConfig config;
    config.n_filters = static_cast<std::size_t>(find(kMetaFilters)[0]);
    const int kind_code = static_cast<int>(find(kMetaNonlinearity)[0]);
    if (kind_code < 0 || kind_code > 5)
        throw ParseError(path + ": invalid nonlinearity code " + std::to_string(kind_code));
    config.kind = static_cast<Nonlinearity>(kind_code);

    Model m = build_model(config, /*seed=*/0);
    for (const ParamRef& p : model_parameters(m)) {
        const Tensor& stored = find(p.name);
        if (stored.shape() != p.tensor->shape()) {
            std::string want, got;
            for (std::size_t e : p.tensor->shape()) want += std::to_string(e) + " ";
            for (std::size_t e : stored.shape()) got += std::to_string(e) + " ";
            throw ParseError(path + ": entry '" + p.name + "' has shape [ " + got +
                             "], model expects [ " + want + "]");
        }
        *p.tensor = stored;
    }
    return m;
}

Model load_checkpoint(const std::string& path, const TransformConfig& expected) {
    Model m = load_checkpoint(path);
    if (m.config.n_filters != expected.n_filters)
        throw ParseError(path + ": checkpoint has n_filters=" +
                         std::to_string(m.config.n_filters) + ", expected " +
                         std::to_string(expected.n_filters));
    if (m.config.kind != expected.kind)
        throw ParseError(path + ": checkpoint nonlinearity '" +
                         std::string(nonlinearity_name(m.config.kind)) + "' does not match '" +
                         std::string(nonlinearity_name(expected.kind)) + "'");
    return m;
}

} // namespace ntc
