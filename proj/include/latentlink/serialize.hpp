#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "latentlink/core.hpp"
#include "latentlink/nn.hpp"

namespace latentlink {

// Model container: magic "LLNK", format version u32, then tagged blocks.
// Block = 4-byte tag + u64 payload size + payload. The MLP payload is
// layer count, per-layer dims, activation tag byte, then little-endian
// 64-bit floats in row-major order.
inline constexpr char kModelMagic[4] = {'L', 'L', 'N', 'K'};
inline constexpr std::uint32_t kModelVersion = 1;

struct ByteWriter {
    std::string buf;

    void raw(const void* p, std::size_t n) {
        buf.append(static_cast<const char*>(p), n);
    }
    void u8(std::uint8_t v) { raw(&v, 1); }
    void u32(std::uint32_t v) { raw(&v, 4); }
    void u64(std::uint64_t v) { raw(&v, 8); }
    void f64(double v) { raw(&v, 8); }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }
    void vec(const Vec& v) {
        u32(static_cast<std::uint32_t>(v.size()));
        raw(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
    }
    void mat_rowmajor(const Mat& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
    }
};

class ByteReader {
  public:
    explicit ByteReader(std::string_view data, std::string context = {})
        : data_(data), context_(std::move(context)) {}

    std::size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }

    void raw(void* p, std::size_t n) {
        if (remaining() < n) fail("truncated data");
        std::memcpy(p, data_.data() + pos_, n);
        pos_ += n;
    }
    std::uint8_t u8() { std::uint8_t v; raw(&v, 1); return v; }
    std::uint32_t u32() { std::uint32_t v; raw(&v, 4); return v; }
    std::uint64_t u64() { std::uint64_t v; raw(&v, 8); return v; }
    double f64() { double v; raw(&v, 8); return v; }
    std::string str() {
        const std::uint32_t n = u32();
        if (remaining() < n) fail("truncated string");
        std::string s(data_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    Vec vec() {
        const std::uint32_t n = u32();
        Vec v(n);
        raw(v.data(), sizeof(double) * n);
        return v;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw std::runtime_error(context_.empty() ? what : context_ + ": " + what);
    }

  private:
    std::string_view data_;
    std::string context_;
    std::size_t pos_ = 0;
};

inline void write_file(const std::string& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    if (in.bad()) throw std::runtime_error("read failed: " + path);
    return bytes;
}

using Block = std::pair<std::string, std::string>;  // tag, payload

inline void write_model_file(const std::string& path,
                             const std::vector<Block>& blocks) {
    ByteWriter w;
    w.raw(kModelMagic, 4);
    w.u32(kModelVersion);
    w.u32(static_cast<std::uint32_t>(blocks.size()));
    for (const auto& [tag, payload] : blocks) {
        if (tag.size() != 4) throw std::invalid_argument("block tag must be 4 bytes");
        w.raw(tag.data(), 4);
        w.u64(payload.size());
        w.raw(payload.data(), payload.size());
    }
    write_file(path, w.buf);
}

inline std::vector<Block> read_model_file(const std::string& path) {
    const std::string bytes = read_file(path);
    ByteReader r(bytes, path);
    char magic[4];
    r.raw(magic, 4);
    if (std::memcmp(magic, kModelMagic, 4) != 0) r.fail("bad magic, not a model file");
    const std::uint32_t version = r.u32();
    if (version != kModelVersion)
        r.fail("unsupported format version " + std::to_string(version));
    const std::uint32_t count = r.u32();
    std::vector<Block> blocks;
    blocks.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        char tag[4];
        r.raw(tag, 4);
        const std::uint64_t size = r.u64();
        if (r.remaining() < size) r.fail("truncated block payload");
        std::string payload(size, '\0');
        r.raw(payload.data(), size);
        blocks.emplace_back(std::string(tag, 4), std::move(payload));
    }
    if (!r.done()) r.fail("trailing bytes after last block");
    return blocks;
}

inline const std::string* find_block(const std::vector<Block>& blocks,
                                     std::string_view tag) {
    for (const auto& [t, payload] : blocks)
        if (t == tag) return &payload;
    return nullptr;
}

inline std::string encode_mlp(const Mlp& net) {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(net.layers.size()));
    for (const auto& l : net.layers) {
        w.u32(static_cast<std::uint32_t>(l.weight.rows()));
        w.u32(static_cast<std::uint32_t>(l.weight.cols()));
        w.u8(static_cast<std::uint8_t>(l.act));
        w.mat_rowmajor(l.weight);
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) w.f64(l.bias[i]);
    }
    return std::move(w.buf);
}

inline Mlp decode_mlp(std::string_view payload, const std::string& context = {}) {
    ByteReader r(payload, context);
    Mlp net;
    const std::uint32_t n_layers = r.u32();
    net.layers.resize(n_layers);
    for (auto& l : net.layers) {
        const std::uint32_t out = r.u32();
        const std::uint32_t in = r.u32();
        const std::uint8_t act = r.u8();
        if (act > 3) r.fail("bad activation tag " + std::to_string(act));
        l.act = static_cast<Activation>(act);
        l.weight.resize(out, in);
        for (std::uint32_t i = 0; i < out; ++i)
            for (std::uint32_t j = 0; j < in; ++j) l.weight(i, j) = r.f64();
        l.bias.resize(out);
        for (std::uint32_t i = 0; i < out; ++i) l.bias[i] = r.f64();
    }
    if (!r.done()) r.fail("trailing bytes in mlp block");
    return net;
}

inline void save_mlp(const std::string& path, const Mlp& net) {
    write_model_file(path, {{"MLP0", encode_mlp(net)}});
}

inline Mlp load_mlp(const std::string& path) {
    const auto blocks = read_model_file(path);
    const std::string* payload = find_block(blocks, "MLP0");
    if (!payload) throw std::runtime_error(path + ": no MLP0 block");
    return decode_mlp(*payload, path);
}

}  // namespace latentlink
