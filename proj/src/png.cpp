#include <zlib.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "latentlink/scene.hpp"

namespace latentlink {

namespace {

void put_u32_be(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>((v >> 24) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>(v & 0xff));
}

void put_chunk(std::string& out, const char type[4], const std::string& data) {
    put_u32_be(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t crc_start = out.size();
    out.append(type, 4);
    out.append(data);
    const auto crc = crc32(0, reinterpret_cast<const Bytef*>(out.data() + crc_start),
                           static_cast<uInt>(out.size() - crc_start));
    put_u32_be(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

void write_png(const std::string& path, const Image& img) {
    const int w = img.width;
    const int h = img.height;
    if (w <= 0 || h <= 0 || img.values.size() != static_cast<Eigen::Index>(w) * h * 3)
        throw std::invalid_argument("write_png: malformed image");

    // Raw scanlines, filter byte 0 per row.
    std::vector<unsigned char> raw(static_cast<std::size_t>(h) * (1 + 3 * w));
    std::size_t at = 0;
    for (int y = 0; y < h; ++y) {
        raw[at++] = 0;
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                const double v = std::clamp(img.at(y, x, c), 0.0, 1.0);
                raw[at++] = static_cast<unsigned char>(std::lround(255.0 * v));
            }
    }

    uLongf comp_size = compressBound(static_cast<uLong>(raw.size()));
    std::vector<unsigned char> comp(comp_size);
    if (compress2(comp.data(), &comp_size, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK)
        throw std::runtime_error("write_png: deflate failed for " + path);

    std::string out("\x89PNG\r\n\x1a\n", 8);
    std::string ihdr;
    put_u32_be(ihdr, static_cast<std::uint32_t>(w));
    put_u32_be(ihdr, static_cast<std::uint32_t>(h));
    ihdr.push_back(8);   // bit depth
    ihdr.push_back(2);   // colour type: truecolour
    ihdr.push_back(0);   // compression
    ihdr.push_back(0);   // filter
    ihdr.push_back(0);   // interlace
    put_chunk(out, "IHDR", ihdr);
    put_chunk(out, "IDAT",
              std::string(reinterpret_cast<const char*>(comp.data()), comp_size));
    put_chunk(out, "IEND", "");

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("write_png: cannot open " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("write_png: write failed for " + path);
}

}  // namespace latentlink
