/*
 * Copyright (C) 2025 The geosplat authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "geosplat/image_io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace geosplat {

double linear_to_srgb(double linear) {
    double x = std::clamp(linear, 0.0, 1.0);
    return x <= 0.0031308 ? 12.92 * x : 1.055 * std::pow(x, 1.0 / 2.4) - 0.055;
}

double srgb_to_linear(double srgb) {
    double s = std::clamp(srgb, 0.0, 1.0);
    return s <= 0.04045 ? s / 12.92 : std::pow((s + 0.055) / 1.055, 2.4);
}

namespace {

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<unsigned char>& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
    if (!out) throw IoError("write failed: " + path);
}

void put_u32_be(std::vector<unsigned char>& v, uint32_t x) {
    v.push_back((x >> 24) & 0xff);
    v.push_back((x >> 16) & 0xff);
    v.push_back((x >> 8) & 0xff);
    v.push_back(x & 0xff);
}

uint32_t get_u32_be(const unsigned char* p) {
    return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | p[3];
}

template <typename T>
void put_le(std::vector<unsigned char>& v, T x) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &x, sizeof(T));
    v.insert(v.end(), b, b + sizeof(T));
}

}  // namespace

// PNG ------------------------------------------------------------------------

namespace {

void png_chunk(std::vector<unsigned char>& out, const char type[4],
               const std::vector<unsigned char>& data) {
    put_u32_be(out, uint32_t(data.size()));
    size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    uint32_t crc = crc32(0, out.data() + crc_start, uInt(out.size() - crc_start));
    put_u32_be(out, crc);
}

}  // namespace

void write_png(const Image& linear, const std::string& path) {
    if (linear.channels() != 3 && linear.channels() != 1)
        throw IoError("png: only 1- or 3-channel buffers supported");
    if (!linear.all_finite()) throw IoError("png: buffer has non-finite values");
    const int w = linear.width(), h = linear.height(), ch = linear.channels();

    std::vector<unsigned char> raw;
    raw.reserve(size_t(h) * (1 + size_t(w) * ch));
    for (int y = 0; y < h; y++) {
        raw.push_back(0);  // filter: none
        for (int x = 0; x < w; x++)
            for (int c = 0; c < ch; c++) {
                double v = linear_to_srgb(linear.at(y, x, c));
                raw.push_back(static_cast<unsigned char>(std::lround(v * 255.0)));
            }
    }
    uLongf bound = compressBound(uLong(raw.size()));
    std::vector<unsigned char> compressed(bound);
    if (compress2(compressed.data(), &bound, raw.data(), uLong(raw.size()), 6) != Z_OK)
        throw IoError("png: deflate failed");
    compressed.resize(bound);

    std::vector<unsigned char> out = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    std::vector<unsigned char> ihdr;
    put_u32_be(ihdr, uint32_t(w));
    put_u32_be(ihdr, uint32_t(h));
    ihdr.push_back(8);                        // bit depth
    ihdr.push_back(ch == 3 ? 2 : 0);          // color type
    ihdr.push_back(0);                        // compression
    ihdr.push_back(0);                        // filter
    ihdr.push_back(0);                        // interlace
    png_chunk(out, "IHDR", ihdr);
    png_chunk(out, "IDAT", compressed);
    png_chunk(out, "IEND", {});
    write_file(path, out);
}

namespace {

Image decode_png(const std::string& path, bool to_linear) {
    std::vector<unsigned char> file = read_file(path);
    static const unsigned char magic[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (file.size() < 8 || std::memcmp(file.data(), magic, 8) != 0)
        throw IoError("png: bad signature: " + path);

    uint32_t w = 0, h = 0;
    int bit_depth = 0, color_type = 0, interlace = 0;
    std::vector<unsigned char> idat;
    size_t pos = 8;
    while (pos + 8 <= file.size()) {
        uint32_t len = get_u32_be(&file[pos]);
        std::string type(reinterpret_cast<const char*>(&file[pos + 4]), 4);
        if (pos + 12 + len > file.size()) throw IoError("png: truncated chunk: " + path);
        const unsigned char* data = &file[pos + 8];
        if (type == "IHDR") {
            w = get_u32_be(data);
            h = get_u32_be(data + 4);
            bit_depth = data[8];
            color_type = data[9];
            interlace = data[12];
        } else if (type == "IDAT") {
            idat.insert(idat.end(), data, data + len);
        } else if (type == "IEND") {
            break;
        }
        pos += 12 + len;
    }
    if (w == 0 || h == 0) throw IoError("png: missing IHDR: " + path);
    if (bit_depth != 8) throw IoError("png: only 8-bit supported: " + path);
    if (interlace != 0) throw IoError("png: interlacing not supported: " + path);
    int ch;
    switch (color_type) {
        case 0: ch = 1; break;
        case 2: ch = 3; break;
        case 4: ch = 2; break;
        case 6: ch = 4; break;
        default: throw IoError("png: palette images not supported: " + path);
    }

    size_t stride = size_t(w) * ch;
    std::vector<unsigned char> raw(size_t(h) * (stride + 1));
    uLongf raw_size = uLongf(raw.size());
    if (uncompress(raw.data(), &raw_size, idat.data(), uLong(idat.size())) != Z_OK ||
        raw_size != raw.size())
        throw IoError("png: inflate failed: " + path);

    // defilter in place into a packed buffer
    std::vector<unsigned char> pixels(size_t(h) * stride);
    auto paeth = [](int a, int b, int c) {
        int p = a + b - c, pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
        if (pa <= pb && pa <= pc) return a;
        return pb <= pc ? b : c;
    };
    for (uint32_t y = 0; y < h; y++) {
        const unsigned char* src = &raw[size_t(y) * (stride + 1)];
        unsigned char filter = src[0];
        src++;
        unsigned char* dst = &pixels[size_t(y) * stride];
        const unsigned char* up = y > 0 ? &pixels[size_t(y - 1) * stride] : nullptr;
        for (size_t i = 0; i < stride; i++) {
            int a = i >= size_t(ch) ? dst[i - ch] : 0;
            int b = up ? up[i] : 0;
            int c = (up && i >= size_t(ch)) ? up[i - ch] : 0;
            int x = src[i];
            switch (filter) {
                case 0: break;
                case 1: x += a; break;
                case 2: x += b; break;
                case 3: x += (a + b) / 2; break;
                case 4: x += paeth(a, b, c); break;
                default: throw IoError("png: bad filter byte: " + path);
            }
            dst[i] = static_cast<unsigned char>(x & 0xff);
        }
    }

    int out_ch = (ch == 1 || ch == 2) ? 1 : 3;
    Image img(int(w), int(h), out_ch);
    for (uint32_t y = 0; y < h; y++)
        for (uint32_t x = 0; x < w; x++) {
            const unsigned char* p = &pixels[(size_t(y) * w + x) * ch];
            for (int c = 0; c < out_ch; c++) {
                double v = p[c] / 255.0;
                img.at(int(y), int(x), c) = to_linear ? srgb_to_linear(v) : v;
            }
        }
    return img;
}

}  // namespace

Image read_png(const std::string& path) { return decode_png(path, true); }
Image read_png_raw(const std::string& path) { return decode_png(path, false); }

// EXR (float32 RGB scanlines, uncompressed) ----------------------------------

namespace {

void exr_attr(std::vector<unsigned char>& out, const char* name, const char* type,
              const std::vector<unsigned char>& data) {
    out.insert(out.end(), name, name + std::strlen(name) + 1);
    out.insert(out.end(), type, type + std::strlen(type) + 1);
    put_le(out, int32_t(data.size()));
    out.insert(out.end(), data.begin(), data.end());
}

}  // namespace

void write_exr(const Image& buffer, const std::string& path) {
    if (buffer.channels() != 3) throw IoError("exr: only 3-channel buffers supported");
    if (!buffer.all_finite()) throw IoError("exr: buffer has non-finite values");
    const int w = buffer.width(), h = buffer.height();

    std::vector<unsigned char> out;
    put_le(out, uint32_t(20000630));  // magic
    put_le(out, int32_t(2));          // version, no flags

    {  // channel list: B, G, R (names must be sorted)
        std::vector<unsigned char> chlist;
        for (const char* name : {"B", "G", "R"}) {
            chlist.insert(chlist.end(), name, name + 2);  // includes NUL
            put_le(chlist, int32_t(2));                   // FLOAT
            put_le(chlist, int32_t(0));                   // pLinear + reserved
            put_le(chlist, int32_t(1));                   // xSampling
            put_le(chlist, int32_t(1));                   // ySampling
        }
        chlist.push_back(0);
        exr_attr(out, "channels", "chlist", chlist);
    }
    {
        std::vector<unsigned char> v;
        v.push_back(0);  // NO_COMPRESSION
        exr_attr(out, "compression", "compression", v);
    }
    for (const char* name : {"dataWindow", "displayWindow"}) {
        std::vector<unsigned char> v;
        put_le(v, int32_t(0));
        put_le(v, int32_t(0));
        put_le(v, int32_t(w - 1));
        put_le(v, int32_t(h - 1));
        exr_attr(out, name, "box2i", v);
    }
    {
        std::vector<unsigned char> v;
        v.push_back(0);  // INCREASING_Y
        exr_attr(out, "lineOrder", "lineOrder", v);
    }
    {
        std::vector<unsigned char> v;
        put_le(v, float(1));
        exr_attr(out, "pixelAspectRatio", "float", v);
    }
    {
        std::vector<unsigned char> v;
        put_le(v, float(0));
        put_le(v, float(0));
        exr_attr(out, "screenWindowCenter", "v2f", v);
    }
    {
        std::vector<unsigned char> v;
        put_le(v, float(1));
        exr_attr(out, "screenWindowWidth", "float", v);
    }
    out.push_back(0);  // end of header

    const size_t scanline_bytes = 8 + size_t(w) * 3 * 4;
    uint64_t offset = out.size() + size_t(h) * 8;
    for (int y = 0; y < h; y++) put_le(out, uint64_t(offset + uint64_t(y) * scanline_bytes));

    for (int y = 0; y < h; y++) {
        put_le(out, int32_t(y));
        put_le(out, int32_t(w * 3 * 4));
        for (int c : {2, 1, 0})  // file channel order B, G, R
            for (int x = 0; x < w; x++) put_le(out, float(buffer.at(y, x, c)));
    }
    write_file(path, out);
}

Image read_exr(const std::string& path) {
    std::vector<unsigned char> file = read_file(path);
    if (file.size() < 8) throw IoError("exr: truncated: " + path);
    uint32_t magic;
    std::memcpy(&magic, file.data(), 4);
    if (magic != 20000630u) throw IoError("exr: bad magic: " + path);

    size_t pos = 8;
    auto read_string = [&]() {
        std::string s;
        while (pos < file.size() && file[pos] != 0) s.push_back(char(file[pos++]));
        pos++;
        return s;
    };
    int x_min = 0, y_min = 0, x_max = -1, y_max = -1;
    int compression = -1;
    struct Channel {
        std::string name;
        int type;
    };
    std::vector<Channel> channels;
    while (pos < file.size() && file[pos] != 0) {
        std::string name = read_string();
        std::string type = read_string();
        if (pos + 4 > file.size()) throw IoError("exr: truncated header: " + path);
        int32_t size;
        std::memcpy(&size, &file[pos], 4);
        pos += 4;
        if (pos + size_t(size) > file.size()) throw IoError("exr: truncated attribute: " + path);
        const unsigned char* data = &file[pos];
        if (name == "dataWindow" && type == "box2i") {
            int32_t v[4];
            std::memcpy(v, data, 16);
            x_min = v[0];
            y_min = v[1];
            x_max = v[2];
            y_max = v[3];
        } else if (name == "compression") {
            compression = data[0];
        } else if (name == "channels" && type == "chlist") {
            size_t cpos = 0;
            while (cpos < size_t(size) && data[cpos] != 0) {
                Channel ch;
                while (cpos < size_t(size) && data[cpos] != 0) ch.name.push_back(char(data[cpos++]));
                cpos++;
                int32_t ptype;
                std::memcpy(&ptype, data + cpos, 4);
                ch.type = ptype;
                cpos += 16;
                channels.push_back(ch);
            }
        }
        pos += size_t(size);
    }
    pos++;  // header terminator

    if (compression != 0) throw IoError("exr: only uncompressed files supported: " + path);
    if (channels.size() != 3 || channels[0].name != "B" || channels[1].name != "G" ||
        channels[2].name != "R")
        throw IoError("exr: expected float B,G,R channels: " + path);
    for (const auto& ch : channels)
        if (ch.type != 2) throw IoError("exr: only FLOAT channels supported: " + path);

    const int w = x_max - x_min + 1, h = y_max - y_min + 1;
    if (w <= 0 || h <= 0) throw IoError("exr: bad data window: " + path);
    pos += size_t(h) * 8;  // offset table

    Image img(w, h, 3);
    for (int y = 0; y < h; y++) {
        if (pos + 8 > file.size()) throw IoError("exr: truncated scanline: " + path);
        int32_t line_y, bytes;
        std::memcpy(&line_y, &file[pos], 4);
        std::memcpy(&bytes, &file[pos + 4], 4);
        pos += 8;
        if (bytes != w * 3 * 4 || pos + size_t(bytes) > file.size())
            throw IoError("exr: bad scanline block: " + path);
        int row = line_y - y_min;
        for (int ci = 0; ci < 3; ci++) {
            int c = 2 - ci;  // file order B,G,R -> image channel 2,1,0
            for (int x = 0; x < w; x++) {
                float v;
                std::memcpy(&v, &file[pos + (size_t(ci) * w + x) * 4], 4);
                img.at(row, x, c) = v;
            }
        }
        pos += size_t(bytes);
    }
    return img;
}

// Radiance HDR ----------------------------------------------------------------

namespace {

Vec3 rgbe_to_linear(const unsigned char rgbe[4]) {
    if (rgbe[3] == 0) return {0, 0, 0};
    double f = std::ldexp(1.0, int(rgbe[3]) - (128 + 8));
    return {rgbe[0] * f, rgbe[1] * f, rgbe[2] * f};
}

void linear_to_rgbe(const Vec3& c, unsigned char rgbe[4]) {
    double m = max_component(c);
    if (m < 1e-32) {
        rgbe[0] = rgbe[1] = rgbe[2] = rgbe[3] = 0;
        return;
    }
    int e;
    double f = std::frexp(m, &e);
    double scale = f * 256.0 / m;
    rgbe[0] = static_cast<unsigned char>(std::min(255.0, c.x * scale));
    rgbe[1] = static_cast<unsigned char>(std::min(255.0, c.y * scale));
    rgbe[2] = static_cast<unsigned char>(std::min(255.0, c.z * scale));
    rgbe[3] = static_cast<unsigned char>(e + 128);
}

}  // namespace

void write_hdr(const Image& buffer, const std::string& path) {
    if (buffer.channels() != 3) throw IoError("hdr: only 3-channel buffers supported");
    std::ostringstream header;
    header << "#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y " << buffer.height() << " +X "
           << buffer.width() << "\n";
    std::vector<unsigned char> out(header.str().begin(), header.str().end());
    unsigned char rgbe[4];
    for (int y = 0; y < buffer.height(); y++)
        for (int x = 0; x < buffer.width(); x++) {
            linear_to_rgbe(buffer.pixel3(y, x), rgbe);
            out.insert(out.end(), rgbe, rgbe + 4);
        }
    write_file(path, out);
}

Image read_hdr(const std::string& path) {
    std::vector<unsigned char> file = read_file(path);
    size_t pos = 0;
    auto read_line = [&]() {
        std::string line;
        while (pos < file.size() && file[pos] != '\n') line.push_back(char(file[pos++]));
        pos++;
        return line;
    };
    std::string signature = read_line();
    if (signature.rfind("#?", 0) != 0) throw IoError("hdr: bad signature: " + path);
    std::string line;
    while (pos < file.size()) {
        line = read_line();
        if (line.empty()) break;  // end of header
    }
    line = read_line();
    int w = 0, h = 0;
    if (std::sscanf(line.c_str(), "-Y %d +X %d", &h, &w) != 2)
        throw IoError("hdr: unsupported resolution line '" + line + "': " + path);

    Image img(w, h, 3);
    std::vector<unsigned char> scan(size_t(w) * 4);
    for (int y = 0; y < h; y++) {
        if (pos + 4 > file.size()) throw IoError("hdr: truncated: " + path);
        if (w >= 8 && w <= 32767 && file[pos] == 2 && file[pos + 1] == 2 &&
            ((int(file[pos + 2]) << 8) | file[pos + 3]) == w) {
            // new-style RLE: four separate channel streams
            pos += 4;
            for (int c = 0; c < 4; c++) {
                int x = 0;
                while (x < w) {
                    if (pos >= file.size()) throw IoError("hdr: truncated rle: " + path);
                    int count = file[pos++];
                    if (count > 128) {
                        count -= 128;
                        if (pos >= file.size() || x + count > w)
                            throw IoError("hdr: bad rle run: " + path);
                        unsigned char v = file[pos++];
                        for (int i = 0; i < count; i++) scan[size_t(x++) * 4 + c] = v;
                    } else {
                        if (count == 0 || x + count > w || pos + size_t(count) > file.size())
                            throw IoError("hdr: bad rle literal: " + path);
                        for (int i = 0; i < count; i++) scan[size_t(x++) * 4 + c] = file[pos++];
                    }
                }
            }
        } else {
            if (pos + size_t(w) * 4 > file.size()) throw IoError("hdr: truncated flat: " + path);
            std::memcpy(scan.data(), &file[pos], size_t(w) * 4);
            pos += size_t(w) * 4;
        }
        for (int x = 0; x < w; x++) img.set_pixel3(y, x, rgbe_to_linear(&scan[size_t(x) * 4]));
    }
    return img;
}

// PFM -------------------------------------------------------------------------

void write_pfm(const Image& buffer, const std::string& path) {
    if (buffer.channels() != 3 && buffer.channels() != 1)
        throw IoError("pfm: only 1- or 3-channel buffers supported");
    std::ostringstream header;
    header << (buffer.channels() == 3 ? "PF" : "Pf") << "\n"
           << buffer.width() << " " << buffer.height() << "\n-1.0\n";
    std::vector<unsigned char> out(header.str().begin(), header.str().end());
    for (int y = buffer.height() - 1; y >= 0; y--)  // bottom-to-top
        for (int x = 0; x < buffer.width(); x++)
            for (int c = 0; c < buffer.channels(); c++) put_le(out, float(buffer.at(y, x, c)));
    write_file(path, out);
}

Image read_pfm(const std::string& path) {
    std::vector<unsigned char> file = read_file(path);
    size_t pos = 0;
    auto token = [&]() {
        while (pos < file.size() && std::isspace(file[pos])) pos++;
        std::string t;
        while (pos < file.size() && !std::isspace(file[pos])) t.push_back(char(file[pos++]));
        return t;
    };
    std::string kind = token();
    int ch;
    if (kind == "PF") ch = 3;
    else if (kind == "Pf") ch = 1;
    else throw IoError("pfm: bad signature: " + path);
    int w = std::stoi(token()), h = std::stoi(token());
    double scale = std::stod(token());
    pos++;  // single whitespace after scale
    bool little = scale < 0;
    if (w <= 0 || h <= 0) throw IoError("pfm: bad dimensions: " + path);
    if (pos + size_t(w) * h * ch * 4 > file.size()) throw IoError("pfm: truncated: " + path);

    Image img(w, h, ch);
    for (int y = h - 1; y >= 0; y--)
        for (int x = 0; x < w; x++)
            for (int c = 0; c < ch; c++) {
                unsigned char b[4];
                std::memcpy(b, &file[pos], 4);
                pos += 4;
                if (!little) std::swap(b[0], b[3]), std::swap(b[1], b[2]);
                float v;
                std::memcpy(&v, b, 4);
                img.at(y, x, c) = v;
            }
    return img;
}

// dispatch --------------------------------------------------------------------

void write_image(const Image& buffer, const std::string& path, ImageEncoding encoding) {
    if (!buffer.all_finite()) throw IoError("write_image: buffer has non-finite values");
    if (encoding == ImageEncoding::png_srgb) write_png(buffer, path);
    else write_exr(buffer, path);
}

Image read_image_any(const std::string& path) {
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    for (auto& c : ext) c = char(std::tolower(c));
    if (ext == "png") return read_png(path);
    if (ext == "exr") return read_exr(path);
    if (ext == "hdr" || ext == "pic") return read_hdr(path);
    if (ext == "pfm") return read_pfm(path);
    throw IoError("unsupported image extension: " + path);
}

}  // namespace geosplat
