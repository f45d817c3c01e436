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

#pragma once

#include <string>

#include "geosplat/image.hpp"

namespace geosplat {

/// Raised for malformed or unsupported input files (user error, not a bug).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// sRGB transfer (IEC 61966-2-1)
double linear_to_srgb(double linear);
double srgb_to_linear(double srgb);

enum class ImageEncoding { png_srgb, exr_linear };

/// Writes a linear H x W x 3 buffer. PNG applies the sRGB transfer and clamps
/// to [0,1]; EXR stores linear float32 scanlines (uncompressed) so values
/// round-trip bit-exactly at float32 precision. Paths decide nothing; the
/// encoding argument does.
void write_image(const Image& buffer, const std::string& path, ImageEncoding encoding);

// PNG (8-bit, via zlib). Gray images are written as single-channel PNG.
void write_png(const Image& linear_rgb, const std::string& path);
/// Reads an 8-bit PNG into linear radiance (inverse sRGB applied);
/// gray stays 1 channel, RGB(A) becomes 3 (alpha dropped).
Image read_png(const std::string& path);
/// Reads an 8-bit PNG without the inverse transfer (values in [0,1]).
Image read_png_raw(const std::string& path);

// OpenEXR subset: float32 RGB scanlines, no compression.
void write_exr(const Image& buffer, const std::string& path);
Image read_exr(const std::string& path);

// Radiance HDR (RGBE, reads RLE and flat files; writes flat).
void write_hdr(const Image& buffer, const std::string& path);
Image read_hdr(const std::string& path);

// Portable FloatMap (PF color / Pf gray, little-endian).
void write_pfm(const Image& buffer, const std::string& path);
Image read_pfm(const std::string& path);

/// Loads any supported format by extension (.png .exr .hdr .pfm) into linear
/// radiance.
Image read_image_any(const std::string& path);

}  // namespace geosplat
