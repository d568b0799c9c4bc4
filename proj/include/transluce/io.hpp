/*
 * Copyright (C) 2026 The Transluce Authors
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

#include "transluce/types.hpp"

namespace transluce {

/// Little-endian PFM ("PF" color / "Pf" grayscale, scale header -1.0,
/// scanlines bottom-to-top). Round trips are float-bit-exact.
void write_pfm(const Image& img, const std::string& path);
Image read_pfm(const std::string& path);

/// 8-bit PNG. 1-channel images write grayscale, 3-channel write RGB; values
/// are clamped to [0,1] and scaled to [0,255].
void write_png(const Image& img, const std::string& path);

/// Reads an 8-bit PNG back to floats in [0,1] (RGB collapsed per channel,
/// RGBA alpha dropped).
Image read_png(const std::string& path);

/// Preview tonemap: exposure normalization to the 95th percentile followed
/// by gamma 2.2.
Image tonemap_preview(const Image& hdr);

/// CRC32 (zlib polynomial) of a file's bytes, for manifest integrity.
uint32_t file_crc32(const std::string& path);

}  // namespace transluce
