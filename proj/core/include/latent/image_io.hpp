#pragma once

#include <string>

#include "latent/video.hpp"

namespace latent {

/// Binary PPM (P6, 8-bit), intensities mapped linearly to [0,1].
/// Parse errors report the byte offset.
ImageGrid read_ppm(const std::string& path);
void write_ppm(const ImageGrid& image, const std::string& path);

/// Binary PGM (P5, 8-bit) masks; exactly 255 means true.
MaskGrid read_pgm_mask(const std::string& path);
void write_pgm_mask(const MaskGrid& mask, const std::string& path);

}  // namespace latent
