#ifndef EBGAN_IMAGE_IO_HPP
#define EBGAN_IMAGE_IO_HPP

#include <filesystem>

#include <torch/torch.h>

namespace ebgan {

// Decodes an image file to a (3,resolution,resolution) float tensor in
// [-1,1], RGB channel order, after a center square crop and resize. A file
// already at the target size passes through without resampling.
torch::Tensor load_image(const std::filesystem::path& path, long resolution);

// Decodes at the file's own size with no crop or resize, (3,H,W) in [-1,1].
torch::Tensor load_image_native(const std::filesystem::path& path);

// Encodes a (3,H,W) tensor in [-1,1] to an 8-bit image file; format follows
// the extension (.png is lossless and round-trips quantized values exactly).
void save_image(const torch::Tensor& image, const std::filesystem::path& path);

// The quantization save_image applies: [-1,1] -> {0..255} -> [-1,1].
// save then load of a same-size image reproduces quantize_u8(x) bit-exactly.
torch::Tensor quantize_u8(const torch::Tensor& image);

}  // namespace ebgan

#endif
