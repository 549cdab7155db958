#pragma once

#include <string>

#include "scd/mask.hpp"
#include "scd/tensor.hpp"

namespace scd {

// Image as fed to the model: values in [0,1], reflect-padded to the next
// multiple of 16, with the original extent kept for cropping results back.
struct LoadedImage {
  Tensor<float> image;
  int orig_h = 0, orig_w = 0;
};

// Reads an 8-bit PNG (palette and gray inputs are expanded to RGB; 16-bit
// depth is rejected).
LoadedImage load_image(const std::string& path);

// Writes (1,3,H,W) values in [0,1] as 8-bit RGB.
void save_image(const std::string& path, const Tensor<float>& img);

// Single-channel 8-bit PNG, 0 = static, 255 = change.
void save_mask(const std::string& path, const LabelMap& mask);
LabelMap load_mask(const std::string& path);

int pad_to_multiple_of_16(int size);

}  // namespace scd
