#include "scd/png_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <vector>

#include <png.h>

namespace scd {

int pad_to_multiple_of_16(int size) { return (size + 15) / 16 * 16; }

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Raw 8-bit rows straight from libpng.
struct Png8 {
  int h = 0, w = 0, channels = 0;
  std::vector<unsigned char> data;  // row-major, interleaved
};

Png8 read_png8(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("cannot open PNG: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("failed to decode PNG: " + path);
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_byte depth = png_get_bit_depth(png, info);
  if (depth == 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("unsupported bit depth 16 in " + path + " (8-bit PNG required)");
  }
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  png_set_gray_to_rgb(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  Png8 out;
  out.w = static_cast<int>(png_get_image_width(png, info));
  out.h = static_cast<int>(png_get_image_height(png, info));
  out.channels = static_cast<int>(png_get_channels(png, info));
  out.data.resize(static_cast<std::size_t>(out.h) * out.w * out.channels);

  std::vector<png_bytep> rows(out.h);
  const std::size_t stride = static_cast<std::size_t>(out.w) * out.channels;
  for (int y = 0; y < out.h; ++y) rows[y] = out.data.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void write_png8(const std::string& path, int h, int w, int channels,
                const std::vector<unsigned char>& data) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot write PNG: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("failed to encode PNG: " + path);
  }

  png_init_io(png, fp.get());
  const int color = channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, w, h, 8, color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_bytep> rows(h);
  const std::size_t stride = static_cast<std::size_t>(w) * channels;
  for (int y = 0; y < h; ++y) rows[y] = const_cast<png_bytep>(data.data() + y * stride);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// edge-inclusive mirror: 2*size-1-i for i >= size
int reflect_index(int i, int size) { return i < size ? i : 2 * size - 1 - i; }

}  // namespace

LoadedImage load_image(const std::string& path) {
  const Png8 raw = read_png8(path);
  if (raw.channels != 3)
    throw std::runtime_error("expected RGB data in " + path + ", got " +
                             std::to_string(raw.channels) + " channels");

  LoadedImage out;
  out.orig_h = raw.h;
  out.orig_w = raw.w;
  const int ph = pad_to_multiple_of_16(raw.h);
  const int pw = pad_to_multiple_of_16(raw.w);
  out.image = Tensor<float>(Shape{1, 3, ph, pw});
  const std::size_t plane = static_cast<std::size_t>(ph) * pw;
  float* v = out.image.value().data();
  for (int y = 0; y < ph; ++y) {
    const int sy = reflect_index(y, raw.h);
    for (int x = 0; x < pw; ++x) {
      const int sx = reflect_index(x, raw.w);
      const unsigned char* px = raw.data.data() + (static_cast<std::size_t>(sy) * raw.w + sx) * 3;
      for (int c = 0; c < 3; ++c)
        v[c * plane + static_cast<std::size_t>(y) * pw + x] = px[c] / 255.0f;
    }
  }
  return out;
}

void save_image(const std::string& path, const Tensor<float>& img) {
  const Shape s = img.shape();
  if (s.n != 1 || s.c != 3)
    throw std::invalid_argument("save_image: expected (1,3,H,W), got " + s.str());
  std::vector<unsigned char> data(static_cast<std::size_t>(s.h) * s.w * 3);
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  const float* v = img.value().data();
  for (int y = 0; y < s.h; ++y)
    for (int x = 0; x < s.w; ++x)
      for (int c = 0; c < 3; ++c) {
        const float val = std::clamp(v[c * plane + static_cast<std::size_t>(y) * s.w + x], 0.0f,
                                     1.0f);
        data[(static_cast<std::size_t>(y) * s.w + x) * 3 + c] =
            static_cast<unsigned char>(std::lround(val * 255.0f));
      }
  write_png8(path, s.h, s.w, 3, data);
}

void save_mask(const std::string& path, const LabelMap& mask) {
  std::vector<unsigned char> data(mask.v.size());
  for (std::size_t i = 0; i < mask.v.size(); ++i) data[i] = mask.v[i] ? 255 : 0;
  write_png8(path, mask.h, mask.w, 1, data);
}

LabelMap load_mask(const std::string& path) {
  const Png8 raw = read_png8(path);
  LabelMap m(raw.h, raw.w);
  for (std::size_t i = 0; i < m.v.size(); ++i)
    m.v[i] = raw.data[i * raw.channels] >= 128 ? 1 : 0;
  return m;
}

}  // namespace scd
