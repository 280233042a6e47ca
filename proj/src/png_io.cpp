#include "probfuse/png_io.hpp"

#include <png.h>

#include <cstring>
#include <vector>

#include "probfuse/errors.hpp"

namespace probfuse {

namespace {

// RAII wrapper over libpng's simplified read API.
class PngReader {
 public:
  explicit PngReader(const std::string& path) : path_(path) {
    std::memset(&image_, 0, sizeof(image_));
    image_.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image_, path.c_str())) {
      const std::string msg = image_.message;
      png_image_free(&image_);
      throw IoError("cannot read PNG " + path + ": " + msg);
    }
  }
  ~PngReader() { png_image_free(&image_); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;

  png_image& image() { return image_; }

  std::vector<std::uint8_t> finish(png_uint_32 format) {
    image_.format = format;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image_));
    if (!png_image_finish_read(&image_, nullptr, buf.data(), 0, nullptr)) {
      throw IoError("cannot decode PNG " + path_ + ": " + image_.message);
    }
    return buf;
  }

 private:
  std::string path_;
  png_image image_;
};

void write_png(const std::uint8_t* data, int width, int height, png_uint_32 format,
               const std::string& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, data, 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot write PNG " + path + ": " + msg);
  }
  png_image_free(&image);
}

}  // namespace

BinaryMask read_mask(const std::string& path, std::string class_name) {
  PngReader reader(path);
  const png_uint_32 fmt = reader.image().format;
  if (fmt & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_ALPHA)) {
    throw UnsupportedFormatError(path + ": mask PNG must be single-channel grayscale");
  }
  if (fmt & PNG_FORMAT_FLAG_LINEAR) {
    throw UnsupportedFormatError(path + ": mask PNG must be 8-bit");
  }
  if (fmt & PNG_FORMAT_FLAG_COLORMAP) {
    throw UnsupportedFormatError(path + ": palette PNG not supported for masks");
  }
  const int w = static_cast<int>(reader.image().width);
  const int h = static_cast<int>(reader.image().height);
  auto pixels = reader.finish(PNG_FORMAT_GRAY);
  for (auto& v : pixels) v = v >= 128 ? 1 : 0;
  return BinaryMask(w, h, std::move(pixels), std::move(class_name));
}

void write_mask(const BinaryMask& mask, const std::string& path) {
  std::vector<std::uint8_t> pixels(mask.cells().begin(), mask.cells().end());
  for (auto& v : pixels) v = v ? 255 : 0;
  write_png(pixels.data(), mask.width(), mask.height(), PNG_FORMAT_GRAY, path);
}

RgbImage read_rgb(const std::string& path) {
  PngReader reader(path);
  if (reader.image().format & PNG_FORMAT_FLAG_LINEAR) {
    throw UnsupportedFormatError(path + ": only 8-bit PNG images are supported");
  }
  RgbImage img;
  img.width = static_cast<int>(reader.image().width);
  img.height = static_cast<int>(reader.image().height);
  img.pixels = reader.finish(PNG_FORMAT_RGB);
  return img;
}

void write_rgb(const RgbImage& image, const std::string& path) {
  write_png(image.pixels.data(), image.width, image.height, PNG_FORMAT_RGB, path);
}

void write_gray8(std::span<const std::uint8_t> pixels, int width, int height,
                 const std::string& path) {
  if (pixels.size() != std::size_t(width) * std::size_t(height)) {
    throw ShapeError("pixel buffer does not match image dimensions");
  }
  write_png(pixels.data(), width, height, PNG_FORMAT_GRAY, path);
}

PngInfo probe_png(const std::string& path) {
  PngReader reader(path);
  return {static_cast<int>(reader.image().width), static_cast<int>(reader.image().height)};
}

}  // namespace probfuse
