#pragma once

// PNG / JPEG decode and encode. Real-valued planes are clamped and rounded to
// 8 bits only here.

#include <png.h>

#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

// jpeglib.h relies on size_t and FILE being declared first.
#include <jpeglib.h>

#include "lesionseg/raster.hpp"

namespace lesionseg {

class ImageIoError : public DataError {
 public:
  using DataError::DataError;
};

namespace detail {

struct Bytes8 {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 or 3
  std::vector<std::uint8_t> data;
};

inline std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

inline bool is_jpeg(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  return ext == ".jpg" || ext == ".jpeg";
}

inline Bytes8 read_png(const std::filesystem::path& path, int channels) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw ImageIoError("cannot read PNG " + path.string() + ": " + image.message);
  image.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  Bytes8 out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.channels = channels;
  out.data.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw ImageIoError("cannot decode PNG " + path.string() + ": " + msg);
  }
  return out;
}

inline void write_png(const std::filesystem::path& path, const Bytes8& img) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.data.data(), 0, nullptr))
    throw ImageIoError("cannot write PNG " + path.string() + ": " + image.message);
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

extern "C" inline void lesionseg_jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};

inline Bytes8 read_jpeg(const std::filesystem::path& path, int channels) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw ImageIoError("cannot open JPEG " + path.string());

  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = lesionseg_jpeg_error_exit;
  err.message[0] = '\0';
  Bytes8 out;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw ImageIoError("cannot decode JPEG " + path.string() + ": " + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file.get());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = channels == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out.width = static_cast<int>(cinfo.output_width);
  out.height = static_cast<int>(cinfo.output_height);
  out.channels = channels;
  out.data.resize(static_cast<std::size_t>(out.width) * out.height * channels);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.data.data() + static_cast<std::size_t>(cinfo.output_scanline) * out.width * channels;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return out;
}

inline void write_jpeg(const std::filesystem::path& path, const Bytes8& img, int quality) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw ImageIoError("cannot open " + path.string() + " for writing");
  jpeg_compress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = lesionseg_jpeg_error_exit;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    throw ImageIoError("cannot encode JPEG " + path.string() + ": " + err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, file.get());
  cinfo.image_width = static_cast<JDIMENSION>(img.width);
  cinfo.image_height = static_cast<JDIMENSION>(img.height);
  cinfo.input_components = img.channels;
  cinfo.in_color_space = img.channels == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPLE*>(img.data.data() +
                                     static_cast<std::size_t>(cinfo.next_scanline) * img.width * img.channels);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
}

inline Bytes8 read_any(const std::filesystem::path& path, int channels) {
  if (!std::filesystem::exists(path)) throw ImageIoError("no such file: " + path.string());
  return is_jpeg(path) ? read_jpeg(path, channels) : read_png(path, channels);
}

}  // namespace detail

inline RgbImage read_image(const std::filesystem::path& path) {
  const detail::Bytes8 raw = detail::read_any(path, 3);
  RgbImage img(raw.width, raw.height);
  std::size_t i = 0;
  for (int y = 0; y < raw.height; ++y)
    for (int x = 0; x < raw.width; ++x)
      for (int c = 0; c < 3; ++c) img.planes[c](x, y) = raw.data[i++];
  return img;
}

/// Masks are read as grayscale; values above 127 are foreground.
inline BinaryMask read_mask(const std::filesystem::path& path) {
  const detail::Bytes8 raw = detail::read_any(path, 1);
  BinaryMask mask(raw.width, raw.height);
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = raw.data[i] > 127 ? 1 : 0;
  return mask;
}

/// Writes PNG, or JPEG when the extension asks for it.
inline void write_image(const std::filesystem::path& path, const RgbImage& img, int jpeg_quality = 95) {
  detail::Bytes8 raw;
  raw.width = img.width();
  raw.height = img.height();
  raw.channels = 3;
  raw.data.reserve(static_cast<std::size_t>(raw.width) * raw.height * 3);
  for (int y = 0; y < raw.height; ++y)
    for (int x = 0; x < raw.width; ++x)
      for (int c = 0; c < 3; ++c) raw.data.push_back(to_byte(img.planes[c](x, y)));
  if (detail::is_jpeg(path)) {
    detail::write_jpeg(path, raw, jpeg_quality);
  } else {
    detail::write_png(path, raw);
  }
}

/// Single-channel PNG, 0 = background, 255 = foreground.
inline void write_mask(const std::filesystem::path& path, const BinaryMask& mask) {
  detail::Bytes8 raw;
  raw.width = mask.width();
  raw.height = mask.height();
  raw.channels = 1;
  raw.data.resize(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) raw.data[i] = mask[i] ? 255 : 0;
  detail::write_png(path, raw);
}

}  // namespace lesionseg
