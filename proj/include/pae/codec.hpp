#pragma once

// Image file decoding (PNG, PPM P6, baseline JPEG) into normalized rasters,
// plus the small set of writers used for debug dumps and test fixtures.

#include <cctype>
#include <csetjmp>
#include <cstdlib>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "pae/error.hpp"
#include "pae/image.hpp"

namespace pae {

namespace detail {

inline RasterImage from_rgb8(int w, int h, const std::uint8_t* data) {
  RasterImage img(w, h);
  for (std::size_t i = 0; i < img.rgb.size(); ++i) img.rgb[i] = data[i] / 255.0;
  return img;
}

inline std::vector<std::uint8_t> to_rgb8(const RasterImage& img) {
  std::vector<std::uint8_t> out(img.rgb.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = to_byte(img.rgb[i]);
  return out;
}

inline RasterImage decode_png(const std::vector<std::uint8_t>& bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    fail_data(std::string("PNG header: ") + image.message);
  // Read straight (non-premultiplied) RGBA so alpha can be dropped rather than
  // composited.
  image.format = PNG_FORMAT_RGBA;
  if (image.width == 0 || image.height == 0) {
    png_image_free(&image);
    fail_data("PNG has a zero dimension");
  }
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr))
    fail_data(std::string("PNG decode: ") + image.message);
  const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
  for (std::size_t i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) buf[i * 3 + c] = buf[i * 4 + c];
  return from_rgb8(static_cast<int>(image.width), static_cast<int>(image.height), buf.data());
}

inline RasterImage decode_ppm(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 2;
  auto next_token = [&]() -> long {
    for (;;) {
      while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) fail_data("truncated PPM header");
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > (1L << 24)) fail_data("PPM header value out of range");
      ++pos;
    }
    return v;
  };
  const long w = next_token();
  const long h = next_token();
  const long maxval = next_token();
  if (w <= 0 || h <= 0) fail_data("PPM has a zero dimension");
  if (maxval != 255) fail_data("PPM maxval must be 255");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) fail_data("truncated PPM header");
  ++pos;
  const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3;
  if (bytes.size() - pos < need) fail_data("truncated PPM pixel data");
  return from_rgb8(static_cast<int>(w), static_cast<int>(h), bytes.data() + pos);
}

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Warnings (premature EOF, corrupt data) are counted, not printed.
inline void jpeg_count_warnings(j_common_ptr cinfo, int level) {
  if (level < 0) ++cinfo->err->num_warnings;
}

// libjpeg reports through longjmp, so no C++ object with a destructor may be
// live between setjmp and the library calls.
inline bool decode_jpeg_raw(const std::vector<std::uint8_t>& bytes, std::vector<std::uint8_t>& out,
                            int& w, int& h, std::string& message) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  jerr.pub.emit_message = jpeg_count_warnings;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    message = jerr.message;
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  w = static_cast<int>(cinfo.output_width);
  h = static_cast<int>(cinfo.output_height);
  out.resize(static_cast<std::size_t>(w) * h * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  const long warnings = jerr.pub.num_warnings;
  jpeg_destroy_decompress(&cinfo);
  if (warnings > 0) {
    message = "truncated or corrupt data";
    return false;
  }
  return true;
}

inline bool encode_jpeg_raw(const std::uint8_t* rgb, int w, int h, int quality,
                            std::vector<std::uint8_t>& out, std::string& message) {
  jpeg_compress_struct cinfo;
  JpegErrorManager jerr;
  unsigned char* mem = nullptr;
  unsigned long mem_size = 0;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(mem);
    message = jerr.message;
    return false;
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &mem, &mem_size);
  cinfo.image_width = static_cast<JDIMENSION>(w);
  cinfo.image_height = static_cast<JDIMENSION>(h);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<std::uint8_t*>(rgb) + static_cast<std::size_t>(cinfo.next_scanline) * w * 3;
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  out.assign(mem, mem + mem_size);
  jpeg_destroy_compress(&cinfo);
  std::free(mem);
  return true;
}

}  // namespace detail

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_data("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline RasterImage decode_image_bytes(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P' && bytes[2] == 'N' && bytes[3] == 'G')
    return detail::decode_png(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return detail::decode_ppm(bytes);
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
    std::vector<std::uint8_t> rgb;
    int w = 0, h = 0;
    std::string message;
    if (!detail::decode_jpeg_raw(bytes, rgb, w, h, message)) fail_data("JPEG decode: " + message);
    if (w == 0 || h == 0) fail_data("JPEG has a zero dimension");
    return detail::from_rgb8(w, h, rgb.data());
  }
  fail_data("unsupported image format");
}

inline RasterImage decode_image(const std::filesystem::path& path) {
  try {
    return decode_image_bytes(read_file_bytes(path));
  } catch (const Error& e) {
    fail_data(path.string() + ": " + e.what());
  }
}

inline std::vector<std::uint8_t> encode_jpeg(const RasterImage& img, int quality) {
  const std::vector<std::uint8_t> rgb = detail::to_rgb8(img);
  std::vector<std::uint8_t> out;
  std::string message;
  if (!detail::encode_jpeg_raw(rgb.data(), img.width, img.height, quality, out, message))
    fail_data("JPEG encode: " + message);
  return out;
}

inline void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_data("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline void write_ppm(const std::filesystem::path& path, const RasterImage& img) {
  const std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  const std::vector<std::uint8_t> rgb = detail::to_rgb8(img);
  bytes.insert(bytes.end(), rgb.begin(), rgb.end());
  write_bytes(path, bytes);
}

inline void write_png(const std::filesystem::path& path, const RasterImage& img) {
  const std::vector<std::uint8_t> rgb = detail::to_rgb8(img);
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, rgb.data(), 0, nullptr))
    fail_data(std::string("PNG write: ") + image.message);
}

inline void write_jpeg(const std::filesystem::path& path, const RasterImage& img, int quality) {
  write_bytes(path, encode_jpeg(img, quality));
}

}  // namespace pae
