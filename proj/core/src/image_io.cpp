/*
 * Copyright 2026 The HFSS Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "hfss/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <csetjmp>
#include <cstdio>
#include <cstring>

#include <jpeglib.h>
#include <png.h>

#include "hfss/container.hpp"
#include "hfss/error.hpp"

namespace hfss {
namespace {

struct PngReadSource {
  const std::string* bytes;
  std::size_t offset;
};

void png_read_from_string(png_structp png, png_bytep out, png_size_t length) {
  auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
  if (src->offset + length > src->bytes->size()) png_error(png, "unexpected end of data");
  std::memcpy(out, src->bytes->data() + src->offset, length);
  src->offset += length;
}

void png_write_to_string(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), length);
}

void png_flush_noop(png_structp) {}

void png_error_handler(png_structp png, png_const_charp message) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text != nullptr) *text = message;
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

RawImage decode_png(const std::string& bytes, const std::string& name) {
  std::string error;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_error_handler, png_warning_handler);
  if (png == nullptr) throw DataError(name + ": cannot allocate PNG decoder");
  png_infop info = png_create_info_struct(png);
  RawImage image;
  std::vector<png_bytep> rows;
  std::vector<unsigned char> buffer;
  PngReadSource src{&bytes, 0};

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError(name + ": undecodable PNG (" + error + ")");
  }
  png_set_read_fn(png, &src, png_read_from_string);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (depth == 16) png_set_swap(png);
  png_read_update_info(png, info);

  image.width = static_cast<int>(png_get_image_width(png, info));
  image.height = static_cast<int>(png_get_image_height(png, info));
  image.channels = png_get_channels(png, info);
  const int out_depth = png_get_bit_depth(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  buffer.resize(row_bytes * image.height);
  rows.resize(image.height);
  for (int y = 0; y < image.height; ++y) rows[y] = buffer.data() + y * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t count = static_cast<std::size_t>(image.width) * image.height * image.channels;
  image.values.resize(count);
  const std::size_t stride = static_cast<std::size_t>(image.width) * image.channels;
  for (int y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < stride; ++x) {
      double v;
      if (out_depth == 16) {
        std::uint16_t q;
        std::memcpy(&q, rows[y] + 2 * x, 2);
        v = q / 65535.0;
      } else {
        v = rows[y][x] / 255.0;
      }
      image.values[y * stride + x] = v;
    }
  }
  return image;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

RawImage decode_jpeg(const std::string& bytes, const std::string& name) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  RawImage image;
  std::vector<unsigned char> row;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw DataError(name + ": undecodable JPEG (" + std::string(err.message) + ")");
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, reinterpret_cast<const unsigned char*>(bytes.data()),
               static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  image.width = static_cast<int>(cinfo.output_width);
  image.height = static_cast<int>(cinfo.output_height);
  image.channels = cinfo.output_components;
  const std::size_t stride = static_cast<std::size_t>(image.width) * image.channels;
  image.values.resize(stride * image.height);
  row.resize(stride);
  while (cinfo.output_scanline < cinfo.output_height) {
    const std::size_t y = cinfo.output_scanline;
    JSAMPROW ptr = row.data();
    jpeg_read_scanlines(&cinfo, &ptr, 1);
    for (std::size_t x = 0; x < stride; ++x) image.values[y * stride + x] = row[x] / 255.0;
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return image;
}

std::string encode_png(const RawImage& image, int depth) {
  if (image.channels < 1 || image.channels > 4) throw ConfigError("PNG needs 1 to 4 channels");
  std::string out;
  std::string error;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_error_handler, png_warning_handler);
  if (png == nullptr) throw IoError("cannot allocate PNG encoder");
  png_infop info = png_create_info_struct(png);
  const std::size_t stride = static_cast<std::size_t>(image.width) * image.channels;
  std::vector<unsigned char> buffer(stride * image.height * (depth / 8));
  for (std::size_t i = 0; i < stride * image.height; ++i) {
    const double v = std::clamp(image.values[i], 0.0, 1.0);
    if (depth == 16) {
      const auto q = static_cast<std::uint16_t>(std::lround(v * 65535.0));
      buffer[2 * i] = static_cast<unsigned char>(q >> 8);
      buffer[2 * i + 1] = static_cast<unsigned char>(q & 0xff);
    } else {
      buffer[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
  }
  std::vector<png_bytep> rows(image.height);
  for (int y = 0; y < image.height; ++y) rows[y] = buffer.data() + y * stride * (depth / 8);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encoding failed: " + error);
  }
  static constexpr int kColor[] = {PNG_COLOR_TYPE_GRAY, PNG_COLOR_TYPE_GRAY_ALPHA,
                                   PNG_COLOR_TYPE_RGB, PNG_COLOR_TYPE_RGB_ALPHA};
  png_set_write_fn(png, &out, png_write_to_string, png_flush_noop);
  png_set_IHDR(png, info, image.width, image.height, depth, kColor[image.channels - 1],
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

RawImage to_raw(const ImageTensor& image) {
  RawImage raw;
  raw.width = image.width();
  raw.height = image.height();
  raw.channels = image.channels();
  raw.values.resize(image.shape().size());
  for (int c = 0; c < raw.channels; ++c) {
    for (int y = 0; y < raw.height; ++y) {
      for (int x = 0; x < raw.width; ++x) {
        raw.values[(static_cast<std::size_t>(y) * raw.width + x) * raw.channels + c] =
            image.at(c, y, x);
      }
    }
  }
  return raw;
}

}  // namespace

RawImage decode_image_bytes(const std::string& bytes, const std::string& name) {
  static constexpr unsigned char kPngSig[] = {0x89, 'P', 'N', 'G'};
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kPngSig, 4) == 0) return decode_png(bytes, name);
  if (bytes.size() >= 3 && static_cast<unsigned char>(bytes[0]) == 0xff &&
      static_cast<unsigned char>(bytes[1]) == 0xd8) {
    return decode_jpeg(bytes, name);
  }
  throw DataError(name + ": not a PNG or JPEG file");
}

RawImage decode_image_file(const std::filesystem::path& path) {
  return decode_image_bytes(read_file(path), path.string());
}

std::string encode_png16(const ImageTensor& image) { return encode_png(to_raw(image), 16); }

void write_png16(const std::filesystem::path& path, const ImageTensor& image) {
  write_file(path, encode_png16(image));
}

void write_png8(const std::filesystem::path& path, const RawImage& image) {
  write_file(path, encode_png(image, 8));
}

namespace {

// Kept free of C++ objects so the longjmp error path clobbers nothing.
bool jpeg_compress_rows(const RawImage& image, int quality, unsigned char* row,
                        unsigned char** mem, unsigned long* mem_size, char* message) {
  jpeg_compress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    std::memcpy(message, err.message, JMSG_LENGTH_MAX);
    jpeg_destroy_compress(&cinfo);
    return false;
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, mem, mem_size);
  cinfo.image_width = static_cast<JDIMENSION>(image.width);
  cinfo.image_height = static_cast<JDIMENSION>(image.height);
  cinfo.input_components = image.channels;
  cinfo.in_color_space = image.channels == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  const std::size_t stride = static_cast<std::size_t>(image.width) * image.channels;
  while (cinfo.next_scanline < cinfo.image_height) {
    const std::size_t y = cinfo.next_scanline;
    for (std::size_t x = 0; x < stride; ++x) {
      row[x] = static_cast<unsigned char>(
          std::lround(std::clamp(image.values[y * stride + x], 0.0, 1.0) * 255.0));
    }
    JSAMPROW ptr = row;
    jpeg_write_scanlines(&cinfo, &ptr, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  return true;
}

}  // namespace

void write_jpeg(const std::filesystem::path& path, const RawImage& image, int quality) {
  if (image.channels != 1 && image.channels != 3) throw ConfigError("JPEG needs 1 or 3 channels");
  std::vector<unsigned char> row(static_cast<std::size_t>(image.width) * image.channels);
  unsigned char* mem = nullptr;
  unsigned long mem_size = 0;
  char message[JMSG_LENGTH_MAX] = {};
  const bool ok = jpeg_compress_rows(image, quality, row.data(), &mem, &mem_size, message);
  std::string bytes;
  if (ok) bytes.assign(reinterpret_cast<const char*>(mem), mem_size);
  std::free(mem);
  if (!ok) throw IoError("JPEG encoding failed: " + std::string(message));
  write_file(path, bytes);
}

bool is_image_file(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace hfss
