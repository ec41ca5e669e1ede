#include "mvdepth/io/image_io.hpp"

#include "mvdepth/errors.hpp"
#include "mvdepth/io/binary.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <vector>

namespace mvdepth::io {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

void on_png_error(png_structp png, png_const_charp msg) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text) *text = msg;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

struct DecodedPng {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int color_type = 0;
  std::vector<unsigned char> rows;  // big-endian samples as stored
  std::size_t row_bytes = 0;
};

// Kept free of C++ objects with destructors between setjmp and longjmp.
bool decode_png(std::FILE* file, DecodedPng& out, std::string& error) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, on_png_error,
                                           on_png_warning);
  if (!png) {
    error = "out of memory";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    error = "out of memory";
    return false;
  }
  std::vector<png_bytep>* row_ptrs = new std::vector<png_bytep>();
  if (setjmp(png_jmpbuf(png))) {
    delete row_ptrs;
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, file);
  png_read_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.bit_depth = png_get_bit_depth(png, info);
  out.color_type = png_get_color_type(png, info);
  if (png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) png_set_interlace_handling(png);
  png_read_update_info(png, info);
  out.row_bytes = png_get_rowbytes(png, info);
  out.rows.resize(out.row_bytes * static_cast<std::size_t>(out.height));
  row_ptrs->resize(static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) {
    (*row_ptrs)[static_cast<std::size_t>(y)] = out.rows.data() + out.row_bytes * y;
  }
  png_read_image(png, row_ptrs->data());
  png_read_end(png, nullptr);
  delete row_ptrs;
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

DecodedPng decode(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  unsigned char sig[8] = {};
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw DecodeError(path.string() + " is not a PNG file");
  }
  std::rewind(f.get());
  DecodedPng out;
  std::string error;
  if (!decode_png(f.get(), out, error)) throw DecodeError(path.string() + ": " + error);
  return out;
}

bool encode_png(std::FILE* file, int width, int height, int bit_depth, int color_type,
                const std::vector<png_bytep>& rows, std::string& error) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, on_png_error,
                                            on_png_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, file);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

void encode(const std::filesystem::path& path, int width, int height, int bit_depth,
            int color_type, std::vector<unsigned char>& bytes, std::size_t row_bytes) {
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) rows[static_cast<std::size_t>(y)] = bytes.data() + row_bytes * y;
  FilePtr f = open_file(path, "wb");
  std::string error;
  if (!encode_png(f.get(), width, height, bit_depth, color_type, rows, error)) {
    throw IoError("failed writing " + path.string() + ": " + error);
  }
}

}  // namespace

Image read_png_rgb(const std::filesystem::path& path) {
  const DecodedPng png = decode(path);
  if (png.bit_depth != 8 || png.color_type != PNG_COLOR_TYPE_RGB) {
    throw BitDepthError(path.string() + ": expected 8-bit RGB, got bit depth " +
                        std::to_string(png.bit_depth) + " color type " +
                        std::to_string(png.color_type));
  }
  Image img(png.width, png.height, 3);
  for (int y = 0; y < png.height; ++y) {
    const unsigned char* row = png.rows.data() + png.row_bytes * y;
    for (int x = 0; x < png.width; ++x) {
      for (int c = 0; c < 3; ++c) img.at(c, x, y) = static_cast<float>(row[3 * x + c]) / 255.0f;
    }
  }
  return img;
}

void write_png_rgb(const Image& image, const std::filesystem::path& path) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw FormatError("PNG output needs 1 or 3 channels");
  }
  const std::size_t row_bytes = static_cast<std::size_t>(image.width()) * 3;
  std::vector<unsigned char> bytes(row_bytes * static_cast<std::size_t>(image.height()));
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        const float v = image.at(image.channels() == 3 ? c : 0, x, y);
        const float clamped = std::isnan(v) ? 0.0f : std::min(1.0f, std::max(0.0f, v));
        bytes[row_bytes * y + 3 * x + c] =
            static_cast<unsigned char>(std::lround(clamped * 255.0f));
      }
    }
  }
  encode(path, image.width(), image.height(), 8, PNG_COLOR_TYPE_RGB, bytes, row_bytes);
}

Grid<std::uint16_t> read_png_gray16(const std::filesystem::path& path) {
  const DecodedPng png = decode(path);
  if (png.bit_depth != 16 || png.color_type != PNG_COLOR_TYPE_GRAY) {
    throw BitDepthError(path.string() + ": expected 16-bit grayscale, got bit depth " +
                        std::to_string(png.bit_depth) + " color type " +
                        std::to_string(png.color_type));
  }
  Grid<std::uint16_t> out(png.width, png.height);
  for (int y = 0; y < png.height; ++y) {
    const unsigned char* row = png.rows.data() + png.row_bytes * y;
    for (int x = 0; x < png.width; ++x) {
      out(x, y) = static_cast<std::uint16_t>((row[2 * x] << 8) | row[2 * x + 1]);
    }
  }
  return out;
}

void write_png_gray16(const Grid<std::uint16_t>& values, const std::filesystem::path& path) {
  const std::size_t row_bytes = static_cast<std::size_t>(values.width()) * 2;
  std::vector<unsigned char> bytes(row_bytes * static_cast<std::size_t>(values.height()));
  for (int y = 0; y < values.height(); ++y) {
    for (int x = 0; x < values.width(); ++x) {
      bytes[row_bytes * y + 2 * x] = static_cast<unsigned char>(values(x, y) >> 8);
      bytes[row_bytes * y + 2 * x + 1] = static_cast<unsigned char>(values(x, y) & 0xff);
    }
  }
  encode(path, values.width(), values.height(), 16, PNG_COLOR_TYPE_GRAY, bytes, row_bytes);
}

DepthMap load_depth_png(const std::filesystem::path& path, double scale) {
  if (!(scale > 0.0)) throw InvalidConfig("depth scale must be positive");
  const Grid<std::uint16_t> raw = read_png_gray16(path);
  DepthMap out(raw.width(), raw.height());
  for (int y = 0; y < raw.height(); ++y) {
    for (int x = 0; x < raw.width(); ++x) {
      if (raw(x, y) != 0) out.set(x, y, static_cast<double>(raw(x, y)) / scale);
    }
  }
  return out;
}

void write_depth_png(const DepthMap& depth, const std::filesystem::path& path, double scale) {
  if (!(scale > 0.0)) throw InvalidConfig("depth scale must be positive");
  Grid<std::uint16_t> raw(depth.width(), depth.height(), 0);
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (!depth.valid(x, y)) continue;
      const double v = std::round(depth.depths(x, y) * scale);
      if (v >= 1.0 && v <= 65535.0) raw(x, y) = static_cast<std::uint16_t>(v);
    }
  }
  write_png_gray16(raw, path);
}

void write_pfm(const Grid<float>& values, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "Pf\n" << values.width() << " " << values.height() << "\n-1.0\n";
  for (int y = values.height() - 1; y >= 0; --y) {
    for (float v : values.row(y)) write_f32_le(out, v);
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Grid<float> read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string magic;
  std::string dims;
  std::string scale_line;
  if (!std::getline(in, magic) || !std::getline(in, dims) || !std::getline(in, scale_line)) {
    throw FormatError(path.string() + ": truncated PFM header");
  }
  if (magic != "Pf") throw FormatError(path.string() + ": not a grayscale PFM");
  std::istringstream dim_stream(dims);
  int w = 0;
  int h = 0;
  std::string extra;
  if (!(dim_stream >> w >> h) || (dim_stream >> extra) || w < 1 || h < 1) {
    throw FormatError(path.string() + ": bad PFM dimensions '" + dims + "'");
  }
  double scale = 0.0;
  std::istringstream scale_stream(scale_line);
  if (!(scale_stream >> scale) || scale == 0.0) {
    throw FormatError(path.string() + ": bad PFM scale '" + scale_line + "'");
  }
  const bool little = scale < 0.0;
  Grid<float> out(w, h);
  for (int y = h - 1; y >= 0; --y) {
    for (float& v : out.row(y)) {
      if (little) {
        v = read_f32_le(in);
      } else {
        unsigned char b[4] = {};
        in.read(reinterpret_cast<char*>(b), 4);
        if (!in) throw FormatError(path.string() + ": truncated PFM data");
        const std::uint32_t bits = (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
                                   (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
        v = std::bit_cast<float>(bits);
      }
    }
  }
  return out;
}

void write_depth_pfm(const DepthMap& depth, const std::filesystem::path& path) {
  Grid<float> values(depth.width(), depth.height(), std::numeric_limits<float>::quiet_NaN());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (depth.validity[i]) values[i] = static_cast<float>(depth.depths[i]);
  }
  write_pfm(values, path);
}

DepthMap read_depth_pfm(const std::filesystem::path& path) {
  const Grid<float> values = read_pfm(path);
  DepthMap out(values.width(), values.height());
  for (int y = 0; y < values.height(); ++y) {
    for (int x = 0; x < values.width(); ++x) {
      const float v = values(x, y);
      if (std::isfinite(v) && v > 0.0f) out.set(x, y, v);
    }
  }
  return out;
}

DepthMap load_depth_map(const std::filesystem::path& path, double png_scale) {
  const std::string ext = path.extension().string();
  if (ext == ".pfm") return read_depth_pfm(path);
  if (ext == ".png") return load_depth_png(path, png_scale);
  throw FormatError("unsupported depth map extension '" + ext + "' (use .pfm or .png)");
}

}  // namespace mvdepth::io
