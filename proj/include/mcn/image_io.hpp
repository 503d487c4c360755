#pragma once

// PNG (libpng) and PPM/PGM readers and writers. Every decoded image is
// converted to 8-bit RGB, L = 255.

#include <png.h>

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "mcn/error.hpp"
#include "mcn/image.hpp"

namespace mcn {

namespace detail {

inline std::string lower_extension(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return ext;
}

inline void skip_pnm_space(std::istream& in) {
  for (;;) {
    const int ch = in.peek();
    if (ch == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(ch)) {
      in.get();
    } else {
      return;
    }
  }
}

inline int read_pnm_int(std::istream& in, const std::string& path) {
  skip_pnm_space(in);
  int v = -1;
  if (!(in >> v) || v < 0) throw IoError("malformed PNM header in " + path);
  return v;
}

}  // namespace detail

inline bool is_supported_image(const std::filesystem::path& p) {
  const auto ext = detail::lower_extension(p);
  return ext == ".png" || ext == ".ppm" || ext == ".pgm" || ext == ".pnm";
}

inline ColorImage read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw IoError("cannot read PNG " + path.string() + ": " + image.message);
  image.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  std::vector<ColorImage::value_type> data(buf.begin(), buf.end());
  return ColorImage(static_cast<int>(image.width), static_cast<int>(image.height), 3, std::move(data), 255);
}

inline ColorImage read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  const bool ascii = magic == "P3" || magic == "P2";
  const bool gray = magic == "P5" || magic == "P2";
  if (!(ascii || magic == "P6" || magic == "P5")) throw IoError("unsupported PNM magic in " + path.string());
  const int w = detail::read_pnm_int(in, path.string());
  const int h = detail::read_pnm_int(in, path.string());
  const int maxval = detail::read_pnm_int(in, path.string());
  if (w < 1 || h < 1 || maxval < 1 || maxval > 65535) throw IoError("invalid PNM header in " + path.string());
  const int spp = gray ? 1 : 3;
  const std::size_t samples = static_cast<std::size_t>(w) * h * spp;
  std::vector<int> raw(samples);
  if (ascii) {
    for (auto& v : raw) v = detail::read_pnm_int(in, path.string());
  } else {
    in.get();  // single whitespace after maxval
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> buf(samples * static_cast<std::size_t>(bytes));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw IoError("truncated PNM data in " + path.string());
    for (std::size_t i = 0; i < samples; ++i)
      raw[i] = bytes == 1 ? buf[i] : (buf[2 * i] << 8) | buf[2 * i + 1];
  }
  std::vector<ColorImage::value_type> data(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t px = 0; px < static_cast<std::size_t>(w) * h; ++px) {
    for (int c = 0; c < 3; ++c) {
      int v = raw[px * spp + (gray ? 0 : c)];
      if (v > maxval) throw IoError("PNM sample exceeds maxval in " + path.string());
      if (maxval != 255) v = static_cast<int>((static_cast<long>(v) * 255 + maxval / 2) / maxval);
      data[px * 3 + c] = static_cast<ColorImage::value_type>(v);
    }
  }
  return ColorImage(w, h, 3, std::move(data), 255);
}

inline ColorImage load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("image not found: " + path.string());
  const auto ext = detail::lower_extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return read_pnm(path);
  throw IoError("unsupported image format: " + path.string());
}

namespace detail {

inline std::vector<png_byte> to_bytes(const ColorImage& img) {
  if (img.channels() != 3 && img.channels() != 1)
    throw Unsupported("only 1- or 3-channel images can be written");
  if (img.max_level() != 255) throw Unsupported("only 8-bit images can be written");
  return std::vector<png_byte>(img.data().begin(), img.data().end());
}

}  // namespace detail

/// Writes to a sibling temporary file, then renames it over `path`.
inline void write_atomically(const std::filesystem::path& path,
                             const std::function<void(const std::filesystem::path&)>& writer) {
  auto tmp = path;
  tmp += ".tmp";
  writer(tmp);
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot move output into place at " + path.string() + ": " + ec.message());
  }
}

inline void write_text_atomically(const std::filesystem::path& path, const std::string& content) {
  write_atomically(path, [&](const std::filesystem::path& tmp) {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    if (!out) throw IoError("write failed for " + tmp.string());
  });
}

inline void write_png(const std::filesystem::path& path, const ColorImage& img) {
  auto bytes = detail::to_bytes(img);
  write_atomically(path, [&](const std::filesystem::path& tmp) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, tmp.string().c_str(), 0, bytes.data(), 0, nullptr))
      throw IoError("cannot write PNG " + path.string() + ": " + image.message);
  });
}

inline void write_ppm(const std::filesystem::path& path, const ColorImage& img) {
  auto bytes = detail::to_bytes(img);
  std::ostringstream os;
  os << (img.channels() == 3 ? "P6" : "P5") << '\n' << img.width() << ' ' << img.height() << "\n255\n";
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  write_text_atomically(path, os.str());
}

inline void save_image(const std::filesystem::path& path, const ColorImage& img) {
  const auto ext = detail::lower_extension(path);
  if (ext == ".png") return write_png(path, img);
  if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return write_ppm(path, img);
  throw IoError("unsupported output format: " + path.string());
}

}  // namespace mcn
