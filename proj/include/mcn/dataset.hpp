#pragma once

// Corpus ingestion: grid tiling, CSV manifests (path,label,source_id,tile_index)
// and directory-tree manifests.

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mcn/error.hpp"
#include "mcn/image.hpp"
#include "mcn/image_io.hpp"

namespace mcn {

namespace fs = std::filesystem;

/// Non-overlapping full tiles in row-major order; partial tiles at the right
/// and bottom edges are dropped.
inline std::vector<ColorImage> split_grid(const ColorImage& img, int tile_w, int tile_h,
                                          std::vector<std::string>* warnings = nullptr) {
  detail::require(tile_w >= 1 && tile_h >= 1, "tile size must be >= 1");
  const int cols = img.width() / tile_w;
  const int rows = img.height() / tile_h;
  std::vector<ColorImage> tiles;
  if (cols == 0 || rows == 0) {
    if (warnings)
      warnings->push_back("tile " + std::to_string(tile_w) + "x" + std::to_string(tile_h) +
                          " larger than image " + std::to_string(img.width()) + "x" +
                          std::to_string(img.height()) + "; no tiles emitted");
    return tiles;
  }
  const int z = img.channels();
  tiles.reserve(static_cast<std::size_t>(rows) * cols);
  for (int ty = 0; ty < rows; ++ty) {
    for (int tx = 0; tx < cols; ++tx) {
      std::vector<ColorImage::value_type> data;
      data.reserve(static_cast<std::size_t>(tile_w) * tile_h * z);
      for (int y = 0; y < tile_h; ++y) {
        const auto row = img.data().subspan(img.index(tx * tile_w, ty * tile_h + y, 0),
                                            static_cast<std::size_t>(tile_w) * z);
        data.insert(data.end(), row.begin(), row.end());
      }
      tiles.emplace_back(tile_w, tile_h, z, std::move(data), img.max_level());
    }
  }
  return tiles;
}

struct TileProtocol {
  std::string name;
  std::optional<std::pair<int, int>> tile;  ///< nullopt: images are used as-is
};

/// Tiling protocols of the standard benchmarks.
inline TileProtocol tile_protocol(std::string_view name) {
  if (name == "vistex" || name == "usptex") return {std::string(name), std::pair{128, 128}};
  if (name == "mbt") return {std::string(name), std::pair{160, 160}};
  if (name == "outex13" || name == "curet" || name == "none") return {std::string(name), std::nullopt};
  throw InvalidParameter("unknown dataset protocol '" + std::string(name) +
                         "' (expected vistex, usptex, mbt, outex13, curet or none)");
}

struct ManifestEntry {
  std::string path;
  int label = 0;
  std::string source_id;
  int tile_index = 0;

  bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::string dataset;  ///< optional, serialised as a leading comment line
  int tile_w = 0;
  int tile_h = 0;
  fs::path base_dir;    ///< relative entry paths resolve against this

  fs::path resolve(const ManifestEntry& e) const {
    const fs::path p(e.path);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  }

  std::size_t class_count() const {
    std::set<int> labels;
    for (const auto& e : entries) labels.insert(e.label);
    return labels.size();
  }
};

inline constexpr std::string_view kManifestHeader = "path,label,source_id,tile_index";

inline void validate_manifest(const Manifest& m, bool check_files) {
  std::set<std::pair<std::string, int>> seen;
  std::set<int> labels;
  for (const auto& e : m.entries) {
    if (!seen.emplace(e.source_id, e.tile_index).second)
      throw InvalidParameter("duplicate tile id: source '" + e.source_id + "' tile " +
                             std::to_string(e.tile_index));
    if (e.label < 0) throw InvalidParameter("negative label for " + e.path);
    labels.insert(e.label);
    if (check_files && !fs::exists(m.resolve(e)))
      throw IoError("manifest references missing file: " + m.resolve(e).string());
  }
  int expect = 0;
  for (int l : labels) {
    if (l != expect)
      throw InvalidParameter("manifest labels are not contiguous: label " + std::to_string(expect) +
                             " is missing");
    ++expect;
  }
}

inline std::string manifest_to_csv(const Manifest& m) {
  std::ostringstream os;
  if (!m.dataset.empty() || m.tile_w > 0)
    os << "# dataset=" << m.dataset << " tile=" << m.tile_w << "x" << m.tile_h << "\n";
  os << kManifestHeader << "\n";
  for (const auto& e : m.entries) {
    if (e.path.find_first_of(",\n") != std::string::npos || e.source_id.find_first_of(",\n") != std::string::npos)
      throw InvalidParameter("manifest fields must not contain commas or newlines: " + e.path);
    os << e.path << ',' << e.label << ',' << e.source_id << ',' << e.tile_index << "\n";
  }
  return os.str();
}

inline Manifest parse_manifest(std::istream& in, const fs::path& base_dir = {}) {
  Manifest m;
  m.base_dir = base_dir;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::istringstream meta(line.substr(1));
      std::string tok;
      while (meta >> tok) {
        if (tok.rfind("dataset=", 0) == 0) m.dataset = tok.substr(8);
        if (tok.rfind("tile=", 0) == 0 && std::sscanf(tok.c_str() + 5, "%dx%d", &m.tile_w, &m.tile_h) != 2)
          throw InvalidParameter("malformed tile geometry in manifest comment: " + tok);
      }
      continue;
    }
    if (!header) {
      if (line != kManifestHeader)
        throw InvalidParameter("manifest header must be '" + std::string(kManifestHeader) + "'");
      header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::istringstream ls(line);
    for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
    if (fields.size() != 4)
      throw InvalidParameter("manifest line " + std::to_string(lineno) + ": expected 4 fields");
    try {
      m.entries.push_back({fields[0], std::stoi(fields[1]), fields[2], std::stoi(fields[3])});
    } catch (const std::logic_error&) {
      throw InvalidParameter("manifest line " + std::to_string(lineno) + ": non-integer label or tile index");
    }
  }
  if (!header && !m.entries.empty()) throw InvalidParameter("manifest has no header");
  return m;
}

inline Manifest load_manifest(const fs::path& path, bool check_files = true) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  auto m = parse_manifest(in, path.parent_path());
  validate_manifest(m, check_files);
  return m;
}

inline void write_manifest(const fs::path& path, const Manifest& m) {
  write_text_atomically(path, manifest_to_csv(m));
}

inline std::vector<fs::path> sorted_images(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && is_supported_image(e.path())) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<fs::path> sorted_subdirs(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory()) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

/// One class per subdirectory (sorted by name), images used as-is. Entry paths
/// are relative to `root`.
inline Manifest directory_manifest(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("not a directory: " + root.string());
  Manifest m;
  m.base_dir = root;
  int label = 0;
  for (const auto& sub : sorted_subdirs(root)) {
    const auto images = sorted_images(sub);
    if (images.empty()) continue;
    for (const auto& img : images) {
      const auto rel = fs::relative(img, root).generic_string();
      m.entries.push_back({rel, label, rel, 0});
    }
    ++label;
  }
  return m;
}

/// Tiles every image of a dataset directory into `out_dir` and returns the
/// manifest (paths relative to `out_dir`). With class subdirectories each
/// subdirectory is a class; otherwise every image is its own class.
inline Manifest tile_dataset(const fs::path& root, const TileProtocol& protocol, const fs::path& out_dir,
                             std::vector<std::string>* warnings = nullptr) {
  if (!fs::is_directory(root)) throw IoError("not a directory: " + root.string());
  std::vector<std::pair<int, fs::path>> sources;
  const auto subdirs = sorted_subdirs(root);
  int label = 0;
  for (const auto& sub : subdirs) {
    const auto images = sorted_images(sub);
    if (images.empty()) continue;
    for (const auto& img : images) sources.emplace_back(label, img);
    ++label;
  }
  if (sources.empty())
    for (const auto& img : sorted_images(root)) sources.emplace_back(label++, img);

  Manifest m;
  m.dataset = protocol.name;
  m.base_dir = out_dir;
  if (protocol.tile) std::tie(m.tile_w, m.tile_h) = *protocol.tile;
  fs::create_directories(out_dir);
  for (const auto& [lab, src] : sources) {
    const auto source_id = fs::relative(src, root).generic_string();
    if (!protocol.tile) {
      // Copy-through (re-encoded as PNG so every manifest entry decodes the same way).
      const auto rel = fs::path(source_id).replace_extension(".png");
      fs::create_directories((out_dir / rel).parent_path());
      write_png(out_dir / rel, load_image(src));
      m.entries.push_back({rel.generic_string(), lab, source_id, 0});
      continue;
    }
    const auto tiles = split_grid(load_image(src), protocol.tile->first, protocol.tile->second, warnings);
    const auto stem = fs::path(source_id).replace_extension();
    for (std::size_t k = 0; k < tiles.size(); ++k) {
      auto rel = stem;
      rel += "_t" + std::to_string(k) + ".png";
      fs::create_directories((out_dir / rel).parent_path());
      write_png(out_dir / rel, tiles[k]);
      m.entries.push_back({rel.generic_string(), lab, source_id, static_cast<int>(k)});
    }
  }
  return m;
}

inline std::vector<ColorImage> load_corpus(const Manifest& m) {
  std::vector<ColorImage> images;
  images.reserve(m.entries.size());
  for (const auto& e : m.entries) images.push_back(load_image(m.resolve(e)));
  return images;
}

}  // namespace mcn
