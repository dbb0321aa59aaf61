#include "llf/io.hpp"

#include <nlohmann/json.hpp>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace llf {

namespace {

using nlohmann::json;

std::vector<char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError("cannot open " + path);
  const std::streamsize size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<char> buf(static_cast<std::size_t>(size));
  if (size > 0 && !in.read(buf.data(), size))
    throw DataError("short read on " + path);
  return buf;
}

void write_file(const std::string& path, const void* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw DataError("write failed on " + path);
}

json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
  return j;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

PointCloud load_point_cloud(const std::string& path) {
  const std::vector<char> buf = read_file(path);
  constexpr std::size_t kStride = 4 * sizeof(float);
  if (buf.size() % kStride != 0)
    throw FormatError(path + ": file length " + std::to_string(buf.size()) +
                      " not divisible by " + std::to_string(kStride) +
                      " (truncated at byte " +
                      std::to_string(buf.size() - buf.size() % kStride) + ")");
  const Eigen::Index n = static_cast<Eigen::Index>(buf.size() / kStride);
  PointCloud cloud;
  cloud.points.resize(n, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    float v[4];
    std::memcpy(v, buf.data() + static_cast<std::size_t>(i) * kStride, kStride);
    for (int c = 0; c < 4; ++c) {
      if (!std::isfinite(v[c]))
        throw FormatError(path + ": non-finite value at byte offset " +
                          std::to_string(i * 16 + c * 4));
      cloud.points(i, c) = v[c];
    }
  }
  return cloud;
}

void save_point_cloud(const PointCloud& cloud, const std::string& path) {
  std::vector<float> buf(static_cast<std::size_t>(cloud.size()) * 4);
  for (Eigen::Index i = 0; i < cloud.size(); ++i)
    for (int c = 0; c < 4; ++c)
      buf[static_cast<std::size_t>(i) * 4 + static_cast<std::size_t>(c)] =
          cloud.points(i, c);
  write_file(path, buf.data(), buf.size() * sizeof(float));
}

PanopticLabeling read_labels(const std::string& path) {
  const std::vector<char> buf = read_file(path);
  if (buf.size() % 4 != 0)
    throw FormatError(path + ": file length " + std::to_string(buf.size()) +
                      " not divisible by 4");
  const std::size_t n = buf.size() / 4;
  PanopticLabeling labeling;
  labeling.semantic.resize(n);
  labeling.instance.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t word;
    std::memcpy(&word, buf.data() + i * 4, 4);
    labeling.semantic[i] = static_cast<std::uint16_t>(word & 0xFFFFu);
    labeling.instance[i] = static_cast<std::uint16_t>(word >> 16);
  }
  return labeling;
}

void write_labels(const PanopticLabeling& labeling, const std::string& path) {
  if (labeling.semantic.size() != labeling.instance.size())
    throw DataError("labeling channels misaligned");
  std::vector<std::uint32_t> words(labeling.size());
  for (std::size_t i = 0; i < labeling.size(); ++i)
    words[i] = pack_label(labeling.semantic[i], labeling.instance[i]);
  write_file(path, words.data(), words.size() * 4);
}

std::vector<CameraModel> load_calibration_kitti(const std::string& path,
                                                int width, int height) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::map<int, Matrix34d> projections;
  bool have_tr = false;
  Matrix34d tr = Matrix34d::Zero();

  std::string line;
  while (std::getline(in, line)) {
    const std::size_t colon = line.find(':');
    if (colon == std::string::npos) continue;
    const std::string key = line.substr(0, colon);
    std::istringstream values(line.substr(colon + 1));
    std::vector<double> v;
    double x;
    while (values >> x) v.push_back(x);
    if (key.size() >= 2 && key[0] == 'P' &&
        std::isdigit(static_cast<unsigned char>(key[1]))) {
      if (v.size() != 12)
        throw FormatError(path + ": row " + key + " has " +
                          std::to_string(v.size()) + " values, expected 12");
      Matrix34d p;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) p(r, c) = v[static_cast<std::size_t>(r * 4 + c)];
      projections[std::stoi(key.substr(1))] = p;
    } else if (key == "Tr") {
      if (v.size() != 12)
        throw FormatError(path + ": row Tr has " + std::to_string(v.size()) +
                          " values, expected 12");
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) tr(r, c) = v[static_cast<std::size_t>(r * 4 + c)];
      have_tr = true;
    }
  }
  if (projections.empty()) throw FormatError(path + ": no P<k> rows found");
  if (!have_tr) throw FormatError(path + ": no Tr row found");

  Eigen::Matrix4d lidar_to_cam = Eigen::Matrix4d::Identity();
  lidar_to_cam.topRows<3>() = tr;

  std::vector<CameraModel> cams;
  for (const auto& [id, p] : projections) {
    CameraModel cam;
    cam.camera_id = id;
    cam.projection = p;
    cam.lidar_to_cam = lidar_to_cam;
    cam.width = width;
    cam.height = height;
    cam.validate();
    cams.push_back(cam);
  }
  return cams;
}

std::vector<CameraModel> load_calibration_json(const std::string& path) {
  const json j = parse_json_file(path);
  if (!j.contains("cameras") || !j["cameras"].is_array())
    throw FormatError(path + ": missing \"cameras\" array");
  std::vector<CameraModel> cams;
  for (const json& c : j["cameras"]) {
    CameraModel cam;
    cam.camera_id = c.at("camera_id").get<int>();
    cam.width = c.at("width").get<int>();
    cam.height = c.at("height").get<int>();
    const auto proj = c.at("projection").get<std::vector<double>>();
    const auto t = c.at("lidar_to_cam").get<std::vector<double>>();
    if (proj.size() != 12)
      throw FormatError(path + ": projection needs 12 entries");
    if (t.size() != 16)
      throw FormatError(path + ": lidar_to_cam needs 16 entries");
    for (int r = 0; r < 3; ++r)
      for (int col = 0; col < 4; ++col)
        cam.projection(r, col) = proj[static_cast<std::size_t>(r * 4 + col)];
    for (int r = 0; r < 4; ++r)
      for (int col = 0; col < 4; ++col)
        cam.lidar_to_cam(r, col) = t[static_cast<std::size_t>(r * 4 + col)];
    cam.validate();
    cams.push_back(cam);
  }
  if (cams.empty()) throw FormatError(path + ": no cameras defined");
  std::sort(cams.begin(), cams.end(),
            [](const CameraModel& a, const CameraModel& b) {
              return a.camera_id < b.camera_id;
            });
  return cams;
}

std::vector<CameraModel> load_calibration(const std::string& path, int width,
                                          int height) {
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
    return load_calibration_json(path);
  return load_calibration_kitti(path, width, height);
}

Eigen::MatrixXf read_token_blob(const std::string& path) {
  const json header = parse_json_file(path + ".json");
  const Eigen::Index rows = header.at("rows").get<Eigen::Index>();
  const Eigen::Index dim = header.at("dim").get<Eigen::Index>();
  const std::vector<char> buf = read_file(path);
  const std::size_t expected =
      static_cast<std::size_t>(rows) * static_cast<std::size_t>(dim) * 4;
  if (buf.size() != expected)
    throw FormatError(path + ": expected " + std::to_string(expected) +
                      " bytes for " + std::to_string(rows) + "x" +
                      std::to_string(dim) + " float32, got " +
                      std::to_string(buf.size()));
  Eigen::MatrixXf m(rows, dim);
  for (Eigen::Index r = 0; r < rows; ++r) {
    float value;
    for (Eigen::Index c = 0; c < dim; ++c) {
      std::memcpy(&value,
                  buf.data() + (static_cast<std::size_t>(r) *
                                    static_cast<std::size_t>(dim) +
                                static_cast<std::size_t>(c)) *
                                   4,
                  4);
      m(r, c) = value;
    }
  }
  return m;
}

void write_token_blob(const Eigen::MatrixXf& rows, const std::string& path) {
  std::vector<float> buf(static_cast<std::size_t>(rows.rows()) *
                         static_cast<std::size_t>(rows.cols()));
  for (Eigen::Index r = 0; r < rows.rows(); ++r)
    for (Eigen::Index c = 0; c < rows.cols(); ++c)
      buf[static_cast<std::size_t>(r) * static_cast<std::size_t>(rows.cols()) +
          static_cast<std::size_t>(c)] = rows(r, c);
  write_file(path, buf.data(), buf.size() * 4);
  json header;
  header["rows"] = rows.rows();
  header["dim"] = rows.cols();
  header["dtype"] = "float32";
  const std::string text = header.dump(2) + "\n";
  write_file(path + ".json", text.data(), text.size());
}

void write_png16(const std::string& path, const std::vector<std::uint16_t>& pixels,
                 int width, int height) {
  if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw DataError(path + ": pixel buffer does not match " +
                    std::to_string(width) + "x" + std::to_string(height));
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw DataError("cannot open " + path + " for writing");
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw DataError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw DataError(path + ": libpng write error");
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_set_swap(png);  // host little-endian -> PNG network order
  std::vector<png_bytep> row_ptrs(static_cast<std::size_t>(height));
  for (int r = 0; r < height; ++r)
    row_ptrs[static_cast<std::size_t>(r)] = reinterpret_cast<png_bytep>(
        const_cast<std::uint16_t*>(pixels.data() + static_cast<std::size_t>(r) *
                                                       static_cast<std::size_t>(width)));
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

std::vector<std::uint16_t> read_png16(const std::string& path, int& width,
                                      int& height) {
  FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw DataError("cannot open " + path);
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw DataError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw FormatError(path + ": libpng read error");
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (depth != 16 || color != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw FormatError(path + ": expected 16-bit grayscale id-map");
  }
  png_set_swap(png);
  std::vector<std::uint16_t> pixels(static_cast<std::size_t>(width) *
                                    static_cast<std::size_t>(height));
  std::vector<png_bytep> row_ptrs(static_cast<std::size_t>(height));
  for (int r = 0; r < height; ++r)
    row_ptrs[static_cast<std::size_t>(r)] = reinterpret_cast<png_bytep>(
        pixels.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(width));
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return pixels;
}

namespace {

bool pairwise_disjoint(const ImageMaskSet& set) {
  for (std::size_t i = 0; i < set.masks.size(); ++i)
    for (std::size_t j = i + 1; j < set.masks.size(); ++j)
      if (intersection_area(set.masks[i].rle, set.masks[j].rle) > 0) return false;
  return true;
}

}  // namespace

void write_mask_set(const ImageMaskSet& set, const std::string& prefix) {
  set.validate();
  const bool disjoint = pairwise_disjoint(set);

  json sidecar;
  sidecar["camera_id"] = set.camera_id;
  sidecar["width"] = set.width;
  sidecar["height"] = set.height;
  sidecar["token_blob"] = prefix.substr(prefix.find_last_of('/') + 1) + ".tokens.bin";

  Eigen::Index dim = 0;
  for (const ImageMask& m : set.masks) dim = std::max(dim, m.token.size());
  Eigen::MatrixXf tokens(static_cast<Eigen::Index>(set.masks.size()), dim);
  tokens.setZero();

  json masks = json::array();
  for (std::size_t i = 0; i < set.masks.size(); ++i) {
    const ImageMask& m = set.masks[i];
    json entry;
    entry["id"] = m.id;
    entry["area"] = m.area;
    entry["token_row"] = i;
    entry["score"] = m.score;
    if (!disjoint) {
      json runs = json::array();
      for (const Run& r : m.rle.runs()) runs.push_back({r.start, r.length});
      entry["rle"] = runs;
    }
    masks.push_back(entry);
    tokens.row(static_cast<Eigen::Index>(i)).head(m.token.size()) =
        m.token.cast<float>().transpose();
  }
  sidecar["masks"] = masks;

  if (disjoint) {
    std::vector<std::uint16_t> idmap(static_cast<std::size_t>(set.width) *
                                         static_cast<std::size_t>(set.height),
                                     0);
    for (const ImageMask& m : set.masks) {
      if (m.id > 0xFFFF)
        throw DataError("mask id " + std::to_string(m.id) +
                        " exceeds 16-bit id-map range");
      for (const Run& r : m.rle.runs())
        std::fill(idmap.begin() + r.start, idmap.begin() + r.start + r.length,
                  static_cast<std::uint16_t>(m.id));
    }
    write_png16(prefix + ".png", idmap, set.width, set.height);
  }

  const std::string text = sidecar.dump(2) + "\n";
  write_file(prefix + ".json", text.data(), text.size());
  write_token_blob(tokens, prefix + ".tokens.bin");
}

ImageMaskSet read_mask_set(const std::string& prefix) {
  const json sidecar = parse_json_file(prefix + ".json");
  ImageMaskSet set;
  set.camera_id = sidecar.at("camera_id").get<int>();
  set.width = sidecar.at("width").get<int>();
  set.height = sidecar.at("height").get<int>();

  const Eigen::MatrixXf tokens = read_token_blob(prefix + ".tokens.bin");

  const json& masks = sidecar.at("masks");
  const bool inline_rle =
      !masks.empty() && masks.front().contains("rle");

  std::map<int, RleMask> decoded;
  if (!inline_rle && !masks.empty()) {
    int w = 0, h = 0;
    const std::vector<std::uint16_t> idmap = read_png16(prefix + ".png", w, h);
    if (w != set.width || h != set.height)
      throw FormatError(prefix + ".png: size " + std::to_string(w) + "x" +
                        std::to_string(h) + " does not match sidecar");
    std::map<int, std::vector<std::uint32_t>> px;
    for (std::size_t i = 0; i < idmap.size(); ++i)
      if (idmap[i] != 0) px[idmap[i]].push_back(static_cast<std::uint32_t>(i));
    for (auto& [id, pixels] : px)
      decoded[id] = RleMask::from_pixels(std::move(pixels));
  }

  for (const json& entry : masks) {
    ImageMask m;
    m.id = entry.at("id").get<int>();
    m.area = entry.at("area").get<std::uint64_t>();
    m.score = entry.value("score", 0.0);
    const Eigen::Index row = entry.at("token_row").get<Eigen::Index>();
    if (row < 0 || row >= tokens.rows())
      throw FormatError(prefix + ".json: token_row " + std::to_string(row) +
                        " out of range");
    m.token = tokens.row(row).transpose().cast<double>();
    if (entry.contains("rle")) {
      std::vector<Run> runs;
      for (const json& r : entry["rle"])
        runs.push_back({r.at(0).get<std::uint32_t>(), r.at(1).get<std::uint32_t>()});
      m.rle = RleMask::from_runs(std::move(runs));
    } else {
      auto it = decoded.find(m.id);
      if (it == decoded.end())
        throw FormatError(prefix + ".png: mask id " + std::to_string(m.id) +
                          " absent from id-map");
      m.rle = it->second;
    }
    set.masks.push_back(std::move(m));
  }
  set.validate();
  return set;
}

std::array<std::uint8_t, 3> palette_color(std::uint32_t id) {
  if (id == 0) return {96, 96, 96};
  const std::uint64_t h = splitmix64(id);
  return {static_cast<std::uint8_t>(48 + (h & 0xFF) % 200),
          static_cast<std::uint8_t>(48 + ((h >> 8) & 0xFF) % 200),
          static_cast<std::uint8_t>(48 + ((h >> 16) & 0xFF) % 200)};
}

namespace {

void write_ply_impl(const PointCloud& cloud,
                    const std::vector<std::array<std::uint8_t, 3>>& colors,
                    const std::string& path, bool binary) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "ply\n"
      << (binary ? "format binary_little_endian 1.0" : "format ascii 1.0")
      << "\nelement vertex " << cloud.size()
      << "\nproperty float x\nproperty float y\nproperty float z\n"
         "property uchar red\nproperty uchar green\nproperty uchar blue\n"
         "end_header\n";
  if (binary) {
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
      float xyz[3] = {cloud.points(i, 0), cloud.points(i, 1), cloud.points(i, 2)};
      out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
      const auto& c = colors[static_cast<std::size_t>(i)];
      out.write(reinterpret_cast<const char*>(c.data()), 3);
    }
  } else {
    char buf[96];
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
      const auto& c = colors[static_cast<std::size_t>(i)];
      const int len = std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g %d %d %d\n",
                                    cloud.points(i, 0), cloud.points(i, 1),
                                    cloud.points(i, 2), c[0], c[1], c[2]);
      out.write(buf, len);
    }
  }
  if (!out) throw DataError("write failed on " + path);
}

}  // namespace

void export_ply(const PointCloud& cloud, const PanopticLabeling& labeling,
                const std::string& path, PlyColorChannel channel, bool binary) {
  if (labeling.size() != static_cast<std::size_t>(cloud.size()))
    throw DataError("labeling length " + std::to_string(labeling.size()) +
                    " does not match cloud size " + std::to_string(cloud.size()));
  std::vector<std::array<std::uint8_t, 3>> colors(labeling.size());
  for (std::size_t i = 0; i < labeling.size(); ++i) {
    const std::uint32_t id = channel == PlyColorChannel::kInstance
                                 ? labeling.instance[i]
                                 : labeling.semantic[i];
    colors[i] = palette_color(id);
  }
  write_ply_impl(cloud, colors, path, binary);
}

void export_ply(const PointCloud& cloud,
                const std::vector<LidarSegment>& segments,
                const std::string& path, bool binary) {
  std::vector<std::array<std::uint8_t, 3>> colors(
      static_cast<std::size_t>(cloud.size()), palette_color(0));
  for (std::size_t s = 0; s < segments.size(); ++s)
    for (PointIndex p : segments[s].point_indices) {
      if (p < 0 || p >= cloud.size())
        throw DataError("segment index " + std::to_string(p) +
                        " out of cloud bounds");
      colors[static_cast<std::size_t>(p)] =
          palette_color(static_cast<std::uint32_t>(s + 1));
    }
  write_ply_impl(cloud, colors, path, binary);
}

}  // namespace llf
