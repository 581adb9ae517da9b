#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "specband/dataio.hpp"
#include "specband/error.hpp"

namespace specband {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

template <typename T>
T to_little_endian(T value) {
  if constexpr (std::endian::native == std::endian::little) {
    return value;
  } else {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    std::reverse(bytes, bytes + sizeof(T));
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }
}

template <typename T>
std::vector<char> encode(std::span<const T> values) {
  std::vector<char> bytes(values.size() * sizeof(T));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const T le = to_little_endian(values[i]);
    std::memcpy(bytes.data() + i * sizeof(T), &le, sizeof(T));
  }
  return bytes;
}

template <typename T>
std::vector<T> decode(const std::vector<char>& bytes) {
  std::vector<T> values(bytes.size() / sizeof(T));
  for (std::size_t i = 0; i < values.size(); ++i) {
    T v;
    std::memcpy(&v, bytes.data() + i * sizeof(T), sizeof(T));
    values[i] = to_little_endian(v);
  }
  return values;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

void write_bytes(const fs::path& path, const std::vector<char>& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

std::vector<char> read_payload(const fs::path& base, std::size_t expected_bytes) {
  const fs::path raw = payload_path(base);
  std::ifstream in(raw, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + raw.string());
  const auto actual = static_cast<std::size_t>(fs::file_size(raw));
  if (actual < expected_bytes) {
    fail(ErrorKind::TruncatedPayload, raw.string() + " holds " + std::to_string(actual) + " bytes, header implies " +
                                          std::to_string(expected_bytes));
  }
  if (actual > expected_bytes) {
    fail(ErrorKind::HeaderMismatch, raw.string() + " holds " + std::to_string(actual) + " bytes, header implies " +
                                        std::to_string(expected_bytes));
  }
  std::vector<char> bytes(expected_bytes);
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!in) fail(ErrorKind::Io, "read failed for " + raw.string());
  return bytes;
}

json read_header_json(const fs::path& path) {
  const fs::path header = header_path(path);
  std::ifstream in(header);
  if (!in) fail(ErrorKind::Io, "cannot open " + header.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::HeaderMismatch, header.string() + ": " + e.what());
  }
}

std::size_t header_dim(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_unsigned()) {
    fail(ErrorKind::HeaderMismatch, std::string("header field '") + key + "' missing or not a non-negative integer");
  }
  return j[key].get<std::size_t>();
}

RasterHeader parse_header(const json& j) {
  RasterHeader h;
  h.height = header_dim(j, "height");
  h.width = header_dim(j, "width");
  h.bands = header_dim(j, "bands");
  if (!j.contains("dtype") || !j["dtype"].is_string()) fail(ErrorKind::HeaderMismatch, "header field 'dtype' missing");
  h.dtype = j["dtype"].get<std::string>();
  h.layout = j.value("layout", std::string("bsq"));
  if (h.layout != "bsq") fail(ErrorKind::HeaderMismatch, "unsupported layout '" + h.layout + "'");
  h.source_kind = j.value("source_kind", std::string());
  return h;
}

json base_header(std::size_t height, std::size_t width, std::size_t bands, const char* dtype) {
  json j;
  j["height"] = height;
  j["width"] = width;
  j["bands"] = bands;
  j["dtype"] = dtype;
  j["layout"] = "bsq";
  return j;
}

}  // namespace

void HyperCube::validate() const {
  if (height * width * bands != values.size()) {
    fail(ErrorKind::HeaderMismatch, "cube " + std::to_string(height) + "x" + std::to_string(width) + "x" +
                                        std::to_string(bands) + " holds " + std::to_string(values.size()) + " values");
  }
}

int LabelRaster::num_classes() const {
  std::int32_t top = 0;
  for (std::int32_t l : labels) top = std::max(top, l);
  return top;
}

std::size_t LabelRaster::labeled_count() const {
  return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](std::int32_t l) { return l > 0; }));
}

fs::path header_path(const fs::path& path) {
  if (path.extension() == ".json") return path;
  if (path.extension() == ".raw") return fs::path(path).replace_extension(".json");
  fs::path p = path;
  p += ".json";
  return p;
}

fs::path payload_path(const fs::path& path) {
  if (path.extension() == ".raw") return path;
  if (path.extension() == ".json") return fs::path(path).replace_extension(".raw");
  fs::path p = path;
  p += ".raw";
  return p;
}

RasterHeader read_raster_header(const fs::path& path) { return parse_header(read_header_json(path)); }

HyperCube read_cube(const fs::path& path) {
  const RasterHeader h = read_raster_header(path);
  if (h.dtype != "f32le") fail(ErrorKind::UnsupportedDtype, "cube dtype '" + h.dtype + "' (expected f32le)");
  const std::size_t count = h.height * h.width * h.bands;
  const auto floats = decode<float>(read_payload(path, count * sizeof(float)));
  HyperCube cube;
  cube.height = h.height;
  cube.width = h.width;
  cube.bands = h.bands;
  cube.source_kind = h.source_kind == "aux" ? SourceKind::Aux : SourceKind::Hsi;
  cube.values.assign(floats.begin(), floats.end());
  return cube;
}

void write_cube(const HyperCube& cube, const fs::path& path) {
  cube.validate();
  json j = base_header(cube.height, cube.width, cube.bands, "f32le");
  j["source_kind"] = cube.source_kind == SourceKind::Aux ? "aux" : "hsi";
  std::vector<float> floats(cube.values.begin(), cube.values.end());
  write_text(header_path(path), j.dump(2) + "\n");
  write_bytes(payload_path(path), encode<float>(floats));
}

LabelRaster read_labels(const fs::path& path) {
  const RasterHeader h = read_raster_header(path);
  if (h.dtype != "i32le") fail(ErrorKind::UnsupportedDtype, "label dtype '" + h.dtype + "' (expected i32le)");
  if (h.bands != 1) fail(ErrorKind::HeaderMismatch, "label raster must have exactly one band");
  LabelRaster labels;
  labels.height = h.height;
  labels.width = h.width;
  labels.labels = decode<std::int32_t>(read_payload(path, h.height * h.width * sizeof(std::int32_t)));
  for (std::int32_t l : labels.labels) {
    if (l < 0) fail(ErrorKind::HeaderMismatch, "negative class id in label raster");
  }
  return labels;
}

void write_labels(const LabelRaster& labels, const fs::path& path) {
  if (labels.labels.size() != labels.height * labels.width) {
    fail(ErrorKind::HeaderMismatch, "label raster size does not match its dimensions");
  }
  write_text(header_path(path), base_header(labels.height, labels.width, 1, "i32le").dump(2) + "\n");
  write_bytes(payload_path(path), encode<std::int32_t>(labels.labels));
}

void write_raster_f64(std::span<const double> values, std::size_t height, std::size_t width,
                      const std::string& extra_json, const fs::path& path) {
  if (values.size() != height * width) fail(ErrorKind::HeaderMismatch, "f64 raster size does not match dimensions");
  json j = base_header(height, width, 1, "f64le");
  if (!extra_json.empty()) {
    const json extra = json::parse(extra_json);
    for (const auto& [key, value] : extra.items()) j[key] = value;
  }
  write_text(header_path(path), j.dump(2) + "\n");
  write_bytes(payload_path(path), encode<double>(values));
}

std::vector<double> read_raster_f64(const fs::path& path, RasterHeader* header, std::string* header_json) {
  const json j = read_header_json(path);
  const RasterHeader h = parse_header(j);
  if (h.dtype != "f64le") fail(ErrorKind::UnsupportedDtype, "dtype '" + h.dtype + "' (expected f64le)");
  if (header) *header = h;
  if (header_json) *header_json = j.dump();
  return decode<double>(read_payload(path, h.height * h.width * h.bands * sizeof(double)));
}

}  // namespace specband
