#include <cstring>
#include <fstream>
#include <sstream>

#include "rtdense/cloud/cloud.hpp"

namespace rtdense::cloud {
namespace {

enum class PlyType { kFloat32, kFloat64, kUint8, kInt32, kUint32 };

std::size_t type_size(PlyType t) {
  switch (t) {
    case PlyType::kUint8: return 1;
    case PlyType::kFloat32:
    case PlyType::kInt32:
    case PlyType::kUint32: return 4;
    case PlyType::kFloat64: return 8;
  }
  return 0;
}

PlyType parse_type(const std::string& name, const std::filesystem::path& path,
                   const std::string& prop) {
  if (name == "float" || name == "float32") return PlyType::kFloat32;
  if (name == "double" || name == "float64") return PlyType::kFloat64;
  if (name == "uchar" || name == "uint8") return PlyType::kUint8;
  if (name == "int" || name == "int32") return PlyType::kInt32;
  if (name == "uint" || name == "uint32") return PlyType::kUint32;
  throw std::runtime_error(path.string() + ": unsupported type '" + name +
                           "' for property '" + prop + "'");
}

struct PlyProperty {
  std::string name;
  PlyType type;
};

struct PlyHeader {
  bool ascii = false;
  std::size_t vertex_count = 0;
  std::vector<PlyProperty> vertex_props;
  std::size_t other_elements = 0;
};

PlyHeader read_header(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  std::getline(in, line);
  if (line.rfind("ply", 0) != 0)
    throw std::runtime_error(path.string() + ": missing 'ply' magic");

  PlyHeader header;
  bool in_vertex = false;
  bool format_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "comment" || word.empty()) continue;
    if (word == "format") {
      std::string fmt, version;
      ss >> fmt >> version;
      if (fmt == "ascii") {
        header.ascii = true;
      } else if (fmt == "binary_little_endian") {
        header.ascii = false;
      } else {
        throw std::runtime_error(path.string() + ": unsupported format '" + fmt + "'");
      }
      format_seen = true;
    } else if (word == "element") {
      std::string name;
      std::size_t count = 0;
      ss >> name >> count;
      if (name == "vertex") {
        header.vertex_count = count;
        in_vertex = true;
      } else {
        in_vertex = false;
        if (count > 0)
          throw std::runtime_error(path.string() + ": unsupported element '" + name +
                                   "' with nonzero count");
      }
    } else if (word == "property") {
      if (!in_vertex) continue;
      std::string type_name, prop_name;
      ss >> type_name;
      if (type_name == "list")
        throw std::runtime_error(path.string() + ": list property in element 'vertex'");
      ss >> prop_name;
      header.vertex_props.push_back({prop_name, parse_type(type_name, path, prop_name)});
    } else if (word == "end_header") {
      if (!format_seen)
        throw std::runtime_error(path.string() + ": header missing 'format' line");
      return header;
    } else {
      throw std::runtime_error(path.string() + ": unexpected header line '" + line + "'");
    }
  }
  throw std::runtime_error(path.string() + ": header missing 'end_header'");
}

double read_ascii_value(std::istream& in, const std::filesystem::path& path,
                        const std::string& prop) {
  double v = 0.0;
  if (!(in >> v))
    throw std::runtime_error(path.string() + ": truncated ascii payload at property '" +
                             prop + "'");
  return v;
}

double decode_binary(const char* bytes, PlyType type) {
  switch (type) {
    case PlyType::kFloat32: {
      float v;
      std::memcpy(&v, bytes, 4);
      return v;
    }
    case PlyType::kFloat64: {
      double v;
      std::memcpy(&v, bytes, 8);
      return v;
    }
    case PlyType::kUint8:
      return static_cast<double>(static_cast<std::uint8_t>(bytes[0]));
    case PlyType::kInt32: {
      std::int32_t v;
      std::memcpy(&v, bytes, 4);
      return v;
    }
    case PlyType::kUint32: {
      std::uint32_t v;
      std::memcpy(&v, bytes, 4);
      return v;
    }
  }
  return 0.0;
}

}  // namespace

void write_ply(const PointCloud& pc, const std::filesystem::path& path) {
  if (!pc.colors.empty() && pc.colors.size() != pc.points.size())
    throw std::invalid_argument("write_ply: color count does not match point count");
  if (!pc.confidences.empty() && pc.confidences.size() != pc.points.size())
    throw std::invalid_argument("write_ply: confidence count does not match point count");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write PLY file: " + path.string());

  const bool colors = pc.has_colors();
  const bool confs = pc.has_confidences();
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << pc.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n";
  if (colors)
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (confs) out << "property float confidence\n";
  out << "end_header\n";

  for (std::size_t i = 0; i < pc.size(); ++i) {
    const float xyz[3] = {pc.points[i].x(), pc.points[i].y(), pc.points[i].z()};
    out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
    if (colors) {
      const std::uint8_t rgb[3] = {pc.colors[i].r, pc.colors[i].g, pc.colors[i].b};
      out.write(reinterpret_cast<const char*>(rgb), sizeof(rgb));
    }
    if (confs)
      out.write(reinterpret_cast<const char*>(&pc.confidences[i]), sizeof(float));
  }
  if (!out) throw std::runtime_error("short write on PLY file: " + path.string());
}

PointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open PLY file: " + path.string());

  const PlyHeader header = read_header(in, path);

  int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1, iconf = -1;
  for (std::size_t i = 0; i < header.vertex_props.size(); ++i) {
    const std::string& n = header.vertex_props[i].name;
    const int idx = static_cast<int>(i);
    if (n == "x") ix = idx;
    else if (n == "y") iy = idx;
    else if (n == "z") iz = idx;
    else if (n == "red") ir = idx;
    else if (n == "green") ig = idx;
    else if (n == "blue") ib = idx;
    else if (n == "confidence") iconf = idx;
  }
  if (ix < 0 || iy < 0 || iz < 0)
    throw std::runtime_error(path.string() +
                             ": element 'vertex' lacks x/y/z properties");
  const bool colors = ir >= 0 && ig >= 0 && ib >= 0;

  PointCloud pc;
  pc.points.reserve(header.vertex_count);
  std::vector<double> values(header.vertex_props.size());

  std::size_t record_size = 0;
  for (const PlyProperty& p : header.vertex_props) record_size += type_size(p.type);
  std::vector<char> record(record_size);

  for (std::size_t v = 0; v < header.vertex_count; ++v) {
    if (header.ascii) {
      for (std::size_t p = 0; p < header.vertex_props.size(); ++p)
        values[p] = read_ascii_value(in, path, header.vertex_props[p].name);
    } else {
      in.read(record.data(), static_cast<std::streamsize>(record.size()));
      if (!in)
        throw std::runtime_error(path.string() +
                                 ": truncated binary payload in element 'vertex'");
      std::size_t offset = 0;
      for (std::size_t p = 0; p < header.vertex_props.size(); ++p) {
        values[p] = decode_binary(record.data() + offset, header.vertex_props[p].type);
        offset += type_size(header.vertex_props[p].type);
      }
    }
    pc.points.emplace_back(static_cast<float>(values[ix]),
                           static_cast<float>(values[iy]),
                           static_cast<float>(values[iz]));
    if (colors)
      pc.colors.push_back({static_cast<std::uint8_t>(values[ir]),
                           static_cast<std::uint8_t>(values[ig]),
                           static_cast<std::uint8_t>(values[ib])});
    if (iconf >= 0) pc.confidences.push_back(static_cast<float>(values[iconf]));
  }
  return pc;
}

}  // namespace rtdense::cloud
