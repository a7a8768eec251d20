#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "rtdense/core/io.hpp"

namespace rtdense {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

Calibration read_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open calibration file: " + path.string());

  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 'key = value'");
    }
    kv[trim(stripped.substr(0, eq))] = trim(stripped.substr(eq + 1));
  }

  auto require = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end())
      throw std::runtime_error(path.string() + ": missing key '" + key + "'");
    return it->second;
  };

  Calibration calib;
  calib.rig.intrinsics.fx = std::stod(require("fx"));
  calib.rig.intrinsics.fy = std::stod(require("fy"));
  calib.rig.intrinsics.cx = std::stod(require("cx"));
  calib.rig.intrinsics.cy = std::stod(require("cy"));
  calib.rig.intrinsics.width = std::stoi(require("width"));
  calib.rig.intrinsics.height = std::stoi(require("height"));
  calib.rig.baseline_m = std::stod(require("baseline_m"));
  if (!calib.rig.valid())
    throw std::runtime_error(path.string() + ": calibration violates rig invariants");

  auto optional_path = [&](const char* key) -> std::optional<std::filesystem::path> {
    auto it = kv.find(key);
    if (it == kv.end() || it->second.empty()) return std::nullopt;
    std::filesystem::path p(it->second);
    if (p.is_relative()) p = path.parent_path() / p;
    return p;
  };
  calib.rectify_map_left = optional_path("rectify_map_left");
  calib.rectify_map_right = optional_path("rectify_map_right");
  return calib;
}

void write_calibration(const Calibration& calib, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write calibration file: " + path.string());
  const Intrinsics& k = calib.rig.intrinsics;
  out.precision(17);
  out << "fx = " << k.fx << "\n"
      << "fy = " << k.fy << "\n"
      << "cx = " << k.cx << "\n"
      << "cy = " << k.cy << "\n"
      << "width = " << k.width << "\n"
      << "height = " << k.height << "\n"
      << "baseline_m = " << calib.rig.baseline_m << "\n";
  if (calib.rectify_map_left)
    out << "rectify_map_left = " << calib.rectify_map_left->string() << "\n";
  if (calib.rectify_map_right)
    out << "rectify_map_right = " << calib.rectify_map_right->string() << "\n";
}

Trajectory read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory file: " + path.string());

  Trajectory traj;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    std::istringstream ss(stripped);
    TrajectoryEntry e;
    double qx, qy, qz, qw;
    if (!(ss >> e.timestamp >> e.position.x() >> e.position.y() >> e.position.z() >>
          qx >> qy >> qz >> qw)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 'timestamp tx ty tz qx qy qz qw'");
    }
    e.orientation = Eigen::Quaterniond(qw, qx, qy, qz);
    traj.push_back(e);
  }
  std::sort(traj.begin(), traj.end(),
            [](const TrajectoryEntry& a, const TrajectoryEntry& b) {
              return a.timestamp < b.timestamp;
            });
  return traj;
}

void write_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trajectory file: " + path.string());
  char buf[256];
  for (const TrajectoryEntry& e : traj) {
    std::snprintf(buf, sizeof(buf), "%.9f %.9f %.9f %.9f %.9f %.9f %.9f %.9f\n",
                  e.timestamp, e.position.x(), e.position.y(), e.position.z(),
                  e.orientation.x(), e.orientation.y(), e.orientation.z(),
                  e.orientation.w());
    out << buf;
  }
}

}  // namespace rtdense
