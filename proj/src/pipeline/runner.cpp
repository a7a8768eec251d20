#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "rtdense/cloud/cloud.hpp"
#include "rtdense/core/rectify.hpp"
#include "rtdense/core/threading.hpp"
#include "rtdense/pipeline/pipeline.hpp"

namespace rtdense::pipeline {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string indexed_name(const char* prefix, std::int64_t id, const char* ext) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%s_%06lld.%s", prefix,
                static_cast<long long>(id), ext);
  return buf;
}

struct StageItem {
  fusion::DepthFrame frame;
  ColorImage color;  // left view, kept only when clouds are written
};

std::vector<std::int64_t> read_keyframe_ids(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open keyframe list: " + path.string());
  std::vector<std::int64_t> ids;
  std::int64_t id = 0;
  while (in >> id) ids.push_back(id);
  return ids;
}

// Consumes stereo results in arrival order: sliding-window fusion plus all
// output writing. Identical behavior whether fed from a queue or inline.
class FusionConsumer {
 public:
  FusionConsumer(const PipelineConfig& cfg, const StereoRig& rig, RunReport& report)
      : cfg_(cfg), rig_(rig), report_(report), window_(cfg.window_size) {}

  void consume(StageItem item) {
    const Clock::time_point t0 = Clock::now();
    if (want_color()) colors_[item.frame.frame_id] = std::move(item.color);
    const bool ready = window_.push(std::move(item.frame));
    if (ready) {
      fusion::DepthFrame fused =
          fusion::fuse_window(window_, rig_.intrinsics, cfg_.fusion);
      write_outputs(fused);
      report_.fused_ids.push_back(fused.frame_id);
    }
    if (want_color()) drop_stale_colors();
    report_.timing.fusion_ms.push_back(ms_since(t0));
  }

  void finish() {
    if (cfg_.save_merged_cloud) {
      cloud::write_ply(merged_, cfg_.out_dir / "cloud_full.ply");
      report_.merged_cloud_points = merged_.size();
    }
  }

 private:
  bool want_color() const {
    return cfg_.save_frame_clouds || cfg_.save_merged_cloud;
  }

  void drop_stale_colors() {
    const std::int64_t oldest = window_.frames().front().frame_id;
    while (!colors_.empty() && colors_.begin()->first < oldest)
      colors_.erase(colors_.begin());
  }

  void write_outputs(const fusion::DepthFrame& fused) {
    write_pfm(fused.depth, cfg_.out_dir / indexed_name("fused", fused.frame_id, "pfm"));
    write_depth_png16(fused.depth,
                      cfg_.out_dir / indexed_name("fused", fused.frame_id, "png"));
    if (cfg_.save_confidence)
      write_pfm(fused.confidence,
                cfg_.out_dir / indexed_name("fusedconf", fused.frame_id, "pfm"));

    if (!want_color()) return;
    const ColorImage& color = colors_.at(fused.frame_id);
    cloud::PointCloud pc = cloud::depth_to_points(fused, color, rig_.intrinsics);
    if (cfg_.save_frame_clouds)
      cloud::write_ply(pc, cfg_.out_dir / indexed_name("cloud", fused.frame_id, "ply"));
    if (cfg_.save_merged_cloud) {
      merged_ = cloud::voxel_downsample(cloud::merge(merged_, pc),
                                        cfg_.merged_cloud_voxel_m);
    }
  }

  const PipelineConfig& cfg_;
  const StereoRig& rig_;
  RunReport& report_;
  fusion::FusionWindow window_;
  std::map<std::int64_t, ColorImage> colors_;
  cloud::PointCloud merged_;
};

}  // namespace

double TimingReport::stereo_mean_ms() const {
  if (stereo_ms.empty()) return 0.0;
  double sum = 0.0;
  for (double v : stereo_ms) sum += v;
  return sum / static_cast<double>(stereo_ms.size());
}

double TimingReport::fusion_mean_ms() const {
  if (fusion_ms.empty()) return 0.0;
  double sum = 0.0;
  for (double v : fusion_ms) sum += v;
  return sum / static_cast<double>(fusion_ms.size());
}

double TimingReport::throughput_fps() const {
  return total_seconds > 0.0 ? input_frames / total_seconds : 0.0;
}

std::string TimingReport::table() const {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%-10s %-10s %-18s %-18s %-12s %-8s\n"
                "%-10d %-10d %-18.2f %-18.2f %-12.2f %-8.2f\n",
                "frames", "fused", "stereo(ms/frame)", "fusion(ms/frame)",
                "total(min)", "fps", input_frames, fused_frames, stereo_mean_ms(),
                fusion_mean_ms(), total_seconds / 60.0, throughput_fps());
  return buf;
}

std::string TimingReport::to_json_string() const {
  nlohmann::json j;
  j["input_frames"] = input_frames;
  j["fused_frames"] = fused_frames;
  j["total_seconds"] = total_seconds;
  j["throughput_fps"] = throughput_fps();
  j["stereo"] = {{"mean_ms", stereo_mean_ms()}, {"per_frame_ms", stereo_ms}};
  j["fusion"] = {{"mean_ms", fusion_mean_ms()}, {"per_frame_ms", fusion_ms}};
  return j.dump(2);
}

RunReport run_pipeline(const PipelineConfig& input_cfg) {
  PipelineConfig cfg = input_cfg;
  cfg.finalize();
  set_thread_count(cfg.threads);

  Dataset ds = load_dataset(cfg);
  if (!cfg.keyframes_path.empty()) {
    const auto ids = read_keyframe_ids(cfg.keyframes_path);
    const std::set<std::int64_t> keep(ids.begin(), ids.end());
    std::erase_if(ds.frames,
                  [&](const FrameRecord& f) { return !keep.contains(f.frame_id); });
  }
  std::filesystem::create_directories(cfg.out_dir);

  RunReport report;
  report.skipped_no_pose = ds.skipped_no_pose;
  report.timing.input_frames = static_cast<int>(ds.frames.size());

  const bool want_color = cfg.save_frame_clouds || cfg.save_merged_cloud;

  auto stereo_step = [&](const FrameRecord& rec) -> StageItem {
    const Clock::time_point t0 = Clock::now();
    GrayImage left = read_png_gray(rec.left_path);
    GrayImage right = read_png_gray(rec.right_path);
    ColorImage color;
    if (want_color) color = read_png_color(rec.left_path);
    if (ds.rectify_left) {
      left = rectify(left, *ds.rectify_left);
      if (want_color) color = rectify(color, *ds.rectify_left);
    }
    if (ds.rectify_right) right = rectify(right, *ds.rectify_right);

    StageItem item;
    auto [depth, conf] = stereo::stereo_match(left, right, ds.rig, cfg.stereo);
    if (cfg.save_raw)
      write_pfm(depth, cfg.out_dir / indexed_name("raw", rec.frame_id, "pfm"));
    item.frame.depth = std::move(depth);
    item.frame.confidence = std::move(conf);
    item.frame.pose = rec.pose;
    item.frame.frame_id = rec.frame_id;
    item.color = std::move(color);
    report.timing.stereo_ms.push_back(ms_since(t0));
    return item;
  };

  FusionConsumer consumer(cfg, ds.rig, report);
  const Clock::time_point run_start = Clock::now();

  if (cfg.pipelined) {
    BoundedQueue<StageItem> queue(static_cast<std::size_t>(cfg.window_size));
    std::exception_ptr stereo_error, fusion_error;
    std::int64_t failing_id = -1;

    std::thread producer([&] {
      std::int64_t current_id = -1;
      try {
        for (const FrameRecord& rec : ds.frames) {
          current_id = rec.frame_id;
          queue.push(stereo_step(rec));
        }
      } catch (const std::exception& e) {
        stereo_error = std::make_exception_ptr(
            std::runtime_error("stereo stage failed at frame " +
                               std::to_string(current_id) + ": " + e.what()));
      } catch (...) {
        stereo_error = std::current_exception();
      }
      queue.close();
    });
    std::thread consumer_thread([&] {
      try {
        while (auto item = queue.pop()) {
          failing_id = item->frame.frame_id;
          consumer.consume(std::move(*item));
        }
      } catch (...) {
        fusion_error = std::current_exception();
      }
    });
    producer.join();
    consumer_thread.join();
    if (stereo_error) std::rethrow_exception(stereo_error);
    if (fusion_error) {
      try {
        std::rethrow_exception(fusion_error);
      } catch (const std::exception& e) {
        throw std::runtime_error("fusion stage failed at frame " +
                                 std::to_string(failing_id) + ": " + e.what());
      }
    }
  } else {
    for (const FrameRecord& rec : ds.frames) consumer.consume(stereo_step(rec));
  }

  consumer.finish();
  report.timing.total_seconds =
      std::chrono::duration<double>(Clock::now() - run_start).count();
  report.timing.fused_frames = static_cast<int>(report.fused_ids.size());

  std::ofstream json(cfg.out_dir / "timing.json");
  json << report.timing.to_json_string() << "\n";
  std::ofstream table(cfg.out_dir / "timing.txt");
  table << report.timing.table();
  return report;
}

}  // namespace rtdense::pipeline
