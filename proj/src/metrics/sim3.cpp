#include <cmath>

#include <Eigen/SVD>

#include "rtdense/metrics/metrics.hpp"

namespace rtdense::metrics {

Sim3 umeyama_sim3(std::span<const Eigen::Vector3d> source,
                  std::span<const Eigen::Vector3d> target) {
  const std::size_t n = source.size();
  if (n != target.size())
    throw std::invalid_argument("umeyama_sim3: correspondence counts differ");
  if (n < 3) throw std::invalid_argument("umeyama_sim3: need at least 3 points");

  Eigen::Vector3d mu_x = Eigen::Vector3d::Zero(), mu_y = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mu_x += source[i];
    mu_y += target[i];
  }
  mu_x /= static_cast<double>(n);
  mu_y /= static_cast<double>(n);

  double sigma2_x = 0.0;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();  // target-source covariance
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d xc = source[i] - mu_x;
    const Eigen::Vector3d yc = target[i] - mu_y;
    sigma2_x += xc.squaredNorm();
    cov += yc * xc.transpose();
  }
  sigma2_x /= static_cast<double>(n);
  cov /= static_cast<double>(n);

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d d = svd.singularValues();
  if (sigma2_x <= 0.0 || d(1) <= 1e-12 * std::max(d(0), 1e-300))
    throw std::invalid_argument(
        "umeyama_sim3: rank-deficient correspondences (collinear or coincident)");

  // Reflection guard: flip the smallest singular direction when needed.
  Eigen::Vector3d s_diag = Eigen::Vector3d::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) s_diag(2) = -1.0;

  Sim3 out;
  out.rotation = svd.matrixU() * s_diag.asDiagonal() * svd.matrixV().transpose();
  out.scale = d.dot(s_diag) / sigma2_x;
  out.translation = mu_y - out.scale * (out.rotation * mu_x);
  if (out.scale <= 0.0)
    throw std::invalid_argument("umeyama_sim3: degenerate (non-positive) scale");
  return out;
}

AteResult ate_rmse(const Trajectory& est, const Trajectory& ref, bool align,
                   double association_tolerance_s) {
  if (est.empty() || ref.empty())
    throw std::invalid_argument("ate_rmse: empty trajectory");

  // Associate each estimated sample with the nearest reference timestamp;
  // both trajectories arrive sorted by read_trajectory.
  std::vector<Eigen::Vector3d> est_pts, ref_pts;
  std::size_t j = 0;
  for (const TrajectoryEntry& e : est) {
    while (j + 1 < ref.size() &&
           std::abs(ref[j + 1].timestamp - e.timestamp) <=
               std::abs(ref[j].timestamp - e.timestamp))
      ++j;
    if (std::abs(ref[j].timestamp - e.timestamp) <= association_tolerance_s) {
      est_pts.push_back(e.position);
      ref_pts.push_back(ref[j].position);
    }
  }
  if (est_pts.empty())
    throw std::runtime_error("ate_rmse: no timestamp associations within tolerance");

  AteResult out;
  out.pair_count = est_pts.size();
  if (align) {
    out.alignment = umeyama_sim3(est_pts, ref_pts);
    out.aligned = true;
    for (Eigen::Vector3d& p : est_pts) p = out.alignment.apply(p);
  }

  double sum_sq = 0.0;
  for (std::size_t i = 0; i < est_pts.size(); ++i)
    sum_sq += (est_pts[i] - ref_pts[i]).squaredNorm();
  out.rmse_m = std::sqrt(sum_sq / static_cast<double>(est_pts.size()));
  return out;
}

}  // namespace rtdense::metrics
