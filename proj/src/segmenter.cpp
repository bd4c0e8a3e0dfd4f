#include "tailor/segmenter.hpp"

#include <algorithm>
#include <deque>
#include <random>

#include <Eigen/Eigenvalues>

#include "tailor/error.hpp"

namespace tailor {

ObjectMask make_mask(MaskImage bits) {
  ObjectMask m;
  int x0 = bits.width, y0 = bits.height, x1 = -1, y1 = -1;
  for (int v = 0; v < bits.height; ++v) {
    for (int u = 0; u < bits.width; ++u) {
      if (!bits.at(u, v)) continue;
      bits.at(u, v) = 1;
      ++m.pixel_count;
      x0 = std::min(x0, u);
      x1 = std::max(x1, u);
      y0 = std::min(y0, v);
      y1 = std::max(y1, v);
    }
  }
  if (m.pixel_count > 0) m.bbox = {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
  m.bits = std::move(bits);
  return m;
}

PlaneModel fit_plane_least_squares(const std::vector<Vec3>& points) {
  require(points.size() >= 3, "plane fit needs at least 3 points");
  Vec3 mean = Vec3::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : points) {
    const Vec3 d = p - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  PlaneModel m;
  m.normal = es.eigenvectors().col(0).normalized();
  m.offset = m.normal.dot(mean);
  // Camera (origin) on the positive side.
  if (-m.offset < 0) {
    m.normal = -m.normal;
    m.offset = -m.offset;
  }
  m.inlier_count = points.size();
  return m;
}

PlaneModel fit_dominant_plane(const PointCloud& cloud, const PlaneFitParams& params) {
  const std::size_t n = cloud.size();
  if (n < 3) fail(ErrorCode::InvalidArgument, "plane fit needs at least 3 points");
  require(params.iterations >= 1, "plane fit needs at least one iteration");

  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  Vec3 best_n = Vec3::Zero();
  double best_d = 0.0;
  std::size_t best_count = 0;
  for (int it = 0; it < params.iterations; ++it) {
    const std::size_t i = pick(rng);
    std::size_t j = pick(rng), k = pick(rng);
    if (i == j || j == k || i == k) continue;
    const Vec3& a = cloud.points[i].position;
    const Vec3 nrm = (cloud.points[j].position - a).cross(cloud.points[k].position - a);
    if (nrm.norm() < 1e-9) continue;
    const Vec3 un = nrm.normalized();
    const double d = un.dot(a);
    std::size_t count = 0;
    for (const auto& p : cloud.points)
      if (std::abs(un.dot(p.position) - d) <= params.inlier_threshold) ++count;
    if (count > best_count) {
      best_count = count;
      best_n = un;
      best_d = d;
    }
  }
  if (best_count < 3 || static_cast<double>(best_count) < params.min_inlier_fraction * static_cast<double>(n))
    fail(ErrorCode::NoPlane, "no dominant plane found");

  std::vector<Vec3> inliers;
  inliers.reserve(best_count);
  for (const auto& p : cloud.points)
    if (std::abs(best_n.dot(p.position) - best_d) <= params.inlier_threshold) inliers.push_back(p.position);
  PlaneModel refined = fit_plane_least_squares(inliers);
  refined.inlier_count = 0;
  for (const auto& p : cloud.points)
    if (std::abs(refined.height(p.position)) <= params.inlier_threshold) ++refined.inlier_count;
  return refined;
}

std::vector<ObjectMask> extract_object_masks(const RgbdFrame& frame, const PlaneModel& plane, const SegmentParams& params) {
  const int w = frame.width, h = frame.height;
  MaskImage above(w, h, 0);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u)
      if (frame.valid(u, v) &&
          plane.height(back_project_pixel(frame.intrinsics, u, v, frame.depth.at(u, v))) >= params.min_height)
        above.at(u, v) = 1;

  std::vector<ObjectMask> masks;
  Grid<int> label(w, h, -1);
  int next = 0;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!above.at(u, v) || label.at(u, v) >= 0) continue;
      MaskImage bits(w, h, 0);
      std::deque<std::pair<int, int>> queue{{u, v}};
      label.at(u, v) = next;
      while (!queue.empty()) {
        const auto [x, y] = queue.front();
        queue.pop_front();
        bits.at(x, y) = 1;
        constexpr int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
        for (int d = 0; d < 4; ++d) {
          const int nx = x + dx[d], ny = y + dy[d];
          if (above.contains(nx, ny) && above.at(nx, ny) && label.at(nx, ny) < 0) {
            label.at(nx, ny) = next;
            queue.emplace_back(nx, ny);
          }
        }
      }
      ++next;
      ObjectMask m = make_mask(std::move(bits));
      if (m.pixel_count >= params.min_pixels) masks.push_back(std::move(m));
    }
  }
  std::stable_sort(masks.begin(), masks.end(),
                   [](const ObjectMask& a, const ObjectMask& b) { return a.pixel_count > b.pixel_count; });
  return masks;
}

const ObjectMask& primary_mask(const std::vector<ObjectMask>& masks) {
  if (masks.empty()) fail(ErrorCode::NoObject, "no object found");
  std::size_t best = 0;
  for (std::size_t i = 1; i < masks.size(); ++i)
    if (masks[i].pixel_count > masks[best].pixel_count) best = i;
  return masks[best];
}

double mask_iou(const MaskImage& a, const MaskImage& b) {
  require(a.width == b.width && a.height == b.height, "mask dimensions differ");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a.data[i] != 0, y = b.data[i] != 0;
    inter += (x && y);
    uni += (x || y);
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace tailor
