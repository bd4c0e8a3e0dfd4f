#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace tailor {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Row-major image with a fixed element type.
template <typename T>
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  bool contains(int u, int v) const { return u >= 0 && v >= 0 && u < width && v < height; }
  T& at(int u, int v) { return data[static_cast<std::size_t>(v) * width + u]; }
  const T& at(int u, int v) const { return data[static_cast<std::size_t>(v) * width + u]; }
  std::size_t size() const { return data.size(); }

  friend bool operator==(const Grid&, const Grid&) = default;
};

using ColorImage = Grid<Rgb>;
using DepthImage = Grid<double>;

struct BoundingBox {
  int x = 0, y = 0, width = 0, height = 0;
  int area() const { return width * height; }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

double box_iou(const BoundingBox& a, const BoundingBox& b);

}  // namespace tailor
