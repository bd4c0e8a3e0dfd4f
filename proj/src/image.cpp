#include "tailor/image.hpp"

#include <algorithm>

namespace tailor {

double box_iou(const BoundingBox& a, const BoundingBox& b) {
  const int x0 = std::max(a.x, b.x), y0 = std::max(a.y, b.y);
  const int x1 = std::min(a.x + a.width, b.x + b.width), y1 = std::min(a.y + a.height, b.y + b.height);
  const int inter = std::max(0, x1 - x0) * std::max(0, y1 - y0);
  const int uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / uni : 0.0;
}

}  // namespace tailor
