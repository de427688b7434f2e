#include "star/geometry.hpp"

namespace star {

Vec3 Aabb::center() const {
  return {0.5 * (min.x + max.x), 0.5 * (min.y + max.y), 0.5 * (min.z + max.z)};
}

bool Aabb::valid() const { return min.x <= max.x && min.y <= max.y && min.z <= max.z; }

bool Aabb::contains(const Vec3& p) const {
  return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
         p.z <= max.z;
}

}  // namespace star
