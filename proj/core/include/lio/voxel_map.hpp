#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "lio/manifold.hpp"

namespace lio {

struct PlaneFit {
  Vec3 u = Vec3::UnitZ();  // unit normal, sign free
  Vec3 q = Vec3::Zero();   // cluster centroid
  double rms = 0.0;
  bool valid = false;
};

// Least-squares plane through the centroid via the smallest principal
// direction of the scatter. Rank-deficient (collinear) clusters come back
// with valid = false.
PlaneFit fit_plane(std::span<const Vec3> cluster, double max_point_dist);

// Incremental world-frame point map: voxel hash grid with a per-voxel point
// cap and exact k-nearest-neighbor queries bounded to a radius of
// kSearchVoxels voxel edges.
class VoxelMap {
 public:
  static constexpr int kSearchVoxels = 3;

  explicit VoxelMap(double voxel_edge = 0.5, int voxel_cap = 32)
      : edge_(voxel_edge), cap_(voxel_cap) {}

  // Points landing in a full voxel are silently dropped; returns the number
  // actually inserted.
  std::size_t insert_points(std::span<const Vec3> points);

  // Exact k nearest stored points within kSearchVoxels * edge of the query,
  // ascending distance, ties broken by insertion order. May return fewer
  // than k.
  std::vector<Vec3> knn(const Vec3& query, int k) const;

  std::size_t size() const { return size_; }
  double voxel_edge() const { return edge_; }

  // ASCII dump, one "x y z" line per stored point.
  void dump(std::ostream& os) const;

 private:
  struct Key {
    int64_t x, y, z;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      // 3D spatial hash, standard large-prime mix
      return static_cast<std::size_t>(k.x * 73856093LL ^ k.y * 19349669LL ^
                                      k.z * 83492791LL);
    }
  };
  struct StoredPoint {
    Vec3 p;
    std::uint64_t order;
  };

  Key key_of(const Vec3& p) const;

  double edge_;
  int cap_;
  std::size_t size_ = 0;
  std::uint64_t counter_ = 0;
  std::unordered_map<Key, std::vector<StoredPoint>, KeyHash> grid_;
};

}  // namespace lio
