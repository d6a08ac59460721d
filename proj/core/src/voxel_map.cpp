#include "lio/voxel_map.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <ostream>

namespace lio {

PlaneFit fit_plane(std::span<const Vec3> cluster, double max_point_dist) {
  PlaneFit fit;
  if (cluster.size() < 3) return fit;

  Vec3 centroid = Vec3::Zero();
  for (const auto& p : cluster) centroid += p;
  centroid /= static_cast<double>(cluster.size());

  Mat3 scatter = Mat3::Zero();
  for (const auto& p : cluster) {
    const Vec3 d = p - centroid;
    scatter += d * d.transpose();
  }

  Eigen::SelfAdjointEigenSolver<Mat3> es(scatter);
  const Vec3 evals = es.eigenvalues();  // ascending
  fit.q = centroid;
  fit.u = es.eigenvectors().col(0);
  fit.rms = std::sqrt(std::max(0.0, evals(0)) /
                      static_cast<double>(cluster.size()));

  // Collinear cluster: two vanishing principal directions.
  const double scale = std::max(evals(2), 1e-30);
  if (evals(1) < 1e-9 * scale) return fit;

  for (const auto& p : cluster) {
    if (std::abs(fit.u.dot(p - centroid)) >= max_point_dist) return fit;
  }
  fit.valid = true;
  return fit;
}

VoxelMap::Key VoxelMap::key_of(const Vec3& p) const {
  return Key{static_cast<int64_t>(std::floor(p.x() / edge_)),
             static_cast<int64_t>(std::floor(p.y() / edge_)),
             static_cast<int64_t>(std::floor(p.z() / edge_))};
}

std::size_t VoxelMap::insert_points(std::span<const Vec3> points) {
  std::size_t inserted = 0;
  for (const auto& p : points) {
    auto& voxel = grid_[key_of(p)];
    if (static_cast<int>(voxel.size()) >= cap_) continue;
    voxel.push_back({p, counter_++});
    ++inserted;
  }
  size_ += inserted;
  return inserted;
}

std::vector<Vec3> VoxelMap::knn(const Vec3& query, int k) const {
  const double radius = kSearchVoxels * edge_;
  const double r2 = radius * radius;
  const Key center = key_of(query);

  struct Candidate {
    double d2;
    std::uint64_t order;
    const Vec3* p;
  };
  std::vector<Candidate> candidates;

  for (int dx = -kSearchVoxels; dx <= kSearchVoxels; ++dx) {
    for (int dy = -kSearchVoxels; dy <= kSearchVoxels; ++dy) {
      for (int dz = -kSearchVoxels; dz <= kSearchVoxels; ++dz) {
        const auto it =
            grid_.find(Key{center.x + dx, center.y + dy, center.z + dz});
        if (it == grid_.end()) continue;
        for (const auto& sp : it->second) {
          const double d2 = (sp.p - query).squaredNorm();
          if (d2 <= r2) candidates.push_back({d2, sp.order, &sp.p});
        }
      }
    }
  }

  const auto cmp = [](const Candidate& a, const Candidate& b) {
    return a.d2 != b.d2 ? a.d2 < b.d2 : a.order < b.order;
  };
  const std::size_t n = std::min<std::size_t>(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + n,
                    candidates.end(), cmp);

  std::vector<Vec3> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(*candidates[i].p);
  return out;
}

void VoxelMap::dump(std::ostream& os) const {
  for (const auto& [key, voxel] : grid_) {
    for (const auto& sp : voxel) {
      os << sp.p.x() << ' ' << sp.p.y() << ' ' << sp.p.z() << '\n';
    }
  }
}

}  // namespace lio
