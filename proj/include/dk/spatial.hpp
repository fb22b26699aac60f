#ifndef DK_SPATIAL_HPP
#define DK_SPATIAL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dk/errors.hpp"

namespace dk {

struct Site {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Site& a, const Site& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct Neighbor {
  std::size_t index;
  double dist;
};

// Uniform grid bucket index over a site list. Queries fall back to an
// exhaustive scan for small inputs; both paths apply the same
// (distance, index) ordering so results are interchangeable.
class GridIndex {
 public:
  explicit GridIndex(const std::vector<Site>& sites);
  std::vector<Neighbor> nearest(const Site& query, std::size_t k) const;

 private:
  const std::vector<Site>& sites_;
  double x0_ = 0, y0_ = 0, cell_ = 1.0;
  std::size_t nx_ = 1, ny_ = 1;
  std::vector<std::vector<std::uint32_t>> buckets_;
};

// Ordered site list. The order is part of the contract: row i of any matrix
// built from a SiteSet corresponds to sites()[i].
class SiteSet {
 public:
  SiteSet() = default;
  explicit SiteSet(std::vector<Site> sites);

  const std::vector<Site>& sites() const { return sites_; }
  const Site& operator[](std::size_t i) const { return sites_[i]; }
  std::size_t size() const { return sites_.size(); }

  // Lazily built; the set is immutable after construction.
  const GridIndex& index() const;

 private:
  std::vector<Site> sites_;
  mutable std::shared_ptr<GridIndex> index_;
};

struct BivariateObservations {
  SiteSet sites;
  Eigen::VectorXd z1;
  Eigen::VectorXd z2;

  std::size_t size() const { return sites.size(); }
  void validate() const;
  BivariateObservations subset(const std::vector<std::size_t>& idx) const;
};

struct SplitSpec {
  std::uint64_t seed = 0;
  std::vector<double> fractions;
};

// Seed-deterministic disjoint partitions. Partition sizes are the rounded
// cumulative fractions of the input size.
std::vector<BivariateObservations> split(const BivariateObservations& obs,
                                         const SplitSpec& spec);
std::vector<std::vector<std::size_t>> split_indices(std::size_t n, const SplitSpec& spec);

// G nearest reference sites, ascending by distance, ties broken by lower
// index.
std::vector<Neighbor> knn(const Site& query, const SiteSet& refs, std::size_t g);

// CSV with header x,y,z1,z2. The reader rejects non-finite values.
BivariateObservations read_observations_csv(const std::string& path);
void write_observations_csv(const std::string& path, const BivariateObservations& obs);
SiteSet read_sites_csv(const std::string& path);

// Shortest round-trip decimal form; used by every writer so reruns are
// byte-identical.
std::string format_double(double v);

}  // namespace dk

#endif
