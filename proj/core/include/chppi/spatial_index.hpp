#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "chppi/geometry.hpp"

namespace chppi {

// Static kd-tree over 2-d points. Queries return exactly what an exhaustive
// scan would: the k nearest entries ordered by (distance, id ascending).
class SpatialIndex {
 public:
  struct Entry {
    std::string id;
    Point pos;
  };

  struct Hit {
    std::string id;
    Point pos;
    double dist = 0.0;
    std::size_t entry = 0;  // position in the build input
  };

  static SpatialIndex build(std::vector<Entry> entries);

  // k nearest neighbors of q; size is min(k, size()). Throws empty_index
  // when the index holds no points.
  std::vector<Hit> knn(Point q, std::size_t k) const;

  std::size_t size() const { return entries_.size(); }
  const Entry& entry(std::size_t i) const { return entries_[i]; }

 private:
  struct Node {
    std::size_t item = 0;   // index into entries_
    int axis = 0;
    int left = -1;
    int right = -1;
  };

  int build_node(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int depth);

  std::vector<Entry> entries_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace chppi
