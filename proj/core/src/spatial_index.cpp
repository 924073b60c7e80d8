#include "chppi/spatial_index.hpp"

#include <algorithm>
#include <cmath>

#include "chppi/error.hpp"

namespace chppi {

namespace {

// ordering used for result ranking and for pruning decisions: distance
// first, id as the tie-break, so equidistant points resolve the same way an
// exhaustive scan sorted this way would
struct Ranked {
  double d2;
  const SpatialIndex::Entry* e;
  std::size_t idx;
  bool operator<(const Ranked& o) const {
    if (d2 != o.d2) return d2 < o.d2;
    return e->id < o.e->id;
  }
};

}  // namespace

SpatialIndex SpatialIndex::build(std::vector<Entry> entries) {
  SpatialIndex s;
  s.entries_ = std::move(entries);
  if (s.entries_.empty()) return s;
  std::vector<std::size_t> idx(s.entries_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  s.nodes_.reserve(s.entries_.size());
  s.root_ = s.build_node(idx, 0, idx.size(), 0);
  return s;
}

int SpatialIndex::build_node(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi,
                             int depth) {
  if (lo >= hi) return -1;
  int axis = depth % 2;
  std::size_t mid = lo + (hi - lo) / 2;
  auto key = [&](std::size_t i) {
    const Entry& e = entries_[i];
    double primary = axis == 0 ? e.pos.x : e.pos.y;
    double secondary = axis == 0 ? e.pos.y : e.pos.x;
    return std::tuple<double, double, const std::string&>(primary, secondary, e.id);
  };
  std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi,
                   [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  int node_id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{idx[mid], axis, -1, -1});
  int left = build_node(idx, lo, mid, depth + 1);
  int right = build_node(idx, mid + 1, hi, depth + 1);
  nodes_[node_id].left = left;
  nodes_[node_id].right = right;
  return node_id;
}

std::vector<SpatialIndex::Hit> SpatialIndex::knn(Point q, std::size_t k) const {
  if (entries_.empty()) raise(Errc::empty_index, "knn on an empty spatial index");
  if (k == 0) return {};
  k = std::min(k, entries_.size());

  // best k so far, kept as a max-heap on the (distance, id) order
  std::vector<Ranked> heap;
  heap.reserve(k + 1);
  auto worse = [](const Ranked& a, const Ranked& b) { return a < b; };

  auto consider = [&](std::size_t item) {
    const Entry& e = entries_[item];
    double dx = e.pos.x - q.x;
    double dy = e.pos.y - q.y;
    Ranked r{dx * dx + dy * dy, &e, item};
    if (heap.size() < k) {
      heap.push_back(r);
      std::push_heap(heap.begin(), heap.end(), worse);
    } else if (r < heap.front()) {
      std::pop_heap(heap.begin(), heap.end(), worse);
      heap.back() = r;
      std::push_heap(heap.begin(), heap.end(), worse);
    }
  };

  // recursive search with plane-distance pruning
  auto search = [&](auto&& self, int node) -> void {
    if (node < 0) return;
    const Node& nd = nodes_[node];
    consider(nd.item);
    const Entry& e = entries_[nd.item];
    double delta = nd.axis == 0 ? q.x - e.pos.x : q.y - e.pos.y;
    int near = delta <= 0 ? nd.left : nd.right;
    int far = delta <= 0 ? nd.right : nd.left;
    self(self, near);
    // the far side can only matter if the splitting plane is closer than
    // the current worst kept distance (ties go through the id ordering, so
    // equality must still be explored)
    if (far >= 0 && (heap.size() < k || delta * delta <= heap.front().d2)) self(self, far);
  };
  search(search, root_);

  std::sort(heap.begin(), heap.end());
  std::vector<Hit> out;
  out.reserve(heap.size());
  for (const Ranked& r : heap)
    out.push_back(Hit{r.e->id, r.e->pos, std::sqrt(r.d2), r.idx});
  return out;
}

}  // namespace chppi
