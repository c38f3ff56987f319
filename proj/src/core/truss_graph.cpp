#include "core/truss_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>
#include <unordered_map>

#include "core/error.hpp"

namespace michell {

int rank(NodeTag tag) {
  switch (tag) {
  case NodeTag::EdgeHit:
  case NodeTag::FaceHit: return 0;
  case NodeTag::InteriorGrid: return 1;
  case NodeTag::Boundary: return 2;
  case NodeTag::Feature: return 3;
  }
  return 0;
}

int rank(Family family) {
  switch (family) {
  case Family::Iso1:
  case Family::Iso2:
  case Family::Iso3: return 0;
  case Family::Boundary: return 1;
  case Family::Feature: return 2;
  }
  return 0;
}

NodeTag dominant(NodeTag a, NodeTag b) {
  if (rank(a) != rank(b))
    return rank(a) > rank(b) ? a : b;
  return std::max(a, b);
}

Family dominant(Family a, Family b) {
  if (rank(a) != rank(b))
    return rank(a) > rank(b) ? a : b;
  return std::min(a, b);
}

const char* to_string(NodeTag tag) {
  switch (tag) {
  case NodeTag::EdgeHit: return "edge_hit";
  case NodeTag::FaceHit: return "face_hit";
  case NodeTag::InteriorGrid: return "interior_grid";
  case NodeTag::Boundary: return "boundary";
  case NodeTag::Feature: return "feature";
  }
  return "?";
}

const char* to_string(Family family) {
  switch (family) {
  case Family::Iso1: return "iso1";
  case Family::Iso2: return "iso2";
  case Family::Iso3: return "iso3";
  case Family::Boundary: return "boundary";
  case Family::Feature: return "feature";
  }
  return "?";
}

std::optional<NodeTag> parse_node_tag(const std::string& s) {
  for (auto t : {NodeTag::EdgeHit, NodeTag::FaceHit, NodeTag::InteriorGrid, NodeTag::Boundary,
                 NodeTag::Feature})
    if (s == to_string(t))
      return t;
  return std::nullopt;
}

std::optional<Family> parse_family(const std::string& s) {
  for (auto f : {Family::Iso1, Family::Iso2, Family::Iso3, Family::Boundary, Family::Feature})
    if (s == to_string(f))
      return f;
  return std::nullopt;
}

double TrussGraph::element_length(std::size_t e) const {
  const auto& el = elements[e];
  return (nodes[el.nodes[0]].position - nodes[el.nodes[1]].position).norm();
}

double TrussGraph::total_length() const {
  double sum = 0.0;
  for (std::size_t e = 0; e < elements.size(); ++e)
    sum += element_length(e);
  return sum;
}

int TrussGraph::num_components() const {
  std::vector<int> parent(nodes.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x)
      x = parent[x] = parent[parent[x]];
    return x;
  };
  int count = static_cast<int>(nodes.size());
  for (const auto& el : elements) {
    int a = find(el.nodes[0]), b = find(el.nodes[1]);
    if (a != b) {
      parent[std::max(a, b)] = std::min(a, b);
      --count;
    }
  }
  return count;
}

void TrussGraph::validate() const {
  const int n = static_cast<int>(nodes.size());
  std::vector<std::pair<int, int>> seen;
  seen.reserve(elements.size());
  for (std::size_t e = 0; e < elements.size(); ++e) {
    auto [a, b] = elements[e].nodes;
    if (a < 0 || b < 0 || a >= n || b >= n)
      fail(ErrorCode::Internal, "element " + std::to_string(e) + " references a missing node");
    if (a == b)
      fail(ErrorCode::Internal, "element " + std::to_string(e) + " is a self-loop");
    seen.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    fail(ErrorCode::Internal, "graph contains duplicate elements");
}

int integer_count(const Vec3& param, double tol) {
  int c = 0;
  for (int i = 0; i < 3; ++i)
    c += std::abs(param[i] - std::round(param[i])) <= tol;
  return c;
}

std::vector<int> cluster_points(std::span<const Vec3> points, double tol) {
  const int n = static_cast<int>(points.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x)
      x = parent[x] = parent[parent[x]];
    return x;
  };
  const double cell = std::max(4.0 * tol, 1e-300);
  using Key = std::tuple<long long, long long, long long>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      auto [a, b, c] = k;
      std::size_t h = static_cast<std::size_t>(a) * 0x9E3779B97F4A7C15ull;
      h ^= static_cast<std::size_t>(b) + 0x7F4A7C159E3779B9ull + (h << 6) + (h >> 2);
      h ^= static_cast<std::size_t>(c) + 0x94D049BB133111EBull + (h << 6) + (h >> 2);
      return h;
    }
  };
  std::unordered_map<Key, std::vector<int>, KeyHash> grid;
  grid.reserve(points.size());
  auto key_of = [&](const Vec3& p) {
    return Key{static_cast<long long>(std::floor(p.x() / cell)),
               static_cast<long long>(std::floor(p.y() / cell)),
               static_cast<long long>(std::floor(p.z() / cell))};
  };
  for (int i = 0; i < n; ++i) {
    auto [kx, ky, kz] = key_of(points[i]);
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy)
        for (long long dz = -1; dz <= 1; ++dz) {
          auto it = grid.find(Key{kx + dx, ky + dy, kz + dz});
          if (it == grid.end())
            continue;
          for (int j : it->second) {
            if ((points[i] - points[j]).norm() <= tol) {
              int a = find(i), b = find(j);
              if (a != b)
                parent[std::max(a, b)] = std::min(a, b);
            }
          }
        }
    grid[Key{kx, ky, kz}].push_back(i);
  }
  std::vector<int> rep(n);
  for (int i = 0; i < n; ++i)
    rep[i] = find(i);
  return rep;
}

namespace {

bool node_less(const TrussNode& a, const TrussNode& b) {
  for (int i = 0; i < 3; ++i)
    if (a.param[i] != b.param[i])
      return a.param[i] < b.param[i];
  for (int i = 0; i < 3; ++i)
    if (a.position[i] != b.position[i])
      return a.position[i] < b.position[i];
  return false;
}

} // namespace

void canonicalize(TrussGraph& g) {
  const int n = static_cast<int>(g.nodes.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return node_less(g.nodes[a], g.nodes[b]); });
  std::vector<int> new_index(n);
  std::vector<TrussNode> nodes(n);
  for (int i = 0; i < n; ++i) {
    new_index[order[i]] = i;
    nodes[i] = g.nodes[order[i]];
  }
  g.nodes = std::move(nodes);

  // Deduplicate by node pair, keeping the dominant family and smallest source.
  std::map<std::pair<int, int>, TrussElement> unique;
  for (const auto& el : g.elements) {
    int a = new_index[el.nodes[0]], b = new_index[el.nodes[1]];
    if (a == b)
      continue;
    TrussElement e{{std::min(a, b), std::max(a, b)}, el.family, el.source};
    auto [it, inserted] = unique.emplace(std::make_pair(e.nodes[0], e.nodes[1]), e);
    if (!inserted) {
      TrussElement& kept = it->second;
      const Family f = dominant(kept.family, e.family);
      if (f != kept.family || (e.family == kept.family && e.source >= 0 &&
                               (kept.source < 0 || e.source < kept.source)))
        kept.source = e.source;
      kept.family = f;
    }
  }
  g.elements.clear();
  g.elements.reserve(unique.size());
  for (auto& [key, el] : unique)
    g.elements.push_back(el);
}

TrussGraph merge_graphs(std::span<const TrussGraph> parts, double tol) {
  std::vector<Vec3> points;
  std::vector<int> offsets;
  for (const auto& part : parts) {
    offsets.push_back(static_cast<int>(points.size()));
    for (const auto& node : part.nodes)
      points.push_back(node.position);
  }
  const auto rep = cluster_points(points, tol);

  // Flattened node list, then clusters collapsed onto their representative.
  std::vector<TrussNode> flat;
  flat.reserve(points.size());
  for (const auto& part : parts)
    flat.insert(flat.end(), part.nodes.begin(), part.nodes.end());
  std::vector<int> compact(points.size(), -1);
  TrussGraph out;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (rep[i] == static_cast<int>(i)) {
      compact[i] = static_cast<int>(out.nodes.size());
      out.nodes.push_back(flat[i]);
    }
  }
  for (std::size_t i = 0; i < flat.size(); ++i) {
    TrussNode& target = out.nodes[compact[rep[i]]];
    target.tag = dominant(target.tag, flat[i].tag);
  }
  for (std::size_t p = 0; p < parts.size(); ++p)
    for (const auto& el : parts[p].elements) {
      TrussElement e = el;
      for (int k = 0; k < 2; ++k)
        e.nodes[k] = compact[rep[offsets[p] + el.nodes[k]]];
      out.elements.push_back(e);
    }
  canonicalize(out);
  return out;
}

} // namespace michell
