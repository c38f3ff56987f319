#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/mesh.hpp"

namespace michell {

// Provenance of a truss node.
enum class NodeTag : std::uint8_t { EdgeHit, FaceHit, InteriorGrid, Boundary, Feature };

// Element family: iso-k elements run along the direction in which the k-th
// parameter varies (the other two are fixed integers).
enum class Family : std::uint8_t { Iso1, Iso2, Iso3, Boundary, Feature };

// Contraction/merge precedence: feature > boundary > interior grid > hits.
int rank(NodeTag tag);
int rank(Family family);
NodeTag dominant(NodeTag a, NodeTag b);
Family dominant(Family a, Family b);

const char* to_string(NodeTag tag);
const char* to_string(Family family);
std::optional<NodeTag> parse_node_tag(const std::string& s);
std::optional<Family> parse_family(const std::string& s);
inline Family iso_family(int component) { return static_cast<Family>(component); }
inline bool is_iso(Family f) { return rank(f) == 0; }

struct TrussNode {
  Vec3 position = Vec3::Zero();
  Vec3 param = Vec3::Zero();
  NodeTag tag = NodeTag::InteriorGrid;
};

struct TrussElement {
  std::array<int, 2> nodes = {0, 0};
  Family family = Family::Iso1;
  int source = -1; // tet (3D) or face (2D) the element was traced in, -1 if none
};

struct TrussGraph {
  std::vector<TrussNode> nodes;
  std::vector<TrussElement> elements;

  double element_length(std::size_t e) const;
  double total_length() const;
  int num_components() const;
  // Throws Error(Internal) on out-of-range indices, self-loops or duplicates.
  void validate() const;
};

// Number of parameter components within tol of an integer.
int integer_count(const Vec3& param, double tol = 1e-6);

// Merges nodes whose positions coincide within tol (metres), unions their
// tags, drops self-loops and duplicate elements (keeping the dominant family)
// and sorts the result canonically.
TrussGraph merge_graphs(std::span<const TrussGraph> parts, double tol = 1e-9);

// Canonical order: nodes by (param, position, previous index); elements by
// node pair then family. Elements are stored with nodes[0] < nodes[1].
void canonicalize(TrussGraph& g);

// Cluster representatives for a point set: rep[i] is the smallest index whose
// position lies within tol of i, transitively.
std::vector<int> cluster_points(std::span<const Vec3> points, double tol);

} // namespace michell
