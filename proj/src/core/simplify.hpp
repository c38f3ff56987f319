#pragma once

#include "core/truss_graph.hpp"

namespace michell {

struct SimplifyOptions {
  // Elements shorter than this are contracted. Non-positive selects
  // auto_threshold_factor times the median element length.
  double length_threshold = 0.0;
  double auto_threshold_factor = 0.05;
  // Contract face/edge-hit nodes (away from the boundary) into a neighbour.
  bool remove_interior_hits = false;
  // Contract boundary nodes with fewer than two integer parameters.
  bool simplify_boundary = false;
  bool preserve_features = true;
};

struct SimplifyStats {
  double threshold = 0.0;
  int short_contractions = 0;
  int hit_contractions = 0;
  int boundary_contractions = 0;
  int removed_elements = 0; // self-loops and duplicates produced by contraction
};

// Median length of the elements longer than 1e-6 times the graph's bounding
// box diagonal. Slivers left by near-integer vertices would otherwise drag the
// median (and the automatic threshold) down to round-off level.
double median_element_length(const TrussGraph& g);

TrussGraph simplify(const TrussGraph& g, const SimplifyOptions& options = {},
                    SimplifyStats* stats = nullptr);

} // namespace michell
