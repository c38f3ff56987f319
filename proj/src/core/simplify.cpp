#include "core/simplify.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <tuple>

#include "core/error.hpp"
#include "core/log.hpp"

namespace michell {

double median_element_length(const TrussGraph& g) {
  if (g.elements.empty())
    return 0.0;
  Vec3 lo = g.nodes.front().position, hi = lo;
  for (const auto& n : g.nodes) {
    lo = lo.cwiseMin(n.position);
    hi = hi.cwiseMax(n.position);
  }
  const double floor = 1e-6 * (hi - lo).norm();
  std::vector<double> all, len;
  for (std::size_t e = 0; e < g.elements.size(); ++e) {
    const double l = g.element_length(e);
    all.push_back(l);
    if (l > floor)
      len.push_back(l);
  }
  if (len.empty())
    len = std::move(all);
  auto mid = len.begin() + static_cast<std::ptrdiff_t>(len.size() / 2);
  std::nth_element(len.begin(), mid, len.end());
  if (len.size() % 2 == 1)
    return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(len.begin(), mid);
  return 0.5 * (lower + upper);
}

namespace {

using Edge = std::pair<int, int>;
Edge key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

class Contractor {
public:
  Contractor(const TrussGraph& g, bool preserve_features)
      : nodes_(g.nodes), alive_(g.nodes.size(), true), adj_(g.nodes.size()),
        preserve_features_(preserve_features) {
    for (const auto& el : g.elements) {
      const Edge k = key(el.nodes[0], el.nodes[1]);
      if (k.first == k.second) {
        ++removed_;
        continue;
      }
      auto [it, inserted] = edges_.emplace(k, el);
      if (!inserted) {
        it->second.family = dominant(it->second.family, el.family);
        ++removed_;
        continue;
      }
      adj_[k.first].insert(k.second);
      adj_[k.second].insert(k.first);
    }
  }

  double length(int a, int b) const { return (nodes_[a].position - nodes_[b].position).norm(); }
  bool alive(int v) const { return alive_[v]; }
  const std::set<int>& neighbors(int v) const { return adj_[v]; }
  const TrussNode& node(int v) const { return nodes_[v]; }
  std::size_t size() const { return nodes_.size(); }
  int removed() const { return removed_; }

  bool removable(int v) const {
    return !(preserve_features_ && nodes_[v].tag == NodeTag::Feature);
  }

  // Removes `gone`, reattaching its elements to `keep`. The connecting element
  // disappears instead of becoming a self-loop.
  void contract(int keep, int gone) {
    edges_.erase(key(keep, gone));
    adj_[keep].erase(gone);
    adj_[gone].erase(keep);
    ++removed_;
    for (int c : adj_[gone]) {
      auto it = edges_.find(key(gone, c));
      TrussElement el = it->second;
      edges_.erase(it);
      adj_[c].erase(gone);
      el.nodes = {std::min(keep, c), std::max(keep, c)};
      auto [jt, inserted] = edges_.emplace(key(keep, c), el);
      if (!inserted) {
        jt->second.family = dominant(jt->second.family, el.family);
        ++removed_;
      } else {
        adj_[keep].insert(c);
        adj_[c].insert(keep);
      }
    }
    adj_[gone].clear();
    alive_[gone] = false;
    nodes_[keep].tag = dominant(nodes_[keep].tag, nodes_[gone].tag);
  }

  // Change in total length if `gone` is merged into `keep`.
  double delta_length(int keep, int gone) const {
    double d = -length(keep, gone);
    for (int c : adj_[gone]) {
      if (c == keep)
        continue;
      d -= length(gone, c);
      if (!adj_[keep].count(c))
        d += length(keep, c);
    }
    return d;
  }

  TrussGraph result() const {
    TrussGraph g;
    std::vector<int> index(nodes_.size(), -1);
    for (std::size_t v = 0; v < nodes_.size(); ++v)
      if (alive_[v]) {
        index[v] = static_cast<int>(g.nodes.size());
        g.nodes.push_back(nodes_[v]);
      }
    for (const auto& [k, el] : edges_) {
      TrussElement e = el;
      e.nodes = {index[k.first], index[k.second]};
      g.elements.push_back(e);
    }
    canonicalize(g);
    return g;
  }

private:
  std::vector<TrussNode> nodes_;
  std::vector<bool> alive_;
  std::vector<std::set<int>> adj_;
  std::map<Edge, TrussElement> edges_;
  bool preserve_features_;
  int removed_ = 0;
};

bool is_hit(NodeTag t) { return t == NodeTag::EdgeHit || t == NodeTag::FaceHit; }

// Neighbour to merge v into: highest rank, then nearest, then lowest index.
int best_target(const Contractor& c, int v, bool boundary_only) {
  int best = -1;
  std::tuple<int, int, double, int> best_key;
  for (int u : c.neighbors(v)) {
    const NodeTag tag = c.node(u).tag;
    if (boundary_only && tag != NodeTag::Boundary && tag != NodeTag::Feature)
      continue;
    auto k = std::make_tuple(-rank(tag), -integer_count(c.node(u).param), c.length(u, v), u);
    if (!boundary_only)
      std::get<1>(k) = 0;
    if (best < 0 || k < best_key) {
      best = u;
      best_key = k;
    }
  }
  return best;
}

} // namespace

TrussGraph simplify(const TrussGraph& g, const SimplifyOptions& options, SimplifyStats* stats) {
  SimplifyStats st;
  double threshold = options.length_threshold;
  if (!(threshold > 0)) {
    if (!(options.auto_threshold_factor >= 0))
      fail(ErrorCode::Config, "auto_threshold_factor must be non-negative");
    threshold = options.auto_threshold_factor * median_element_length(g);
  }
  st.threshold = threshold;
  Contractor c(g, options.preserve_features);

  // Short elements, shortest first.
  using Item = std::tuple<double, int, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (std::size_t v = 0; v < c.size(); ++v)
    for (int u : c.neighbors(static_cast<int>(v)))
      if (static_cast<int>(v) < u)
        queue.emplace(c.length(static_cast<int>(v), u), static_cast<int>(v), u);
  while (!queue.empty()) {
    auto [len, a, b] = queue.top();
    queue.pop();
    if (!(len < threshold))
      break;
    if (!c.alive(a) || !c.alive(b) || !c.neighbors(a).count(b) || c.length(a, b) != len)
      continue;
    // Survivor: higher rank, then more integer parameters, then the direction
    // that removes more length.
    int keep;
    const int ra = rank(c.node(a).tag), rb = rank(c.node(b).tag);
    const int ia = integer_count(c.node(a).param), ib = integer_count(c.node(b).param);
    if (ra != rb) {
      keep = ra > rb ? a : b;
    } else if (ia != ib) {
      keep = ia > ib ? a : b;
    } else {
      const double da = c.delta_length(a, b), db = c.delta_length(b, a);
      keep = (db < da) ? b : a;
    }
    const int gone = keep == a ? b : a;
    // Two feature nodes closer than the threshold still collapse onto one
    // feature node; a feature node never disappears into anything else.
    if (!c.removable(gone) && c.node(keep).tag != NodeTag::Feature)
      continue;
    c.contract(keep, gone);
    ++st.short_contractions;
    for (int u : c.neighbors(keep))
      queue.emplace(c.length(keep, u), std::min(keep, u), std::max(keep, u));
  }

  if (options.remove_interior_hits) {
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t v = 0; v < c.size(); ++v) {
        const int vi = static_cast<int>(v);
        if (!c.alive(vi) || !is_hit(c.node(vi).tag))
          continue;
        const int target = best_target(c, vi, false);
        if (target < 0)
          continue;
        c.contract(target, vi);
        ++st.hit_contractions;
        changed = true;
      }
    }
  }

  if (options.simplify_boundary) {
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t v = 0; v < c.size(); ++v) {
        const int vi = static_cast<int>(v);
        if (!c.alive(vi) || c.node(vi).tag != NodeTag::Boundary ||
            integer_count(c.node(vi).param) >= 2)
          continue;
        const int target = best_target(c, vi, true);
        if (target < 0)
          continue;
        c.contract(target, vi);
        ++st.boundary_contractions;
        changed = true;
      }
    }
  }

  st.removed_elements = c.removed();
  TrussGraph out = c.result();
  logger()->info("simplify: threshold {:.4e}, contractions {} short / {} hits / {} boundary", threshold,
                 st.short_contractions, st.hit_contractions, st.boundary_contractions);
  if (stats)
    *stats = st;
  return out;
}

} // namespace michell
