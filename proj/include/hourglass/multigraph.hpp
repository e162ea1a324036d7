// multigraph.hpp — labeled multigraphs with ordered edges, minors, and
// spanning-structure enumeration.
// SPDX-License-Identifier: MIT
//
// Vertices are 0..n-1. Edges are directed (tail, head) for incidence-matrix
// purposes, carry unique string labels, and their order in the edge list is
// part of the graph value (serialization round-trips exactly).
#pragma once

#include <algorithm>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hourglass/common.hpp"
#include "hourglass/intpoly.hpp"

namespace hg {

struct Edge {
  std::string label;
  int tail = 0;
  int head = 0;
  bool is_loop() const { return tail == head; }
  friend bool operator==(const Edge& a, const Edge& b) {
    return a.label == b.label && a.tail == b.tail && a.head == b.head;
  }
};

class Multigraph {
 public:
  Multigraph() = default;
  explicit Multigraph(int n) : n_(n) { require(n >= 0, "negative vertex count"); }

  int n_vertices() const { return n_; }
  int n_edges() const { return static_cast<int>(edges_.size()); }

  // Copy with the vertex set enlarged to n_new (edges unchanged).
  Multigraph with_vertices(int n_new) const {
    require(n_new >= n_, "with_vertices: cannot shrink");
    Multigraph g = *this;
    g.n_ = n_new;
    return g;
  }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int i) const { return edges_[static_cast<size_t>(i)]; }

  void add_edge(const std::string& label, int tail, int head) {
    require(!label.empty(), "empty edge label");
    require(tail >= 0 && tail < n_ && head >= 0 && head < n_,
            "edge endpoint out of range: " + label);
    for (const auto& e : edges_)
      require(e.label != label, "duplicate edge label: " + label);
    edges_.push_back({label, tail, head});
  }

  int edge_index(const std::string& label) const {
    for (int i = 0; i < n_edges(); ++i)
      if (edges_[i].label == label) return i;
    throw UserError("no edge labeled: " + label);
  }
  bool has_edge_label(const std::string& label) const {
    for (const auto& e : edges_)
      if (e.label == label) return true;
    return false;
  }

  friend bool operator==(const Multigraph& a, const Multigraph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

  // Variable context over this graph's edge labels.
  CtxPtr make_ctx() const {
    std::vector<std::string> labels;
    labels.reserve(edges_.size());
    for (const auto& e : edges_) labels.push_back(e.label);
    return PolyCtx::make(std::move(labels));
  }

  int degree(int v) const {
    int d = 0;
    for (const auto& e : edges_) {
      if (e.tail == v) ++d;
      if (e.head == v) ++d;  // loops count twice
    }
    return d;
  }

  bool is_simple() const {
    std::set<std::pair<int, int>> seen;
    for (const auto& e : edges_) {
      if (e.is_loop()) return false;
      auto key = std::minmax(e.tail, e.head);
      if (!seen.insert({key.first, key.second}).second) return false;
    }
    return true;
  }

  int n_components() const {
    std::vector<int> root(static_cast<size_t>(n_));
    for (int i = 0; i < n_; ++i) root[static_cast<size_t>(i)] = i;
    std::function<int(int)> find = [&](int x) {
      while (root[static_cast<size_t>(x)] != x) {
        root[static_cast<size_t>(x)] =
            root[static_cast<size_t>(root[static_cast<size_t>(x)])];
        x = root[static_cast<size_t>(x)];
      }
      return x;
    };
    int comps = n_;
    for (const auto& e : edges_) {
      int a = find(e.tail), b = find(e.head);
      if (a != b) {
        root[static_cast<size_t>(a)] = b;
        --comps;
      }
    }
    return comps;
  }
  bool is_connected() const { return n_ == 0 || n_components() == 1; }

  // First Betti number (cycle rank): |E| - |V| + #components.
  int h1() const { return n_edges() - n_ + n_components(); }

  // ---- minors ------------------------------------------------------------

  Multigraph delete_edge(int idx) const {
    Multigraph g(n_);
    for (int i = 0; i < n_edges(); ++i)
      if (i != idx) g.edges_.push_back(edges_[static_cast<size_t>(i)]);
    return g;
  }
  Multigraph delete_edges(const std::vector<int>& idxs) const {
    std::set<int> drop(idxs.begin(), idxs.end());
    Multigraph g(n_);
    for (int i = 0; i < n_edges(); ++i)
      if (!drop.count(i)) g.edges_.push_back(edges_[static_cast<size_t>(i)]);
    return g;
  }

  // Contracts a (non-loop) edge; the merged vertex keeps the lower index and
  // indices above the removed one shift down. Parallel edges become loops.
  Multigraph contract_edge(int idx) const {
    const Edge& e = edges_[static_cast<size_t>(idx)];
    require(!e.is_loop(), "cannot contract a self-loop: " + e.label);
    int keep = std::min(e.tail, e.head), gone = std::max(e.tail, e.head);
    Multigraph g(n_ - 1);
    auto remap = [&](int v) {
      if (v == gone) v = keep;
      return v > gone ? v - 1 : v;
    };
    for (int i = 0; i < n_edges(); ++i) {
      if (i == idx) continue;
      const Edge& f = edges_[static_cast<size_t>(i)];
      g.edges_.push_back({f.label, remap(f.tail), remap(f.head)});
    }
    return g;
  }

  Multigraph contract_edges(std::vector<std::string> labels) const {
    Multigraph g = *this;
    for (const auto& l : labels) g = g.contract_edge(g.edge_index(l));
    return g;
  }
  Multigraph delete_edges_by_label(const std::vector<std::string>& labels) const {
    std::vector<int> idxs;
    for (const auto& l : labels) idxs.push_back(edge_index(l));
    return delete_edges(idxs);
  }

  // Identifies a set of vertices into one (the smallest index of the set);
  // higher indices shift down. Edges inside the set become loops.
  Multigraph merge_vertices(const std::vector<int>& verts) const {
    require(!verts.empty(), "merge_vertices: empty set");
    std::set<int> s(verts.begin(), verts.end());
    int keep = *s.begin();
    std::vector<int> remap(static_cast<size_t>(n_));
    int next = 0;
    for (int v = 0; v < n_; ++v) {
      if (s.count(v) && v != keep) {
        remap[static_cast<size_t>(v)] = -1;  // fill later
      } else {
        remap[static_cast<size_t>(v)] = next++;
      }
    }
    for (int v : s) remap[static_cast<size_t>(v)] = remap[static_cast<size_t>(keep)];
    Multigraph g(next);
    for (const auto& e : edges_)
      g.edges_.push_back({e.label, remap[static_cast<size_t>(e.tail)],
                          remap[static_cast<size_t>(e.head)]});
    return g;
  }

  // Removes one vertex together with its incident edges.
  Multigraph delete_vertex(int v) const {
    require(v >= 0 && v < n_, "delete_vertex: out of range");
    Multigraph g(n_ - 1);
    auto remap = [&](int u) { return u > v ? u - 1 : u; };
    for (const auto& e : edges_) {
      if (e.tail == v || e.head == v) continue;
      g.edges_.push_back({e.label, remap(e.tail), remap(e.head)});
    }
    return g;
  }

  // Disjoint union with vertex and label offsetting handled by the caller.
  static Multigraph disjoint_union(const Multigraph& a, const Multigraph& b) {
    Multigraph g(a.n_ + b.n_);
    for (const auto& e : a.edges_) g.add_edge(e.label, e.tail, e.head);
    for (const auto& e : b.edges_) g.add_edge(e.label, e.tail + a.n_, e.head + a.n_);
    return g;
  }

  // ---- serialization -------------------------------------------------------
  //
  //   # optional comments
  //   v <n>
  //   e <label> <tail> <head>
  //
  // Kernel files append one `x` line; parse() exposes unparsed extra lines so
  // wrappers can consume them.
  static Multigraph parse(const std::string& text,
                          std::vector<std::string>* extra_lines = nullptr) {
    std::istringstream in(text);
    std::string line;
    Multigraph g;
    bool have_v = false;
    while (std::getline(in, line)) {
      std::string s = line;
      if (auto h = s.find('#'); h != std::string::npos) s = s.substr(0, h);
      std::istringstream ls(s);
      std::string tok;
      if (!(ls >> tok)) continue;
      if (tok == "v") {
        int n;
        require(static_cast<bool>(ls >> n), "bad v line: " + line);
        require(!have_v, "duplicate v line");
        g = Multigraph(n);
        have_v = true;
      } else if (tok == "e") {
        require(have_v, "e line before v line");
        std::string label;
        int t, h;
        require(static_cast<bool>(ls >> label >> t >> h),
                "bad e line: " + line);
        g.add_edge(label, t, h);
      } else if (extra_lines) {
        extra_lines->push_back(line);
      } else {
        throw UserError("unrecognized line: " + line);
      }
    }
    require(have_v, "graph text missing v line");
    return g;
  }

  std::string to_string() const {
    std::ostringstream os;
    os << "v " << n_ << "\n";
    for (const auto& e : edges_)
      os << "e " << e.label << " " << e.tail << " " << e.head << "\n";
    return os.str();
  }

  // ---- spanning-structure enumeration --------------------------------------

  // Enumerates spanning forests with a prescribed component structure:
  // `part_of[v]` >= 0 assigns marked vertices to parts 0..k-1 (-1 = free).
  // A reported forest has exactly k trees, each containing the whole of
  // exactly one part (free vertices may land anywhere). Spanning trees are
  // the k == 1 case. The callback receives the in-forest edge indices.
  void enumerate_forests(const std::vector<int>& part_of, int n_parts,
                         const std::function<void(const std::vector<int>&)>& cb) const {
    invariant(static_cast<int>(part_of.size()) == n_,
              "enumerate_forests: part_of arity");
    invariant(n_parts >= 1, "enumerate_forests: need >= 1 part");
    if (n_ == 0) return;
    // Union-find with parts and rollback.
    std::vector<int> parent(static_cast<size_t>(n_)), size(static_cast<size_t>(n_), 1),
        part(part_of.begin(), part_of.end());
    for (int i = 0; i < n_; ++i) parent[static_cast<size_t>(i)] = i;
    struct Undo {
      int child;  // root that was attached
      int root;   // root it was attached to
      int root_part_prev;
    };
    std::vector<Undo> undo;
    auto find = [&](int x) {
      while (parent[static_cast<size_t>(x)] != x) x = parent[static_cast<size_t>(x)];
      return x;
    };
    // Returns -1 on part conflict, 0 on cycle (no-op), 1 on merge (undoable).
    auto link2 = [&](int a, int b) -> int {
      int ra = find(a), rb = find(b);
      if (ra == rb) return 0;
      int pa = part[static_cast<size_t>(ra)], pb = part[static_cast<size_t>(rb)];
      if (pa >= 0 && pb >= 0 && pa != pb) return -1;
      if (size[static_cast<size_t>(ra)] < size[static_cast<size_t>(rb)]) {
        std::swap(ra, rb);
        std::swap(pa, pb);
      }
      parent[static_cast<size_t>(rb)] = ra;
      size[static_cast<size_t>(ra)] += size[static_cast<size_t>(rb)];
      undo.push_back({rb, ra, part[static_cast<size_t>(ra)]});
      if (pa < 0) part[static_cast<size_t>(ra)] = pb;
      return 1;
    };
    auto unlink2 = [&]() {
      Undo u = undo.back();
      undo.pop_back();
      parent[static_cast<size_t>(u.child)] = u.child;
      size[static_cast<size_t>(u.root)] -= size[static_cast<size_t>(u.child)];
      part[static_cast<size_t>(u.root)] = u.root_part_prev;
    };

    const int m = n_edges();
    const int target_edges = n_ - n_parts;  // forest with n_parts trees
    if (target_edges < 0) return;
    std::vector<int> chosen;
    chosen.reserve(static_cast<size_t>(target_edges));

    std::function<void(int)> rec = [&](int i) {
      int have = static_cast<int>(chosen.size());
      if (have == target_edges) {
        // Verify each part is internally connected (one root per part).
        std::vector<int> root_of_part(static_cast<size_t>(n_parts), -1);
        for (int v = 0; v < n_; ++v) {
          int pv = part_of[static_cast<size_t>(v)];
          if (pv < 0) continue;
          int r = find(v);
          int& slot = root_of_part[static_cast<size_t>(pv)];
          if (slot == -1) slot = r;
          else if (slot != r) return;
        }
        // distinct parts in distinct trees is guaranteed by link2; n_parts
        // trees with each part connected => exactly the required structure.
        cb(chosen);
        return;
      }
      if (i == m) return;
      if (m - i < target_edges - have) return;  // not enough edges left
      const Edge& e = edges_[static_cast<size_t>(i)];
      // Branch 1: include e (if it joins two different, compatible trees).
      if (!e.is_loop()) {
        int res = link2(e.tail, e.head);
        if (res == 1) {
          chosen.push_back(i);
          rec(i + 1);
          chosen.pop_back();
          unlink2();
        }
      }
      // Branch 2: skip e.
      rec(i + 1);
    };
    rec(0);
  }

  // Spanning trees (connected spanning forests with one tree).
  void enumerate_spanning_trees(
      const std::function<void(const std::vector<int>&)>& cb) const {
    std::vector<int> part_of(static_cast<size_t>(n_), -1);
    if (n_ > 0) part_of[0] = 0;  // one part; every vertex must join it
    enumerate_forests(part_of, 1, cb);
  }

  int count_spanning_trees() const {
    int count = 0;
    enumerate_spanning_trees([&](const std::vector<int>&) { ++count; });
    return count;
  }

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
};

// Locates two triangles sharing an edge and rewires the graph across the
// shared edge: for triangles (u,v,x) and (u,v,y) with x != y, an endpoint v
// of the shared edge qualifies when it has degree 4 with four distinct
// neighbors u, x, y, w (w outside the triangle pair). The rewrite deletes v
// and adds edges (x,y) and (u,w) with fresh labels. Returns nullopt when no
// eligible configuration exists. Lowest-index eligible v (then u, x, y, w in
// index order) is chosen, so the operation is deterministic.
inline std::optional<Multigraph> double_triangle_reduce(const Multigraph& g) {
  const int n = g.n_vertices();
  auto edge_between = [&](int a, int b) {
    for (const auto& e : g.edges())
      if (!e.is_loop() && ((e.tail == a && e.head == b) || (e.tail == b && e.head == a)))
        return true;
    return false;
  };
  for (int v = 0; v < n; ++v) {
    if (g.degree(v) != 4) continue;
    std::vector<int> nb;
    for (const auto& e : g.edges()) {
      if (e.tail == v && e.head != v) nb.push_back(e.head);
      if (e.head == v && e.tail != v) nb.push_back(e.tail);
    }
    std::sort(nb.begin(), nb.end());
    if (nb.size() != 4 || std::unique(nb.begin(), nb.end()) != nb.end())
      continue;  // needs 4 distinct neighbors
    // try every neighbor as u (shared edge v-u), x,y among the others
    for (int u : nb) {
      for (size_t xi = 0; xi < nb.size(); ++xi) {
        for (size_t yi = xi + 1; yi < nb.size(); ++yi) {
          int x = nb[xi], y = nb[yi];
          if (x == u || y == u) continue;
          if (!edge_between(u, x) || !edge_between(u, y)) continue;
          int w = -1;
          for (int z : nb)
            if (z != u && z != x && z != y) w = z;
          if (w < 0) continue;
          // triangles (u,v,x) and (u,v,y) exist; rewire.
          Multigraph h = g.delete_vertex(v);
          auto remap = [&](int a) { return a > v ? a - 1 : a; };
          auto fresh = [&](const std::string& base) {
            std::string l = base;
            int k = 1;
            while (h.has_edge_label(l)) l = base + "_" + std::to_string(k++);
            return l;
          };
          h.add_edge(fresh("dt1"), remap(x), remap(y));
          h.add_edge(fresh("dt2"), remap(u), remap(w));
          return h;
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace hg
