// kernelcat.hpp — the kernel catalog: enumeration of admissible 4-regular
// completions, opening of 4-cycles into kernels with paired externals, and
// the redundancy filters that keep one representative per chain family.
// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hourglass/hourglass.hpp"
#include "hourglass/multigraph.hpp"

namespace hg {

// ---------------------------------------------------------------------------
// FNV-1a 64-bit checksum (hex) for catalog fingerprints.
// ---------------------------------------------------------------------------
inline std::string fnv1a_hex(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

// Small dense graph with vertex colors, for canonical labeling. Simple
// graphs only (the enumeration never produces parallel edges).
struct ColoredGraph {
  int n = 0;
  std::array<uint16_t, 16> adj{};
  std::array<int, 16> color{};

  bool has(int i, int j) const { return (adj[size_t(i)] >> j) & 1; }
  void add(int i, int j) {
    adj[size_t(i)] |= uint16_t(1u << j);
    adj[size_t(j)] |= uint16_t(1u << i);
  }
};

// Equitable refinement: repeatedly split color classes by the multiset of
// neighbor colors until stable. Colors are renumbered 0..k-1 by signature.
inline void refine_colors(const ColoredGraph& g, std::array<int, 16>& col) {
  for (;;) {
    std::vector<std::pair<std::vector<int>, int>> sig(size_t(g.n));
    for (int v = 0; v < g.n; ++v) {
      std::vector<int> s;
      s.push_back(col[size_t(v)]);
      for (int u = 0; u < g.n; ++u)
        if (g.has(v, u)) s.push_back(~col[size_t(u)]);
      std::sort(s.begin() + 1, s.end());
      sig[size_t(v)] = {std::move(s), v};
    }
    std::vector<std::vector<int>> keys;
    for (auto& p : sig) keys.push_back(p.first);
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    std::array<int, 16> next{};
    bool changed = false;
    for (int v = 0; v < g.n; ++v) {
      int nc = int(std::lower_bound(keys.begin(), keys.end(),
                                    sig[size_t(v)].first) -
                   keys.begin());
      next[size_t(v)] = nc;
      if (nc != col[size_t(v)]) changed = true;
    }
    col = next;
    if (!changed) return;
  }
}

// Canonical certificate: minimal string over all orderings consistent with
// iterated refinement plus individualization (all orderings are explored in
// the search tree; the minimum leaf string is the certificate).
inline void canon_rec(const ColoredGraph& g, std::array<int, 16> col,
                      std::string& best, bool& have) {
  refine_colors(g, col);
  // find the smallest non-singleton class
  int target = -1, target_color = 1 << 30;
  std::array<int, 16> count{};
  for (int v = 0; v < g.n; ++v) count[size_t(col[size_t(v)])]++;
  for (int v = 0; v < g.n; ++v)
    if (count[size_t(col[size_t(v)])] > 1 && col[size_t(v)] < target_color) {
      target_color = col[size_t(v)];
      target = v;
    }
  if (target < 0) {
    // discrete: order by refined color, emit colors + adjacency bits
    std::vector<int> order(size_t(g.n));
    for (int v = 0; v < g.n; ++v) order[size_t(col[size_t(v)])] = v;
    std::string s;
    s.reserve(size_t(g.n) + size_t(g.n) * size_t(g.n) / 2);
    for (int i = 0; i < g.n; ++i)
      s += char('0' + g.color[size_t(order[size_t(i)])]);
    for (int i = 0; i < g.n; ++i)
      for (int j = i + 1; j < g.n; ++j)
        s += g.has(order[size_t(i)], order[size_t(j)]) ? '1' : '0';
    if (!have || s < best) {
      best = std::move(s);
      have = true;
    }
    return;
  }
  for (int v = 0; v < g.n; ++v)
    if (col[size_t(v)] == target_color) {
      std::array<int, 16> ind = col;
      ind[size_t(v)] = -1;  // unique minimum for this vertex
      canon_rec(g, ind, best, have);
    }
}

inline std::string canonical_string(const ColoredGraph& g) {
  std::array<int, 16> col{};
  for (int v = 0; v < g.n; ++v) col[size_t(v)] = g.color[size_t(v)];
  std::string best;
  bool have = false;
  canon_rec(g, col, best, have);
  return best;
}

// ---------------------------------------------------------------------------
// Connected simple 4-regular graphs on m vertices, up to isomorphism.
// Vertex 0's neighborhood is pinned to {1,2,3,4}; duplicates are removed by
// canonical certificate.
// ---------------------------------------------------------------------------
struct DenseGraph {
  int n = 0;
  std::array<uint16_t, 16> adj{};
  std::array<int, 16> deg{};
  bool has(int i, int j) const { return (adj[size_t(i)] >> j) & 1; }
  void add(int i, int j) {
    adj[size_t(i)] |= uint16_t(1u << j);
    adj[size_t(j)] |= uint16_t(1u << i);
    deg[size_t(i)]++;
    deg[size_t(j)]++;
  }
  void remove(int i, int j) {
    adj[size_t(i)] &= uint16_t(~(1u << j));
    adj[size_t(j)] &= uint16_t(~(1u << i));
    deg[size_t(i)]--;
    deg[size_t(j)]--;
  }
  bool connected() const {
    if (n == 0) return true;
    uint32_t seen = 1, frontier = 1;
    while (frontier) {
      uint32_t next = 0;
      for (int v = 0; v < n; ++v)
        if ((frontier >> v) & 1) next |= adj[size_t(v)];
      frontier = next & ~seen;
      seen |= next;
    }
    return seen == (1u << n) - 1;
  }
};

inline void regular4_rec(DenseGraph& g, int v,
                         std::vector<DenseGraph>& out) {
  const int m = g.n;
  if (v == m) {
    if (g.connected()) out.push_back(g);
    return;
  }
  int need = 4 - g.deg[size_t(v)];
  if (need < 0) return;
  if (need == 0) {
    regular4_rec(g, v + 1, out);
    return;
  }
  // candidates strictly above v with spare degree
  std::vector<int> cand;
  for (int j = v + 1; j < m; ++j)
    if (!g.has(v, j) && g.deg[size_t(j)] < 4) cand.push_back(j);
  if (int(cand.size()) < need) return;
  // choose `need` of cand (lexicographic combinations)
  std::vector<int> pick;
  std::function<void(size_t)> choose = [&](size_t from) {
    if (int(pick.size()) == need) {
      for (int j : pick) g.add(v, j);
      regular4_rec(g, v + 1, out);
      for (int j : pick) g.remove(v, j);
      return;
    }
    for (size_t i = from; i + (size_t(need) - pick.size()) <= cand.size();
         ++i) {
      pick.push_back(cand[i]);
      choose(i + 1);
      pick.pop_back();
    }
  };
  choose(0);
}

inline std::vector<DenseGraph> connected_4regular(int m) {
  require(m >= 5 && m <= 16, "4-regular enumeration: 5 <= m <= 16");
  DenseGraph g;
  g.n = m;
  for (int j = 1; j <= 4; ++j) g.add(0, j);
  std::vector<DenseGraph> raw;
  regular4_rec(g, 1, raw);
  std::vector<DenseGraph> out;
  std::set<std::string> seen;
  for (const auto& h : raw) {
    ColoredGraph c;
    c.n = m;
    c.adj = h.adj;
    if (seen.insert(canonical_string(c)).second) out.push_back(h);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Admissibility of a completion: every edge cut between sides of size >= 2
// has at least six edges, and no cutset of at most three vertices exists.
// ---------------------------------------------------------------------------
inline int cut_size(const DenseGraph& g, uint32_t side) {
  int c = 0;
  for (int v = 0; v < g.n; ++v)
    if ((side >> v) & 1)
      c += __builtin_popcount(uint32_t(g.adj[size_t(v)]) & ~side);
  return c;
}

inline bool connected_without(const DenseGraph& g, uint32_t removed) {
  uint32_t all = ((1u << g.n) - 1) & ~removed;
  if (all == 0) return true;
  uint32_t start = all & uint32_t(-int32_t(all));  // lowest kept vertex
  uint32_t seen = start, frontier = start;
  while (frontier) {
    uint32_t next = 0;
    for (int v = 0; v < g.n; ++v)
      if ((frontier >> v) & 1) next |= uint32_t(g.adj[size_t(v)]) & all;
    frontier = next & ~seen;
    seen |= next;
  }
  return seen == all;
}

inline bool completion_admissible(const DenseGraph& g) {
  const uint32_t full = (1u << g.n) - 1;
  for (uint32_t s = 1; s < full; ++s) {
    int k = __builtin_popcount(s);
    if (k < 2 || g.n - k < 2) continue;
    if (cut_size(g, s) < 6) return false;
  }
  // no cutset of size <= 3
  for (int a = 0; a < g.n; ++a) {
    if (!connected_without(g, 1u << a)) return false;
    for (int b = a + 1; b < g.n; ++b) {
      if (!connected_without(g, (1u << a) | (1u << b))) return false;
      for (int c = b + 1; c < g.n; ++c)
        if (!connected_without(g, (1u << a) | (1u << b) | (1u << c)))
          return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Kernel candidate filters. K is the completion minus an induced-or-not
// 4-cycle through the four externals; parts are the two external pairs.
// ---------------------------------------------------------------------------
struct KernelCandidate {
  DenseGraph k;              // opened graph
  std::array<int, 4> ext{};  // pair one: [0],[1]; pair two: [2],[3]
};

inline bool has_double_triangle(const DenseGraph& g) {
  for (int u = 0; u < g.n; ++u)
    for (int v = u + 1; v < g.n; ++v) {
      if (!g.has(u, v)) continue;
      int common = __builtin_popcount(
          uint32_t(g.adj[size_t(u)]) & uint32_t(g.adj[size_t(v)]));
      if (common >= 2) return true;
    }
  return false;
}

// A two-triangle fan at an internal center whose outer pair is exactly one
// of the parts (the shape the chain itself would add).
inline bool has_chain_extension(const KernelCandidate& c) {
  uint32_t extmask = 0;
  for (int t : c.ext) extmask |= 1u << t;
  auto is_part = [&](int u, int v) {
    return (u == c.ext[0] && v == c.ext[1]) ||
           (u == c.ext[1] && v == c.ext[0]) ||
           (u == c.ext[2] && v == c.ext[3]) ||
           (u == c.ext[3] && v == c.ext[2]);
  };
  const DenseGraph& g = c.k;
  for (int ctr = 0; ctr < g.n; ++ctr) {
    if ((extmask >> ctr) & 1) continue;  // center must be internal
    for (int u = 0; u < g.n; ++u) {
      if (u == ctr || !g.has(ctr, u)) continue;
      for (int v = 0; v < g.n; ++v) {
        if (v == ctr || v == u || !g.has(ctr, v) || !is_part(u, v)) continue;
        for (int w1 = 0; w1 < g.n; ++w1) {
          if (w1 == ctr || w1 == u || w1 == v) continue;
          if (!g.has(ctr, w1) || !g.has(u, w1)) continue;
          for (int w2 = 0; w2 < g.n; ++w2) {
            if (w2 == ctr || w2 == u || w2 == v || w2 == w1) continue;
            if (g.has(ctr, w2) && g.has(v, w2)) return true;
          }
        }
      }
    }
  }
  return false;
}

inline bool keeps_candidate(const KernelCandidate& c) {
  const DenseGraph& g = c.k;
  const int n_internal = g.n - 4;
  uint32_t extmask = 0;
  for (int t : c.ext) extmask |= 1u << t;

  // F1: an edge inside either part
  if (g.has(c.ext[0], c.ext[1]) || g.has(c.ext[2], c.ext[3])) return false;

  // F2: two or more external-external edges (kernels with two or more
  // internal vertices only; smaller kernels legitimately keep them)
  if (n_internal >= 2) {
    int ee = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (g.has(c.ext[size_t(i)], c.ext[size_t(j)])) ++ee;
    if (ee >= 2) return false;
  }

  // F3: adjacent triangles collapse to a smaller catalog entry
  if (has_double_triangle(g)) return false;

  // F4: the kernel must not itself end in a chain hourglass (except the
  // five-vertex kernel, which is that hourglass)
  if (g.n > 5 && has_chain_extension(c)) return false;

  // F5: some component of K - S (|S| <= 3) avoids all externals
  {
    std::vector<uint32_t> subsets = {0};
    for (int a = 0; a < g.n; ++a) subsets.push_back(1u << a);
    for (int a = 0; a < g.n; ++a)
      for (int b = a + 1; b < g.n; ++b) {
        subsets.push_back((1u << a) | (1u << b));
        for (int cc = b + 1; cc < g.n; ++cc)
          subsets.push_back((1u << a) | (1u << b) | (1u << cc));
      }
    for (uint32_t rem : subsets) {
      uint32_t alive = ((1u << g.n) - 1) & ~rem;
      uint32_t unseen = alive;
      while (unseen) {
        uint32_t start = unseen & uint32_t(-int32_t(unseen));
        uint32_t comp = start, frontier = start;
        while (frontier) {
          uint32_t nx = 0;
          for (int v = 0; v < g.n; ++v)
            if ((frontier >> v) & 1)
              nx |= uint32_t(g.adj[size_t(v)]) & alive;
          frontier = nx & ~comp;
          comp |= nx;
        }
        if ((comp & extmask) == 0) return false;
        unseen &= ~comp;
      }
    }
  }

  // F6: a small edge cut isolating two or more internal vertices
  {
    std::vector<int> internals;
    for (int v = 0; v < g.n; ++v)
      if (!((extmask >> v) & 1)) internals.push_back(v);
    const int ni = int(internals.size());
    for (uint32_t s = 0; s < (1u << ni); ++s) {
      if (__builtin_popcount(s) < 2) continue;
      uint32_t side = 0;
      for (int i = 0; i < ni; ++i)
        if ((s >> i) & 1) side |= 1u << internals[size_t(i)];
      if (cut_size(g, side) <= 4) return false;
    }
  }
  return true;
}

inline std::string candidate_canonical(const KernelCandidate& c) {
  std::string best;
  for (int flip = 0; flip < 2; ++flip) {
    ColoredGraph g;
    g.n = c.k.n;
    g.adj = c.k.adj;
    for (int i = 0; i < 4; ++i)
      g.color[size_t(c.ext[size_t(i)])] = (i < 2) == (flip == 0) ? 1 : 2;
    std::string s = canonical_string(g);
    if (best.empty() || s < best) best = std::move(s);
  }
  return best;
}

inline KernelSpec candidate_to_spec(const KernelCandidate& c) {
  KernelSpec spec;
  spec.k = Multigraph(c.k.n);
  int t = 1;
  for (int i = 0; i < c.k.n; ++i)
    for (int j = i + 1; j < c.k.n; ++j)
      if (c.k.has(i, j)) spec.k.add_edge("k" + std::to_string(t++), i, j);
  spec.ext = c.ext;
  std::sort(spec.ext.begin(), spec.ext.begin() + 2);
  std::sort(spec.ext.begin() + 2, spec.ext.end());
  if (spec.ext[0] > spec.ext[2]) {
    std::swap(spec.ext[0], spec.ext[2]);
    std::swap(spec.ext[1], spec.ext[3]);
  }
  return spec;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// The catalog: kernels with a given number of internal vertices, in a
// deterministic certificate order. Zero internal vertices is the seeded
// 4-cycle with diagonal pairs; larger kernels come from opening every
// 4-cycle of every admissible completion and filtering.
// ---------------------------------------------------------------------------
inline std::vector<KernelSpec> catalog_kernels(int n_internal) {
  require(n_internal >= 0 && n_internal <= 12, "catalog: 0 <= n <= 12");
  std::vector<KernelSpec> out;
  if (n_internal == 0) {
    KernelSpec c4;
    c4.k = Multigraph(4);
    c4.k.add_edge("k1", 0, 1);
    c4.k.add_edge("k2", 1, 2);
    c4.k.add_edge("k3", 2, 3);
    c4.k.add_edge("k4", 0, 3);
    c4.ext = {0, 2, 1, 3};
    c4.name = "k0_1";
    validate_kernel(c4);
    out.push_back(std::move(c4));
    return out;
  }
  const int m = n_internal + 4;
  std::map<std::string, detail::KernelCandidate> unique;
  for (const auto& M : detail::connected_4regular(m)) {
    if (!detail::completion_admissible(M)) continue;
    // every 4-cycle: unordered vertex sets with each of the three pairings
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b)
        for (int c = b + 1; c < m; ++c)
          for (int d = c + 1; d < m; ++d) {
            const std::array<std::array<int, 4>, 3> orders = {
                {{a, b, c, d}, {a, b, d, c}, {a, c, b, d}}};
            for (const auto& o : orders) {
              if (!(M.has(o[0], o[1]) && M.has(o[1], o[2]) &&
                    M.has(o[2], o[3]) && M.has(o[3], o[0])))
                continue;
              detail::DenseGraph K = M;
              K.remove(o[0], o[1]);
              K.remove(o[1], o[2]);
              K.remove(o[2], o[3]);
              K.remove(o[3], o[0]);
              const std::array<std::array<int, 4>, 3> parts = {
                  {{o[0], o[1], o[2], o[3]},
                   {o[0], o[2], o[1], o[3]},
                   {o[0], o[3], o[1], o[2]}}};
              for (const auto& pr : parts) {
                detail::KernelCandidate cand;
                cand.k = K;
                cand.ext = pr;
                if (!detail::keeps_candidate(cand)) continue;
                unique.emplace(detail::candidate_canonical(cand), cand);
              }
            }
          }
  }
  int idx = 1;
  for (auto& kv : unique) {
    KernelSpec spec = detail::candidate_to_spec(kv.second);
    spec.name = "k" + std::to_string(n_internal) + "_" + std::to_string(idx++);
    validate_kernel(spec);
    out.push_back(std::move(spec));
  }
  return out;
}

inline std::string kernel_checksum(const KernelSpec& spec) {
  return fnv1a_hex(kernel_to_string(spec));
}

}  // namespace hg
