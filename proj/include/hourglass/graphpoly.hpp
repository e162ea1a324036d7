// graphpoly.hpp — graph polynomials: Kirchhoff, Dodgson minors, spanning
// forest polynomials, and their structural identities.
// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hourglass/common.hpp"
#include "hourglass/intpoly.hpp"
#include "hourglass/multigraph.hpp"

namespace hg {

// ---------------------------------------------------------------------------
// Expanded Laplacian: the (m + n - 1) square matrix
//
//     [ diag(alpha_e)  B^T ]
//     [ B              0   ]
//
// with edge rows/columns ordered by label (shortlex, matching the variable
// context) and B the signed incidence matrix (-1 at the tail, +1 at the head,
// 0 for self-loops) with one vertex row removed (the highest index, unless a
// different dropped vertex is requested).
// ---------------------------------------------------------------------------
struct ExpandedLaplacian {
  std::vector<std::vector<IntPoly>> m;
  CtxPtr ctx;
  std::vector<int> edge_of_row;  // row r (r < m_edges) -> edge index in G
};

inline ExpandedLaplacian expanded_laplacian(const Multigraph& g,
                                            int dropped_vertex = -1) {
  const int n = g.n_vertices();
  const int me = g.n_edges();
  require(n >= 1, "graph needs at least one vertex");
  if (dropped_vertex < 0) dropped_vertex = n - 1;
  require(dropped_vertex >= 0 && dropped_vertex < n, "dropped vertex range");

  CtxPtr ctx = g.make_ctx();
  // edge rows in label (context) order
  std::vector<int> edge_order(static_cast<size_t>(me));
  for (int i = 0; i < me; ++i)
    edge_order[static_cast<size_t>(ctx->index_of(g.edge(i).label))] = i;

  const int dim = me + n - 1;
  ExpandedLaplacian L;
  L.ctx = ctx;
  L.edge_of_row = edge_order;
  L.m.assign(static_cast<size_t>(dim),
             std::vector<IntPoly>(static_cast<size_t>(dim), IntPoly::zero(ctx)));

  auto vrow = [&](int v) {  // vertex -> matrix row, after dropping one
    return me + (v > dropped_vertex ? v - 1 : v);
  };
  for (int r = 0; r < me; ++r) {
    const Edge& e = g.edge(edge_order[static_cast<size_t>(r)]);
    L.m[static_cast<size_t>(r)][static_cast<size_t>(r)] =
        IntPoly::variable(ctx, e.label);
    if (e.is_loop()) continue;
    if (e.tail != dropped_vertex) {
      int vr = vrow(e.tail);
      L.m[static_cast<size_t>(vr)][static_cast<size_t>(r)] =
          IntPoly::constant(ctx, -1);
      L.m[static_cast<size_t>(r)][static_cast<size_t>(vr)] =
          IntPoly::constant(ctx, -1);
    }
    if (e.head != dropped_vertex) {
      int vr = vrow(e.head);
      L.m[static_cast<size_t>(vr)][static_cast<size_t>(r)] =
          IntPoly::constant(ctx, 1);
      L.m[static_cast<size_t>(r)][static_cast<size_t>(vr)] =
          IntPoly::constant(ctx, 1);
    }
  }
  return L;
}

// ---------------------------------------------------------------------------
// Kirchhoff polynomial: sum over spanning trees T of prod_{e not in T} alpha_e.
// Self-loops are never in a tree, so each loop contributes a global factor.
// ---------------------------------------------------------------------------
inline IntPoly kirchhoff_enumeration(const Multigraph& g,
                                     CtxPtr ctx = nullptr) {
  if (!ctx) ctx = g.make_ctx();
  const int m = g.n_edges();
  Mono all;
  std::vector<int> var_of(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    var_of[static_cast<size_t>(i)] = ctx->index_of(g.edge(i).label);
    all.set_exp(var_of[static_cast<size_t>(i)], 1);
  }
  std::vector<IntPoly::Term> terms;
  g.enumerate_spanning_trees([&](const std::vector<int>& tree) {
    Mono mono = all;
    for (int e : tree) mono.set_exp(var_of[static_cast<size_t>(e)], 0);
    terms.push_back({mono, Int(1)});
  });
  return IntPoly::from_terms(ctx, std::move(terms));
}

inline IntPoly kirchhoff_determinant(const Multigraph& g) {
  ExpandedLaplacian L = expanded_laplacian(g);
  IntPoly det = bareiss_det(std::move(L.m), L.ctx);
  bool flip = ((g.n_vertices() - 1) % 2) != 0;
  return flip ? -det : det;
}

// Dual-route Kirchhoff: when the graph is small enough both routes run and
// must agree (internal invariant); larger graphs use the determinant.
inline IntPoly kirchhoff(const Multigraph& g) {
  if (g.n_edges() <= 16) {
    IntPoly p = kirchhoff_enumeration(g);
    IntPoly q = kirchhoff_determinant(g);
    invariant(p == q, "kirchhoff: enumeration and determinant disagree");
    return p;
  }
  return kirchhoff_determinant(g);
}

// ---------------------------------------------------------------------------
// Dodgson polynomials Psi^{I,J}_{G,K}: minors of the expanded Laplacian with
// edge rows I and edge columns J removed and alpha_k = 0 for k in K.
//
// Sign conventions: for I == J the result is normalized by (-1)^(|V|-1), so
// Psi^{e,e} expands with +1 coefficients; for I != J the raw determinant is
// returned, with the remaining rows/columns kept in ascending label order.
// ---------------------------------------------------------------------------
inline IntPoly dodgson(const Multigraph& g, const std::vector<std::string>& I,
                       const std::vector<std::string>& J,
                       const std::vector<std::string>& K = {}) {
  require(I.size() == J.size(), "dodgson: |I| != |J|");
  ExpandedLaplacian L = expanded_laplacian(g);
  const CtxPtr& ctx = L.ctx;
  const int me = g.n_edges();

  std::set<int> drop_rows, drop_cols;
  for (const auto& l : I) drop_rows.insert(ctx->index_of(l));
  for (const auto& l : J) drop_cols.insert(ctx->index_of(l));
  require(drop_rows.size() == I.size() && drop_cols.size() == J.size(),
          "dodgson: repeated edge in I or J");

  std::set<int> kvars;
  for (const auto& l : K) {
    int v = ctx->index_of(l);
    require(!drop_rows.count(v) && !drop_cols.count(v),
            "dodgson: K overlaps I or J");
    kvars.insert(v);
  }

  const int dim = me + g.n_vertices() - 1;
  std::vector<std::vector<IntPoly>> minor;
  for (int r = 0; r < dim; ++r) {
    if (r < me && drop_rows.count(r)) continue;
    std::vector<IntPoly> row;
    for (int c = 0; c < dim; ++c) {
      if (c < me && drop_cols.count(c)) continue;
      IntPoly v = L.m[static_cast<size_t>(r)][static_cast<size_t>(c)];
      for (int k : kvars) v = v.subst_zero(k);
      row.push_back(std::move(v));
    }
    minor.push_back(std::move(row));
  }
  IntPoly det = bareiss_det(std::move(minor), ctx);
  bool same = drop_rows == drop_cols;
  if (same && ((g.n_vertices() - 1) % 2) != 0) return -det;
  return det;
}

// ---------------------------------------------------------------------------
// Spanning forest polynomials Phi^P_G: the sum over spanning forests with
// exactly |P| trees, tree i containing all of part i (and no vertex of any
// other part), of prod_{e not in F} alpha_e.
// ---------------------------------------------------------------------------
inline IntPoly forest_poly(const Multigraph& g,
                           const std::vector<std::vector<int>>& parts,
                           CtxPtr ctx = nullptr) {
  if (!ctx) ctx = g.make_ctx();
  require(!parts.empty(), "forest_poly: empty partition");
  std::vector<int> part_of(static_cast<size_t>(g.n_vertices()), -1);
  for (size_t p = 0; p < parts.size(); ++p) {
    require(!parts[p].empty(), "forest_poly: empty part");
    for (int v : parts[p]) {
      require(v >= 0 && v < g.n_vertices(), "forest_poly: vertex range");
      require(part_of[static_cast<size_t>(v)] == -1,
              "forest_poly: vertex in two parts");
      part_of[static_cast<size_t>(v)] = static_cast<int>(p);
    }
  }
  const int m = g.n_edges();
  Mono all;
  std::vector<int> var_of(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    var_of[static_cast<size_t>(i)] = ctx->index_of(g.edge(i).label);
    all.set_exp(var_of[static_cast<size_t>(i)], 1);
  }
  std::vector<IntPoly::Term> terms;
  g.enumerate_forests(part_of, static_cast<int>(parts.size()),
                      [&](const std::vector<int>& forest) {
                        Mono mono = all;
                        for (int e : forest)
                          mono.set_exp(var_of[static_cast<size_t>(e)], 0);
                        terms.push_back({mono, Int(1)});
                      });
  return IntPoly::from_terms(ctx, std::move(terms));
}

// ---------------------------------------------------------------------------
// Decomposition of a Dodgson polynomial into forest polynomials of
// G \ (I u J u K): returns the partitions P of the endpoint set and exact
// signs f_P in {-1,+1} with  Psi^{I,J}_{G,K} = sum f_P Phi^P.
//
// Candidate partitions are filtered structurally: P can contribute only if
// attaching the contracted edges J u K (resp. I u K) to the parts produces a
// tree on the parts in both cases. The exact signs are then found by a small
// search over {-1,0,+1} assignments, validated first at random points modulo
// a large prime and finally by exact symbolic comparison.
// ---------------------------------------------------------------------------
struct ForestDecomposition {
  std::vector<std::vector<std::vector<int>>> partitions;  // vertex parts
  std::vector<int> signs;                                 // matching f_P
};

namespace detail {

// All set partitions of `ground` into exactly `k` parts.
inline void partitions_into_k(const std::vector<int>& ground, size_t k,
                              std::vector<std::vector<std::vector<int>>>* out) {
  std::vector<std::vector<int>> parts;
  std::function<void(size_t)> rec = [&](size_t i) {
    if (ground.size() - i + parts.size() < k) return;  // cannot reach k parts
    if (i == ground.size()) {
      if (parts.size() == k) out->push_back(parts);
      return;
    }
    for (auto& p : parts) {
      p.push_back(ground[i]);
      rec(i + 1);
      p.pop_back();
    }
    if (parts.size() < k) {
      parts.push_back({ground[i]});
      rec(i + 1);
      parts.pop_back();
    }
  };
  rec(0);
}

// Checks that the multigraph on parts induced by the given edges is a tree
// (covers all parts, no loops, no cycles).
inline bool parts_tree(const std::vector<std::vector<int>>& parts,
                       const std::vector<Edge>& edges) {
  const size_t k = parts.size();
  if (edges.size() + 1 != k) return false;
  std::map<int, int> part_of;
  for (size_t p = 0; p < k; ++p)
    for (int v : parts[p]) part_of[v] = static_cast<int>(p);
  std::vector<int> root(k);
  for (size_t i = 0; i < k; ++i) root[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int x) {
    while (root[static_cast<size_t>(x)] != x) x = root[static_cast<size_t>(x)];
    return x;
  };
  for (const auto& e : edges) {
    auto it = part_of.find(e.tail), jt = part_of.find(e.head);
    if (it == part_of.end() || jt == part_of.end()) return false;
    int a = find(it->second), b = find(jt->second);
    if (a == b) return false;  // loop or cycle on parts
    root[static_cast<size_t>(a)] = b;
  }
  return true;
}

}  // namespace detail

inline ForestDecomposition prop_decompose(const Multigraph& g,
                                          const std::vector<std::string>& I,
                                          const std::vector<std::string>& J,
                                          const std::vector<std::string>& K = {}) {
  // Endpoint ground set and the minor graph G \ (I u J u K).
  std::set<std::string> removed_labels(I.begin(), I.end());
  removed_labels.insert(J.begin(), J.end());
  removed_labels.insert(K.begin(), K.end());
  std::vector<Edge> removed;
  std::set<int> ground_set;
  for (const auto& l : removed_labels) {
    const Edge& e = g.edge(g.edge_index(l));
    removed.push_back(e);
    ground_set.insert(e.tail);
    ground_set.insert(e.head);
  }
  std::vector<int> ground(ground_set.begin(), ground_set.end());
  Multigraph minor = g.delete_edges_by_label(
      std::vector<std::string>(removed_labels.begin(), removed_labels.end()));

  auto edges_of = [&](const std::vector<std::string>& L1,
                      const std::vector<std::string>& L2) {
    std::set<std::string> s(L1.begin(), L1.end());
    s.insert(L2.begin(), L2.end());
    std::vector<Edge> out;
    for (const auto& l : s) out.push_back(g.edge(g.edge_index(l)));
    return out;
  };
  std::vector<Edge> jk = edges_of(J, K), ik = edges_of(I, K);
  const size_t k_parts = jk.size() + 1;
  invariant(ik.size() + 1 == k_parts, "prop_decompose: |I u K| != |J u K|");

  std::vector<std::vector<std::vector<int>>> cands;
  detail::partitions_into_k(ground, k_parts, &cands);
  std::vector<std::vector<std::vector<int>>> keep;
  for (auto& P : cands)
    if (detail::parts_tree(P, jk) && detail::parts_tree(P, ik))
      keep.push_back(P);

  IntPoly target = dodgson(g, I, J, K);
  CtxPtr ctx = target.ctx();
  std::vector<IntPoly> phis;
  for (auto& P : keep) phis.push_back(forest_poly(minor, P, ctx));

  // Search sign vectors in {-1,0,+1}^(#candidates), preferring all-nonzero
  // assignments ordered lexicographically; validate on random evaluations
  // first, then exactly.
  const long p = 2147483629;  // large machine prime
  const int samples = static_cast<int>(keep.size()) + 4;
  std::vector<std::vector<long>> phi_vals(keep.size());
  std::vector<long> tgt_vals;
  uint64_t rng = 0x1234abcdu;
  auto next_rand = [&]() {
    rng ^= rng << 13;
    rng ^= rng >> 7;
    rng ^= rng << 17;
    return static_cast<long>(rng % static_cast<uint64_t>(p));
  };
  std::vector<std::vector<long>> points;
  for (int s = 0; s < samples; ++s) {
    std::vector<long> pt(static_cast<size_t>(ctx->size()));
    for (auto& x : pt) x = next_rand();
    points.push_back(pt);
  }
  for (int s = 0; s < samples; ++s) {
    tgt_vals.push_back(target.eval_mod(points[static_cast<size_t>(s)], p));
    for (size_t c = 0; c < keep.size(); ++c)
      phi_vals[c].push_back(phis[c].eval_mod(points[static_cast<size_t>(s)], p));
  }

  const size_t nc = keep.size();
  require(nc <= 16, "prop_decompose: too many candidate partitions");
  std::vector<int> best;
  long total = 1;
  for (size_t i = 0; i < nc; ++i) total *= 3;
  for (long code = 0; code < total && best.empty(); ++code) {
    std::vector<int> f(nc);
    long c = code;
    for (size_t i = 0; i < nc; ++i) {
      int d = static_cast<int>(c % 3);
      c /= 3;
      f[i] = d == 0 ? 1 : (d == 1 ? -1 : 0);
    }
    bool ok = true;
    for (int s = 0; s < samples && ok; ++s) {
      long acc = 0;
      for (size_t i = 0; i < nc; ++i)
        acc = mod_nonneg(acc + f[i] * phi_vals[i][static_cast<size_t>(s)], p);
      ok = acc == tgt_vals[static_cast<size_t>(s)];
    }
    if (!ok) continue;
    // exact check
    IntPoly sum = IntPoly::zero(ctx);
    for (size_t i = 0; i < nc; ++i)
      if (f[i] != 0) sum = sum + (f[i] > 0 ? phis[i] : -phis[i]);
    if (sum == target) best = f;
  }
  invariant(!best.empty(), "prop_decompose: no sign assignment found");

  ForestDecomposition out;
  for (size_t i = 0; i < nc; ++i) {
    if (best[i] == 0) continue;
    out.partitions.push_back(keep[i]);
    out.signs.push_back(best[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Two-sum of graphs along marked edges: identifies the endpoints of e1 and e2
// (tail with tail, head with head) and removes both marked edges. Labels of
// the remaining edges must be disjoint.
// ---------------------------------------------------------------------------
inline Multigraph two_sum(const Multigraph& g1, const std::string& e1,
                          const Multigraph& g2, const std::string& e2) {
  const Edge& a = g1.edge(g1.edge_index(e1));
  const Edge& b = g2.edge(g2.edge_index(e2));
  require(!a.is_loop() && !b.is_loop(), "two_sum: marked edge is a loop");
  const int n1 = g1.n_vertices();
  // map G2 vertices: b.tail -> a.tail, b.head -> a.head, rest appended
  std::vector<int> map2(static_cast<size_t>(g2.n_vertices()), -1);
  map2[static_cast<size_t>(b.tail)] = a.tail;
  map2[static_cast<size_t>(b.head)] = a.head;
  int next = n1;
  for (int v = 0; v < g2.n_vertices(); ++v)
    if (map2[static_cast<size_t>(v)] < 0) map2[static_cast<size_t>(v)] = next++;
  Multigraph g(next);
  for (const auto& e : g1.edges())
    if (e.label != e1) g.add_edge(e.label, e.tail, e.head);
  for (const auto& e : g2.edges())
    if (e.label != e2)
      g.add_edge(e.label, map2[static_cast<size_t>(e.tail)],
                 map2[static_cast<size_t>(e.head)]);
  return g;
}

}  // namespace hg
