// c2.hpp — the c2 invariant of a graph over F_q by several routes, plus
// sequence matching against reference coefficient tables.
// SPDX-License-Identifier: MIT
//
// Routes (residue in 0..q-1, or marked inapplicable with a reason):
//   * psi:        c2 = [Psi_G]_q / q^2 mod q  (divisibility is asserted)
//   * deg3:       c2 = -[ Psi^{13,23} * Psi^{1,2}_{3} ]_q mod q for the three
//                 edges at a 3-valent vertex; needs h1 <= |E|/2, 3 < |E|
//   * classical:  denominator reduction from three start edges, then
//                 c2 = (-1)^n [nPsi]_q mod q with n < |E| eliminated
//   * quadratic:  square chain, q odd: c2 = (-1)^(n-1) (nPsi^2)_q mod q;
//                 q = 2 decided only when the invariant has even content
#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hourglass/counting.hpp"
#include "hourglass/fq.hpp"
#include "hourglass/graphpoly.hpp"
#include "hourglass/multigraph.hpp"
#include "hourglass/reduction.hpp"

namespace hg {

struct C2Result {
  bool applicable = false;
  long value = 0;        // residue mod q when applicable
  std::string reason;    // why not, when applicable == false
  int n_reduced = 0;     // variables eliminated before counting (reductions)
  long long raw_count = 0;  // the underlying point count / character sum
};

inline C2Result c2_inapplicable(const std::string& why) {
  C2Result r;
  r.reason = why;
  return r;
}

// ---------------------------------------------------------------------------
// Route: full Kirchhoff point count.
// ---------------------------------------------------------------------------
inline C2Result c2_psi(const Multigraph& g, const FieldSpec& F,
                       const EvalOptions& opt = {}) {
  require(g.is_connected(), "c2: graph must be connected");
  require(g.n_edges() >= 3, "c2: need at least three edges");
  IntPoly psi = kirchhoff(g);
  long long zeros = point_count(F, psi, g.make_ctx(), opt);
  long long q2 = static_cast<long long>(F.q) * F.q;
  invariant(zeros % q2 == 0, "point count of the Kirchhoff polynomial "
                             "is not divisible by q^2");
  C2Result r;
  r.applicable = true;
  r.raw_count = zeros;
  r.value = static_cast<long>((zeros / q2) % F.q);
  return r;
}

namespace detail {

// Start edges for reduction routes: the three lowest-labeled edges at a
// 3-valent vertex if one exists, else the three lowest-labeled edges.
inline std::vector<std::string> default_start_edges(const Multigraph& g) {
  require(g.n_edges() >= 3, "c2: need at least three edges");
  for (int v = 0; v < g.n_vertices(); ++v) {
    if (g.degree(v) != 3) continue;
    std::vector<std::string> at;
    for (const auto& e : g.edges())
      if (e.tail == v || e.head == v) at.push_back(e.label);
    if (at.size() == 3) return at;  // a loop at v would have doubled
  }
  std::vector<std::string> all;
  for (const auto& e : g.edges()) all.push_back(e.label);
  std::sort(all.begin(), all.end(), label_less);
  all.resize(3);
  return all;
}

inline std::vector<std::string> remaining_after(
    const Multigraph& g, const std::vector<std::string>& used) {
  std::vector<std::string> rest;
  for (const auto& e : g.edges())
    if (std::find(used.begin(), used.end(), e.label) == used.end())
      rest.push_back(e.label);
  return rest;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Route: single product count at a 3-valent vertex.
// ---------------------------------------------------------------------------
inline C2Result c2_deg3(const Multigraph& g, const FieldSpec& F,
                        const EvalOptions& opt = {},
                        std::vector<std::string> edges = {}) {
  require(g.is_connected(), "c2: graph must be connected");
  if (2 * g.h1() > g.n_edges())
    return c2_inapplicable("loop order exceeds half the edge count");
  if (g.n_edges() <= 3) return c2_inapplicable("needs more than three edges");
  if (edges.empty()) {
    bool found = false;
    for (int v = 0; v < g.n_vertices() && !found; ++v)
      if (g.degree(v) == 3) found = true;
    if (!found) return c2_inapplicable("no 3-valent vertex");
    edges = detail::default_start_edges(g);
  }
  require(edges.size() == 3, "c2: need exactly three start edges");
  IntPoly d1 = dodgson(g, {edges[0], edges[2]}, {edges[1], edges[2]});
  IntPoly d2 = dodgson(g, {edges[0]}, {edges[1]}, {edges[2]});
  FactoredPoly fp;
  fp.factors = {{d1, 1}, {d2, 1}};
  CtxPtr ambient = PolyCtx::make(detail::remaining_after(g, edges));
  long long cnt = point_count(F, fp, ambient, opt);
  C2Result r;
  r.applicable = true;
  r.n_reduced = 3;
  r.raw_count = cnt;
  r.value = mod_nonneg(-cnt % F.q, F.q);
  return r;
}

// ---------------------------------------------------------------------------
// Route: classical denominator reduction, then a point count.
// ---------------------------------------------------------------------------
inline C2Result c2_classical(const Multigraph& g, const FieldSpec& F,
                             const EvalOptions& opt = {},
                             std::vector<std::string> start = {},
                             const std::vector<std::string>& order = {}) {
  require(g.is_connected(), "c2: graph must be connected");
  if (2 * g.h1() > g.n_edges())
    return c2_inapplicable("loop order exceeds half the edge count");
  if (g.n_edges() <= 3) return c2_inapplicable("needs more than three edges");
  if (start.empty()) start = detail::default_start_edges(g);
  require(start.size() == 3, "c2: need exactly three start edges");
  CtxPtr ctx = g.make_ctx();
  FactoredInvariant inv = three_invariant(g, start[0], start[1], start[2]);
  // Keep at least one live variable: the count-based relation needs the
  // number of eliminated variables to stay below the edge count.
  int max_steps = static_cast<int>(g.n_edges()) - 4;
  ReductionResult red =
      reduce_invariant(std::move(inv), ctx,
                       detail::remaining_after(g, start), order, max_steps);
  int n = 3 + static_cast<int>(red.reduced.size());
  C2Result r;
  r.applicable = true;
  r.n_reduced = n;
  if (red.inv.zero) {
    r.value = 0;
    return r;
  }
  long long cnt = point_count(F, red.inv.as_factored_poly(),
                              PolyCtx::make(red.remaining), opt);
  r.raw_count = cnt;
  long v = static_cast<long>(cnt % F.q);
  r.value = mod_nonneg((n & 1) ? -v : v, F.q);
  return r;
}

// ---------------------------------------------------------------------------
// Route: quadratic denominator reduction, then a character sum.
// ---------------------------------------------------------------------------
inline C2Result c2_quadratic(const Multigraph& g, const FieldSpec& F,
                             const EvalOptions& opt = {},
                             std::vector<std::string> start = {},
                             const std::vector<std::string>& order = {}) {
  require(g.is_connected(), "c2: graph must be connected");
  if (2 * g.h1() > g.n_edges())
    return c2_inapplicable("loop order exceeds half the edge count");
  if (F.q != 2 && F.p == 2)
    return c2_inapplicable("even prime powers beyond q = 2 are unsupported");
  if (start.empty()) start = detail::default_start_edges(g);
  require(start.size() == 3, "c2: need exactly three start edges");
  CtxPtr ctx = g.make_ctx();
  FactoredInvariant inv = quadratic_start(g, start[0], start[1], start[2]);
  ReductionResult red = reduce_invariant(
      std::move(inv), ctx, detail::remaining_after(g, start), order);
  int n = 3 + static_cast<int>(red.reduced.size());
  C2Result r;
  r.n_reduced = n;
  if (F.q == 2) {
    // Only the even-content case is decided at q = 2.
    if (red.inv.zero || red.inv.content % 2 == 0) {
      r.applicable = true;
      r.value = 0;
      return r;
    }
    return c2_inapplicable("q = 2 undecided: invariant has odd content");
  }
  r.applicable = true;
  if (red.inv.zero) {
    r.value = 0;
    return r;
  }
  long long s = legendre_sum(F, red.inv.as_factored_poly(),
                             PolyCtx::make(red.remaining), opt);
  r.raw_count = s;
  long v = static_cast<long>(s % F.q);
  r.value = mod_nonneg((n & 1) ? v : -v, F.q);
  return r;
}

// ---------------------------------------------------------------------------
// Small named corpus used throughout the tests and the command line.
// ---------------------------------------------------------------------------
inline Multigraph complete_graph(int n) {
  Multigraph g(n);
  int k = 1;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.add_edge("e" + std::to_string(k++), i, j);
  return g;
}

// Cycle 0..k-1 plus an apex vertex k joined to every cycle vertex.
inline Multigraph wheel_graph(int k) {
  require(k >= 3, "wheel needs a cycle of length >= 3");
  Multigraph g(k + 1);
  int t = 1;
  for (int i = 0; i < k; ++i)
    g.add_edge("e" + std::to_string(t++), i, (i + 1) % k);
  for (int i = 0; i < k; ++i) g.add_edge("e" + std::to_string(t++), i, k);
  return g;
}

// Two triangles 012 / 345 joined by the matching 03, 14, 25.
inline Multigraph prism_graph() {
  Multigraph g(6);
  int t = 1;
  g.add_edge("e" + std::to_string(t++), 0, 1);
  g.add_edge("e" + std::to_string(t++), 1, 2);
  g.add_edge("e" + std::to_string(t++), 0, 2);
  g.add_edge("e" + std::to_string(t++), 3, 4);
  g.add_edge("e" + std::to_string(t++), 4, 5);
  g.add_edge("e" + std::to_string(t++), 3, 5);
  g.add_edge("e" + std::to_string(t++), 0, 3);
  g.add_edge("e" + std::to_string(t++), 1, 4);
  g.add_edge("e" + std::to_string(t++), 2, 5);
  return g;
}

// Deleting the highest-index vertex (for wheels: the apex).
inline Multigraph decompletion(const Multigraph& g) {
  return g.delete_vertex(g.n_vertices() - 1);
}

inline std::map<std::string, Multigraph> c2_corpus() {
  std::map<std::string, Multigraph> c;
  c.emplace("k4", complete_graph(4));
  c.emplace("k5", complete_graph(5));
  c.emplace("prism", prism_graph());
  c.emplace("w4", wheel_graph(4));
  c.emplace("w5", wheel_graph(5));
  c.emplace("k4_dec", decompletion(complete_graph(4)));
  c.emplace("k5_dec", decompletion(complete_graph(5)));
  c.emplace("prism_dec", decompletion(prism_graph()));
  c.emplace("w4_dec", decompletion(wheel_graph(4)));
  c.emplace("w5_dec", decompletion(wheel_graph(5)));
  return c;
}

// ---------------------------------------------------------------------------
// Sequence matching: compare a computed residue prefix against reference
// coefficient sequences (CSV rows "p,value", '#' comments) under a transform.
// ---------------------------------------------------------------------------
struct RefSequence {
  std::string name;
  std::vector<std::pair<long, Int>> terms;  // (p, a_p)
};

inline RefSequence load_sequence_csv(const std::string& path,
                                     const std::string& name = "") {
  std::ifstream in(path);
  require(in.good(), "cannot open sequence file: " + path);
  RefSequence s;
  s.name = name.empty() ? path : name;
  std::string line;
  while (std::getline(in, line)) {
    size_t h = line.find('#');
    if (h != std::string::npos) line.resize(h);
    std::string trimmed;
    for (char ch : line)
      if (!std::isspace(static_cast<unsigned char>(ch))) trimmed += ch;
    if (trimmed.empty()) continue;
    size_t comma = trimmed.find(',');
    require(comma != std::string::npos, "bad sequence row: " + line);
    s.terms.push_back({std::stol(trimmed.substr(0, comma)),
                       Int(trimmed.substr(comma + 1))});
  }
  return s;
}

// Multi-row reference table: CSV rows "name,p,value" ('#' comments), one
// RefSequence per distinct name, in first-appearance order.
inline std::vector<RefSequence> load_reference_table(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open reference table: " + path);
  std::vector<RefSequence> rows;
  std::string line;
  while (std::getline(in, line)) {
    size_t h = line.find('#');
    if (h != std::string::npos) line.resize(h);
    std::string trimmed;
    for (char ch : line)
      if (!std::isspace(static_cast<unsigned char>(ch))) trimmed += ch;
    if (trimmed.empty()) continue;
    size_t c1 = trimmed.find(',');
    size_t c2 = c1 == std::string::npos ? std::string::npos
                                        : trimmed.find(',', c1 + 1);
    require(c2 != std::string::npos, "bad reference row: " + line);
    std::string name = trimmed.substr(0, c1);
    long p = std::stol(trimmed.substr(c1 + 1, c2 - c1 - 1));
    Int v(trimmed.substr(c2 + 1));
    auto it = std::find_if(rows.begin(), rows.end(),
                           [&](const RefSequence& r) { return r.name == name; });
    if (it == rows.end()) {
      rows.push_back({name, {}});
      it = rows.end() - 1;
    }
    it->terms.push_back({p, v});
  }
  return rows;
}

// The quadratic-character sequence a_q = (D/q) realized through the field's
// own square classifier.
inline RefSequence legendre_sequence(long D, const std::vector<int>& qs) {
  RefSequence s;
  s.name = "legendre:" + std::to_string(D);
  for (int q : qs) {
    FieldSpec F = build_field(q);
    if (F.p == 2 || D % F.p == 0) {
      s.terms.push_back({q, 0});
    } else {
      s.terms.push_back({q, F.legendre(F.embed(Int(D)))});
    }
  }
  return s;
}

enum class SeqTransform { identity, negate };

// True when for every overlapping modulus q: computed = transform(a_q) mod q
// (coefficients live in Z and are reduced here).
inline bool match_sequence(const std::vector<std::pair<int, long>>& computed,
                           const RefSequence& ref, SeqTransform tf) {
  int used = 0;
  for (const auto& [q, val] : computed) {
    const Int* a = nullptr;
    for (const auto& t : ref.terms)
      if (t.first == q) a = &t.second;
    if (!a) continue;
    Int want = tf == SeqTransform::negate ? Int(-*a) : *a;
    if (int_mod(want, q) != mod_nonneg(val % q, q)) return false;
    ++used;
  }
  return used > 0;
}

}  // namespace hg
