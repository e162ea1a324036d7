// hourglass.hpp — hourglass chains over a kernel graph: chain construction,
// the kernel-local closed form for the c2 invariant of the split chain, and
// the intermediate-identity checks that connect it to direct reduction.
// SPDX-License-Identifier: MIT
//
// A kernel is a graph K with four marked external vertices of degree 2
// grouped into two pairs. The chain glues n hourglasses (two triangles
// sharing a center) in a row, attaching the first hourglass's back pair to
// one kernel pair and the last hourglass's front pair to the other; the
// resulting graph is 4-regular. For n >= 6 the c2 invariant of the chain
// minus the vertex shared by hourglasses 2 and 3 depends on the kernel only:
//
//   c2^(q) = -( x * u^2 * (x*p1 + b) * (x*p2 + p3) )_q   mod q,  q odd,
//
// summed over x and the kernel edge variables, where over K' = K + edge 1
// (first pair) + edge 2 (second pair):
//   u  = Psi^{1,2}_{K'}        (two-forest difference over K)
//   b  = Psi_K
//   p1 = Psi of K'\2 / 1       (trees of K'\2 through edge 1)
//   p2 = Psi of K' / {1,2}     (trees of K' through both)
//   p3 = Psi of K'\1 / 2       (trees of K'\1 through edge 2)
// and c2^(2) = 0 (shown here through the even content of the e34 form).
#pragma once

#include <array>
#include <chrono>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "hourglass/c2.hpp"
#include "hourglass/counting.hpp"
#include "hourglass/graphpoly.hpp"
#include "hourglass/multigraph.hpp"
#include "hourglass/reduction.hpp"

namespace hg {

// ---------------------------------------------------------------------------
// Kernel specification and file format. Graph lines as usual, plus one line
//   x T1 T2 | T3 T4
// naming the external vertices: pair one {T1,T2}, pair two {T3,T4}.
// ---------------------------------------------------------------------------
struct KernelSpec {
  Multigraph k;
  std::array<int, 4> ext{};  // [0],[1] = pair one; [2],[3] = pair two
  std::string name;
};

inline void validate_kernel(const KernelSpec& spec) {
  require(spec.k.n_vertices() >= 4, "kernel: need at least four vertices");
  require(spec.k.is_connected(), "kernel: graph must be connected");
  std::set<int> seen;
  for (int v : spec.ext) {
    require(v >= 0 && v < spec.k.n_vertices(), "kernel: external out of range");
    require(seen.insert(v).second, "kernel: repeated external vertex");
    require(spec.k.degree(v) == 2,
            "kernel: external vertices must have degree 2");
  }
  require(!spec.k.has_edge_label("1") && !spec.k.has_edge_label("2"),
          "kernel: edge labels 1 and 2 are reserved");
}

inline KernelSpec parse_kernel(const std::string& text,
                               const std::string& name = "") {
  std::vector<std::string> extra;
  KernelSpec spec;
  spec.k = Multigraph::parse(text, &extra);
  spec.name = name;
  bool have_x = false;
  for (const auto& line : extra) {
    std::istringstream in(line);
    std::string tag;
    in >> tag;
    require(tag == "x", "kernel: unknown line: " + line);
    require(!have_x, "kernel: duplicate external line");
    std::string bar;
    in >> spec.ext[0] >> spec.ext[1] >> bar >> spec.ext[2] >> spec.ext[3];
    require(!in.fail() && bar == "|", "kernel: bad external line: " + line);
    have_x = true;
  }
  require(have_x, "kernel: missing x line");
  validate_kernel(spec);
  return spec;
}

inline std::string kernel_to_string(const KernelSpec& spec) {
  std::ostringstream out;
  out << spec.k.to_string();
  out << "x " << spec.ext[0] << " " << spec.ext[1] << " | " << spec.ext[2]
      << " " << spec.ext[3] << "\n";
  return out.str();
}

// K' = K + edge "1" across pair one + edge "2" across pair two.
inline Multigraph kprime(const KernelSpec& spec) {
  Multigraph g = spec.k;
  g.add_edge("1", spec.ext[0], spec.ext[1]);
  g.add_edge("2", spec.ext[2], spec.ext[3]);
  return g;
}

// ---------------------------------------------------------------------------
// Kernel core polynomials (all over the kernel edge context; the marked
// edges 1 and 2 are already consumed by the minors).
// ---------------------------------------------------------------------------
struct KernelCore {
  CtxPtr ctx;  // kernel edge labels
  IntPoly u, b, p1, p2, p3;
};

inline KernelCore kernel_core(const KernelSpec& spec) {
  validate_kernel(spec);
  KernelCore kc;
  kc.ctx = spec.k.make_ctx();
  // u = Psi^{1,2}_{K'} up to sign: difference of the two crossing two-forest
  // polynomials of K (each forest tree holds one endpoint of each new edge).
  IntPoly fa = forest_poly(
      spec.k, {{spec.ext[0], spec.ext[2]}, {spec.ext[1], spec.ext[3]}},
      kc.ctx);
  IntPoly fb = forest_poly(
      spec.k, {{spec.ext[0], spec.ext[3]}, {spec.ext[1], spec.ext[2]}},
      kc.ctx);
  kc.u = fa - fb;
  kc.b = kirchhoff_enumeration(spec.k, kc.ctx);
  Multigraph kp = kprime(spec);
  kc.p1 = kirchhoff_enumeration(
      kp.delete_edges_by_label({"2"}).contract_edges({"1"}), kc.ctx);
  kc.p2 = kirchhoff_enumeration(kp.contract_edges({"1", "2"}), kc.ctx);
  kc.p3 = kirchhoff_enumeration(
      kp.delete_edges_by_label({"1"}).contract_edges({"2"}), kc.ctx);
  invariant(!kc.b.is_zero() && !kc.p1.is_zero() && !kc.p2.is_zero() &&
                !kc.p3.is_zero(),
            "kernel core: degenerate spanning-tree polynomial");
  return kc;
}

// ---------------------------------------------------------------------------
// The kernel-local closed form, as a factored polynomial over kernel edges
// plus the single extra variable "1".
// ---------------------------------------------------------------------------
struct TheoremForm {
  CtxPtr ctx;        // kernel labels + "1"
  FactoredPoly rhs;  // x * u^2 * (p1 + x b) * (p2 + x p3)
};

inline TheoremForm theorem_form(const KernelCore& kc, bool swap_pairs = false) {
  TheoremForm tf;
  std::vector<std::string> labels = kc.ctx->vars();
  labels.push_back("1");
  tf.ctx = PolyCtx::make(std::move(labels));
  IntPoly x = IntPoly::variable(tf.ctx, "1");
  // Swapping the roles of the two added edges exchanges p1 <-> p3.
  const IntPoly& q1 = swap_pairs ? kc.p3 : kc.p1;
  const IntPoly& q3 = swap_pairs ? kc.p1 : kc.p3;
  // This arrangement keeps every factor homogeneous, so the whole product has
  // total degree equal to twice its variable count and stays eligible for
  // further quadratic reduction steps. Substituting x -> 1/x and clearing
  // denominators swaps x between the two summands of each linear factor
  // without changing the Legendre sum.
  IntPoly f1 = q1.lift(tf.ctx) + x * kc.b.lift(tf.ctx);
  IntPoly f2 = kc.p2.lift(tf.ctx) + x * q3.lift(tf.ctx);
  tf.rhs.factors = {{x, 1}, {kc.u.lift(tf.ctx), 2}, {f1, 1}, {f2, 1}};
  long dx = 0;
  for (const auto& f : tf.rhs.factors)
    dx += static_cast<long>(f.first.deg_in(tf.ctx->index_of("1"))) * f.second;
  invariant(dx == 3, "closed form: wrong degree in the added variable");
  return tf;
}

// ---------------------------------------------------------------------------
// Grouped evaluation. The inner character sum over x depends on the kernel
// point only through (p1, b, p2, p3) and the vanishing of u, so it is
// precomputed as a q^4 table; the outer loop runs over kernel points with
// the last kernel variable handled by an explicit linear expansion.
// ---------------------------------------------------------------------------
namespace detail {

inline size_t quad_key(int q, uint8_t a, uint8_t b, uint8_t c, uint8_t d) {
  return ((static_cast<size_t>(a) * q + b) * q + c) * q + d;
}

// T[s,t,m,w] = sum_x chi( x * (s x + t) * (m x + w) )
inline std::vector<int32_t> inner_x_table(const FieldSpec& F) {
  const int q = F.q;
  std::vector<int32_t> T(static_cast<size_t>(q) * q * q * q);
  for (int s = 0; s < q; ++s)
    for (int t = 0; t < q; ++t) {
      std::vector<uint8_t> l1(static_cast<size_t>(q));
      for (int x = 0; x < q; ++x)
        l1[static_cast<size_t>(x)] = F.addv(
            F.mulv(static_cast<uint8_t>(s), static_cast<uint8_t>(x)),
            static_cast<uint8_t>(t));
      for (int m = 0; m < q; ++m)
        for (int w = 0; w < q; ++w) {
          int32_t acc = 0;
          for (int x = 1; x < q; ++x) {  // x = 0 contributes chi(0) = 0
            uint8_t l2 = F.addv(
                F.mulv(static_cast<uint8_t>(m), static_cast<uint8_t>(x)),
                static_cast<uint8_t>(w));
            acc += F.legendre(F.mulv(
                static_cast<uint8_t>(x),
                F.mulv(l1[static_cast<size_t>(x)], l2)));
          }
          T[quad_key(q, static_cast<uint8_t>(s), static_cast<uint8_t>(t),
                     static_cast<uint8_t>(m), static_cast<uint8_t>(w))] = acc;
        }
    }
  return T;
}

// Enumerates all kernel points; calls visit(u, p1, b, p2, p3) per point.
// The label-last kernel variable is expanded linearly (all five polynomials
// are multilinear in every edge variable).
template <class Visit>
void kernel_scan(const KernelCore& kc, const FieldSpec& F,
                 const EvalOptions& opt, Visit&& visit) {
  const int q = F.q;
  const int nv = kc.ctx->size();
  invariant(nv >= 1, "kernel scan: no variables");
  long long work = checked_pow(q, nv, opt.budget);
  if (work > opt.budget)
    throw BudgetError("kernel scan needs " + std::to_string(q) + "^" +
                      std::to_string(nv) + " points, over budget " +
                      std::to_string(opt.budget));
  const int y = nv - 1;
  CompiledSet cs(F, nv - 1);
  std::array<const IntPoly*, 5> ps = {&kc.u, &kc.p1, &kc.b, &kc.p2, &kc.p3};
  std::array<int, 5> hi{}, lo{};
  for (int i = 0; i < 5; ++i) {
    auto coeff = ps[static_cast<size_t>(i)]->coeffs_in(y);
    lo[static_cast<size_t>(i)] = cs.add_poly(coeff[0]);
    hi[static_cast<size_t>(i)] = cs.add_poly(
        coeff.size() > 1 ? coeff[1] : IntPoly::zero(kc.ctx));
  }
  cs.finalize();
  cs.run(0, [&]() {
    std::array<uint8_t, 5> a{}, c0{};
    for (int i = 0; i < 5; ++i) {
      a[static_cast<size_t>(i)] = cs.value(hi[static_cast<size_t>(i)]);
      c0[static_cast<size_t>(i)] = cs.value(lo[static_cast<size_t>(i)]);
    }
    std::array<uint8_t, 5> v = c0;
    for (int yv = 0;;) {
      visit(v[0], v[1], v[2], v[3], v[4]);
      if (++yv >= q) break;
      for (int i = 0; i < 5; ++i)
        v[static_cast<size_t>(i)] =
            F.addv(v[static_cast<size_t>(i)], a[static_cast<size_t>(i)]);
    }
  });
}

}  // namespace detail

// Exact integer value of (closed form)_q by the grouped table method.
inline long long theorem_grouped_sum(const KernelCore& kc, const FieldSpec& F,
                                     const EvalOptions& opt = {}) {
  require(F.p != 2, "character sums need odd q");
  const int q = F.q;
  std::vector<int32_t> T = detail::inner_x_table(F);
  long long acc = 0;
  detail::kernel_scan(kc, F, opt,
                      [&](uint8_t u, uint8_t p1, uint8_t b, uint8_t p2,
                          uint8_t p3) {
                        if (u)
                          acc += T[detail::quad_key(q, p1, b, p2, p3)];
                      });
  return acc;
}

// ---------------------------------------------------------------------------
// Symbolic pre-reduction of the closed form over its own variables. When the
// greedy quadratic chain runs to completion the per-prime evaluation becomes
// a constant character value; the outcome is cached per kernel.
// ---------------------------------------------------------------------------
struct PreReduced {
  bool complete = false;   // reduced to a constant (no variables left)
  bool dropped = false;    // invariant vanished along the way
  bool aborted = false;    // term-count or degree guard tripped
  int steps = 0;
  FactoredInvariant inv;
  std::vector<std::string> remaining;
  CtxPtr ctx;
};

inline PreReduced pre_reduce_form(const TheoremForm& tf,
                                  size_t term_cap = 400000,
                                  double budget_s = 120.0) {
  const auto t_start = std::chrono::steady_clock::now();
  auto over_budget = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t_start).count() > budget_s;
  };
  PreReduced out;
  out.ctx = tf.ctx;
  out.inv = make_invariant(ReductionKind::quadratic, true, 1, tf.rhs.content,
                           tf.rhs.factors);
  out.remaining = tf.ctx->vars();
  std::sort(out.remaining.begin(), out.remaining.end(), label_less);
  FactorPool pool;
  pool.cap = 512;
  // Seed with the closed-form building blocks plus two levels of coefficient
  // polynomials: minors of minors reappear as cofactors in later steps.
  const int xv = tf.ctx->index_of("1");
  std::vector<IntPoly> level1;
  for (const auto& f : out.inv.factors) {
    pool.add(f.first);
    if (f.first.deg_in(xv) > 0) {
      for (const auto& c : f.first.coeffs_in(xv)) {
        IntPoly cc = c.lift(tf.ctx);
        pool.add(cc);
        level1.push_back(std::move(cc));
      }
    } else {
      level1.push_back(f.first);
    }
  }
  for (const auto& g : level1)
    for (int v = 0; v < tf.ctx->size(); ++v)
      if (v != xv && g.deg_in(v) > 0)
        for (const auto& c : g.coeffs_in(v)) pool.add(c.lift(tf.ctx));
  out.inv = refine_invariant(out.inv, tf.ctx, pool);
  auto weight = [](const FactoredInvariant& inv) {
    size_t n = 0;
    for (const auto& f : inv.factors)
      n += f.first.n_terms() * static_cast<size_t>(f.second);
    return n;
  };
  auto keeps_square = [](const FactoredInvariant& inv) {
    for (const auto& f : inv.factors)
      if (f.second >= 2 && f.first.total_degree() >= 1) return true;
    return false;
  };
  // Greedy elimination: per round, step every remaining variable, refine each
  // outcome, and keep the best. Candidates that retain a repeated factor are
  // preferred outright — later steps need that square structure — and ties go
  // to the smallest term count. Weight drops end the run; stuck rounds, a
  // term-count blowup, or the time budget keep the partial chain, which is
  // still a valid prefix of reduction steps.
  while (!out.remaining.empty() && !out.inv.zero) {
    if (out.inv.total_deg() >
        2 * static_cast<long>(out.remaining.size())) {
      out.aborted = true;  // outside the validity window; keep the prefix
      return out;
    }
    bool have = false, drop = false;
    std::string pick;
    FactoredInvariant best;
    bool best_square = false;
    size_t best_terms = 0;
    for (const auto& cand : out.remaining) {
      if (over_budget()) {
        if (have) break;  // commit the best candidate scored so far
        out.aborted = true;
        return out;
      }
      StepOutcome step = quadratic_step(out.inv, tf.ctx, cand);
      if (step.status == StepStatus::stuck) continue;
      if (step.status == StepStatus::weight_drop) {
        pick = cand;
        best = std::move(step.inv);
        have = drop = true;
        break;
      }
      FactoredInvariant ref = refine_invariant(step.inv, tf.ctx, pool);
      bool sq = keeps_square(ref);
      size_t nt = weight(ref);
      if (!have || std::make_pair(!sq, nt) <
                       std::make_pair(!best_square, best_terms)) {
        have = true;
        best_square = sq;
        best_terms = nt;
        best = std::move(ref);
        pick = cand;
      }
    }
    if (!have) return out;  // stuck; the partial chain stands
    ++out.steps;
    out.remaining.erase(
        std::find(out.remaining.begin(), out.remaining.end(), pick));
    out.inv = std::move(best);  // candidates were fully refined when scored
    if (drop || out.inv.zero) {
      out.dropped = true;
      return out;
    }
    if (weight(out.inv) > term_cap) {
      out.aborted = true;
      return out;
    }
  }
  out.complete = out.remaining.empty();
  if (out.inv.zero) out.dropped = true;
  return out;
}

namespace detail {

inline const PreReduced& cached_pre_reduce(const KernelSpec& spec,
                                           const KernelCore& kc) {
  static std::map<std::string, PreReduced> cache;
  static std::mutex mu;
  std::string key = kernel_to_string(spec);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, pre_reduce_form(theorem_form(kc))).first;
  return it->second;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// e34 / e35: the two equivalent forms of the chain sum after the hand
// reductions, over kernel variables plus the five first-hourglass variables
// b1, c1, d1, e1, f1 (with Y and Z the two hourglass tree sums).
// ---------------------------------------------------------------------------
struct EndgameForms {
  CtxPtr ctx;  // kernel labels + b1 c1 d1 e1 f1
  FactoredInvariant e34, e35;
};

inline EndgameForms endgame_forms(const KernelCore& kc) {
  EndgameForms ef;
  std::vector<std::string> labels = kc.ctx->vars();
  for (const char* v : {"b1", "c1", "d1", "e1", "f1"}) labels.push_back(v);
  ef.ctx = PolyCtx::make(std::move(labels));
  const CtxPtr& c = ef.ctx;
  IntPoly B = IntPoly::variable(c, "b1"), C = IntPoly::variable(c, "c1");
  IntPoly sdef = parse_poly_in(c, "d1 + e1 + f1");
  IntPoly Y = parse_poly_in(
      c, "b1*c1*d1 + b1*c1*e1 + b1*d1*e1 + c1*d1*e1 + b1*c1*f1 + b1*e1*f1");
  IntPoly Z = parse_poly_in(
      c, "b1*c1*d1 + b1*c1*e1 + b1*d1*e1 + c1*d1*e1 + b1*c1*f1 + c1*d1*f1");
  IntPoly u = kc.u.lift(c), b = kc.b.lift(c), p1 = kc.p1.lift(c),
          p2 = kc.p2.lift(c), p3 = kc.p3.lift(c);
  IntPoly g = sdef * B;
  ef.e34 = make_invariant(
      ReductionKind::quadratic, true, 1, -4,
      {{C, 1}, {sdef, 1}, {Z, 1}, {u, 2},
       {p1 * g + b * Y, 1}, {p2 * g + p3 * Y, 1}});
  ef.e35 = make_invariant(
      ReductionKind::quadratic, true, 1, -1,
      {{B, 1}, {sdef, 2}, {Y, 1}, {Z, 1}, {u, 2},
       {p1 + C * b, 1}, {p2 + C * p3, 1}});
  return ef;
}

// ---------------------------------------------------------------------------
// Endgame check: evaluates (e34)_q and (e35)_q exactly with grouped tables,
// evaluates the closed form the same way, and reduces e35 symbolically in
// f1, e1, d1, b1 to compare against the closed form with c1 as the added
// variable. Sub-results are reported; callers assert what they need.
// ---------------------------------------------------------------------------
struct EndgameReport {
  long long s34 = 0, s35 = 0, s_rhs = 0;  // exact integer sums
  bool reduction_complete = false;  // 4 steps consumed f1, e1, d1, b1
  bool reduction_matches = false;   // symbolic match with the closed form
  bool e34_content_even = false;    // the q = 2 vanishing mechanism
  long c2 = 0;                      // residue of s_rhs mod q
};

inline EndgameReport endgame_check(const KernelSpec& spec, const FieldSpec& F,
                                   const EvalOptions& opt = {}) {
  require(F.p != 2, "endgame check needs odd q");
  KernelCore kc = kernel_core(spec);
  EndgameForms ef = endgame_forms(kc);
  EndgameReport rep;
  rep.e34_content_even = ef.e34.content % 2 == 0;

  const int q = F.q;
  long long table_work = detail::checked_pow(q, 6, opt.budget);
  if (table_work > opt.budget)
    throw BudgetError("endgame tables need q^6 work, over budget");
  const uint8_t m4 = F.embed_long(-4), m1 = F.embed_long(-1);

  // Bucket the five hourglass variables. e34 groups by (g, Y) with weight
  // chi(-4 c (d+e+f) Z); e35 groups by c with weight chi(-b (d+e+f)^2 Y Z).
  std::vector<long long> d34(static_cast<size_t>(q) * q, 0);
  std::vector<long long> d35(static_cast<size_t>(q), 0);
  for (int b = 0; b < q; ++b)
    for (int cv = 0; cv < q; ++cv)
      for (int d = 0; d < q; ++d)
        for (int e = 0; e < q; ++e)
          for (int f = 0; f < q; ++f) {
            const uint8_t bb = static_cast<uint8_t>(b),
                          cc = static_cast<uint8_t>(cv),
                          dd = static_cast<uint8_t>(d),
                          ee = static_cast<uint8_t>(e),
                          ff = static_cast<uint8_t>(f);
            uint8_t s = F.addv(F.addv(dd, ee), ff);
            uint8_t de = F.mulv(dd, ee), bc = F.mulv(bb, cc);
            // Y = bc(d+e) + de(b+c) + f(bc + be)
            uint8_t Y = F.addv(
                F.addv(F.mulv(bc, F.addv(dd, ee)),
                       F.mulv(de, F.addv(bb, cc))),
                F.mulv(ff, F.addv(bc, F.mulv(bb, ee))));
            // Z = bc(d+e) + de(b+c) + f(bc + cd)
            uint8_t Z = F.addv(
                F.addv(F.mulv(bc, F.addv(dd, ee)),
                       F.mulv(de, F.addv(bb, cc))),
                F.mulv(ff, F.addv(bc, F.mulv(cc, dd))));
            uint8_t g = F.mulv(s, bb);
            d34[static_cast<size_t>(g) * q + Y] += F.legendre(
                F.mulv(m4, F.mulv(cc, F.mulv(s, Z))));
            d35[cc] += F.legendre(F.mulv(
                m1, F.mulv(bb, F.mulv(F.mulv(s, s), F.mulv(Y, Z)))));
          }

  // Assemble the q^4 tables keyed by (p1, b, p2, p3).
  std::vector<int32_t> T34(static_cast<size_t>(q) * q * q * q);
  std::vector<int32_t> T35(T34.size());
  for (int s = 0; s < q; ++s)
    for (int t = 0; t < q; ++t)
      for (int m = 0; m < q; ++m)
        for (int w = 0; w < q; ++w) {
          long long a34 = 0, a35 = 0;
          for (int g = 0; g < q; ++g)
            for (int Y = 0; Y < q; ++Y) {
              long long dv = d34[static_cast<size_t>(g) * q + Y];
              if (!dv) continue;
              uint8_t l1 = F.addv(
                  F.mulv(static_cast<uint8_t>(s), static_cast<uint8_t>(g)),
                  F.mulv(static_cast<uint8_t>(t), static_cast<uint8_t>(Y)));
              uint8_t l2 = F.addv(
                  F.mulv(static_cast<uint8_t>(m), static_cast<uint8_t>(g)),
                  F.mulv(static_cast<uint8_t>(w), static_cast<uint8_t>(Y)));
              a34 += dv * F.legendre(l1) * F.legendre(l2);
            }
          for (int cv = 0; cv < q; ++cv) {
            long long dv = d35[static_cast<size_t>(cv)];
            if (!dv) continue;
            uint8_t l1 = F.addv(static_cast<uint8_t>(s),
                                F.mulv(static_cast<uint8_t>(cv),
                                       static_cast<uint8_t>(t)));
            uint8_t l2 = F.addv(static_cast<uint8_t>(m),
                                F.mulv(static_cast<uint8_t>(cv),
                                       static_cast<uint8_t>(w)));
            a35 += dv * F.legendre(l1) * F.legendre(l2);
          }
          size_t key = detail::quad_key(q, static_cast<uint8_t>(s),
                                        static_cast<uint8_t>(t),
                                        static_cast<uint8_t>(m),
                                        static_cast<uint8_t>(w));
          T34[key] = static_cast<int32_t>(a34);
          T35[key] = static_cast<int32_t>(a35);
        }
  std::vector<int32_t> Tx = detail::inner_x_table(F);

  long long s34 = 0, s35 = 0, srhs = 0;
  detail::kernel_scan(kc, F, opt,
                      [&](uint8_t u, uint8_t p1, uint8_t b, uint8_t p2,
                          uint8_t p3) {
                        if (!u) return;
                        size_t key = detail::quad_key(q, p1, b, p2, p3);
                        s34 += T34[key];
                        s35 += T35[key];
                        srhs += Tx[key];
                      });
  rep.s34 = s34;
  rep.s35 = s35;
  rep.s_rhs = srhs;
  rep.c2 = mod_nonneg(-(srhs % q), q);

  // Symbolic route: four quadratic steps on e35 must consume the hourglass
  // variables and leave the closed form with c1 in the added-variable role.
  ReductionResult red = reduce_invariant(
      ef.e35, ef.ctx, ef.ctx->vars(), {"f1", "e1", "d1", "b1"}, 4);
  rep.reduction_complete =
      red.reduced.size() == 4 && red.last == StepStatus::reduced;
  if (rep.reduction_complete) {
    TheoremForm tf = theorem_form(kc);
    // Rename the added variable "1" to "c1" by rebuilding over ef.ctx.
    std::vector<std::pair<IntPoly, int>> want;
    IntPoly c1 = IntPoly::variable(ef.ctx, "c1");
    for (const auto& f : tf.rhs.factors) {
      auto cs = f.first.coeffs_in(tf.ctx->index_of("1"));
      IntPoly acc = IntPoly::zero(ef.ctx), pw = IntPoly::constant(ef.ctx, 1);
      for (auto& cp : cs) {
        acc = acc + pw * cp.lift(ef.ctx);
        pw = pw * c1;
      }
      want.push_back({acc, f.second});
    }
    FactoredInvariant target = make_invariant(
        ReductionKind::quadratic, true, 1, tf.rhs.content, std::move(want));
    // The reduction may surface an equivalent but differently split factor
    // list, so compare the expanded polynomials (sign and content included).
    rep.reduction_matches =
        !red.inv.zero && !target.zero &&
        red.inv.expand(ef.ctx) == target.expand(ef.ctx);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// c2 of the split hourglass chain (length-independent for chains of six or
// more hourglasses): pre-reduced fast path, else grouped tables. q = 2 is
// zero through the even content of e34; other even q are unsupported.
// ---------------------------------------------------------------------------
enum class HourglassStrategy { automatic, grouped, prereduce };

inline C2Result c2_hourglass(const KernelSpec& spec, const FieldSpec& F,
                             const EvalOptions& opt = {},
                             HourglassStrategy strategy =
                                 HourglassStrategy::automatic) {
  validate_kernel(spec);
  if (F.p == 2) {
    if (F.q != 2)
      return c2_inapplicable("chain closed form decides q = 2 only in "
                             "characteristic 2");
    KernelCore kc = kernel_core(spec);
    EndgameForms ef = endgame_forms(kc);
    invariant(ef.e34.zero || ef.e34.content % 2 == 0,
              "chain form must have even content");
    C2Result r;
    r.applicable = true;
    r.value = 0;
    return r;
  }
  KernelCore kc = kernel_core(spec);
  C2Result r;
  r.applicable = true;
  bool try_prereduce = strategy != HourglassStrategy::grouped;
  if (strategy == HourglassStrategy::automatic) {
    // A cheap grouped scan beats paying for a symbolic reduction chain, and
    // kernels with many variables reduce at most a step or two before the
    // invariant stops factoring, so the chain never pays for itself there.
    constexpr long long kCheapVisits = 100000000;
    long long visits = detail::checked_pow(F.q, kc.ctx->size(),
                                           kCheapVisits + 1);
    if (visits <= std::min<long long>(opt.budget, kCheapVisits) ||
        kc.ctx->size() > 10)
      try_prereduce = false;
  }
  if (try_prereduce) {
    const PreReduced& pr = detail::cached_pre_reduce(spec, kc);
    if (pr.dropped) {
      r.value = 0;
      return r;
    }
    if (pr.complete) {
      Int cval = pr.inv.sign < 0 ? Int(-pr.inv.content) : pr.inv.content;
      long chi = F.legendre(F.embed(cval));
      long v = (pr.steps & 1) ? chi : -chi;
      r.value = mod_nonneg(v % F.q, F.q);
      r.n_reduced = pr.steps;
      return r;
    }
    // Partially reduced (including capped or stuck chains): every applied
    // step is a valid congruence, so sum the remainder directly whenever the
    // shrunken point space beats the full grouped scan.
    if (pr.steps >= 1 && !pr.remaining.empty()) {
      long long pts = detail::checked_pow(
          F.q, static_cast<int>(pr.remaining.size()), opt.budget);
      if (pts <= opt.budget) {
        long long s = legendre_sum(F, pr.inv.as_factored_poly(),
                                   PolyCtx::make(pr.remaining), opt);
        long long v = (pr.steps & 1) ? s : -s;
        r.value = mod_nonneg(static_cast<long>(v % F.q), F.q);
        r.n_reduced = pr.steps;
        r.raw_count = s;
        return r;
      }
    }
    require(strategy != HourglassStrategy::prereduce,
            "pre-reduction did not finish for this kernel");
  }
  long long s = theorem_grouped_sum(kc, F, opt);
  r.raw_count = s;
  r.value = mod_nonneg(-static_cast<long>(s % F.q), F.q);
  return r;
}

// ---------------------------------------------------------------------------
// Chain construction (for structural tests and direct cross-checks at small
// length): hourglass i has back vertices (w, y), front vertices (x, z) and
// center c, with edges a=wx b=wc c=xc d=yc e=zc f=yz labeled a<i>..f<i>.
// Hourglass 1 attaches to kernel pair one (optionally twisted), hourglass n
// to pair two; consecutive hourglasses share x_i = w_{i+1}, z_i = y_{i+1}.
// ---------------------------------------------------------------------------
struct ChainGraph {
  Multigraph graph;
  int split_vertex = -1;  // shared by hourglasses 2 and 3 (needs n >= 3)
};

inline ChainGraph build_chain(const KernelSpec& spec, int n,
                              bool twist = false) {
  validate_kernel(spec);
  require(n >= 1, "chain needs at least one hourglass");
  ChainGraph out;
  Multigraph g = spec.k;
  int w = twist ? spec.ext[1] : spec.ext[0];
  int y = twist ? spec.ext[0] : spec.ext[1];
  for (int i = 1; i <= n; ++i) {
    const std::string suf = std::to_string(i);
    int x, z;
    if (i < n) {
      x = g.n_vertices();
      z = g.n_vertices() + 1;
      g = g.with_vertices(g.n_vertices() + 2);
    } else {
      x = spec.ext[2];
      z = spec.ext[3];
    }
    int c = g.n_vertices();
    g = g.with_vertices(g.n_vertices() + 1);
    g.add_edge("a" + suf, w, x);
    g.add_edge("b" + suf, w, c);
    g.add_edge("c" + suf, x, c);
    g.add_edge("d" + suf, y, c);
    g.add_edge("e" + suf, z, c);
    g.add_edge("f" + suf, y, z);
    if (i == 2) out.split_vertex = x;
    w = x;
    y = z;
  }
  if (n == 2) out.split_vertex = -1;  // x_2 is a kernel vertex then
  out.graph = std::move(g);
  return out;
}

}  // namespace hg
