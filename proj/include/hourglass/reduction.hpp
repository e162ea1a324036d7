// reduction.hpp — denominator reduction of graph polynomials, classical and
// quadratic variants, on factored invariants.
// SPDX-License-Identifier: MIT
//
// An invariant is kept as sign * content * prod f_i^{m_i} with primitive
// factors (positive leading coefficient, integer content extracted). The
// classical step eliminates a variable x from an invariant of x-degree <= 2
// via the square root of the x-discriminant (which factors the invariant as
// (Ax+B)(Cx+D) exactly when that square root exists); its sign is ambiguous.
// The quadratic step eliminates x from either a perfect square of x-degree
// <= 2 (disc/4-type output B^2 - 4AC) or a product (quadratic) * (linear)^2
// (output D J^2 - E H J + F H^2); both are exact including sign, and each
// application flips the sign of the associated character sum (tracked by the
// caller through the step count).
#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "hourglass/common.hpp"
#include "hourglass/counting.hpp"
#include "hourglass/graphpoly.hpp"
#include "hourglass/intpoly.hpp"

namespace hg {

enum class ReductionKind { classical, quadratic };

struct FactoredInvariant {
  ReductionKind kind = ReductionKind::classical;
  bool sign_exact = false;
  int sign = 1;       // of the leading arrangement; meaningful iff sign_exact
  Int content = 1;    // positive
  std::vector<std::pair<IntPoly, int>> factors;  // primitive ^ multiplicity
  bool zero = false;

  // The represented polynomial, expanded (tests / small cases only).
  IntPoly expand(const CtxPtr& ctx) const {
    if (zero) return IntPoly::zero(ctx);
    IntPoly acc = IntPoly::constant(ctx, sign < 0 ? -content : content);
    for (const auto& f : factors)
      for (int i = 0; i < f.second; ++i) acc = acc * f.first.lift(ctx);
    return acc;
  }

  long total_deg() const {
    if (zero) return -1;
    long d = 0;
    for (const auto& f : factors)
      d += static_cast<long>(f.first.total_degree()) * f.second;
    return d;
  }
  long deg_in(int var) const {
    long d = 0;
    for (const auto& f : factors)
      d += static_cast<long>(f.first.deg_in(var)) * f.second;
    return d;
  }

  FactoredPoly as_factored_poly() const {
    FactoredPoly fp;
    fp.content = sign < 0 ? -content : content;
    fp.factors = factors;
    return fp;
  }
};

namespace detail {

// Deterministic polynomial ordering for canonical factor lists.
inline int cmp_poly(const IntPoly& a, const IntPoly& b) {
  if (a.n_terms() != b.n_terms()) return a.n_terms() < b.n_terms() ? -1 : 1;
  for (size_t i = 0; i < a.n_terms(); ++i) {
    const auto& ta = a.terms()[i];
    const auto& tb = b.terms()[i];
    if (!(ta.m == tb.m)) return Mono::grlex_less(ta.m, tb.m) ? -1 : 1;
    if (ta.c != tb.c) return ta.c < tb.c ? -1 : 1;
  }
  return 0;
}

}  // namespace detail

// Builds a normalized invariant from raw factors: extracts integer contents,
// fixes leading signs, folds constants, merges repeats, sorts.
inline FactoredInvariant make_invariant(
    ReductionKind kind, bool sign_exact, int sign, Int content,
    std::vector<std::pair<IntPoly, int>> raw) {
  FactoredInvariant inv;
  inv.kind = kind;
  inv.sign_exact = sign_exact;
  inv.sign = sign;
  if (content < 0) {
    inv.sign = -inv.sign;
    content = -content;
  }
  if (content == 0) {
    inv.zero = true;
    return inv;
  }
  inv.content = content;
  for (auto& fm : raw) {
    IntPoly& f = fm.first;
    int mult = fm.second;
    invariant(mult >= 1, "factor multiplicity must be positive");
    if (f.is_zero()) {
      inv.zero = true;
      return inv;
    }
    Int c = f.content();
    if (f.lead().c < 0) c = -c;
    if (c != 1) {
      f = f.div_int(c);
      if (c < 0) {
        if (mult & 1) inv.sign = -inv.sign;
        c = -c;
      }
      for (int i = 0; i < mult; ++i) inv.content *= c;
    }
    if (f.total_degree() == 0) continue;  // constant 1 after normalization
    bool merged = false;
    for (auto& g : inv.factors)
      if (detail::cmp_poly(g.first, f) == 0) {
        g.second += mult;
        merged = true;
        break;
      }
    if (!merged) inv.factors.push_back({std::move(f), mult});
  }
  std::sort(inv.factors.begin(), inv.factors.end(),
            [](const auto& x, const auto& y) {
              return detail::cmp_poly(x.first, y.first) < 0;
            });
  return inv;
}

// ---------------------------------------------------------------------------
// Factor refinement. A reduction step emits its result polynomial expanded,
// but the next step can only use square structure that the factor list
// exposes. This pass re-factors results with three exact devices: splitting
// off per-variable monomial content, extracting perfect squares, and trial
// division by a pool of polynomials already met along the reduction. It
// never changes the represented polynomial, only its factored form.
// ---------------------------------------------------------------------------
struct FactorPool {
  std::vector<IntPoly> polys;  // primitive, positive leading coefficient
  std::vector<std::array<Int, 3>> evals;  // values at the filter points
  size_t cap = 192;
  size_t add_term_cap = 16384;  // size gate for pool membership
  size_t sf_term_cap = 30000;   // size gate for square-free splitting

  // Fixed small evaluation points: a divisor's values divide the dividend's
  // values over the integers, which filters out almost every futile division.
  std::array<std::vector<long>, 3> pts;
  void ensure_points(int nvars) {
    if (!pts[0].empty()) return;
    pts[0].assign(nvars, 1);
    pts[1].assign(nvars, 2);
    pts[2].resize(nvars);
    for (int i = 0; i < nvars; ++i) pts[2][i] = (2 * i + 3) % 7 + 1;
  }
  std::array<Int, 3> point_values(const IntPoly& f) {
    ensure_points(f.ctx()->size());
    return {f.eval_int(pts[0]), f.eval_int(pts[1]), f.eval_int(pts[2])};
  }

  void add(const IntPoly& f) {
    if (f.is_zero() || f.total_degree() < 1 ||
        f.n_terms() > add_term_cap || polys.size() >= cap)
      return;
    IntPoly p = f;
    Int c = p.content();
    if (p.lead().c < 0) c = -c;
    if (c != 1) p = p.div_int(c);
    for (const auto& g : polys)
      if (detail::cmp_poly(g, p) == 0) return;
    evals.push_back(point_values(p));
    polys.push_back(std::move(p));
  }

  // True the first time a polynomial is offered for square-free splitting;
  // repeat offers of one already found unsplittable are declined.
  std::vector<IntPoly> sf_done;
  bool mark_squarefree_attempt(const IntPoly& f) {
    for (const auto& g : sf_done)
      if (detail::cmp_poly(g, f) == 0) return false;
    if (sf_done.size() < cap) sf_done.push_back(f);
    return true;
  }
};

inline FactoredInvariant refine_invariant(const FactoredInvariant& inv,
                                          const CtxPtr& ctx,
                                          FactorPool& pool) {
  if (inv.zero) return inv;
  std::vector<std::pair<IntPoly, int>> out;
  std::vector<std::pair<IntPoly, int>> work(inv.factors.begin(),
                                            inv.factors.end());
  while (!work.empty()) {
    IntPoly f = std::move(work.back().first);
    int mult = work.back().second;
    work.pop_back();
    if (f.total_degree() == 0) continue;  // folded by make_invariant
    // Per-variable monomial content (one pass: meet of all exponent vectors).
    {
      const auto& ts = f.terms();
      Mono m = ts[0].m;
      for (size_t i = 1; i < ts.size() && !m.empty(); ++i)
        for (int v = 0; v < ctx->size(); ++v) {
          uint8_t e = ts[i].m.exp(v);
          if (e < m.exp(v)) m.set_exp(v, e);
        }
      if (!m.empty()) {
        for (int v = 0; v < ctx->size(); ++v)
          if (int d = m.exp(v); d > 0) {
            Mono unit;
            unit.set_exp(v, 1);
            out.push_back({IntPoly::monomial(ctx, unit, 1), d * mult});
          }
        work.push_back({f.div_mono(m), mult});
        continue;
      }
    }
    // Perfect square.
    if (f.n_terms() > 1 && f.total_degree() % 2 == 0) {
      if (auto r = IntPoly::sqrt(f)) {
        work.push_back({std::move(*r), 2 * mult});
        continue;
      }
    }
    // Trial division by pooled factors. Monomial and point-value prefilters
    // make futile attempts cheap; the cmp guard plus strict degree decrease
    // of both parts ends the recursion.
    bool split = false;
    std::array<Int, 3> fv{};
    bool fv_ready = false;
    for (size_t gi = 0; gi < pool.polys.size(); ++gi) {
      const IntPoly& g = pool.polys[gi];
      if (g.total_degree() > f.total_degree() ||
          g.n_terms() > f.n_terms() ||
          !Mono::divides(g.lead().m, f.lead().m) ||
          !Mono::divides(g.terms().back().m, f.terms().back().m) ||
          detail::cmp_poly(g, f) == 0)
        continue;
      if (!fv_ready) {
        fv = pool.point_values(f);
        fv_ready = true;
      }
      const auto& gv = pool.evals[gi];
      bool fails = false;
      for (int k = 0; k < 3 && !fails; ++k) {
        if (gv[k] == 0)
          fails = fv[k] != 0;
        else
          fails = mpz_divisible_p(fv[k].get_mpz_t(), gv[k].get_mpz_t()) == 0;
      }
      if (fails) continue;
      if (auto q = IntPoly::exact_div(f, g)) {
        work.push_back({g, mult});
        work.push_back({std::move(*q), mult});
        split = true;
        break;
      }
    }
    if (split) continue;
    // Square-free split: detects repeated factors (and their cofactors) that
    // none of the cheaper devices see. The parts multiply back to f up to an
    // integer constant, which is reattached as a constant raw factor.
    if (f.n_terms() > 1 && f.total_degree() > 1 &&
        f.n_terms() <= pool.sf_term_cap && pool.mark_squarefree_attempt(f)) {
      Int c = f.content();
      if (f.lead().c < 0) c = -c;
      IntPoly pp = c == 1 ? f : f.div_int(c);
      auto parts = squarefree_decompose(pp);
      bool nontrivial =
          parts.size() > 1 ||
          (parts.size() == 1 && (parts[0].second > 1 ||
                                 detail::cmp_poly(parts[0].first, pp) != 0));
      if (nontrivial) {
        if (c != 1) out.push_back({IntPoly::constant(ctx, c), mult});
        for (auto& pm : parts)
          work.push_back({std::move(pm.first), mult * pm.second});
        continue;
      }
    }
    pool.add(f);
    out.push_back({std::move(f), mult});
  }
  FactoredInvariant r = make_invariant(inv.kind, inv.sign_exact, inv.sign,
                                       inv.content, std::move(out));
  for (const auto& f : r.factors) pool.add(f.first);
  return r;
}

// ---------------------------------------------------------------------------
// Start invariants from a graph: the 3-invariant wrt marked edges e1,e2,e3 is
// the product of the two Dodgson minors  Psi^{e1 e3, e2 e3} * Psi^{e1,e2}_{e3}
// (sign ambiguous); its square starts the quadratic chain (sign exact).
// ---------------------------------------------------------------------------
inline FactoredInvariant three_invariant(const Multigraph& g,
                                         const std::string& e1,
                                         const std::string& e2,
                                         const std::string& e3) {
  IntPoly d1 = dodgson(g, {e1, e3}, {e2, e3});
  IntPoly d2 = dodgson(g, {e1}, {e2}, {e3});
  return make_invariant(ReductionKind::classical, false, 1, 1,
                        {{d1, 1}, {d2, 1}});
}

inline FactoredInvariant quadratic_start(const Multigraph& g,
                                         const std::string& e1,
                                         const std::string& e2,
                                         const std::string& e3) {
  IntPoly d1 = dodgson(g, {e1, e3}, {e2, e3});
  IntPoly d2 = dodgson(g, {e1}, {e2}, {e3});
  return make_invariant(ReductionKind::quadratic, true, 1, 1,
                        {{d1, 2}, {d2, 2}});
}

// ---------------------------------------------------------------------------
// Reduction steps
// ---------------------------------------------------------------------------
enum class StepStatus { reduced, weight_drop, stuck };

struct StepOutcome {
  StepStatus status = StepStatus::stuck;
  FactoredInvariant inv;
  std::string note;
};

namespace detail {

// x-coefficient triple (c2, c1, c0) of a product of polynomials each of
// x-degree <= 2, total x-degree <= 2; coefficients are polynomials free of x.
inline std::array<IntPoly, 3> coeff_product(
    const CtxPtr& ctx, int var,
    const std::vector<const IntPoly*>& xfactors) {
  std::array<IntPoly, 3> u = {IntPoly::constant(ctx, 1), IntPoly::zero(ctx),
                              IntPoly::zero(ctx)};
  for (const IntPoly* f : xfactors) {
    auto cs = f->coeffs_in(var);
    std::array<IntPoly, 3> v = {IntPoly::zero(ctx), IntPoly::zero(ctx),
                                IntPoly::zero(ctx)};
    for (size_t e = 0; e < cs.size() && e < 3; ++e) v[e] = cs[e].lift(ctx);
    std::array<IntPoly, 3> w = {IntPoly::zero(ctx), IntPoly::zero(ctx),
                                IntPoly::zero(ctx)};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j + i < 3; ++j)
        w[static_cast<size_t>(i + j)] =
            w[static_cast<size_t>(i + j)] + u[static_cast<size_t>(i)] * v[static_cast<size_t>(j)];
    u = w;
  }
  return u;
}

}  // namespace detail

// Classical step at variable x: requires x-degree <= 2 and a polynomial
// square root of the x-discriminant. The next invariant is that root (an
// absent variable reduces to zero: the enlarged point space contributes a
// factor q). Sign is inherited as ambiguous.
inline StepOutcome classical_step(const FactoredInvariant& inv,
                                  const CtxPtr& ctx, const std::string& xlabel) {
  StepOutcome out;
  if (inv.zero) {
    out.status = StepStatus::weight_drop;
    out.inv = inv;
    return out;
  }
  const int x = ctx->index_of(xlabel);
  long dx = inv.deg_in(x);
  if (dx == 0) {
    out.status = StepStatus::weight_drop;
    out.inv = inv;
    out.inv.zero = true;
    out.note = "variable absent";
    return out;
  }
  if (dx > 2) {
    out.note = "degree in variable exceeds 2";
    return out;
  }
  std::vector<std::pair<IntPoly, int>> next;
  std::vector<const IntPoly*> xparts;
  for (const auto& f : inv.factors) {
    if (f.first.deg_in(x) == 0) {
      next.push_back(f);
      continue;
    }
    for (int i = 0; i < f.second; ++i) xparts.push_back(&f.first);
  }
  // Two linear x-factors with a recognizable cross-difference keep the
  // result factored; otherwise take sqrt of the expanded discriminant.
  if (xparts.size() == 2 && xparts[0]->deg_in(x) == 1 &&
      xparts[1]->deg_in(x) == 1) {
    auto a = xparts[0]->coeffs_in(x);
    auto b = xparts[1]->coeffs_in(x);
    IntPoly cross = a[1] * b[0] - a[0] * b[1];  // AD - BC
    if (cross.is_zero()) {
      out.status = StepStatus::weight_drop;
      out.inv = inv;
      out.inv.zero = true;
      return out;
    }
    next.push_back({cross, 1});
    out.status = StepStatus::reduced;
    out.inv = make_invariant(ReductionKind::classical, false, 1, inv.content,
                             std::move(next));
    return out;
  }
  auto u = detail::coeff_product(ctx, x, xparts);
  IntPoly disc = u[1] * u[1] - Int(4) * (u[2] * u[0]);
  if (disc.is_zero()) {
    out.status = StepStatus::weight_drop;
    out.inv = inv;
    out.inv.zero = true;
    return out;
  }
  auto root = IntPoly::sqrt(disc);
  if (!root) {
    out.note = "discriminant is not a polynomial square";
    return out;
  }
  next.push_back({*root, 1});
  out.status = StepStatus::reduced;
  out.inv = make_invariant(ReductionKind::classical, false, 1, inv.content,
                           std::move(next));
  return out;
}

// Quadratic step at variable x. Case "perfect square of x-degree <= 2":
// (A x^2 + B x + C)^2 -> B^2 - 4 A C. Case "(quadratic)(linear)^2":
// (D x^2 + E x + F)(H x + J)^2 -> D J^2 - E H J + F H^2. Output signs are
// exact; the caller accounts for the per-step sign flip of the sum.
inline StepOutcome quadratic_step(const FactoredInvariant& inv,
                                  const CtxPtr& ctx, const std::string& xlabel) {
  StepOutcome out;
  if (inv.zero) {
    out.status = StepStatus::weight_drop;
    out.inv = inv;
    return out;
  }
  const int x = ctx->index_of(xlabel);
  if (inv.deg_in(x) == 0) {
    out.status = StepStatus::weight_drop;
    out.inv = inv;
    out.inv.zero = true;
    out.note = "variable absent";
    return out;
  }

  // Split into square part S^2 (floor halves) and odd part R (odd mults).
  std::vector<std::pair<IntPoly, int>> s_part;
  std::vector<const IntPoly*> r_part;
  for (const auto& f : inv.factors) {
    if (f.second / 2 > 0) s_part.push_back({f.first, f.second / 2});
    if (f.second & 1) r_part.push_back(&f.first);
  }
  long deg_r = 0, deg_s = 0;
  for (auto* f : r_part) deg_r += f->deg_in(x);
  for (auto& f : s_part) deg_s += static_cast<long>(f.first.deg_in(x)) * f.second;

  // ---- case 1: the whole invariant is a perfect square --------------------
  // Needs square content, square odd part, and x-degree of the root <= 2.
  {
    Int csqrt, crem;
    mpz_sqrtrem(csqrt.get_mpz_t(), crem.get_mpz_t(), inv.content.get_mpz_t());
    bool content_sq = crem == 0 && inv.sign > 0;
    std::optional<std::vector<std::pair<IntPoly, int>>> root_factors;
    if (content_sq) {
      if (r_part.empty()) {
        root_factors.emplace();
      } else {
        // try factorwise square roots first, then the expanded product
        std::vector<std::pair<IntPoly, int>> rf;
        bool all_sq = true;
        for (auto* f : r_part) {
          auto r = IntPoly::sqrt(*f);
          if (!r) {
            all_sq = false;
            break;
          }
          rf.push_back({std::move(*r), 1});
        }
        if (all_sq) {
          root_factors = std::move(rf);
        } else if (r_part.size() >= 2) {
          IntPoly prod = IntPoly::constant(ctx, 1);
          for (auto* f : r_part) prod = prod * *f;
          auto r = IntPoly::sqrt(prod);
          if (r) {
            std::vector<std::pair<IntPoly, int>> one;
            one.push_back({std::move(*r), 1});
            root_factors = std::move(one);
          }
        }
      }
    }
    if (root_factors) {
      // G = csqrt * S * sqrt(R); check x-degree of G
      std::vector<std::pair<IntPoly, int>> g_factors = s_part;
      for (auto& f : *root_factors) g_factors.push_back(f);
      long gx = 0;
      for (auto& f : g_factors)
        gx += static_cast<long>(f.first.deg_in(x)) * f.second;
      if (gx <= 2) {
        std::vector<std::pair<IntPoly, int>> next;
        std::vector<const IntPoly*> xf;
        for (auto& f : g_factors) {
          if (f.first.deg_in(x) == 0) {
            next.push_back({f.first, 2 * f.second});  // W contributes W^2
          } else {
            for (int i = 0; i < f.second; ++i) xf.push_back(&f.first);
          }
        }
        // discriminant of the x-carrying product
        if (xf.size() == 2 && xf[0]->deg_in(x) == 1 && xf[1]->deg_in(x) == 1) {
          auto a = xf[0]->coeffs_in(x);
          auto b = xf[1]->coeffs_in(x);
          IntPoly cross = a[1] * b[0] - a[0] * b[1];
          if (cross.is_zero()) {
            out.status = StepStatus::weight_drop;
            out.inv = inv;
            out.inv.zero = true;
            return out;
          }
          next.push_back({cross, 2});
          out.status = StepStatus::reduced;
          out.inv = make_invariant(ReductionKind::quadratic, true, 1,
                                   csqrt * csqrt, std::move(next));
          return out;
        }
        auto u = detail::coeff_product(ctx, x, xf);
        IntPoly disc = u[1] * u[1] - Int(4) * (u[2] * u[0]);
        if (disc.is_zero()) {
          out.status = StepStatus::weight_drop;
          out.inv = inv;
          out.inv.zero = true;
          return out;
        }
        next.push_back({disc, 1});
        out.status = StepStatus::reduced;
        out.inv = make_invariant(ReductionKind::quadratic, true, 1,
                                 csqrt * csqrt, std::move(next));
        return out;
      }
    }
  }

  // ---- case 2: (quadratic odd part) * (linear square part)^2 --------------
  if (deg_r <= 2 && deg_s <= 1) {
    std::vector<std::pair<IntPoly, int>> next;
    // Quadratic slot: x-free odd factors pass through once (U), x-carrying
    // odd factors expand to (d2, d1, d0).
    std::vector<const IntPoly*> q_xf;
    for (auto* f : r_part) {
      if (f->deg_in(x) == 0) next.push_back({*f, 1});
      else q_xf.push_back(f);
    }
    // Linear slot: x-free square factors pass through squared (W^2); the
    // lone x-carrying square factor supplies (h, j).
    const IntPoly* lin = nullptr;
    for (auto& f : s_part) {
      if (f.first.deg_in(x) == 0) {
        next.push_back({f.first, 2 * f.second});
      } else {
        invariant(lin == nullptr && f.second == 1,
                  "quadratic step: malformed linear slot");
        lin = &f.first;
      }
    }
    auto d = detail::coeff_product(ctx, x, q_xf);
    IntPoly h = IntPoly::zero(ctx), j = IntPoly::constant(ctx, 1);
    if (lin) {
      auto cs = lin->coeffs_in(x);
      j = cs[0].lift(ctx);
      if (cs.size() > 1) h = cs[1].lift(ctx);
    }
    IntPoly small = d[2] * (j * j) - d[1] * (h * j) + d[0] * (h * h);
    if (small.is_zero()) {
      out.status = StepStatus::weight_drop;
      out.inv = inv;
      out.inv.zero = true;
      return out;
    }
    next.push_back({small, 1});
    out.status = StepStatus::reduced;
    out.inv = make_invariant(ReductionKind::quadratic, true, inv.sign,
                             inv.content, std::move(next));
    return out;
  }

  out.note = "no applicable quadratic form";
  return out;
}

// ---------------------------------------------------------------------------
// Reduction driver. `order` empty = greedy: at each step scan the remaining
// variables in context order and take the first that reduces (weight drops
// end the run). For the quadratic kind a degree guard (total degree must stay
// <= 2 * remaining variables) is enforced before each step.
// ---------------------------------------------------------------------------
struct ReductionResult {
  FactoredInvariant inv;
  std::vector<std::string> reduced;    // variables eliminated, in order
  std::vector<std::string> remaining;  // ambient variables still live
  StepStatus last = StepStatus::reduced;
  bool complete = false;  // no remaining variables
};

inline ReductionResult reduce_invariant(FactoredInvariant inv,
                                        const CtxPtr& ctx,
                                        std::vector<std::string> remaining,
                                        const std::vector<std::string>& order,
                                        int max_steps = -1) {
  ReductionResult res;
  res.inv = std::move(inv);
  res.remaining = std::move(remaining);
  std::sort(res.remaining.begin(), res.remaining.end(), label_less);
  FactorPool pool;
  if (res.inv.kind == ReductionKind::quadratic && !res.inv.zero) {
    for (const auto& f : res.inv.factors) pool.add(f.first);
    res.inv = refine_invariant(res.inv, ctx, pool);
  }
  size_t oi = 0;
  int steps = 0;
  while (!res.remaining.empty()) {
    if (max_steps >= 0 && steps >= max_steps) break;
    if (res.inv.kind == ReductionKind::quadratic && !res.inv.zero &&
        res.inv.total_deg() > 2 * static_cast<long>(res.remaining.size())) {
      res.last = StepStatus::stuck;
      return res;
    }
    std::string pick;
    StepOutcome step;
    if (!order.empty()) {
      if (oi >= order.size()) break;
      pick = order[oi++];
      require(std::count(res.remaining.begin(), res.remaining.end(), pick) == 1,
              "reduction order names unavailable variable: " + pick);
      step = res.inv.kind == ReductionKind::classical
                 ? classical_step(res.inv, ctx, pick)
                 : quadratic_step(res.inv, ctx, pick);
      if (step.status == StepStatus::stuck) {
        res.last = StepStatus::stuck;
        return res;
      }
    } else {
      step.status = StepStatus::stuck;
      for (const auto& cand : res.remaining) {
        StepOutcome t = res.inv.kind == ReductionKind::classical
                            ? classical_step(res.inv, ctx, cand)
                            : quadratic_step(res.inv, ctx, cand);
        if (t.status != StepStatus::stuck) {
          pick = cand;
          step = std::move(t);
          break;
        }
      }
      if (step.status == StepStatus::stuck) {
        res.last = StepStatus::stuck;
        return res;
      }
    }
    ++steps;
    res.reduced.push_back(pick);
    res.remaining.erase(
        std::find(res.remaining.begin(), res.remaining.end(), pick));
    res.inv = std::move(step.inv);
    res.last = step.status;
    if (step.status == StepStatus::weight_drop) return res;
    if (res.inv.kind == ReductionKind::quadratic)
      res.inv = refine_invariant(res.inv, ctx, pool);
  }
  res.complete = res.remaining.empty();
  return res;
}

}  // namespace hg
