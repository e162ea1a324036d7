// counting.hpp — point counting and quadratic-character sums over F_q.
// SPDX-License-Identifier: MIT
//
// Evaluation strategy: each polynomial is compiled into a DAG layered by its
// top variable (variables ordered as in the ambient context, index 0
// outermost). A mixed-radix odometer walks all points; advancing variable j
// only recomputes DAG nodes whose top variable is >= j, so the innermost
// steps cost one small Horner pass. Factored inputs are evaluated factor by
// factor (the quadratic character is multiplicative; a zero factor zeroes the
// product). Work is sharded round-robin over the outermost variable across
// workers, with per-shard int64 accumulators combined in shard order.
//
// "Quadratic tail" acceleration: when some variable x has total degree <= 2
// in the product (and q is odd for character sums), the innermost loop over x
// is replaced by the closed form for sum_x chi(a x^2 + b x + c) resp. the
// root count of a x^2 + b x + c, cutting the point space by a factor of q.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <thread>
#include <vector>

#include "hourglass/common.hpp"
#include "hourglass/fq.hpp"
#include "hourglass/intpoly.hpp"

namespace hg {

struct EvalOptions {
  long long budget = 20'000'000'000LL;  // enumerated points allowed
  int workers = 0;                      // 0 = hardware_concurrency
  bool accel = false;                   // quadratic-tail acceleration
};

// Closed form for sum over x in F_q of chi(a x^2 + b x + c), q odd.
inline long legendre_quadratic_sum(const FieldSpec& F, uint8_t a, uint8_t b,
                                   uint8_t c) {
  invariant(F.p != 2, "quadratic character sum needs odd q");
  if (a == 0) {
    if (b == 0) return static_cast<long>(F.q) * F.legendre(c);
    return 0;  // x -> bx + c is a bijection; the full character sum is 0
  }
  uint8_t four = F.embed_long(4);
  uint8_t disc =
      F.addv(F.mulv(b, b), F.negv(F.mulv(four, F.mulv(a, c))));
  if (disc == 0) return static_cast<long>(F.q - 1) * F.legendre(a);
  return -F.legendre(a);
}

// Number of roots of a x^2 + b x + c in F_q, q odd.
inline long quadratic_root_count(const FieldSpec& F, uint8_t a, uint8_t b,
                                 uint8_t c) {
  invariant(F.p != 2, "closed-form root count needs odd q");
  if (a == 0) {
    if (b == 0) return c == 0 ? F.q : 0;
    return 1;
  }
  uint8_t four = F.embed_long(4);
  uint8_t disc =
      F.addv(F.mulv(b, b), F.negv(F.mulv(four, F.mulv(a, c))));
  return 1 + F.legendre(disc);
}

namespace detail {

// Compiled evaluation DAG over an ambient variable order.
class CompiledSet {
 public:
  CompiledSet(const FieldSpec& F, int n_vars) : F_(&F), n_(n_vars) {
    // leaf nodes for all field constants are created lazily
  }

  int n_vars() const { return n_; }

  // Registers a polynomial (ctx arity == ambient arity assumed; exponents
  // read positionally). Returns a root node id.
  int add_poly(const IntPoly& p) {
    std::vector<std::pair<std::vector<uint8_t>, uint8_t>> terms;
    for (const auto& t : p.terms()) {
      uint8_t c = F_->embed(t.c);
      if (c == 0) continue;
      std::vector<uint8_t> e(static_cast<size_t>(n_));
      for (int i = 0; i < n_; ++i) e[static_cast<size_t>(i)] = t.m.exp(i);
      terms.push_back({std::move(e), c});
    }
    // merge duplicate monomials mod p
    std::map<std::vector<uint8_t>, long> merged;
    for (auto& t : terms) merged[t.first] += t.second;
    terms.clear();
    for (auto& kv : merged) {
      uint8_t c = F_->embed_long(kv.second);
      if (c) terms.push_back({kv.first, c});
    }
    return build(terms);
  }

  // Prepares level lists and power tables; call once after add_poly calls.
  void finalize() {
    by_level_.assign(static_cast<size_t>(std::max(n_, 1)), {});
    for (int id = 0; id < static_cast<int>(nodes_.size()); ++id)
      if (nodes_[static_cast<size_t>(id)].var >= 0)
        by_level_[static_cast<size_t>(nodes_[static_cast<size_t>(id)].var)]
            .push_back(id);
    int maxdeg = 1;
    for (const auto& t : terms_) maxdeg = std::max<int>(maxdeg, t.exp);
    deg_stride_ = maxdeg + 1;
    powt_.assign(static_cast<size_t>(F_->q) * deg_stride_, 1);
    for (int v = 0; v < F_->q; ++v) {
      uint8_t acc = 1;
      for (int e = 0; e < deg_stride_; ++e) {
        powt_[static_cast<size_t>(v) * deg_stride_ + e] = acc;
        acc = F_->mulv(acc, static_cast<uint8_t>(v));
      }
    }
    vals_.assign(nodes_.size(), 0);
    for (int id = 0; id < static_cast<int>(nodes_.size()); ++id)
      if (nodes_[static_cast<size_t>(id)].var < 0)
        vals_[static_cast<size_t>(id)] =
            static_cast<uint8_t>(nodes_[static_cast<size_t>(id)].n_terms);
  }

  uint8_t value(int root) const { return vals_[static_cast<size_t>(root)]; }

  // Recomputes all nodes whose top variable is `level` for assignment v.
  void set_var(int level, uint8_t v) {
    const uint8_t* pt = &powt_[static_cast<size_t>(v) * deg_stride_];
    for (int id : by_level_[static_cast<size_t>(level)]) {
      const Node& nd = nodes_[static_cast<size_t>(id)];
      uint8_t acc = 0;
      for (int t = nd.first_term; t < nd.first_term + nd.n_terms; ++t) {
        const Term& tm = terms_[static_cast<size_t>(t)];
        acc = F_->addv(
            acc, F_->mulv(pt[tm.exp], vals_[static_cast<size_t>(tm.child)]));
      }
      vals_[static_cast<size_t>(id)] = acc;
    }
  }

  // Runs the odometer over variables [lo, n) with per-point callback; the
  // caller must have set variables [0, lo) already (via set_var, outermost
  // first). Levels lo..n-1 are initialized to 0 here.
  template <class Fn>
  void run(int lo, Fn&& per_point) {
    std::vector<uint8_t> x(static_cast<size_t>(std::max(n_, 1)), 0);
    for (int j = lo; j < n_; ++j) set_var(j, 0);
    const uint8_t top = static_cast<uint8_t>(F_->q - 1);
    for (;;) {
      per_point();
      int j = n_ - 1;
      while (j >= lo && x[static_cast<size_t>(j)] == top) {
        x[static_cast<size_t>(j)] = 0;
        --j;
      }
      if (j < lo) break;
      ++x[static_cast<size_t>(j)];
      set_var(j, x[static_cast<size_t>(j)]);
      for (int i = j + 1; i < n_; ++i) set_var(i, 0);
    }
  }

 private:
  struct Term {
    uint8_t exp;
    int32_t child;
  };
  struct Node {
    int16_t var;  // -1 for constant leaves (value stored in n_terms)
    int32_t first_term = 0;
    int32_t n_terms = 0;
  };

  int leaf(uint8_t c) {
    auto it = leaf_ids_.find(c);
    if (it != leaf_ids_.end()) return it->second;
    Node nd;
    nd.var = -1;
    nd.n_terms = c;
    nodes_.push_back(nd);
    int id = static_cast<int>(nodes_.size()) - 1;
    leaf_ids_[c] = id;
    return id;
  }

  int build(std::vector<std::pair<std::vector<uint8_t>, uint8_t>>& terms) {
    if (terms.empty()) return leaf(0);
    int top = -1;
    for (auto& t : terms)
      for (int i = n_ - 1; i > top; --i)
        if (t.first[static_cast<size_t>(i)]) {
          top = std::max(top, i);
          break;
        }
    if (top < 0) {
      invariant(terms.size() == 1, "constant with several terms");
      return leaf(terms[0].second);
    }
    // group by exponent of `top`
    std::map<uint8_t, std::vector<std::pair<std::vector<uint8_t>, uint8_t>>>
        groups;
    for (auto& t : terms) {
      uint8_t e = t.first[static_cast<size_t>(top)];
      t.first[static_cast<size_t>(top)] = 0;
      groups[e].push_back(std::move(t));
    }
    std::vector<std::pair<uint8_t, int>> children;
    for (auto& kv : groups)
      children.push_back({kv.first, build(kv.second)});
    // dedup identical nodes
    std::vector<int64_t> key;
    key.push_back(top);
    for (auto& ch : children) {
      key.push_back(ch.first);
      key.push_back(ch.second);
    }
    auto it = node_ids_.find(key);
    if (it != node_ids_.end()) return it->second;
    Node nd;
    nd.var = static_cast<int16_t>(top);
    nd.first_term = static_cast<int32_t>(terms_.size());
    nd.n_terms = static_cast<int32_t>(children.size());
    for (auto& ch : children) terms_.push_back({ch.first, ch.second});
    nodes_.push_back(nd);
    int id = static_cast<int>(nodes_.size()) - 1;
    node_ids_[key] = id;
    return id;
  }

  const FieldSpec* F_;
  int n_;
  std::vector<Node> nodes_;
  std::vector<Term> terms_;
  std::vector<uint8_t> vals_;
  std::vector<std::vector<int>> by_level_;
  std::vector<uint8_t> powt_;
  int deg_stride_ = 1;
  std::map<uint8_t, int> leaf_ids_;
  std::map<std::vector<int64_t>, int> node_ids_;
};

inline long long checked_pow(long long q, int n, long long cap) {
  long long v = 1;
  for (int i = 0; i < n; ++i) {
    if (v > cap / q) return cap + 1;
    v *= q;
  }
  return v;
}

inline int resolve_workers(int workers) {
  if (workers > 0) return workers;
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Runs fn(shard) for shard = 0..q-1 distributed round-robin over workers;
// returns the sum of results added in shard order.
template <class Fn>
long long sharded_sum(int q, int workers, Fn&& fn) {
  workers = std::min(workers, q);
  std::vector<long long> results(static_cast<size_t>(q), 0);
  if (workers <= 1) {
    for (int s = 0; s < q; ++s) results[static_cast<size_t>(s)] = fn(s);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w]() {
        for (int s = w; s < q; s += workers)
          results[static_cast<size_t>(s)] = fn(s);
      });
    for (auto& t : pool) t.join();
  }
  long long total = 0;
  for (int s = 0; s < q; ++s) total += results[static_cast<size_t>(s)];
  return total;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Factored evaluation jobs. Factors must share the ambient context (arity ==
// ambient size, positional exponents). Multiplicities matter for character
// sums; for zero counting only the zero sets do.
// ---------------------------------------------------------------------------
struct FactoredPoly {
  Int content = 1;
  std::vector<std::pair<IntPoly, int>> factors;  // (factor, multiplicity)
};

// Rewrites all factors over the ambient context (positional alignment).
inline FactoredPoly lift_factored(const FactoredPoly& fp,
                                  const CtxPtr& ambient) {
  FactoredPoly r;
  r.content = fp.content;
  r.factors.reserve(fp.factors.size());
  for (const auto& f : fp.factors)
    r.factors.push_back({f.first.lift(ambient), f.second});
  return r;
}

// Number of points of F_q^N where the (factored) polynomial vanishes.
inline long long point_count(const FieldSpec& F, const FactoredPoly& poly_in,
                             const CtxPtr& ambient, const EvalOptions& opt) {
  const FactoredPoly poly = lift_factored(poly_in, ambient);
  const int N = ambient->size();
  // constant-zero product (content or some factor vanishing identically mod p)
  bool always_zero = F.embed(poly.content) == 0;
  std::vector<const IntPoly*> live;
  for (const auto& f : poly.factors) {
    bool zero_mod_p = true;
    for (const auto& t : f.first.terms())
      if (F.embed(t.c) != 0) {
        zero_mod_p = false;
        break;
      }
    if (zero_mod_p) always_zero = true;
    else live.push_back(&f.first);
  }
  long long space = detail::checked_pow(F.q, N, 4'000'000'000'000'000'000LL);
  if (always_zero) {
    require(space <= 4'000'000'000'000'000'000LL, "point space overflows");
    return space;
  }

  // quadratic-tail: product degree <= 2 in some variable (odd q only)
  int accel_var = -1;
  if (opt.accel && F.p != 2 && N >= 1) {
    for (int v = N - 1; v >= 0; --v) {
      long d = 0;
      for (const auto& f : poly.factors) d += f.first.deg_in(v);
      if (d >= 1 && d <= 2) {
        accel_var = v;
        break;
      }
    }
  }

  const int outerN = accel_var >= 0 ? N - 1 : N;
  long long work = detail::checked_pow(F.q, outerN, opt.budget);
  if (work > opt.budget)
    throw BudgetError("point enumeration needs " +
                      std::to_string(F.q) + "^" + std::to_string(outerN) +
                      " points, over budget " + std::to_string(opt.budget));

  // Reindex variables so accel_var (if any) is dropped from the ambient.
  auto drop_var = [&](const IntPoly& p, int var) {
    // coefficients in `var`, each an IntPoly with var's exponent cleared
    return p.coeffs_in(var);
  };

  if (accel_var < 0) {
    detail::CompiledSet base(F, N);
    std::vector<int> roots;
    for (auto* f : live) roots.push_back(base.add_poly(*f));
    base.finalize();
    auto shard_fn = [&](int s) -> long long {
      detail::CompiledSet cs = base;
      long long cnt = 0;
      int lo = 0;
      if (N >= 1) {
        cs.set_var(0, static_cast<uint8_t>(s));
        lo = 1;
      }
      cs.run(lo, [&]() {
        for (int r : roots)
          if (cs.value(r) == 0) {
            ++cnt;
            return;
          }
      });
      return cnt;
    };
    if (N == 0) return shard_fn(0) > 0 ? 1 : 0;  // degenerate: one point
    return detail::sharded_sum(F.q, detail::resolve_workers(opt.workers),
                               shard_fn);
  }

  // accel path: compile coefficient polynomials of x = accel_var
  detail::CompiledSet base(F, N);
  struct FactorMeta {
    std::vector<int> coeff_roots;  // index = power of x
  };
  std::vector<FactorMeta> metas;
  std::vector<int> free_roots;
  for (auto* f : live) {
    if (f->deg_in(accel_var) == 0) {
      free_roots.push_back(base.add_poly(*f));
    } else {
      FactorMeta m;
      for (auto& cp : drop_var(*f, accel_var)) m.coeff_roots.push_back(base.add_poly(cp));
      metas.push_back(std::move(m));
    }
  }
  base.finalize();
  // The odometer still walks all N levels, but accel_var stays pinned at 0;
  // since the compiled coefficient polys do not use it, pin is free. We walk
  // the other variables by running levels in their natural order and simply
  // skipping advancement of accel_var: easiest is to place accel_var's level
  // untouched (its nodes do not exist). We emulate by running a nested
  // odometer over the remaining levels.
  std::vector<int> levels;
  for (int v = 0; v < N; ++v)
    if (v != accel_var) levels.push_back(v);

  auto shard_fn = [&](int s) -> long long {
    detail::CompiledSet cs = base;
    long long cnt = 0;
    std::vector<uint8_t> x(levels.size(), 0);
    for (size_t i = 0; i < levels.size(); ++i) cs.set_var(levels[i], 0);
    bool fixed0 = !levels.empty();
    if (fixed0) {
      x[0] = static_cast<uint8_t>(s);
      cs.set_var(levels[0], x[0]);
      for (size_t i = 1; i < levels.size(); ++i) cs.set_var(levels[i], 0);
    }
    const uint8_t top = static_cast<uint8_t>(F.q - 1);
    for (;;) {
      // per-point: zero count along x
      bool free_zero = false;
      for (int r : free_roots)
        if (cs.value(r) == 0) {
          free_zero = true;
          break;
        }
      if (free_zero) {
        cnt += F.q;
      } else {
        // expand product of x-univariates (total degree <= 2)
        uint8_t u[3] = {1, 0, 0};
        for (const auto& m : metas) {
          uint8_t v[3] = {0, 0, 0};
          for (size_t e = 0; e < m.coeff_roots.size() && e < 3; ++e)
            v[e] = cs.value(m.coeff_roots[static_cast<size_t>(e)]);
          uint8_t w[3] = {0, 0, 0};
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j + i < 3; ++j)
              w[i + j] = F.addv(w[i + j], F.mulv(u[i], v[j]));
          u[0] = w[0];
          u[1] = w[1];
          u[2] = w[2];
        }
        cnt += quadratic_root_count(F, u[2], u[1], u[0]);
      }
      // advance
      int j = static_cast<int>(levels.size()) - 1;
      int floor_lvl = fixed0 ? 1 : 0;
      while (j >= floor_lvl && x[static_cast<size_t>(j)] == top) {
        x[static_cast<size_t>(j)] = 0;
        --j;
      }
      if (j < floor_lvl) break;
      ++x[static_cast<size_t>(j)];
      cs.set_var(levels[static_cast<size_t>(j)], x[static_cast<size_t>(j)]);
      for (size_t i = static_cast<size_t>(j) + 1; i < levels.size(); ++i)
        cs.set_var(levels[i], 0);
    }
    return cnt;
  };
  if (levels.empty()) return shard_fn(0);
  return detail::sharded_sum(F.q, detail::resolve_workers(opt.workers),
                             shard_fn);
}

// Character sum: sum over F_q^N of chi(content * prod f_i^{m_i}). q odd.
inline long long legendre_sum(const FieldSpec& F, const FactoredPoly& poly_in,
                              const CtxPtr& ambient, const EvalOptions& opt) {
  require(F.p != 2, "character sums need odd q");
  const FactoredPoly poly = lift_factored(poly_in, ambient);
  const int N = ambient->size();
  const uint8_t content = F.embed(poly.content);
  if (content == 0) return 0;
  for (const auto& f : poly.factors) {
    bool zero_mod_p = true;
    for (const auto& t : f.first.terms())
      if (F.embed(t.c) != 0) {
        zero_mod_p = false;
        break;
      }
    if (zero_mod_p) return 0;  // product vanishes identically
  }

  int accel_var = -1;
  if (opt.accel && N >= 1) {
    for (int v = N - 1; v >= 0; --v) {
      long d = 0;
      for (const auto& f : poly.factors)
        d += static_cast<long>(f.first.deg_in(v)) * f.second;
      if (d >= 1 && d <= 2) {
        accel_var = v;
        break;
      }
    }
  }
  const int outerN = accel_var >= 0 ? N - 1 : N;
  long long work = detail::checked_pow(F.q, outerN, opt.budget);
  if (work > opt.budget)
    throw BudgetError("character sum needs " + std::to_string(F.q) + "^" +
                      std::to_string(outerN) + " points, over budget " +
                      std::to_string(opt.budget));

  const int chi_content = F.legendre(content);

  if (accel_var < 0) {
    detail::CompiledSet base(F, N);
    struct FR {
      int root;
      bool odd;
    };
    std::vector<FR> roots;
    for (const auto& f : poly.factors)
      roots.push_back({base.add_poly(f.first), (f.second & 1) != 0});
    base.finalize();
    auto shard_fn = [&](int s) -> long long {
      detail::CompiledSet cs = base;
      long long acc = 0;
      int lo = 0;
      if (N >= 1) {
        cs.set_var(0, static_cast<uint8_t>(s));
        lo = 1;
      }
      cs.run(lo, [&]() {
        int sign = chi_content;
        for (const auto& fr : roots) {
          uint8_t v = cs.value(fr.root);
          if (v == 0) {
            sign = 0;
            break;
          }
          if (fr.odd) sign *= F.legendre(v);
        }
        acc += sign;
      });
      return acc;
    };
    if (N == 0) return shard_fn(0);
    return detail::sharded_sum(F.q, detail::resolve_workers(opt.workers),
                               shard_fn);
  }

  // accel path
  detail::CompiledSet base(F, N);
  struct FactorMeta {
    std::vector<int> coeff_roots;
    int mult;
  };
  std::vector<FactorMeta> metas;
  struct FR {
    int root;
    bool odd;
  };
  std::vector<FR> free_roots;
  for (const auto& f : poly.factors) {
    if (f.first.deg_in(accel_var) == 0) {
      free_roots.push_back({base.add_poly(f.first), (f.second & 1) != 0});
    } else {
      FactorMeta m;
      m.mult = f.second;
      for (auto& cp : f.first.coeffs_in(accel_var))
        m.coeff_roots.push_back(base.add_poly(cp));
      metas.push_back(std::move(m));
    }
  }
  base.finalize();
  std::vector<int> levels;
  for (int v = 0; v < N; ++v)
    if (v != accel_var) levels.push_back(v);

  auto shard_fn = [&](int s) -> long long {
    detail::CompiledSet cs = base;
    long long acc = 0;
    std::vector<uint8_t> x(levels.size(), 0);
    for (size_t i = 0; i < levels.size(); ++i) cs.set_var(levels[i], 0);
    bool fixed0 = !levels.empty();
    if (fixed0) {
      x[0] = static_cast<uint8_t>(s);
      cs.set_var(levels[0], x[0]);
      for (size_t i = 1; i < levels.size(); ++i) cs.set_var(levels[i], 0);
    }
    const uint8_t top = static_cast<uint8_t>(F.q - 1);
    for (;;) {
      int sign = chi_content;
      for (const auto& fr : free_roots) {
        uint8_t v = cs.value(fr.root);
        if (v == 0) {
          sign = 0;
          break;
        }
        if (fr.odd) sign *= F.legendre(v);
      }
      if (sign != 0) {
        uint8_t u[3] = {1, 0, 0};
        for (const auto& m : metas) {
          uint8_t v[3] = {0, 0, 0};
          for (size_t e = 0; e < m.coeff_roots.size() && e < 3; ++e)
            v[e] = cs.value(m.coeff_roots[e]);
          for (int rep = 0; rep < m.mult; ++rep) {
            uint8_t w[3] = {0, 0, 0};
            for (int i = 0; i < 3; ++i)
              for (int j = 0; j + i < 3; ++j)
                w[i + j] = F.addv(w[i + j], F.mulv(u[i], v[j]));
            u[0] = w[0];
            u[1] = w[1];
            u[2] = w[2];
          }
        }
        acc += sign * legendre_quadratic_sum(F, u[2], u[1], u[0]);
      }
      int j = static_cast<int>(levels.size()) - 1;
      int floor_lvl = fixed0 ? 1 : 0;
      while (j >= floor_lvl && x[static_cast<size_t>(j)] == top) {
        x[static_cast<size_t>(j)] = 0;
        --j;
      }
      if (j < floor_lvl) break;
      ++x[static_cast<size_t>(j)];
      cs.set_var(levels[static_cast<size_t>(j)], x[static_cast<size_t>(j)]);
      for (size_t i = static_cast<size_t>(j) + 1; i < levels.size(); ++i)
        cs.set_var(levels[i], 0);
    }
    return acc;
  };
  if (levels.empty()) return shard_fn(0);
  return detail::sharded_sum(F.q, detail::resolve_workers(opt.workers),
                             shard_fn);
}

// Convenience wrappers for a single un-factored polynomial.
inline long long point_count(const FieldSpec& F, const IntPoly& p,
                             const CtxPtr& ambient, const EvalOptions& opt) {
  FactoredPoly fp;
  fp.factors.push_back({p, 1});
  return point_count(F, fp, ambient, opt);
}
inline long long legendre_sum(const FieldSpec& F, const IntPoly& p,
                              const CtxPtr& ambient, const EvalOptions& opt) {
  FactoredPoly fp;
  fp.factors.push_back({p, 1});
  return legendre_sum(F, fp, ambient, opt);
}

}  // namespace hg
