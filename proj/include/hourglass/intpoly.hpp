// intpoly.hpp — sparse exact-integer multivariate polynomials.
// SPDX-License-Identifier: MIT
//
// Polynomials live over an immutable variable context (PolyCtx). The
// canonical term order is graded lexicographic, with variables ordered
// shortlex by label (length first, then bytes), so numeric edge labels
// sort naturally: "2" < "10". Terms are kept sorted in descending order,
// leading term first, with no zero coefficients.
#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "hourglass/common.hpp"

namespace hg {

// Shortlex order on labels: shorter strings first, ties broken bytewise.
inline bool label_less(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

// ---------------------------------------------------------------------------
// PolyCtx: an ordered set of variable labels shared by polynomials.
// ---------------------------------------------------------------------------
class PolyCtx;
using CtxPtr = std::shared_ptr<const PolyCtx>;

class PolyCtx {
 public:
  static constexpr int kMaxVars = 40;

  // Builds a context from labels (sorted shortlex, duplicates rejected).
  static CtxPtr make(std::vector<std::string> labels) {
    std::sort(labels.begin(), labels.end(), label_less);
    for (size_t i = 1; i < labels.size(); ++i)
      require(labels[i] != labels[i - 1],
              "duplicate variable label: " + labels[i]);
    require(static_cast<int>(labels.size()) <= kMaxVars,
            "too many variables (limit " + std::to_string(kMaxVars) + ")");
    auto ctx = std::make_shared<PolyCtx>();
    ctx->vars_ = std::move(labels);
    for (int i = 0; i < static_cast<int>(ctx->vars_.size()); ++i)
      ctx->index_[ctx->vars_[i]] = i;
    return ctx;
  }

  // Union of two contexts (for combining polynomials from different scopes).
  static CtxPtr merge(const CtxPtr& a, const CtxPtr& b) {
    std::vector<std::string> labels = a->vars_;
    for (const auto& v : b->vars_)
      if (!a->index_.count(v)) labels.push_back(v);
    return make(std::move(labels));
  }

  int size() const { return static_cast<int>(vars_.size()); }
  const std::string& var(int i) const { return vars_[i]; }
  const std::vector<std::string>& vars() const { return vars_; }
  int index_of(const std::string& label) const {
    auto it = index_.find(label);
    require(it != index_.end(), "unknown variable: " + label);
    return it->second;
  }
  bool has(const std::string& label) const { return index_.count(label) > 0; }

  std::vector<std::string> vars_;
  std::map<std::string, int> index_;
};

// Two polynomials are compatible when they share a context object or their
// contexts have identical variable lists.
inline bool same_ctx(const CtxPtr& a, const CtxPtr& b) {
  return a == b || a->vars_ == b->vars_;
}

// ---------------------------------------------------------------------------
// Mono: packed exponent vector. Exponents are bytes stored big-endian inside
// five 64-bit words, so plain word comparison is lexicographic comparison of
// the exponent sequence. Total degree is cached for graded comparisons.
// ---------------------------------------------------------------------------
struct Mono {
  uint16_t deg = 0;
  std::array<uint64_t, 5> w{};

  static int word(int i) { return i >> 3; }
  static int shift(int i) { return 8 * (7 - (i & 7)); }

  uint8_t exp(int i) const {
    return static_cast<uint8_t>(w[word(i)] >> shift(i));
  }
  void set_exp(int i, uint8_t e) {
    uint8_t old = exp(i);
    deg = static_cast<uint16_t>(deg - old + e);
    w[word(i)] =
        (w[word(i)] & ~(0xFFull << shift(i))) | (uint64_t(e) << shift(i));
  }
  bool empty() const { return deg == 0; }

  // Product of monomials. Per-variable degrees must stay below 255; the
  // computations this library performs stay far under that.
  friend Mono operator*(const Mono& a, const Mono& b) {
    Mono r;
    r.deg = static_cast<uint16_t>(a.deg + b.deg);
    for (int k = 0; k < 5; ++k) r.w[k] = a.w[k] + b.w[k];
    return r;
  }

  // True when b divides a (every exponent of b <= that of a).
  static bool divides(const Mono& b, const Mono& a) {
    if (b.deg > a.deg) return false;
    for (int k = 0; k < 5; ++k) {
      if (b.w[k] == 0) continue;
      uint64_t x = a.w[k], y = b.w[k];
      for (int j = 0; j < 8; ++j) {
        if (uint8_t(y) > uint8_t(x)) return false;
        x >>= 8;
        y >>= 8;
      }
    }
    return true;
  }

  // a / b, assuming divisibility (bytewise subtraction cannot borrow then).
  static Mono quotient(const Mono& a, const Mono& b) {
    Mono r;
    r.deg = static_cast<uint16_t>(a.deg - b.deg);
    for (int k = 0; k < 5; ++k) r.w[k] = a.w[k] - b.w[k];
    return r;
  }

  friend bool operator==(const Mono& a, const Mono& b) { return a.w == b.w; }

  // Graded-lex "a < b".
  static bool grlex_less(const Mono& a, const Mono& b) {
    if (a.deg != b.deg) return a.deg < b.deg;
    for (int k = 0; k < 5; ++k)
      if (a.w[k] != b.w[k]) return a.w[k] < b.w[k];
    return false;
  }
};

struct MonoHash {
  size_t operator()(const Mono& m) const {
    uint64_t h = 0x9e3779b97f4a7c15ull;
    for (uint64_t x : m.w) {
      x ^= h;
      x *= 0xbf58476d1ce4e5b9ull;
      x ^= x >> 31;
      h = x;
    }
    return static_cast<size_t>(h);
  }
};

// ---------------------------------------------------------------------------
// IntPoly
// ---------------------------------------------------------------------------
class IntPoly {
 public:
  struct Term {
    Mono m;
    Int c;
  };

  IntPoly() = default;
  explicit IntPoly(CtxPtr ctx) : ctx_(std::move(ctx)) {}

  static IntPoly zero(CtxPtr ctx) { return IntPoly(std::move(ctx)); }
  static IntPoly constant(CtxPtr ctx, Int v) {
    IntPoly p(std::move(ctx));
    if (v != 0) p.terms_.push_back({Mono{}, std::move(v)});
    return p;
  }
  static IntPoly variable(CtxPtr ctx, const std::string& label) {
    int i = ctx->index_of(label);
    IntPoly p(std::move(ctx));
    Mono m;
    m.set_exp(i, 1);
    p.terms_.push_back({m, Int(1)});
    return p;
  }
  static IntPoly monomial(CtxPtr ctx, const Mono& m, Int c) {
    IntPoly p(std::move(ctx));
    if (c != 0) p.terms_.push_back({m, std::move(c)});
    return p;
  }

  const CtxPtr& ctx() const { return ctx_; }
  bool is_zero() const { return terms_.empty(); }
  size_t n_terms() const { return terms_.size(); }
  const std::vector<Term>& terms() const { return terms_; }
  const Term& lead() const {
    invariant(!terms_.empty(), "lead() of zero polynomial");
    return terms_.front();
  }
  int total_degree() const { return terms_.empty() ? -1 : terms_.front().m.deg; }

  int deg_in(int var) const {
    int d = 0;
    for (const auto& t : terms_) d = std::max<int>(d, t.m.exp(var));
    return d;
  }
  bool uses_var(int var) const {
    for (const auto& t : terms_)
      if (t.m.exp(var) > 0) return true;
    return false;
  }
  std::vector<int> vars_used() const {
    std::vector<int> out;
    for (int i = 0; i < ctx_->size(); ++i)
      if (uses_var(i)) out.push_back(i);
    return out;
  }
  bool is_homogeneous() const {
    for (const auto& t : terms_)
      if (t.m.deg != terms_.front().m.deg) return false;
    return true;
  }

  friend bool operator==(const IntPoly& a, const IntPoly& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    for (size_t i = 0; i < a.terms_.size(); ++i)
      if (!(a.terms_[i].m == b.terms_[i].m) || a.terms_[i].c != b.terms_[i].c)
        return false;
    return true;
  }
  friend bool operator!=(const IntPoly& a, const IntPoly& b) {
    return !(a == b);
  }

  friend IntPoly operator+(const IntPoly& a, const IntPoly& b) {
    check_ctx(a, b);
    IntPoly r(a.ctx_ ? a.ctx_ : b.ctx_);
    r.terms_ = merge_terms(a.terms_, b.terms_, false);
    return r;
  }
  friend IntPoly operator-(const IntPoly& a, const IntPoly& b) {
    check_ctx(a, b);
    IntPoly r(a.ctx_ ? a.ctx_ : b.ctx_);
    r.terms_ = merge_terms(a.terms_, b.terms_, true);
    return r;
  }
  IntPoly operator-() const {
    IntPoly r(ctx_);
    r.terms_.reserve(terms_.size());
    for (const auto& t : terms_) r.terms_.push_back({t.m, -t.c});
    return r;
  }

  friend IntPoly operator*(const IntPoly& a, const IntPoly& b) {
    check_ctx(a, b);
    IntPoly r(a.ctx_ ? a.ctx_ : b.ctx_);
    if (a.is_zero() || b.is_zero()) return r;
    if (a.n_terms() == 1) return mul_term(b, a.terms_[0]);
    if (b.n_terms() == 1) return mul_term(a, b.terms_[0]);
    std::unordered_map<Mono, Int, MonoHash> acc;
    acc.reserve(a.terms_.size() + b.terms_.size());
    for (const auto& ta : a.terms_)
      for (const auto& tb : b.terms_) {
        Int& slot = acc[ta.m * tb.m];
        slot += ta.c * tb.c;
      }
    r.terms_.reserve(acc.size());
    for (auto& kv : acc)
      if (kv.second != 0) r.terms_.push_back({kv.first, std::move(kv.second)});
    sort_desc(r.terms_);
    return r;
  }

  friend IntPoly operator*(const IntPoly& a, const Int& k) {
    IntPoly r(a.ctx_);
    if (k == 0) return r;
    r.terms_.reserve(a.terms_.size());
    for (const auto& t : a.terms_) r.terms_.push_back({t.m, t.c * k});
    return r;
  }
  friend IntPoly operator*(const Int& k, const IntPoly& a) { return a * k; }

  IntPoly& operator+=(const IntPoly& o) { return *this = *this + o; }
  IntPoly& operator-=(const IntPoly& o) { return *this = *this - o; }
  IntPoly& operator*=(const IntPoly& o) { return *this = *this * o; }

  // this -= t * g, as one merged pass (used by exact division / sqrt).
  void sub_mul(const Term& t, const IntPoly& g) {
    IntPoly prod = mul_term(g, t);
    *this = *this - prod;
  }

  // Substitute 0 for a variable: drop all terms containing it.
  IntPoly subst_zero(int var) const {
    IntPoly r(ctx_);
    for (const auto& t : terms_)
      if (t.m.exp(var) == 0) r.terms_.push_back(t);
    return r;
  }

  // Partial derivative. Dropping terms and lowering one shared coordinate
  // preserves the graded-lex order, so no re-sort is needed.
  IntPoly derivative(int var) const {
    IntPoly r(ctx_);
    r.terms_.reserve(terms_.size());
    for (const auto& t : terms_) {
      int e = t.m.exp(var);
      if (e == 0) continue;
      Mono m = t.m;
      m.set_exp(var, static_cast<uint8_t>(e - 1));
      r.terms_.push_back({m, t.c * e});
    }
    return r;
  }

  // Coefficient polynomials by powers of one variable; result[k] is the
  // coefficient of var^k (with that variable's exponent cleared).
  std::vector<IntPoly> coeffs_in(int var) const {
    int d = deg_in(var);
    std::vector<IntPoly> out(static_cast<size_t>(d) + 1, IntPoly(ctx_));
    for (const auto& t : terms_) {
      Mono m = t.m;
      int e = m.exp(var);
      m.set_exp(var, 0);
      out[e].terms_.push_back({m, t.c});
    }
    for (auto& p : out) sort_desc(p.terms_);
    return out;
  }

  // Exact evaluation at integer points (oracle / test use).
  Int eval(const std::vector<Int>& point) const {
    invariant(static_cast<int>(point.size()) == ctx_->size(),
              "eval: wrong point arity");
    Int total = 0;
    for (const auto& t : terms_) {
      Int v = t.c;
      for (int i = 0; i < ctx_->size(); ++i)
        for (int e = t.m.exp(i); e > 0; --e) v *= point[i];
      total += v;
    }
    return total;
  }

  // Evaluation mod a machine prime (used for randomized linear solves).
  long eval_mod(const std::vector<long>& point, long p) const {
    Int total = 0;
    for (const auto& t : terms_) {
      long v = int_mod(t.c, p);
      for (int i = 0; i < ctx_->size(); ++i) {
        int e = t.m.exp(i);
        for (int k = 0; k < e; ++k) v = (v * point[i]) % p;
      }
      total += v;
    }
    return int_mod(total, p);
  }

  // Exact integer evaluation at a small point (divisibility filters).
  Int eval_int(const std::vector<long>& point) const {
    Int total = 0;
    for (const auto& t : terms_) {
      Int v = t.c;
      for (int i = 0; i < ctx_->size(); ++i)
        for (int e = t.m.exp(i); e > 0; --e) v *= point[i];
      total += v;
    }
    return total;
  }

  // gcd of all coefficients (nonnegative; 0 for the zero polynomial).
  Int content() const {
    Int g = 0;
    for (const auto& t : terms_) {
      mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), t.c.get_mpz_t());
      if (g == 1) break;
    }
    return g;
  }

  // Divide all coefficients by an exact common divisor.
  IntPoly div_int(const Int& k) const {
    invariant(k != 0, "div_int by zero");
    IntPoly r(ctx_);
    r.terms_.reserve(terms_.size());
    for (const auto& t : terms_) {
      Int q, rem;
      mpz_tdiv_qr(q.get_mpz_t(), rem.get_mpz_t(), t.c.get_mpz_t(),
                  k.get_mpz_t());
      invariant(rem == 0, "div_int: not divisible");
      r.terms_.push_back({t.m, std::move(q)});
    }
    return r;
  }

  // Coefficient-wise balanced remainder modulo m: each coefficient replaced
  // by its representative in (-m/2, m/2]. Zero coefficients are dropped.
  IntPoly balanced_rem(const Int& m) const {
    IntPoly r(ctx_);
    r.terms_.reserve(terms_.size());
    for (const auto& t : terms_) {
      Int c;
      mpz_fdiv_r(c.get_mpz_t(), t.c.get_mpz_t(), m.get_mpz_t());
      if (c * 2 > m) c -= m;
      if (c != 0) r.terms_.push_back({t.m, std::move(c)});
    }
    return r;
  }

  // Exact division by a coefficient-one monomial. Every term must be
  // divisible. Subtracting the same exponent vector from all terms preserves
  // the graded-lex order, so terms are copied without re-sorting.
  IntPoly div_mono(const Mono& m) const {
    IntPoly r(ctx_);
    r.terms_.reserve(terms_.size());
    for (const auto& t : terms_) {
      invariant(Mono::divides(m, t.m), "div_mono: term not divisible");
      r.terms_.push_back({Mono::quotient(t.m, m), t.c});
    }
    return r;
  }

  // Smallest exponent of a variable over all terms (0 for the zero poly).
  int min_deg_in(int var) const {
    int d = -1;
    for (const auto& t : terms_) {
      int e = t.m.exp(var);
      if (d < 0 || e < d) d = e;
      if (d == 0) break;
    }
    return d < 0 ? 0 : d;
  }

  // Rewrites the polynomial over another context; every variable actually
  // used by a term must exist in the target (unused ones may be dropped).
  IntPoly lift(const CtxPtr& target) const {
    if (same_ctx(ctx_, target)) {
      IntPoly r = *this;
      r.ctx_ = target;
      return r;
    }
    std::array<int, PolyCtx::kMaxVars> map{};
    for (int i = 0; i < ctx_->size(); ++i)
      map[i] = target->has(ctx_->var(i)) ? target->index_of(ctx_->var(i)) : -1;
    IntPoly r(target);
    r.terms_.reserve(terms_.size());
    for (const auto& t : terms_) {
      Mono m;
      for (int i = 0; i < ctx_->size(); ++i)
        if (int e = t.m.exp(i); e > 0) {
          require(map[i] >= 0, "lift: variable " + ctx_->var(i) +
                                   " missing from target context");
          m.set_exp(map[i], uint8_t(e));
        }
      r.terms_.push_back({m, t.c});
    }
    sort_desc(r.terms_);
    return r;
  }

  // Exact polynomial division; nullopt when the division does not come out
  // exactly. Classic leading-term long division under the graded-lex order.
  static std::optional<IntPoly> exact_div(const IntPoly& a, const IntPoly& b) {
    check_ctx(a, b);
    invariant(!b.is_zero(), "exact_div by zero polynomial");
    IntPoly q(a.ctx_ ? a.ctx_ : b.ctx_);
    if (a.is_zero()) return q;
    // The order is multiplicative, so the trailing monomial must divide too.
    if (!Mono::divides(b.terms_.back().m, a.terms_.back().m))
      return std::nullopt;
    IntPoly r = a;
    const Term& lb = b.lead();
    while (!r.is_zero()) {
      const Term& lr = r.lead();
      if (!Mono::divides(lb.m, lr.m)) return std::nullopt;
      Int qc, rem;
      mpz_tdiv_qr(qc.get_mpz_t(), rem.get_mpz_t(), lr.c.get_mpz_t(),
                  lb.c.get_mpz_t());
      if (rem != 0) return std::nullopt;
      Term t{Mono::quotient(lr.m, lb.m), std::move(qc)};
      r.sub_mul(t, b);
      q.terms_.push_back(std::move(t));
    }
    sort_desc(q.terms_);
    return q;
  }

  // Exact square root of a perfect-square polynomial; the returned root has
  // a positive leading coefficient. nullopt when no such root exists.
  static std::optional<IntPoly> sqrt(const IntPoly& f) {
    if (f.is_zero()) return f;
    const Term& lf = f.lead();
    bool odd = false;
    Mono half;
    for (int i = 0; i < f.ctx_->size(); ++i) {
      int e = lf.m.exp(i);
      if (e & 1) {
        odd = true;
        break;
      }
      if (e) half.set_exp(i, uint8_t(e / 2));
    }
    if (odd || lf.c < 0) return std::nullopt;
    Int c0, rem;
    mpz_sqrtrem(c0.get_mpz_t(), rem.get_mpz_t(), lf.c.get_mpz_t());
    if (rem != 0) return std::nullopt;
    // The term order is multiplicative, so the trailing term of a square is
    // the square of a term too.
    {
      const Term& tl = f.terms_.back();
      if (tl.c < 0) return std::nullopt;
      for (int i = 0; i < f.ctx_->size(); ++i)
        if (tl.m.exp(i) & 1) return std::nullopt;
      Int t0, trem;
      mpz_sqrtrem(t0.get_mpz_t(), trem.get_mpz_t(), tl.c.get_mpz_t());
      if (trem != 0) return std::nullopt;
    }
    // Random-evaluation filter: a square is a quadratic residue at every
    // point, so any non-residue value certifies failure without running the
    // term-by-term extraction below. One-sided; misses only slip into the
    // slow path.
    if (f.n_terms() > 64) {
      constexpr long p = 999983;
      uint64_t st = 0x9e3779b97f4a7c15ULL;
      auto rnd = [&st]() {
        st ^= st << 13;
        st ^= st >> 7;
        st ^= st << 17;
        return st;
      };
      std::vector<long> pt(f.ctx_->size());
      for (int trial = 0; trial < 10; ++trial) {
        for (auto& x : pt) x = static_cast<long>(rnd() % (p - 1)) + 1;
        long v = f.eval_mod(pt, p);
        if (v == 0) continue;
        long s2 = 1, b = v, e = (p - 1) / 2;
        while (e) {
          if (e & 1) s2 = (s2 * b) % p;
          b = (b * b) % p;
          e >>= 1;
        }
        if (s2 == p - 1) return std::nullopt;
      }
    }

    IntPoly s = IntPoly::monomial(f.ctx_, half, c0);
    IntPoly r = f;
    r.sub_mul({half, c0}, s);  // r = f - s^2 (s is a single term here)
    Int twoc0 = 2 * c0;
    while (!r.is_zero()) {
      const Term& lr = r.lead();
      if (!Mono::divides(half, lr.m)) return std::nullopt;
      Int qc, qrem;
      mpz_tdiv_qr(qc.get_mpz_t(), qrem.get_mpz_t(), lr.c.get_mpz_t(),
                  twoc0.get_mpz_t());
      if (qrem != 0) return std::nullopt;
      Term t{Mono::quotient(lr.m, half), std::move(qc)};
      // r -= t*(2s + t); then s += t. Order matters: use s before update.
      IntPoly upd = mul_term(s, t) * Int(2);
      upd = upd + mul_term(IntPoly::monomial(f.ctx_, t.m, t.c), t);
      r = r - upd;
      s.terms_.push_back(t);
      sort_desc(s.terms_);
    }
    return s;
  }

  // Canonical text form; see parse_poly for the grammar.
  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& t : terms_) {
      Int a = t.c;
      bool neg = a < 0;
      if (neg) a = -a;
      if (first) {
        if (neg) os << "-";
        first = false;
      } else {
        os << (neg ? " - " : " + ");
      }
      bool printed = false;
      if (a != 1 || t.m.empty()) {
        os << a.get_str();
        printed = true;
      }
      for (int i = 0; i < ctx_->size(); ++i) {
        int e = t.m.exp(i);
        if (!e) continue;
        if (printed) os << "*";
        os << var_token(ctx_->var(i));
        if (e > 1) os << "^" << e;
        printed = true;
      }
    }
    return os.str();
  }

  // Normalizes an arbitrary term list (sorts, merges, drops zeros).
  static IntPoly from_terms(CtxPtr ctx, std::vector<Term> terms) {
    IntPoly p(std::move(ctx));
    sort_desc(terms);
    p.terms_ = std::move(terms);
    return p;
  }

 private:
  static void check_ctx(const IntPoly& a, const IntPoly& b) {
    if (a.ctx_ && b.ctx_)
      invariant(same_ctx(a.ctx_, b.ctx_), "mixed polynomial contexts");
  }

  // Multiplication by one term preserves the graded-lex order, so the term
  // list stays sorted without a re-sort.
  static IntPoly mul_term(const IntPoly& p, const Term& t) {
    IntPoly r(p.ctx_);
    if (t.c == 0) return r;
    r.terms_.reserve(p.terms_.size());
    for (const auto& tp : p.terms_) r.terms_.push_back({tp.m * t.m, tp.c * t.c});
    return r;
  }

  // Merge two sorted term lists (b negated when subtract).
  static std::vector<Term> merge_terms(const std::vector<Term>& a,
                                       const std::vector<Term>& b,
                                       bool subtract) {
    std::vector<Term> out;
    out.reserve(a.size() + b.size());
    size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
      if (j == b.size() ||
          (i < a.size() && Mono::grlex_less(b[j].m, a[i].m))) {
        out.push_back(a[i++]);
      } else if (i == a.size() || Mono::grlex_less(a[i].m, b[j].m)) {
        out.push_back({b[j].m, subtract ? -b[j].c : b[j].c});
        ++j;
      } else {
        Int c = a[i].c;
        if (subtract) c -= b[j].c;
        else c += b[j].c;
        if (c != 0) out.push_back({a[i].m, std::move(c)});
        ++i;
        ++j;
      }
    }
    return out;
  }

  static void sort_desc(std::vector<Term>& ts) {
    std::sort(ts.begin(), ts.end(), [](const Term& x, const Term& y) {
      return Mono::grlex_less(y.m, x.m);
    });
    // merge duplicates
    size_t w = 0;
    for (size_t i = 0; i < ts.size();) {
      Mono m = ts[i].m;
      Int c = std::move(ts[i].c);
      size_t j = i + 1;
      while (j < ts.size() && ts[j].m == m) c += ts[j++].c;
      if (c != 0) ts[w++] = {m, std::move(c)};
      i = j;
    }
    ts.resize(w);
  }

  static std::string var_token(const std::string& label) {
    bool plain = !label.empty() &&
                 (std::isalpha(static_cast<unsigned char>(label[0])) ||
                  label[0] == '_');
    for (char ch : label)
      if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_')
        plain = false;
    return plain ? label : "[" + label + "]";
  }

  CtxPtr ctx_;
  std::vector<Term> terms_;
};

// ---------------------------------------------------------------------------
// Polynomial text parser. Grammar:
//   expr   := ['-'] term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := base ('^' UINT)?
//   base   := UINT | IDENT | '[' label ']' | '(' expr ')'
// IDENT = [A-Za-z_][A-Za-z0-9_]*; '[label]' admits arbitrary labels (e.g.
// numeric edge labels), matching IntPoly::to_string output.
// ---------------------------------------------------------------------------
namespace detail {

struct PolyParser {
  const std::string& s;
  size_t pos = 0;
  const CtxPtr& ctx;

  PolyParser(const std::string& text, const CtxPtr& c) : s(text), ctx(c) {}

  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
      ++pos;
  }
  bool eat(char c) {
    skip();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& why) {
    throw UserError("polynomial parse error at offset " + std::to_string(pos) +
                    ": " + why);
  }

  IntPoly parse() {
    IntPoly r = expr();
    skip();
    if (pos != s.size()) fail("trailing input");
    return r;
  }

  IntPoly expr() {
    bool neg = false;
    skip();
    if (eat('-')) neg = true;
    else eat('+');
    IntPoly acc = term();
    if (neg) acc = -acc;
    for (;;) {
      skip();
      if (eat('+')) acc = acc + term();
      else if (eat('-')) acc = acc - term();
      else break;
    }
    return acc;
  }

  IntPoly term() {
    IntPoly acc = factor();
    for (;;) {
      skip();
      if (eat('*')) acc = acc * factor();
      else break;
    }
    return acc;
  }

  IntPoly factor() {
    IntPoly b = base();
    skip();
    if (eat('^')) {
      skip();
      size_t start = pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
        ++pos;
      if (pos == start) fail("exponent expected");
      int e = std::stoi(s.substr(start, pos - start));
      IntPoly r = IntPoly::constant(ctx, 1);
      for (int i = 0; i < e; ++i) r = r * b;
      return r;
    }
    return b;
  }

  IntPoly base() {
    skip();
    if (pos >= s.size()) fail("unexpected end");
    char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
        ++pos;
      return IntPoly::constant(ctx, Int(s.substr(start, pos - start)));
    }
    if (c == '[') {
      size_t end = s.find(']', pos);
      if (end == std::string::npos) fail("unterminated [label]");
      std::string label = s.substr(pos + 1, end - pos - 1);
      pos = end + 1;
      return IntPoly::variable(ctx, label);
    }
    if (c == '(') {
      ++pos;
      IntPoly r = expr();
      if (!eat(')')) fail("')' expected");
      return r;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos;
      while (pos < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[pos])) ||
              s[pos] == '_'))
        ++pos;
      return IntPoly::variable(ctx, s.substr(start, pos - start));
    }
    fail("unexpected character");
  }
};

// Scans a polynomial text for variable tokens (pass 1 of context-free parse).
inline std::vector<std::string> scan_labels(const std::string& s) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c == '[') {
      size_t end = s.find(']', i);
      require(end != std::string::npos, "unterminated [label]");
      out.push_back(s.substr(i + 1, end - i - 1));
      i = end + 1;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = i;
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) ||
                              s[i] == '_'))
        ++i;
      out.push_back(s.substr(start, i - start));
    } else {
      ++i;
    }
  }
  std::sort(out.begin(), out.end(), label_less);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

// Parses over a given context (all variables must exist in it).
inline IntPoly parse_poly_in(const CtxPtr& ctx, const std::string& text) {
  return detail::PolyParser(text, ctx).parse();
}

// Parses with a context inferred from the variable tokens that appear.
inline IntPoly parse_poly(const std::string& text) {
  CtxPtr ctx = PolyCtx::make(detail::scan_labels(text));
  return parse_poly_in(ctx, text);
}

// ---------------------------------------------------------------------------
// Multivariate gcd over Z by primitive pseudo-remainder sequences: recurse on
// a shared main variable, keeping remainders primitive (integer and
// polynomial content stripped) to control growth. Sized for this library's
// factor-refinement workloads: structured inputs of modest degree.
// ---------------------------------------------------------------------------
inline Int int_gcd(const Int& a, const Int& b) {
  Int g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g;
}

inline IntPoly poly_gcd(const IntPoly& a, const IntPoly& b);

namespace detail {

// Positive-leading-coefficient primitive part (integer content removed).
inline IntPoly int_primitive(const IntPoly& f) {
  if (f.is_zero()) return f;
  Int c = f.content();
  if (f.lead().c < 0) c = -c;
  return c == 1 ? f : f.div_int(c);
}

inline Int max_norm(const IntPoly& f) {
  Int m = 0;
  for (const auto& t : f.terms()) {
    Int a = t.c < 0 ? Int(-t.c) : t.c;
    if (a > m) m = a;
  }
  return m;
}

// f with variable var replaced by the integer xi (Horner over coefficients).
inline IntPoly eval_var(const IntPoly& f, int var, const Int& xi) {
  auto cs = f.coeffs_in(var);
  IntPoly r = IntPoly::constant(f.ctx(), 0);
  for (int k = static_cast<int>(cs.size()) - 1; k >= 0; --k)
    r = r * xi + cs[k];
  return r;
}

// Heuristic gcd: evaluate the main variable at a large integer, recurse on
// the images, lift the candidate back from balanced base-xi digits, and
// validate by exact division of both inputs. The candidate is returned as
// reconstructed: at inner recursion levels its integer content encodes the
// outer levels' polynomial structure, so it must not be normalized here.
// Returns nullopt when the heuristic gives up; callers fall back to the
// remainder-sequence route.
inline std::optional<IntPoly> heugcd(const IntPoly& a, const IntPoly& b) {
  const CtxPtr& ctx = a.ctx();
  int v = -1;
  for (int i = 0; i < ctx->size() && v < 0; ++i)
    if (a.deg_in(i) > 0 || b.deg_in(i) > 0) v = i;
  if (v < 0) {
    Int va = a.is_zero() ? Int(0) : a.lead().c;
    Int vb = b.is_zero() ? Int(0) : b.lead().c;
    return IntPoly::constant(ctx, int_gcd(va, vb));
  }
  Int na = max_norm(a), nb = max_norm(b);
  Int xi = 2 * (na < nb ? na : nb) + 29;
  for (int attempt = 0; attempt < 6; ++attempt) {
    // Fully evaluated image sizes grow by a factor of about the degree per
    // variable level; decline inputs whose images would be impractically big.
    double est_bits =
        static_cast<double>(mpz_sizeinbase(xi.get_mpz_t(), 2)) + 2;
    for (int i = v; i < ctx->size(); ++i) {
      int d = std::max(a.deg_in(i), b.deg_in(i));
      if (d > 1) est_bits *= d;
      if (est_bits > 24e6) return std::nullopt;
    }
    auto h = heugcd(eval_var(a, v, xi), eval_var(b, v, xi));
    if (h && !h->is_zero()) {
      IntPoly H = IntPoly::constant(ctx, 0);
      IntPoly cur = std::move(*h);
      bool ok = true;
      for (int dig = 0; !cur.is_zero(); ++dig) {
        if (dig > 200) {
          ok = false;
          break;
        }
        IntPoly r = cur.balanced_rem(xi);
        if (!r.is_zero()) {
          Mono m;
          m.set_exp(v, static_cast<uint8_t>(dig));
          H = H + r * IntPoly::monomial(ctx, m, 1);
        }
        cur = (cur - r).div_int(xi);
      }
      if (ok && !H.is_zero() &&
          IntPoly::exact_div(a, H) && IntPoly::exact_div(b, H))
        return H;
    }
    xi = xi * 73794 / 27011;
  }
  return std::nullopt;
}

// Gcd of the coefficient polynomials of f by powers of var (the var-free
// content); integer-primitive positive-lead by construction of poly_gcd.
inline IntPoly var_content(const IntPoly& f, int var) {
  IntPoly g;
  for (const auto& c : f.coeffs_in(var)) {
    if (c.is_zero()) continue;
    g = g.is_zero() ? int_primitive(c) : poly_gcd(g, c);
    if (g.total_degree() == 0) break;
  }
  return g.is_zero() ? g : int_primitive(g);
}

// Pseudo-remainder of a by b in var (both with deg_in(var) >= 1,
// deg_a >= deg_b): repeatedly cancels the leading var-power of the running
// remainder after scaling by b's leading coefficient.
inline IntPoly pseudo_rem(IntPoly r, const IntPoly& b, int var,
                          const CtxPtr& ctx) {
  const int db = b.deg_in(var);
  IntPoly lb = b.coeffs_in(var)[static_cast<size_t>(db)];
  while (!r.is_zero()) {
    int dr = r.deg_in(var);
    if (dr < db) break;
    IntPoly lr = r.coeffs_in(var)[static_cast<size_t>(dr)];
    Mono shift;
    shift.set_exp(var, static_cast<uint8_t>(dr - db));
    r = r * lb - lr * b * IntPoly::monomial(ctx, shift, 1);
  }
  return r;
}

// Primitive gcd of integer-primitive inputs.
inline IntPoly pgcd(IntPoly a, IntPoly b) {
  const CtxPtr& ctx = a.ctx();
  if (a.total_degree() == 0 || b.total_degree() == 0)
    return IntPoly::constant(ctx, 1);
  // Main variable: smallest positive min-degree shared by both.
  int var = -1;
  long best = 0;
  for (int v = 0; v < ctx->size(); ++v) {
    int da = a.deg_in(v), db = b.deg_in(v);
    if (da > 0 && db > 0) {
      long s = std::min(da, db);
      if (var < 0 || s < best) {
        var = v;
        best = s;
      }
    }
  }
  if (var < 0) return IntPoly::constant(ctx, 1);  // disjoint variable support
  IntPoly ca = var_content(a, var), cb = var_content(b, var);
  IntPoly cont = pgcd(ca, cb);
  auto qa = IntPoly::exact_div(a, ca);
  auto qb = IntPoly::exact_div(b, cb);
  invariant(qa && qb, "pgcd: content division failed");
  a = std::move(*qa);
  b = std::move(*qb);
  if (a.deg_in(var) < b.deg_in(var)) std::swap(a, b);
  while (true) {
    if (b.is_zero()) {
      IntPoly g = int_primitive(a);
      return g.deg_in(var) > 0 ? cont * g : cont;
    }
    if (b.deg_in(var) == 0) return cont;  // var-primitive inputs: gcd is 1
    IntPoly r = pseudo_rem(a, b, var, ctx);
    a = std::move(b);
    if (r.is_zero()) {
      b = std::move(r);
      continue;
    }
    r = int_primitive(r);
    IntPoly cr = var_content(r, var);
    if (cr.total_degree() > 0) {
      auto q = IntPoly::exact_div(r, cr);
      invariant(q.has_value(), "pgcd: remainder content division failed");
      r = std::move(*q);
    }
    b = std::move(r);
  }
}

}  // namespace detail

inline IntPoly poly_gcd(const IntPoly& a, const IntPoly& b) {
  if (a.is_zero()) return detail::int_primitive(b);
  if (b.is_zero()) return detail::int_primitive(a);
  Int cg = int_gcd(a.content(), b.content());
  IntPoly pa = detail::int_primitive(a), pb = detail::int_primitive(b);
  IntPoly g;
  if (auto h = detail::heugcd(pa, pb)) {
    g = detail::int_primitive(*h);  // primitive: it divides primitive inputs
  } else if (pa.n_terms() <= 600 && pb.n_terms() <= 600) {
    g = detail::pgcd(pa, pb);
  } else {
    // Too big for either engine. A trivial common divisor is still sound:
    // every consumer validates splits by exact division, so underestimating
    // a gcd only forgoes a refinement, never corrupts one.
    g = IntPoly::constant(pa.ctx(), 1);
  }
  return cg == 1 ? g : g * cg;
}

// ---------------------------------------------------------------------------
// Square-free decomposition: f (primitive, nonzero) as prod parts[i]^mult[i]
// with square-free, pairwise coprime parts and positive leading coefficients.
// Yun's algorithm in a main variable after splitting off the variable-free
// content, which recurses on its own main variable.
// ---------------------------------------------------------------------------
inline std::vector<std::pair<IntPoly, int>> squarefree_decompose(
    const IntPoly& f) {
  std::vector<std::pair<IntPoly, int>> out;
  std::vector<std::pair<IntPoly, int>> work{{detail::int_primitive(f), 1}};
  const CtxPtr& ctx = f.ctx();
  while (!work.empty()) {
    IntPoly p = std::move(work.back().first);
    int outer = work.back().second;
    work.pop_back();
    if (p.total_degree() == 0) continue;
    int var = -1;  // smallest positive degree keeps the gcd chains short
    for (int v = 0; v < ctx->size(); ++v)
      if (int d = p.deg_in(v); d > 0 && (var < 0 || d < p.deg_in(var)))
        var = v;
    invariant(var >= 0, "squarefree: nonconstant polynomial without variables");
    IntPoly cont = detail::var_content(p, var);
    if (cont.total_degree() > 0) {
      auto q = IntPoly::exact_div(p, cont);
      invariant(q.has_value(), "squarefree: content division failed");
      p = detail::int_primitive(*q);
      work.push_back({std::move(cont), outer});
    }
    if (p.deg_in(var) == 0) continue;  // fully moved into the content
    // Yun's algorithm on the var-primitive part (all factors involve var).
    // Division-audited: rem tracks p divided by everything emitted, so the
    // output always multiplies back to p exactly, even if the heuristic gcd
    // underestimates; any leftover is emitted as one final part.
    IntPoly dp = p.derivative(var);
    IntPoly g = poly_gcd(p, dp);
    if (g.total_degree() == 0) {
      out.push_back({std::move(p), outer});
      continue;
    }
    auto qc = IntPoly::exact_div(p, g);
    auto qd = IntPoly::exact_div(dp, g);
    invariant(qc && qd, "squarefree: Yun division failed");
    IntPoly c = std::move(*qc);
    IntPoly d = *qd - c.derivative(var);
    IntPoly rem = p;
    bool audit_ok = true;
    size_t first_out = out.size();
    for (int i = 1; audit_ok && c.total_degree() > 0; ++i) {
      IntPoly q = poly_gcd(c, d);
      if (q.total_degree() > 0) {
        auto nc = IntPoly::exact_div(c, q);
        invariant(nc.has_value(), "squarefree: Yun part division failed");
        c = std::move(*nc);
        IntPoly part = detail::int_primitive(q);
        for (int t = 0; t < i && audit_ok; ++t) {
          auto nr = IntPoly::exact_div(rem, part);
          if (nr)
            rem = std::move(*nr);
          else
            audit_ok = false;
        }
        if (audit_ok) out.push_back({std::move(part), outer * i});
      }
      auto nd = IntPoly::exact_div(d, q.total_degree() > 0 ? q
                                                           : IntPoly::constant(
                                                                 ctx, 1));
      invariant(nd.has_value(), "squarefree: Yun derivative division failed");
      d = *nd - c.derivative(var);
    }
    if (!audit_ok) {
      out.resize(first_out);
      out.push_back({std::move(p), outer});
    } else if (rem.total_degree() > 0) {
      out.push_back({detail::int_primitive(rem), outer});
    } else {
      invariant(!rem.is_zero() && rem.lead().c == 1,
                "squarefree: residual after exact decomposition must be one");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fraction-free (Bareiss) determinant of a square polynomial matrix.
// Pivots are chosen by smallest support (fewest terms) to keep intermediate
// minors small; row and column swaps track the determinant sign. Exact
// divisions in the Bareiss update are asserted.
// ---------------------------------------------------------------------------
inline IntPoly bareiss_det(std::vector<std::vector<IntPoly>> m,
                           const CtxPtr& ctx) {
  const int n = static_cast<int>(m.size());
  if (n == 0) return IntPoly::constant(ctx, 1);
  for (auto& row : m)
    invariant(static_cast<int>(row.size()) == n, "bareiss: not square");
  int sign = 1;
  IntPoly prev = IntPoly::constant(ctx, 1);
  for (int k = 0; k < n; ++k) {
    // pivot: nonzero entry with the fewest terms in the trailing submatrix
    int pi = -1, pj = -1;
    size_t best = SIZE_MAX;
    for (int i = k; i < n; ++i)
      for (int j = k; j < n; ++j)
        if (!m[i][j].is_zero() && m[i][j].n_terms() < best) {
          best = m[i][j].n_terms();
          pi = i;
          pj = j;
        }
    if (pi < 0) return IntPoly::zero(ctx);  // all-zero submatrix
    if (pi != k) {
      std::swap(m[pi], m[k]);
      sign = -sign;
    }
    if (pj != k) {
      for (int i = 0; i < n; ++i) std::swap(m[i][pj], m[i][k]);
      sign = -sign;
    }
    if (k == n - 1) break;
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j) {
        IntPoly num = m[i][j] * m[k][k] - m[i][k] * m[k][j];
        auto q = IntPoly::exact_div(num, prev);
        invariant(q.has_value(), "bareiss: non-exact division");
        m[i][j] = std::move(*q);
      }
      m[i][k] = IntPoly::zero(ctx);
    }
    prev = m[k][k];
  }
  IntPoly det = m[n - 1][n - 1];
  return sign < 0 ? -det : det;
}

}  // namespace hg
