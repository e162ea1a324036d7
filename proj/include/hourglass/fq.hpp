// fq.hpp — small finite fields F_q (q = p^k <= 49) as dense tables.
// SPDX-License-Identifier: MIT
//
// Elements are encoded as indices 0..q-1: the element sum c_i x^i (c_i in
// F_p) has index sum c_i p^i. Index 0 is zero, index 1 is one, and for prime
// fields the index is the residue itself. The modulus is the lexicographically
// least monic irreducible of degree k (coefficients compared high-to-low).
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hourglass/common.hpp"

namespace hg {

struct FieldSpec {
  int q = 0, p = 0, k = 0;
  std::vector<int> modulus;        // monic modulus coefficients c_0..c_k
  std::vector<uint8_t> add;        // q*q
  std::vector<uint8_t> mul;        // q*q
  std::vector<uint8_t> neg;        // q
  std::vector<int8_t> chi;         // quadratic character: 0, +1, -1

  uint8_t addv(uint8_t a, uint8_t b) const {
    return add[static_cast<size_t>(a) * q + b];
  }
  uint8_t mulv(uint8_t a, uint8_t b) const {
    return mul[static_cast<size_t>(a) * q + b];
  }
  uint8_t negv(uint8_t a) const { return neg[a]; }
  int legendre(uint8_t a) const { return chi[a]; }

  // Embedding of integers (polynomial coefficients) into F_q: reduce mod p
  // into the constant coefficient.
  uint8_t embed(const Int& v) const {
    return static_cast<uint8_t>(int_mod(v, p));
  }
  uint8_t embed_long(long v) const {
    return static_cast<uint8_t>(mod_nonneg(v, p));
  }

  std::string modulus_string() const {
    if (k == 1) return "x";
    std::string s = "x^" + std::to_string(k);
    for (int i = k - 1; i >= 0; --i) {
      if (!modulus[static_cast<size_t>(i)]) continue;
      s += " + ";
      if (modulus[static_cast<size_t>(i)] != 1 || i == 0)
        s += std::to_string(modulus[static_cast<size_t>(i)]);
      if (i >= 1) {
        if (modulus[static_cast<size_t>(i)] != 1) s += "*";
        s += "x";
        if (i > 1) s += "^" + std::to_string(i);
      }
    }
    return s;
  }
};

namespace detail {

inline bool is_prime(int n) {
  if (n < 2) return false;
  for (int d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// Multiplication of F_p[x] polynomials given as coefficient vectors, reduced
// modulo a monic modulus of degree k.
inline std::vector<int> polymulmod(const std::vector<int>& a,
                                   const std::vector<int>& b,
                                   const std::vector<int>& mod, int p, int k) {
  std::vector<int> c(static_cast<size_t>(2 * k - 1), 0);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      c[static_cast<size_t>(i + j)] =
          (c[static_cast<size_t>(i + j)] +
           a[static_cast<size_t>(i)] * b[static_cast<size_t>(j)]) %
          p;
  for (int d = 2 * k - 2; d >= k; --d) {
    int coef = c[static_cast<size_t>(d)];
    if (!coef) continue;
    c[static_cast<size_t>(d)] = 0;
    for (int i = 0; i < k; ++i)
      c[static_cast<size_t>(d - k + i)] = mod_nonneg(
          c[static_cast<size_t>(d - k + i)] - coef * mod[static_cast<size_t>(i)],
          p);
  }
  c.resize(static_cast<size_t>(k));
  return c;
}

inline bool poly_irreducible(const std::vector<int>& mod, int p, int k) {
  auto eval = [&](const std::vector<int>& f, int x) {
    long v = 0;
    for (int i = static_cast<int>(f.size()) - 1; i >= 0; --i)
      v = (v * x + f[static_cast<size_t>(i)]) % p;
    return static_cast<int>(v);
  };
  std::vector<int> full = mod;
  full.push_back(1);  // monic of degree k
  for (int x = 0; x < p; ++x)
    if (eval(full, x) == 0) return false;  // linear factor
  if (k <= 3) return true;  // degree 2,3: no roots <=> irreducible
  invariant(k == 4, "modulus degree out of range");
  // degree 4: also exclude products of two irreducible quadratics; divide by
  // each monic irreducible quadratic x^2 + a x + b.
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) {
      bool has_root = false;
      for (int x = 0; x < p && !has_root; ++x)
        has_root = (x * x + a * x + b) % p == 0;
      if (has_root) continue;
      // synthetic division of full by x^2 + a x + b
      std::vector<int> r = full;
      for (int d = 4; d >= 2; --d) {
        int coef = r[static_cast<size_t>(d)];
        if (!coef) continue;
        r[static_cast<size_t>(d)] = 0;
        r[static_cast<size_t>(d - 1)] =
            mod_nonneg(r[static_cast<size_t>(d - 1)] - coef * a, p);
        r[static_cast<size_t>(d - 2)] =
            mod_nonneg(r[static_cast<size_t>(d - 2)] - coef * b, p);
      }
      if (r[0] == 0 && r[1] == 0) return false;
    }
  return true;
}

}  // namespace detail

// Builds the full table representation of F_q. q must be a prime power
// p^k <= 49 with k <= 4.
inline FieldSpec build_field(int q) {
  require(q >= 2 && q <= 49,
          "q out of range (2..49): " + std::to_string(q));
  int p = 0;
  for (int d = 2; d <= q; ++d)
    if (q % d == 0) {
      p = d;
      break;
    }
  int k = 0, t = q;
  while (t > 1) {
    require(t % p == 0, "q is not a prime power: " + std::to_string(q));
    t /= p;
    ++k;
  }
  invariant(detail::is_prime(p), "factor not prime");
  require(k <= 4, "extension degree above 4 unsupported: " + std::to_string(q));

  FieldSpec F;
  F.q = q;
  F.p = p;
  F.k = k;

  // lexicographically least monic irreducible, scanning (c_{k-1},...,c_0)
  std::vector<int> mod(static_cast<size_t>(k), 0);
  if (k == 1) {
    mod[0] = 0;  // modulus x: the prime field
  } else {
    bool found = false;
    std::vector<int> c(static_cast<size_t>(k), 0);
    while (!found) {
      if (detail::poly_irreducible(c, p, k)) {
        mod = c;
        found = true;
        break;
      }
      // increment (c_{k-1},...,c_0) lexicographically: c_0 varies fastest
      int i = 0;
      while (i < k) {
        c[static_cast<size_t>(i)]++;
        if (c[static_cast<size_t>(i)] < p) break;
        c[static_cast<size_t>(i)] = 0;
        ++i;
      }
      invariant(i < k, "no irreducible modulus found");
    }
  }
  F.modulus = mod;
  F.modulus.push_back(1);

  auto decode = [&](int idx) {
    std::vector<int> c(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) {
      c[static_cast<size_t>(i)] = idx % p;
      idx /= p;
    }
    return c;
  };
  auto encode = [&](const std::vector<int>& c) {
    int idx = 0;
    for (int i = k - 1; i >= 0; --i) idx = idx * p + c[static_cast<size_t>(i)];
    return idx;
  };

  F.add.assign(static_cast<size_t>(q) * q, 0);
  F.mul.assign(static_cast<size_t>(q) * q, 0);
  F.neg.assign(static_cast<size_t>(q), 0);
  for (int a = 0; a < q; ++a) {
    auto ca = decode(a);
    std::vector<int> cn(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i)
      cn[static_cast<size_t>(i)] = mod_nonneg(-ca[static_cast<size_t>(i)], p);
    F.neg[static_cast<size_t>(a)] = static_cast<uint8_t>(encode(cn));
    for (int b = 0; b < q; ++b) {
      auto cb = decode(b);
      std::vector<int> cs(static_cast<size_t>(k));
      for (int i = 0; i < k; ++i)
        cs[static_cast<size_t>(i)] =
            (ca[static_cast<size_t>(i)] + cb[static_cast<size_t>(i)]) % p;
      F.add[static_cast<size_t>(a) * q + b] = static_cast<uint8_t>(encode(cs));
      auto cm = detail::polymulmod(ca, cb, mod, p, k);
      F.mul[static_cast<size_t>(a) * q + b] = static_cast<uint8_t>(encode(cm));
    }
  }

  // quadratic character: 0 at 0; +1 on nonzero squares; -1 otherwise.
  // In characteristic 2 squaring is a bijection, so chi is 1 on all nonzero.
  F.chi.assign(static_cast<size_t>(q), -1);
  F.chi[0] = 0;
  for (int x = 1; x < q; ++x)
    F.chi[F.mul[static_cast<size_t>(x) * q + x]] = 1;
  return F;
}

}  // namespace hg
