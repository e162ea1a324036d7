// common.hpp — shared error types and integer helpers for hourglass.
// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <gmpxx.h>

namespace hg {

// Exact integer type used for all polynomial coefficients.
using Int = mpz_class;

// Error taxonomy. The CLI maps these onto distinct exit codes so that
// callers can tell a bad invocation from an exhausted budget from a bug.
struct UserError : std::runtime_error {
  explicit UserError(const std::string& m) : std::runtime_error(m) {}
};
struct BudgetError : std::runtime_error {
  explicit BudgetError(const std::string& m) : std::runtime_error(m) {}
};
struct InternalError : std::logic_error {
  explicit InternalError(const std::string& m) : std::logic_error(m) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw UserError(msg);
}
inline void invariant(bool cond, const std::string& msg) {
  if (!cond) throw InternalError(msg);
}

// Euclidean remainder in [0, m).
inline long mod_nonneg(long a, long m) {
  long r = a % m;
  return r < 0 ? r + m : r;
}

// Int value reduced into [0, m) as a machine integer.
inline long int_mod(const Int& a, long m) {
  Int r = a % m;  // GMP keeps the sign of the dividend
  long v = static_cast<long>(r.get_si());
  return mod_nonneg(v, m);
}

inline bool fits_long(const Int& a) { return a.fits_slong_p(); }

}  // namespace hg
