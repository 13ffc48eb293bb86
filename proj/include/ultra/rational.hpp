#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>
#include <string_view>

namespace ultra {

/// Arbitrary-precision rational, always canonical (lowest terms, positive
/// denominator). Equality is exact.
using Rational = mpq_class;

/// Raised on malformed external input (JSON, rational strings).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an input violates a documented precondition or invariant.
class InvalidInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an internal exact postcondition fails. Signals a bug, not bad
/// input.
class VerificationFailure : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Parses "p/q", "p" or "-p/q" (decimal digits only). The result is reduced.
Rational parse_rational(std::string_view text);

/// "numerator/denominator" in lowest terms, sign on the numerator; integral
/// values are written without the "/1".
std::string format_rational(const Rational& value);

/// n/d in lowest terms. (mpq_class(n, d) alone does not reduce.)
inline Rational ratio(long n, long d) {
  Rational q(n, d);
  q.canonicalize();
  return q;
}

inline double to_double(const Rational& value) { return value.get_d(); }

}  // namespace ultra
