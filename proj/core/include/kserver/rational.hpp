#pragma once

#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace kserver {

// Exact rational arithmetic for phase statistics and harmonic sums.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Overflow headroom for products of costs in bound checks.
#if defined(__SIZEOF_INT128__)
__extension__ typedef __int128 WideInt;
#else
using WideInt = BigInt;
#endif

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

// Smallest integer >= q.
inline std::int64_t ceil_to_int(const Rational& q) {
  BigInt num = boost::multiprecision::numerator(q);
  BigInt den = boost::multiprecision::denominator(q);
  BigInt quot = num / den;
  if (quot * den != num && num > 0) ++quot;
  return quot.convert_to<std::int64_t>();
}

// "p/q" or "p" when the denominator is 1.
inline std::string to_string(const Rational& q) { return q.str(); }

}  // namespace kserver
