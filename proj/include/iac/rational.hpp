#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace iac {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Parses an exact decimal: integers, fixed-point ("3.25"), scientific
/// notation ("1e8", "2.5E-3") and fractions ("1/3"). Leading sign allowed.
std::optional<Rational> parse_rational(std::string_view text);

/// "7", "-7", "1/3", "-5/2".
std::string to_string(const Rational& value);

bool is_integer(const Rational& value);
BigInt floor_of(const Rational& value);
BigInt ceil_of(const Rational& value);
double to_double(const Rational& value);

/// SMT-LIB numeral for an Int context; value must be integral.
/// Negative values are written "(- n)".
std::string smtlib_int(const Rational& value);

/// SMT-LIB literal for a Real context: "3.0", "(/ 1.0 3.0)", "(- 2.0)".
std::string smtlib_real(const Rational& value);

}  // namespace iac
