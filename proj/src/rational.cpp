#include "iac/rational.hpp"

#include <cctype>

namespace iac {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

// cpp_int reads a leading 0 as an octal prefix.
BigInt decimal(std::string_view s) {
  auto first = s.find_first_not_of('0');
  if (first == std::string_view::npos) return 0;
  return BigInt(std::string(s.substr(first)));
}

BigInt pow10(long exponent) {
  BigInt result = 1;
  for (long i = 0; i < exponent; ++i) result *= 10;
  return result;
}

}  // namespace

std::optional<Rational> parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
    text.remove_prefix(1);
  }
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
    text.remove_suffix(1);
  }
  if (text.empty()) return std::nullopt;

  bool negative = false;
  if (text.front() == '+' || text.front() == '-') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto num = text.substr(0, slash);
    auto den = text.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) return std::nullopt;
    BigInt n = decimal(num);
    BigInt d = decimal(den);
    if (d == 0) return std::nullopt;
    Rational r(n, d);
    return negative ? Rational(-r) : r;
  }

  std::string_view mantissa = text;
  long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    mantissa = text.substr(0, e);
    auto exp_text = text.substr(e + 1);
    bool exp_negative = false;
    if (!exp_text.empty() && (exp_text.front() == '+' || exp_text.front() == '-')) {
      exp_negative = exp_text.front() == '-';
      exp_text.remove_prefix(1);
    }
    if (!all_digits(exp_text) || exp_text.size() > 6) return std::nullopt;
    exponent = std::stol(std::string(exp_text));
    if (exp_negative) exponent = -exponent;
  }

  std::string digits;
  long fraction_digits = 0;
  if (auto dot = mantissa.find('.'); dot != std::string_view::npos) {
    auto whole = mantissa.substr(0, dot);
    auto frac = mantissa.substr(dot + 1);
    if (whole.empty() && frac.empty()) return std::nullopt;
    if ((!whole.empty() && !all_digits(whole)) || (!frac.empty() && !all_digits(frac))) {
      return std::nullopt;
    }
    digits = std::string(whole) + std::string(frac);
    fraction_digits = static_cast<long>(frac.size());
  } else {
    if (!all_digits(mantissa)) return std::nullopt;
    digits = std::string(mantissa);
  }

  exponent -= fraction_digits;
  Rational value{decimal(digits)};
  if (exponent > 0) {
    value *= pow10(exponent);
  } else if (exponent < 0) {
    value /= pow10(-exponent);
  }
  return negative ? Rational(-value) : value;
}

std::string to_string(const Rational& value) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  if (denominator(value) == 1) return numerator(value).str();
  return numerator(value).str() + "/" + denominator(value).str();
}

bool is_integer(const Rational& value) {
  return boost::multiprecision::denominator(value) == 1;
}

BigInt floor_of(const Rational& value) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  BigInt q = numerator(value) / denominator(value);  // truncates toward zero
  if (value < 0 && Rational(q) != value) q -= 1;
  return q;
}

BigInt ceil_of(const Rational& value) {
  BigInt f = floor_of(value);
  return Rational(f) == value ? f : BigInt(f + 1);
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

std::string smtlib_int(const Rational& value) {
  auto n = boost::multiprecision::numerator(value);
  if (n < 0) return "(- " + BigInt(-n).str() + ")";
  return n.str();
}

std::string smtlib_real(const Rational& value) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  BigInt n = numerator(value);
  BigInt d = denominator(value);
  bool negative = n < 0;
  if (negative) n = -n;
  std::string body = d == 1 ? n.str() + ".0" : "(/ " + n.str() + ".0 " + d.str() + ".0)";
  return negative ? "(- " + body + ")" : body;
}

}  // namespace iac
