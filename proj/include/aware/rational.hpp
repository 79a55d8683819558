#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "aware/errors.hpp"

namespace aware {

// Exact rational arithmetic; the whole pipeline is float-free.
using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

// Parses "a" or "a/b" with optional leading '-' on the numerator and b > 0.
// Throws InputError on anything else.
Rational parse_rational(const std::string& text);

// Renders as "a" when the denominator is 1, otherwise "a/b" in lowest terms.
std::string format_rational(const Rational& r);

} // namespace aware
