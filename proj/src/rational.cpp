#include "aware/rational.hpp"

#include <cctype>

namespace aware {

namespace {

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

} // namespace

Rational parse_rational(const std::string& text) {
    std::string num = text;
    std::string den = "1";
    if (auto slash = text.find('/'); slash != std::string::npos) {
        num = text.substr(0, slash);
        den = text.substr(slash + 1);
    }
    bool neg = false;
    if (!num.empty() && (num[0] == '-' || num[0] == '+')) {
        neg = num[0] == '-';
        num = num.substr(1);
    }
    if (!all_digits(num) || !all_digits(den)) {
        throw InputError("malformed rational: '" + text + "'");
    }
    Integer n(num), d(den);
    if (d == 0) throw InputError("zero denominator in rational: '" + text + "'");
    if (neg) n = -n;
    return Rational(n, d);
}

std::string format_rational(const Rational& r) {
    std::string num = numerator(r).str();
    if (denominator(r) == 1) return num;
    return num + "/" + denominator(r).str();
}

} // namespace aware
