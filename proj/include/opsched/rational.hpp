#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace opsched {

/// Exact rational seconds. All scheduling math runs on these so that
/// comparisons and tie-breaks are deterministic; no epsilons anywhere.
using rational = boost::rational<std::int64_t>;

inline double to_double(const rational& r) {
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

inline rational make_rational(std::int64_t num, std::int64_t den) {
    if (den == 0) {
        throw std::invalid_argument("rational: zero denominator");
    }
    return rational(num, den);
}

/// Parses "n" or "n/d". Used by the CLI for duration-valued flags.
inline rational parse_rational(const std::string& text) {
    const auto slash = text.find('/');
    if (slash == std::string::npos) {
        return rational(std::stoll(text));
    }
    const std::int64_t num = std::stoll(text.substr(0, slash));
    const std::int64_t den = std::stoll(text.substr(slash + 1));
    return make_rational(num, den);
}

inline std::string to_string(const rational& r) {
    if (r.denominator() == 1) {
        return std::to_string(r.numerator());
    }
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

}  // namespace opsched
