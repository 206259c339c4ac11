#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cameo {

// Timestamps are microseconds since the Unix epoch, UTC.
using Micros = std::int64_t;

inline constexpr Micros kMicrosPerSecond = 1'000'000;

inline double micros_to_seconds(Micros t) {
    return static_cast<double>(t) / static_cast<double>(kMicrosPerSecond);
}

namespace detail {

// Days since 1970-01-01 for a proleptic Gregorian civil date.
inline constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y = yr + (m <= 2);
}

inline bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

// Parses "<int>" or "<int>.<frac>" seconds into microseconds without
// going through floating point, so sub-second precision survives intact.
inline bool parse_epoch_seconds(std::string_view s, Micros& out) {
    bool neg = false;
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) {
        neg = s[i] == '-';
        ++i;
    }
    std::string_view rest = s.substr(i);
    std::string_view int_part = rest, frac_part;
    if (auto dot = rest.find('.'); dot != std::string_view::npos) {
        int_part = rest.substr(0, dot);
        frac_part = rest.substr(dot + 1);
        if (frac_part.empty()) return false;
        if (!all_digits(frac_part)) return false;
    }
    if (!all_digits(int_part)) return false;
    if (int_part.size() > 12) return false;  // > ~31,000 years; reject
    std::int64_t secs = 0;
    for (char c : int_part) secs = secs * 10 + (c - '0');
    std::int64_t micros = 0;
    for (std::size_t k = 0; k < 6; ++k) {
        micros *= 10;
        if (k < frac_part.size()) micros += frac_part[k] - '0';
    }
    out = secs * kMicrosPerSecond + micros;
    if (neg) out = -out;
    return true;
}

}  // namespace detail

// Accepts RFC 3339 text ("2014-03-01T10:00:00Z", fractional seconds and
// numeric UTC offsets permitted) or epoch seconds as a bare number.
// Throws std::invalid_argument on malformed input.
inline Micros parse_timestamp(std::string_view s) {
    if (s.empty()) throw std::invalid_argument("empty timestamp");

    // Epoch-seconds form: nothing but digits, sign, and one dot.
    if (s.find_first_not_of("+-.0123456789") == std::string_view::npos) {
        Micros out;
        if (!detail::parse_epoch_seconds(s, out))
            throw std::invalid_argument("unparseable timestamp: " + std::string(s));
        return out;
    }

    // RFC 3339: YYYY-MM-DD[Tt ]HH:MM:SS[.frac](Z|±HH:MM)
    auto fail = [&]() -> Micros {
        throw std::invalid_argument("unparseable timestamp: " + std::string(s));
    };
    auto digits = [&](std::size_t pos, std::size_t count, int& out) {
        if (pos + count > s.size()) return false;
        out = 0;
        for (std::size_t k = 0; k < count; ++k) {
            char c = s[pos + k];
            if (!std::isdigit(static_cast<unsigned char>(c))) return false;
            out = out * 10 + (c - '0');
        }
        return true;
    };

    int year, month, day, hour, minute, second;
    if (!digits(0, 4, year) || s.size() < 20 || s[4] != '-') return fail();
    if (!digits(5, 2, month) || s[7] != '-') return fail();
    if (!digits(8, 2, day)) return fail();
    if (s[10] != 'T' && s[10] != 't' && s[10] != ' ') return fail();
    if (!digits(11, 2, hour) || s[13] != ':') return fail();
    if (!digits(14, 2, minute) || s[16] != ':') return fail();
    if (!digits(17, 2, second)) return fail();
    if (month < 1 || month > 12 || day < 1 || day > 31) return fail();
    if (hour > 23 || minute > 59 || second > 60) return fail();

    std::size_t pos = 19;
    std::int64_t micros = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == start) return fail();
        // Keep at most microsecond precision; extra digits truncate.
        for (std::size_t k = 0; k < 6; ++k) {
            micros *= 10;
            if (start + k < pos) micros += s[start + k] - '0';
        }
    }

    std::int64_t offset_seconds = 0;
    if (pos >= s.size()) return fail();
    if (s[pos] == 'Z' || s[pos] == 'z') {
        ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
        const bool west = s[pos] == '-';
        int oh, om;
        if (!digits(pos + 1, 2, oh)) return fail();
        if (pos + 3 >= s.size() || s[pos + 3] != ':') return fail();
        if (!digits(pos + 4, 2, om)) return fail();
        offset_seconds = oh * 3600 + om * 60;
        if (west) offset_seconds = -offset_seconds;
        pos += 6;
    } else {
        return fail();
    }
    if (pos != s.size()) return fail();

    const std::int64_t days = detail::days_from_civil(year, static_cast<unsigned>(month),
                                                      static_cast<unsigned>(day));
    const std::int64_t utc_seconds =
        days * 86400 + hour * 3600 + minute * 60 + second - offset_seconds;
    return utc_seconds * kMicrosPerSecond + micros;
}

// RFC 3339 UTC text. Fractional seconds emitted only when nonzero,
// trimmed of trailing zeros, so re-parsing restores the same Micros.
inline std::string format_timestamp(Micros t) {
    std::int64_t secs = t / kMicrosPerSecond;
    std::int64_t micros = t % kMicrosPerSecond;
    if (micros < 0) {
        micros += kMicrosPerSecond;
        secs -= 1;
    }
    std::int64_t days = secs / 86400;
    std::int64_t sod = secs % 86400;
    if (sod < 0) {
        sod += 86400;
        days -= 1;
    }
    std::int64_t year;
    unsigned month, day;
    detail::civil_from_days(days, year, month, day);
    char buf[48];
    int len = std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lld",
                            static_cast<long long>(year), month, day,
                            static_cast<long long>(sod / 3600),
                            static_cast<long long>((sod / 60) % 60),
                            static_cast<long long>(sod % 60));
    std::string out(buf, static_cast<std::size_t>(len));
    if (micros != 0) {
        std::snprintf(buf, sizeof(buf), ".%06lld", static_cast<long long>(micros));
        std::string frac(buf);
        while (frac.back() == '0') frac.pop_back();
        out += frac;
    }
    out += 'Z';
    return out;
}

}  // namespace cameo
