#pragma once

#include <charconv>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace ctxspell {

// ASCII-only case folding. Corpus surfaces outside ASCII are kept verbatim;
// Unicode normalization is out of scope.
inline char fold_char(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline std::string fold(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = fold_char(c);
    return out;
}

inline bool is_ascii_upper(char c) { return c >= 'A' && c <= 'Z'; }
inline bool is_ascii_lower(char c) { return c >= 'a' && c <= 'z'; }

// Transfers the original token's capitalization pattern onto a replacement:
// initial-capital stays initial-capital. The replacement is assumed to be a
// lowercase confusion-set member.
inline std::string match_capitalization(std::string_view original,
                                        std::string_view replacement) {
    std::string out(replacement);
    if (!original.empty() && !out.empty() && is_ascii_upper(original[0]) &&
        is_ascii_lower(out[0])) {
        out[0] = static_cast<char>(out[0] - 'a' + 'A');
    }
    return out;
}

inline std::vector<std::string> split_whitespace(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
            ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r')
            ++i;
        if (i > start) out.emplace_back(line.substr(start, i - start));
    }
    return out;
}

inline std::vector<std::string> split_char(std::string_view s, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == delim) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
    return std::string(s.substr(b, e - b));
}

template <typename Seq>
std::string join(const Seq& parts, std::string_view sep) {
    std::string out;
    bool first = true;
    for (const auto& p : parts) {
        if (!first) out += sep;
        out += p;
        first = false;
    }
    return out;
}

// Shortest round-trip decimal form, locale-independent. Used everywhere a
// float lands in a model file so identical models serialize byte-identically.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Fixed one-decimal form for report percentages.
inline std::string format_fixed1(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 1);
    return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view s, double& out) {
    if (s == "inf") {
        out = std::numeric_limits<double>::infinity();
        return true;
    }
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline bool parse_int64(std::string_view s, std::int64_t& out) {
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

// Structural UTF-8 validity scan; rejects overlong forms and bad surrogates.
inline bool utf8_valid(std::string_view s) {
    std::size_t i = 0;
    const auto byte = [&](std::size_t j) { return static_cast<unsigned char>(s[j]); };
    while (i < s.size()) {
        unsigned char c = byte(i);
        if (c < 0x80) {
            ++i;
        } else if ((c & 0xE0) == 0xC0) {
            if (i + 1 >= s.size() || (byte(i + 1) & 0xC0) != 0x80 || c < 0xC2) return false;
            i += 2;
        } else if ((c & 0xF0) == 0xE0) {
            if (i + 2 >= s.size() || (byte(i + 1) & 0xC0) != 0x80 ||
                (byte(i + 2) & 0xC0) != 0x80)
                return false;
            if (c == 0xE0 && byte(i + 1) < 0xA0) return false;
            if (c == 0xED && byte(i + 1) >= 0xA0) return false;
            i += 3;
        } else if ((c & 0xF8) == 0xF0) {
            if (i + 3 >= s.size() || (byte(i + 1) & 0xC0) != 0x80 ||
                (byte(i + 2) & 0xC0) != 0x80 || (byte(i + 3) & 0xC0) != 0x80)
                return false;
            if (c == 0xF0 && byte(i + 1) < 0x90) return false;
            if (c > 0xF4 || (c == 0xF4 && byte(i + 1) >= 0x90)) return false;
            i += 4;
        } else {
            return false;
        }
    }
    return true;
}

// FNV-1a 64-bit, used for corpus provenance digests.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string fnv1a64_hex(std::string_view data) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(data);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

}  // namespace ctxspell
