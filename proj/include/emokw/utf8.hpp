#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>

namespace emokw::utf8 {

/// Returned by decode() for a byte that does not start a well-formed sequence.
inline constexpr char32_t kInvalid = 0xFFFFFFFFu;

struct Decoded {
    char32_t codepoint;
    std::size_t length;  // bytes consumed, always >= 1
};

/// Decodes the sequence starting at `pos`. Ill-formed input (bad lead byte,
/// truncated or overlong sequence, surrogate, > U+10FFFF) consumes exactly one
/// byte and yields kInvalid, so scanning loops always make progress.
inline Decoded decode(std::string_view s, std::size_t pos) {
    const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
    const unsigned char lead = byte(pos);
    if (lead < 0x80) return {lead, 1};

    std::size_t len;
    char32_t cp;
    char32_t min;
    if ((lead & 0xE0) == 0xC0) {
        len = 2, cp = lead & 0x1F, min = 0x80;
    } else if ((lead & 0xF0) == 0xE0) {
        len = 3, cp = lead & 0x0F, min = 0x800;
    } else if ((lead & 0xF8) == 0xF0) {
        len = 4, cp = lead & 0x07, min = 0x10000;
    } else {
        return {kInvalid, 1};
    }
    if (pos + len > s.size()) return {kInvalid, 1};
    for (std::size_t i = 1; i < len; ++i) {
        const unsigned char c = byte(pos + i);
        if ((c & 0xC0) != 0x80) return {kInvalid, 1};
        cp = (cp << 6) | (c & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return {kInvalid, 1};
    return {cp, len};
}

/// Byte offset of the first ill-formed sequence, or npos when `s` is valid.
inline std::size_t find_invalid(std::string_view s) {
    for (std::size_t pos = 0; pos < s.size();) {
        const Decoded d = decode(s, pos);
        if (d.codepoint == kInvalid) return pos;
        pos += d.length;
    }
    return std::string_view::npos;
}

inline bool is_valid(std::string_view s) { return find_invalid(s) == std::string_view::npos; }

inline void append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::string encode(char32_t cp) {
    std::string out;
    append(out, cp);
    return out;
}

/// Number of codepoints; each ill-formed byte counts as one.
inline std::size_t length(std::string_view s) {
    std::size_t n = 0;
    for (std::size_t pos = 0; pos < s.size(); ++n) pos += decode(s, pos).length;
    return n;
}

/// Set of codepoints appearing in a UTF-8 string ("。！？" -> {U+3002, U+FF01, U+FF1F}).
inline std::set<char32_t> codepoint_set(std::string_view s) {
    std::set<char32_t> out;
    for (std::size_t pos = 0; pos < s.size();) {
        const Decoded d = decode(s, pos);
        if (d.codepoint != kInvalid) out.insert(d.codepoint);
        pos += d.length;
    }
    return out;
}

}  // namespace emokw::utf8
