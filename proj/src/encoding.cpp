#include "turntake/textgrid.hpp"

#include <algorithm>
#include <cstdint>

namespace turntake {
namespace {

std::size_t line_at(std::string_view text, std::size_t offset) {
    return 1 + static_cast<std::size_t>(
                   std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

void append_utf8(std::string& out, char32_t cp) {
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

// Decodes one code point starting at `i`; returns the byte length or 0 when
// the sequence is ill-formed (overlong, surrogate, truncated, out of range).
std::size_t next_utf8(std::string_view s, std::size_t i, char32_t& cp) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    char32_t min = 0;
    if (b0 < 0x80) {
        cp = b0;
        return 1;
    } else if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
        min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
        min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
        min = 0x10000;
    } else {
        return 0;
    }
    if (i + len > s.size()) return 0;
    for (std::size_t k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) return 0;
        cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
    return len;
}

std::string decode_utf16(std::string_view bytes, bool little_endian) {
    if (bytes.size() % 2 != 0)
        throw EncodingError("UTF-16 input has an odd number of bytes", 0, 0);
    std::string out;
    out.reserve(bytes.size() / 2);
    auto unit = [&](std::size_t k) -> char16_t {
        const auto lo = static_cast<unsigned char>(bytes[little_endian ? k : k + 1]);
        const auto hi = static_cast<unsigned char>(bytes[little_endian ? k + 1 : k]);
        return static_cast<char16_t>((hi << 8) | lo);
    };
    for (std::size_t k = 0; k < bytes.size(); k += 2) {
        const char16_t u = unit(k);
        if (u < 0x80) {
            out.push_back(static_cast<char>(u));
            continue;
        }
        char32_t cp = u;
        if (u >= 0xD800 && u <= 0xDBFF) {
            if (k + 2 >= bytes.size())
                throw EncodingError("truncated UTF-16 surrogate pair", line_at(out, out.size()), 0);
            const char16_t low = unit(k + 2);
            if (low < 0xDC00 || low > 0xDFFF)
                throw EncodingError("unpaired UTF-16 high surrogate", line_at(out, out.size()), 0);
            cp = 0x10000 + ((static_cast<char32_t>(u) - 0xD800) << 10) + (low - 0xDC00);
            k += 2;
        } else if (u >= 0xDC00 && u <= 0xDFFF) {
            throw EncodingError("unpaired UTF-16 low surrogate", line_at(out, out.size()), 0);
        }
        append_utf8(out, cp);
    }
    return out;
}

}  // namespace

std::string decode_to_utf8(std::string_view bytes) {
    auto starts_with = [&](std::initializer_list<unsigned char> bom) {
        if (bytes.size() < bom.size()) return false;
        std::size_t k = 0;
        for (unsigned char b : bom)
            if (static_cast<unsigned char>(bytes[k++]) != b) return false;
        return true;
    };
    if (starts_with({0xFF, 0xFE})) return decode_utf16(bytes.substr(2), true);
    if (starts_with({0xFE, 0xFF})) return decode_utf16(bytes.substr(2), false);
    if (starts_with({0xEF, 0xBB, 0xBF})) bytes.remove_prefix(3);

    for (std::size_t i = 0; i < bytes.size();) {
        if (static_cast<unsigned char>(bytes[i]) < 0x80) {
            ++i;
            continue;
        }
        char32_t cp = 0;
        const std::size_t len = next_utf8(bytes, i, cp);
        if (len == 0)
            throw EncodingError("invalid UTF-8 byte sequence at offset " + std::to_string(i),
                                line_at(bytes, i), 0);
        i += len;
    }
    return std::string(bytes);
}

std::string encode_utf16(std::string_view utf8, bool little_endian) {
    std::string out;
    out.reserve(2 + utf8.size() * 2);
    auto put = [&](char16_t u) {
        const char lo = static_cast<char>(u & 0xFF);
        const char hi = static_cast<char>(u >> 8);
        out.push_back(little_endian ? lo : hi);
        out.push_back(little_endian ? hi : lo);
    };
    put(0xFEFF);
    for (std::size_t i = 0; i < utf8.size();) {
        if (static_cast<unsigned char>(utf8[i]) < 0x80) {
            put(static_cast<char16_t>(utf8[i++]));
            continue;
        }
        char32_t cp = 0;
        const std::size_t len = next_utf8(utf8, i, cp);
        if (len == 0) throw EncodingError("invalid UTF-8 input", line_at(utf8, i), 0);
        i += len;
        if (cp >= 0x10000) {
            cp -= 0x10000;
            put(static_cast<char16_t>(0xD800 + (cp >> 10)));
            put(static_cast<char16_t>(0xDC00 + (cp & 0x3FF)));
        } else {
            put(static_cast<char16_t>(cp));
        }
    }
    return out;
}

}  // namespace turntake
