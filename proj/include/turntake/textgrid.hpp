#pragma once

#include "turntake/time.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace turntake {

struct Interval {
    Seconds xmin = 0.0;
    Seconds xmax = 0.0;
    std::string text;

    Span span() const { return {xmin, xmax}; }
    bool operator==(const Interval&) const = default;
};

struct Tier {
    std::string name;
    Seconds xmin = 0.0;
    Seconds xmax = 0.0;
    std::vector<Interval> intervals;

    bool operator==(const Tier&) const = default;
};

struct TextGrid {
    Seconds xmin = 0.0;
    Seconds xmax = 0.0;
    std::vector<Tier> tiers;

    bool operator==(const TextGrid&) const = default;
};

enum class TextGridForm { Long, Short };

/// Raised for anything that stops a file from being read as a TextGrid.
/// `line` is 1-based (0 if unknown); `tier` is 1-based (0 for the header).
class TextGridError : public std::runtime_error {
public:
    TextGridError(const std::string& what, std::size_t line, std::size_t tier);

    std::size_t line() const { return line_; }
    std::size_t tier() const { return tier_; }

private:
    std::size_t line_;
    std::size_t tier_;
};

/// Input contained a point tier (TextTier). Only interval tiers are handled.
class UnsupportedTierError : public TextGridError {
public:
    using TextGridError::TextGridError;
};

/// Bytes could not be decoded as UTF-8 or UTF-16.
class EncodingError : public TextGridError {
public:
    using TextGridError::TextGridError;
};

/// A grid handed to serialize_textgrid() breaks the container invariants.
class InvariantError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Parses a Praat TextGrid in long or short text form. UTF-8 (with or without
/// BOM) and UTF-16 LE/BE (BOM required) are accepted.
TextGrid parse_textgrid(std::string_view bytes);

/// UTF-8 output without BOM.
std::string serialize_textgrid(const TextGrid& grid, TextGridForm form = TextGridForm::Long);

/// Throws InvariantError describing the first violation found.
void validate_textgrid(const TextGrid& grid);

/// Equality of structure and text with times compared within `eps`.
bool structurally_equal(const TextGrid& a, const TextGrid& b, Seconds eps = kTimeEpsilon);

enum class TierMatch { Exact, Suffix };

class TierLookupError : public std::runtime_error {
public:
    TierLookupError(const std::string& what, std::vector<std::string> candidates);
    const std::vector<std::string>& candidates() const { return candidates_; }

private:
    std::vector<std::string> candidates_;
};

/// Returns the single tier whose name equals (Exact) or ends with (Suffix)
/// `pattern`. Zero or several matches raise TierLookupError.
const Tier& extract_tier(const TextGrid& grid, std::string_view pattern,
                         TierMatch mode = TierMatch::Suffix);

/// Transcodes UTF-16 (by BOM) or BOM-prefixed UTF-8 into plain UTF-8 and
/// checks that the result is well formed.
std::string decode_to_utf8(std::string_view bytes);

/// Re-encodes UTF-8 text as UTF-16 with a BOM. Used by `convert` and tests.
std::string encode_utf16(std::string_view utf8, bool little_endian = true);

}  // namespace turntake
