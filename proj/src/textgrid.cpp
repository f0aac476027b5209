#include "turntake/textgrid.hpp"

#include <charconv>
#include <cstdlib>
#include <optional>

namespace turntake {

TextGridError::TextGridError(const std::string& what, std::size_t line, std::size_t tier)
    : std::runtime_error("line " + std::to_string(line) + ", tier " + std::to_string(tier) + ": " +
                         what),
      line_(line),
      tier_(tier) {}

TierLookupError::TierLookupError(const std::string& what, std::vector<std::string> candidates)
    : std::runtime_error(what), candidates_(std::move(candidates)) {}

// Shortest text of the value rounded to 16 significant digits. A value that
// already has a representation of at most 16 digits survives the rounding
// unchanged, so the result is stable under parse and re-format.
std::string format_time(Seconds t) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, t, std::chars_format::general, 16);
    double rounded = 0.0;
    std::from_chars(buf, res.ptr, rounded);
    res = std::to_chars(buf, buf + sizeof buf, rounded);
    return std::string(buf, res.ptr);
}

namespace {

struct Token {
    enum class Kind { String, Number, Flag, End } kind = Kind::End;
    std::string text;
    std::size_t line = 0;
};

class Tokenizer {
public:
    explicit Tokenizer(std::string_view src) : src_(src) {}

    Token next() {
        for (;;) {
            skip_space();
            if (pos_ >= src_.size()) return {Token::Kind::End, {}, line_};
            const char c = src_[pos_];
            if (c == '"') return read_string();
            if (c == '<') return read_flag();
            if (c == '!') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
                continue;
            }
            if (c == '[') {
                skip_brackets();
                continue;
            }
            if (starts_number()) return read_word(Token::Kind::Number);
            read_word(Token::Kind::End);  // label text such as `xmin =` or `intervals:`
        }
    }

private:
    void skip_space() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '\n') {
                ++line_;
            } else if (c != ' ' && c != '\t' && c != '\r' && c != '\f' && c != '\v') {
                break;
            }
            ++pos_;
        }
    }

    bool is_digit(std::size_t i) const {
        return i < src_.size() && src_[i] >= '0' && src_[i] <= '9';
    }

    bool starts_number() const {
        const char c = src_[pos_];
        if (is_digit(pos_)) return true;
        if (c == '.' && is_digit(pos_ + 1)) return true;
        if (c == '-' || c == '+')
            return is_digit(pos_ + 1) || (src_.size() > pos_ + 2 && src_[pos_ + 1] == '.' &&
                                          is_digit(pos_ + 2));
        return false;
    }

    Token read_word(Token::Kind kind) {
        const std::size_t begin = pos_;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '"' || c == '[') break;
            ++pos_;
        }
        return {kind, std::string(src_.substr(begin, pos_ - begin)), line_};
    }

    Token read_string() {
        const std::size_t start_line = line_;
        ++pos_;
        std::string value;
        for (;;) {
            if (pos_ >= src_.size()) throw TextGridError("unterminated string", start_line, 0);
            const char c = src_[pos_++];
            if (c == '"') {
                if (pos_ < src_.size() && src_[pos_] == '"') {
                    value.push_back('"');
                    ++pos_;
                    continue;
                }
                break;
            }
            if (c == '\n') ++line_;
            value.push_back(c);
        }
        return {Token::Kind::String, std::move(value), start_line};
    }

    Token read_flag() {
        const std::size_t begin = pos_;
        while (pos_ < src_.size() && src_[pos_] != '>' && src_[pos_] != '\n') ++pos_;
        if (pos_ >= src_.size() || src_[pos_] != '>')
            throw TextGridError("unterminated <flag>", line_, 0);
        ++pos_;
        return {Token::Kind::Flag, std::string(src_.substr(begin + 1, pos_ - begin - 2)), line_};
    }

    void skip_brackets() {
        while (pos_ < src_.size() && src_[pos_] != ']') {
            if (src_[pos_] == '\n') ++line_;
            ++pos_;
        }
        if (pos_ < src_.size()) ++pos_;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

class Reader {
public:
    explicit Reader(std::string_view text) : tokens_(text) {}

    void set_tier(std::size_t tier) { tier_ = tier; }
    std::size_t line() const { return last_line_; }

    Token take(Token::Kind kind, const char* what) {
        Token t = tokens_.next();
        last_line_ = t.line;
        if (t.kind != kind) {
            const char* got = t.kind == Token::Kind::End      ? "end of file"
                              : t.kind == Token::Kind::String ? "a string"
                              : t.kind == Token::Kind::Flag   ? "a flag"
                                                              : "a number";
            throw TextGridError(std::string("expected ") + what + ", found " + got, t.line, tier_);
        }
        return t;
    }

    std::string string(const char* what) { return take(Token::Kind::String, what).text; }

    double number(const char* what) {
        Token t = take(Token::Kind::Number, what);
        const char* first = t.text.data();
        const char* last = first + t.text.size();
        if (*first == '+') ++first;
        double value = 0.0;
        auto res = std::from_chars(first, last, value);
        if (res.ec != std::errc() || res.ptr != last)
            throw TextGridError("malformed number '" + t.text + "' for " + what, t.line, tier_);
        return value;
    }

    std::size_t count(const char* what) {
        const double v = number(what);
        if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
            throw TextGridError(std::string("invalid ") + what, last_line_, tier_);
        return static_cast<std::size_t>(v);
    }

    bool exists_flag() {
        Token t = take(Token::Kind::Flag, "<exists> or <absent>");
        if (t.text == "exists") return true;
        if (t.text == "absent") return false;
        throw TextGridError("unknown flag <" + t.text + ">", t.line, tier_);
    }

    void expect_end() {
        Token t = tokens_.next();
        if (t.kind != Token::Kind::End)
            throw TextGridError("trailing content after last tier", t.line, tier_);
    }

private:
    Tokenizer tokens_;
    std::size_t tier_ = 0;
    std::size_t last_line_ = 1;
};

// Checks one tier and throws TextGridError tagged with `line` on failure.
void check_tier(const Tier& tier, const TextGrid& grid, std::size_t index, std::size_t line) {
    if (!(tier.xmin < tier.xmax))
        throw TextGridError("tier '" + tier.name + "' has an empty time domain", line, index);
    if (!time_equal(tier.xmin, grid.xmin) || !time_equal(tier.xmax, grid.xmax))
        throw TextGridError("tier '" + tier.name + "' time domain differs from the grid's", line,
                            index);
    for (std::size_t k = 0; k < tier.intervals.size(); ++k) {
        const Interval& iv = tier.intervals[k];
        const std::string where = "interval " + std::to_string(k + 1);
        if (!(iv.xmin < iv.xmax))
            throw TextGridError(where + " has xmin >= xmax", line, index);
        if (iv.xmin < tier.xmin - kTimeEpsilon || iv.xmax > tier.xmax + kTimeEpsilon)
            throw TextGridError(where + " lies outside the tier domain", line, index);
        if (k > 0) {
            const Seconds prev = tier.intervals[k - 1].xmax;
            if (iv.xmin < prev - kTimeEpsilon)
                throw TextGridError(where + " overlaps its predecessor", line, index);
            if (iv.xmin > prev + kTimeEpsilon)
                throw TextGridError(where + " leaves a gap after its predecessor", line, index);
        }
    }
}

std::string quote(std::string_view s) {
    std::string out;
    out.reserve(s.size() + 2);
    out.push_back('"');
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

TextGrid parse_textgrid(std::string_view bytes) {
    const std::string text = decode_to_utf8(bytes);
    Reader in(text);

    if (in.string("file type") != "ooTextFile")
        throw TextGridError("not a Praat text file (File type must be \"ooTextFile\")", in.line(), 0);
    if (in.string("object class") != "TextGrid")
        throw TextGridError("object class is not TextGrid", in.line(), 0);

    TextGrid grid;
    grid.xmin = in.number("grid xmin");
    grid.xmax = in.number("grid xmax");
    if (!(grid.xmin < grid.xmax)) throw TextGridError("grid has xmin >= xmax", in.line(), 0);

    if (in.exists_flag()) {
        const std::size_t n_tiers = in.count("tier count");
        grid.tiers.reserve(n_tiers);
        for (std::size_t t = 1; t <= n_tiers; ++t) {
            in.set_tier(t);
            const std::string cls = in.string("tier class");
            const std::size_t tier_line = in.line();
            if (cls == "TextTier")
                throw UnsupportedTierError("point tiers (TextTier) are not supported", tier_line, t);
            if (cls != "IntervalTier")
                throw TextGridError("unknown tier class \"" + cls + "\"", tier_line, t);

            Tier tier;
            tier.name = in.string("tier name");
            tier.xmin = in.number("tier xmin");
            tier.xmax = in.number("tier xmax");
            const std::size_t n = in.count("interval count");
            tier.intervals.reserve(n);
            for (std::size_t k = 0; k < n; ++k) {
                Interval iv;
                iv.xmin = in.number("interval xmin");
                iv.xmax = in.number("interval xmax");
                iv.text = in.string("interval text");
                tier.intervals.push_back(std::move(iv));
            }
            check_tier(tier, grid, t, tier_line);
            grid.tiers.push_back(std::move(tier));
        }
    }
    in.expect_end();
    return grid;
}

void validate_textgrid(const TextGrid& grid) {
    if (!(grid.xmin < grid.xmax)) throw InvariantError("grid has xmin >= xmax");
    for (std::size_t t = 0; t < grid.tiers.size(); ++t) {
        try {
            check_tier(grid.tiers[t], grid, t + 1, 0);
        } catch (const TextGridError& e) {
            throw InvariantError(e.what());
        }
    }
}

std::string serialize_textgrid(const TextGrid& grid, TextGridForm form) {
    validate_textgrid(grid);
    std::size_t n_intervals = 0;
    for (const Tier& tier : grid.tiers) n_intervals += tier.intervals.size();
    std::string out;
    out.reserve(256 + n_intervals * (form == TextGridForm::Short ? 48 : 140));
    auto cat = [&out](std::initializer_list<std::string_view> parts) {
        for (std::string_view p : parts) out += p;
    };
    cat({"File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n"});

    if (form == TextGridForm::Short) {
        cat({format_time(grid.xmin), "\n", format_time(grid.xmax), "\n"});
        if (grid.tiers.empty()) {
            out += "<absent>\n";
            return out;
        }
        cat({"<exists>\n", std::to_string(grid.tiers.size()), "\n"});
        for (const Tier& tier : grid.tiers) {
            cat({"\"IntervalTier\"\n", quote(tier.name), "\n", format_time(tier.xmin), "\n", format_time(tier.xmax),
                 "\n", std::to_string(tier.intervals.size()), "\n"});
            for (const Interval& iv : tier.intervals)
                cat({format_time(iv.xmin), "\n", format_time(iv.xmax), "\n", quote(iv.text), "\n"});
        }
        return out;
    }

    cat({"xmin = ", format_time(grid.xmin), " \nxmax = ", format_time(grid.xmax), " \n"});
    if (grid.tiers.empty()) {
        out += "tiers? <absent> \n";
        return out;
    }
    cat({"tiers? <exists> \nsize = ", std::to_string(grid.tiers.size()), " \nitem []: \n"});
    for (std::size_t t = 0; t < grid.tiers.size(); ++t) {
        const Tier& tier = grid.tiers[t];
        cat({"    item [", std::to_string(t + 1), "]:\n        class = \"IntervalTier\" \n        name = ",
             quote(tier.name), " \n        xmin = ", format_time(tier.xmin), " \n        xmax = ",
             format_time(tier.xmax), " \n        intervals: size = ", std::to_string(tier.intervals.size()), " \n"});
        for (std::size_t k = 0; k < tier.intervals.size(); ++k) {
            const Interval& iv = tier.intervals[k];
            cat({"        intervals [", std::to_string(k + 1), "]:\n            xmin = ", format_time(iv.xmin),
                 " \n            xmax = ", format_time(iv.xmax), " \n            text = ", quote(iv.text), " \n"});
        }
    }
    return out;
}

bool structurally_equal(const TextGrid& a, const TextGrid& b, Seconds eps) {
    if (!time_equal(a.xmin, b.xmin, eps) || !time_equal(a.xmax, b.xmax, eps)) return false;
    if (a.tiers.size() != b.tiers.size()) return false;
    for (std::size_t t = 0; t < a.tiers.size(); ++t) {
        const Tier& x = a.tiers[t];
        const Tier& y = b.tiers[t];
        if (x.name != y.name || !time_equal(x.xmin, y.xmin, eps) || !time_equal(x.xmax, y.xmax, eps) ||
            x.intervals.size() != y.intervals.size())
            return false;
        for (std::size_t k = 0; k < x.intervals.size(); ++k) {
            const Interval& p = x.intervals[k];
            const Interval& q = y.intervals[k];
            if (p.text != q.text || !time_equal(p.xmin, q.xmin, eps) || !time_equal(p.xmax, q.xmax, eps))
                return false;
        }
    }
    return true;
}

const Tier& extract_tier(const TextGrid& grid, std::string_view pattern, TierMatch mode) {
    std::vector<const Tier*> hits;
    for (const Tier& tier : grid.tiers) {
        const std::string_view name = tier.name;
        const bool match = mode == TierMatch::Exact
                               ? name == pattern
                               : name.ends_with(pattern);
        if (match) hits.push_back(&tier);
    }
    if (hits.size() == 1) return *hits.front();

    std::vector<std::string> names;
    for (const Tier* t : hits) names.push_back(t->name);
    if (hits.empty())
        throw TierLookupError("no tier matches '" + std::string(pattern) + "'", std::move(names));
    std::string msg = "tier pattern '" + std::string(pattern) + "' is ambiguous:";
    for (const auto& n : names) msg += " '" + n + "'";
    throw TierLookupError(msg, std::move(names));
}

}  // namespace turntake
