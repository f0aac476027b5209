#include "synth.hpp"
#include "turntake/textgrid.hpp"

#include <doctest.h>

#include <charconv>
#include <cmath>
#include <numeric>

using namespace turntake;

namespace {

const char* kMinimal =
    "File type = \"ooTextFile\"\n"
    "Object class = \"TextGrid\"\n"
    "\n"
    "xmin = 0 \n"
    "xmax = 1 \n"
    "tiers? <exists> \n"
    "size = 1 \n"
    "item []: \n"
    "    item [1]:\n"
    "        class = \"IntervalTier\" \n"
    "        name = \"IPU-003M\" \n"
    "        xmin = 0 \n"
    "        xmax = 1 \n"
    "        intervals: size = 1 \n"
    "        intervals [1]:\n"
    "            xmin = 0 \n"
    "            xmax = 1 \n"
    "            text = \"\" \n";

TextGrid six_tier_layout() {
    TextGrid g{0.0, 4.0, {}};
    for (const std::string spk : {"003M", "023F"}) {
        g.tiers.push_back({"ORT-" + spk, 0.0, 4.0, {{0.0, 1.2, "wo"}, {1.2, 1.5, ""}, {1.5, 4.0, "warst du"}}});
        g.tiers.push_back({"IPU-" + spk, 0.0, 4.0, {{0.0, 1.2, "question"}, {1.2, 4.0, ""}}});
        g.tiers.push_back({"PCOMP-" + spk, 0.0, 4.0, {{0.0, 1.2, "question"}, {1.2, 2.0, "<noise>"}, {2.0, 4.0, ""}}});
    }
    return g;
}

std::string utf16(std::string_view utf8, bool le) { return encode_utf16(utf8, le); }

}  // namespace

TEST_CASE("minimal long-form file parses and re-serializes byte for byte") {
    const TextGrid g = parse_textgrid(kMinimal);
    REQUIRE(g.tiers.size() == 1);
    REQUIRE(g.tiers[0].intervals.size() == 1);
    CHECK(g.tiers[0].name == "IPU-003M");
    CHECK(g.tiers[0].intervals[0].text.empty());
    CHECK(serialize_textgrid(g) == kMinimal);
}

TEST_CASE("six-tier conversation layout") {
    const TextGrid g = parse_textgrid(serialize_textgrid(six_tier_layout()));
    CHECK(g.tiers.size() == 6);
    CHECK(g.tiers[0].name == "ORT-003M");
    CHECK(g.tiers[5].name == "PCOMP-023F");

    const Tier& ipu = extract_tier(g, "IPU-003M");
    CHECK(ipu.name == "IPU-003M");
    CHECK(ipu.intervals[0].text == "question");
    CHECK(&extract_tier(g, "PCOMP-023F", TierMatch::Exact) == &g.tiers[5]);
}

TEST_CASE("extract_tier reports zero and ambiguous matches") {
    const TextGrid g = six_tier_layout();
    CHECK_THROWS_AS(extract_tier(g, "IPU-999X"), TierLookupError);
    try {
        CHECK(extract_tier(g, "U-003M", TierMatch::Suffix).name == "IPU-003M");
        extract_tier(g, "-003M");
        FAIL("ambiguous pattern accepted");
    } catch (const TierLookupError& e) {
        CHECK(e.candidates() == std::vector<std::string>{"ORT-003M", "IPU-003M", "PCOMP-003M"});
        CHECK(std::string(e.what()).find("IPU-003M") != std::string::npos);
        CHECK(std::string(e.what()).find("PCOMP-003M") != std::string::npos);
    }
    // Suffix mode must not match when only exact is asked for.
    CHECK_THROWS_AS(extract_tier(g, "003M", TierMatch::Exact), TierLookupError);
}

TEST_CASE("short and long forms of one grid are structurally equal") {
    synth::Rng rng(11);
    for (int k = 0; k < 20; ++k) {
        const TextGrid g = synth::random_grid(rng);
        const TextGrid from_long = parse_textgrid(serialize_textgrid(g, TextGridForm::Long));
        const TextGrid from_short = parse_textgrid(serialize_textgrid(g, TextGridForm::Short));
        CHECK(structurally_equal(from_long, from_short));
        CHECK(structurally_equal(from_long, g));
    }
}

TEST_CASE("short form layout") {
    const TextGrid g = parse_textgrid(kMinimal);
    CHECK(serialize_textgrid(g, TextGridForm::Short) ==
          "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n0\n1\n<exists>\n1\n\"IntervalTier\"\n"
          "\"IPU-003M\"\n0\n1\n1\n0\n1\n\"\"\n");
}

TEST_CASE("double quotes are doubled and survive a round trip") {
    TextGrid g{0.0, 2.0, {{"t", 0.0, 2.0, {{0.0, 1.0, "say \"hi\""}, {1.0, 2.0, "\"\""}}}}};
    const std::string text = serialize_textgrid(g);
    CHECK(text.find("text = \"say \"\"hi\"\"\" ") != std::string::npos);
    CHECK(text.find("text = \"\"\"\"\"\" ") != std::string::npos);
    const TextGrid back = parse_textgrid(text);
    CHECK(back.tiers[0].intervals[0].text == "say \"hi\"");
    CHECK(back.tiers[0].intervals[1].text == "\"\"");
}

TEST_CASE("text is kept verbatim, including whitespace and line breaks") {
    TextGrid g{0.0, 3.0, {{"t", 0.0, 3.0, {{0.0, 1.0, "  padded "}, {1.0, 2.0, "two\nlines"}, {2.0, 3.0, "tab\t"}}}}};
    for (auto form : {TextGridForm::Long, TextGridForm::Short})
        CHECK(parse_textgrid(serialize_textgrid(g, form)) == g);
}

TEST_CASE("empty tier and grid without tiers") {
    TextGrid g{0.0, 5.0, {{"empty", 0.0, 5.0, {{0.0, 5.0, ""}}}}};
    CHECK(parse_textgrid(serialize_textgrid(g)) == g);

    TextGrid none{0.0, 5.0, {}};
    for (auto form : {TextGridForm::Long, TextGridForm::Short})
        CHECK(parse_textgrid(serialize_textgrid(none, form)) == none);
}

TEST_CASE("UTF-8 with BOM and UTF-16 in both byte orders") {
    TextGrid g{0.0, 2.0, {{"ORT-003M", 0.0, 2.0, {{0.0, 1.0, "Grüße 🙂"}, {1.0, 2.0, "日本"}}}}};
    const std::string text = serialize_textgrid(g);
    CHECK(parse_textgrid("\xEF\xBB\xBF" + text) == g);
    CHECK(parse_textgrid(utf16(text, true)) == g);
    CHECK(parse_textgrid(utf16(text, false)) == g);
    CHECK(utf16(text, true).substr(0, 2) == "\xFF\xFE");
    CHECK(utf16(text, false).substr(0, 2) == "\xFE\xFF");
    // Output is UTF-8 without BOM whatever the input was.
    CHECK(serialize_textgrid(parse_textgrid(utf16(text, false))) == text);
}

TEST_CASE("undecodable bytes") {
    CHECK_THROWS_AS(parse_textgrid(std::string(kMinimal) + "\xC3"), EncodingError);
    CHECK_THROWS_AS(parse_textgrid("\xFF\xFE\x41"), EncodingError);  // odd UTF-16 length
    std::string overlong = kMinimal;
    overlong.replace(overlong.find("IPU"), 1, "\xC0\x81");
    CHECK_THROWS_AS(parse_textgrid(overlong), EncodingError);
}

TEST_CASE("malformed header is reported at line 1, tier 0") {
    std::string bad = kMinimal;
    bad.replace(bad.find("TextGrid"), 8, "Pitch");
    try {
        parse_textgrid(bad);
        FAIL("accepted a non-TextGrid object");
    } catch (const TextGridError& e) {
        CHECK(e.tier() == 0);
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse_textgrid("hello"), TextGridError);
    CHECK_THROWS_AS(parse_textgrid(""), TextGridError);
}

TEST_CASE("overlapping and gapped intervals carry tier index and line") {
    TextGrid g = six_tier_layout();
    std::string text = serialize_textgrid(g);
    // Second tier (IPU-003M): move the start of its second interval back to 1.0.
    const std::size_t tier2 = text.find("name = \"IPU-003M\"");
    const std::size_t pos = text.find("xmin = 1.2", tier2);
    std::string overlap = text;
    overlap.replace(pos, 10, "xmin = 1.0");
    try {
        parse_textgrid(overlap);
        FAIL("overlap accepted");
    } catch (const TextGridError& e) {
        CHECK(e.tier() == 2);
        CHECK(e.line() > 0);
        CHECK(std::string(e.what()).find("overlap") != std::string::npos);
    }
    std::string gap = text;
    gap.replace(pos, 10, "xmin = 1.3");
    try {
        parse_textgrid(gap);
        FAIL("gap accepted");
    } catch (const TextGridError& e) {
        CHECK(e.tier() == 2);
        CHECK(std::string(e.what()).find("gap") != std::string::npos);
    }
}

TEST_CASE("point tiers are rejected with their own error") {
    const std::string text =
        "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\nxmin = 0 \nxmax = 1 \ntiers? <exists> \n"
        "size = 1 \nitem []: \n    item [1]:\n        class = \"TextTier\" \n        name = \"events\" \n"
        "        xmin = 0 \n        xmax = 1 \n        points: size = 0 \n";
    try {
        parse_textgrid(text);
        FAIL("point tier accepted");
    } catch (const UnsupportedTierError& e) {
        CHECK(e.tier() == 1);
    }
}

TEST_CASE("serialize rejects grids that break the invariants") {
    TextGrid g{0.0, 2.0, {{"t", 0.0, 2.0, {{0.0, 1.0, ""}, {0.5, 2.0, ""}}}}};
    CHECK_THROWS_AS(serialize_textgrid(g), InvariantError);
    TextGrid domain{0.0, 2.0, {{"t", 0.0, 3.0, {{0.0, 3.0, ""}}}}};
    CHECK_THROWS_AS(serialize_textgrid(domain), InvariantError);
    TextGrid empty_interval{0.0, 2.0, {{"t", 0.0, 2.0, {{0.0, 0.0, ""}, {0.0, 2.0, ""}}}}};
    CHECK_THROWS_AS(serialize_textgrid(empty_interval), InvariantError);
}

TEST_CASE("format_time") {
    CHECK(format_time(0.0) == "0");
    CHECK(format_time(1.0) == "1");
    CHECK(format_time(1.5) == "1.5");
    CHECK(format_time(0.1) == "0.1");
    CHECK(format_time(0.15) == "0.15");
    CHECK(format_time(123.456) == "123.456");
    CHECK(format_time(1.0 / 3.0) == "0.3333333333333333");
    CHECK(format_time(2.0 / 3.0) == "0.6666666666666666");

    synth::Rng rng(5);
    for (int k = 0; k < 5000; ++k) {
        const double x = synth::uniform(rng, 0.0, 4000.0);
        const std::string s = format_time(x);
        double y = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), y);
        CHECK(format_time(y) == s);
        CHECK(std::fabs(x - y) <= 1e-12 * std::max(1.0, x));
        std::size_t digits = 0;
        for (char c : s) digits += c >= '0' && c <= '9';
        CHECK(digits <= 17);  // at most 16 significant digits plus a leading zero
    }
}

TEST_CASE("parsing keeps file order and contiguous tiers sum to their duration") {
    synth::Rng rng(21);
    for (int k = 0; k < 30; ++k) {
        const TextGrid g = synth::random_grid(rng);
        const TextGrid back = parse_textgrid(serialize_textgrid(g));
        for (std::size_t t = 0; t < back.tiers.size(); ++t) {
            const Tier& tier = back.tiers[t];
            for (std::size_t i = 0; i < tier.intervals.size(); ++i)
                CHECK(tier.intervals[i].text == g.tiers[t].intervals[i].text);
            if (tier.intervals.empty()) continue;
            const double sum = std::accumulate(tier.intervals.begin(), tier.intervals.end(), 0.0,
                                               [](double s, const Interval& iv) { return s + iv.xmax - iv.xmin; });
            CHECK(std::fabs(sum - (tier.xmax - tier.xmin)) < 1e-6);
        }
    }
}

TEST_CASE("Praat comment and label tolerance") {
    // Praat accepts `!` comments and bare numbers without labels in short files.
    std::string text = serialize_textgrid(parse_textgrid(kMinimal), TextGridForm::Short);
    text.insert(text.find("\"IntervalTier\""), "! a comment line\n");
    CHECK(parse_textgrid(text) == parse_textgrid(kMinimal));
}
