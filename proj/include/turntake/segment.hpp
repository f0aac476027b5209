#pragma once

#include "turntake/schema.hpp"
#include "turntake/textgrid.hpp"
#include "turntake/time.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace turntake {

enum class TokenClass { Word, Silence, Breath, Smack, Laughter, Noise };

std::string_view token_class_name(TokenClass c);
std::optional<TokenClass> token_class_from_name(std::string_view name);

class UnclassifiableTokenError : public std::runtime_error {
public:
    explicit UnclassifiableTokenError(const std::string& text);
};

/// Maps orthographic-tier interval text to a TokenClass.
///
/// Rules are tried in order; a key matches the whole (trimmed) text and may
/// use `*` and `?` wildcards. Blank text is always Silence. Text that matches
/// no rule is a Word unless it looks like a marker (`<...>`), in which case
/// classification fails.
class TokenClassifier {
public:
    struct Rule {
        std::string pattern;
        TokenClass cls;
    };

    TokenClassifier() = default;
    explicit TokenClassifier(std::vector<Rule> rules) : rules_(std::move(rules)) {}

    /// Markers commonly used for breathing, smacks, laughter and noises.
    static TokenClassifier defaults();

    /// Reads `key<TAB>class` lines; `#` starts a comment line. Rules from the
    /// file are tried before the defaults.
    static TokenClassifier from_mapping(std::string_view text);

    TokenClass classify(std::string_view text) const;
    const std::vector<Rule>& rules() const { return rules_; }

private:
    std::vector<Rule> rules_;
};

bool glob_match(std::string_view pattern, std::string_view text);

/// What to do with breath/smack groups isolated by long silences on both sides.
enum class OrphanPolicy { AttachRight, AttachLeft, Standalone };

struct SegmentOptions {
    Seconds threshold = 0.150;
    OrphanPolicy orphans = OrphanPolicy::AttachRight;
    bool include_laughter = false;  // laughter joins IPUs like breathing when set
    bool include_noise = false;
};

struct IpuProposal {
    Seconds start = 0.0;
    Seconds end = 0.0;
    std::size_t first_token = 0;  // index into the source tier
    std::size_t last_token = 0;   // inclusive

    Span span() const { return {start, end}; }
};

/// Groups the tokens of a word tier into Inter-Pausal Units. A run of
/// silence-class tokens of at least `threshold` seconds separates units.
std::vector<IpuProposal> propose_ipus(const Tier& word_tier, const TokenClassifier& classifier,
                                      const SegmentOptions& options = {});

struct Pause {
    Seconds start = 0.0;
    Seconds end = 0.0;
    Seconds duration = 0.0;
};

/// Maximal runs of silence-class intervals.
std::vector<Pause> pauses(const Tier& tier, const TokenClassifier& classifier);

/// Intersections of two ordered, internally disjoint span lists, merged where
/// they touch.
std::vector<Span> overlaps(const std::vector<Span>& a, const std::vector<Span>& b);

/// A non-empty annotation on an IPU or PCOMP tier. `label` is empty when the
/// text did not parse; `error` then holds the reason.
struct LabeledSpan {
    Span span;
    std::string text;
    std::optional<LabelExpr> label;
    std::string error;

    bool is_hrt() const { return label && label->parts.size() == 1 && label->parts[0] == "hrt"; }
};

/// Annotated intervals of a labelled tier. NonLabel intervals (blank text,
/// `<...>` markers) are skipped.
std::vector<LabeledSpan> labeled_spans(const Tier& tier, Layer layer);

struct TransitionOffset {
    std::string from_speaker;
    std::string to_speaker;
    Seconds at = 0.0;      // end of the turn-yielding IPU
    Seconds offset = 0.0;  // negative: overlap, positive: gap
};

/// Offsets at speaker changes: a turn-yielding IPU (change, question,
/// trail-off, self-interruption) followed by the other speaker's next non-hrt
/// IPU. hrt IPUs neither yield nor take the turn.
std::vector<TransitionOffset> transfer_offsets(const std::string& speaker_a,
                                               const std::vector<LabeledSpan>& ipus_a,
                                               const std::string& speaker_b,
                                               const std::vector<LabeledSpan>& ipus_b);

}  // namespace turntake
