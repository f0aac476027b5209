#pragma once

// Synthetic fixtures shared by the unit tests and the acceptance suite.

#include "turntake/conversation.hpp"
#include "turntake/schema.hpp"
#include "turntake/textgrid.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace turntake::synth {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);
int uniform_int(Rng& rng, int lo, int hi);  // inclusive
bool chance(Rng& rng, double p);

/// Contiguous tier over [xmin, xmax]: the given items, blank intervals in the gaps.
Tier fill_tier(std::string name, Seconds xmin, Seconds xmax, std::vector<Interval> items);

/// 1-8 interval tiers with 0-500 intervals each, full-precision times and
/// labels containing quotes, line breaks, tabs and non-ASCII text.
TextGrid random_grid(Rng& rng);

/// Word tier with `n_tokens` tokens: words, blank silences of 10-400 ms and
/// breath/smack markers.
Tier random_word_tier(Rng& rng, std::size_t n_tokens);

struct IpuRecord {
    int speaker = 0;
    Span span;
    std::string label;
    bool turn_final = false;
    std::optional<Span> breath;   // breath token opening the IPU
    std::vector<Span> words;
    bool hrt_in_next_pause = false;  // the other speaker's hrt sits in the pause that follows
    bool before_lapse = false;
};

struct PcompRecord {
    int speaker = 0;
    Span span;
    std::string label;
};

struct SynthConversation {
    Conversation conv;
    std::vector<IpuRecord> ipus;      // time order
    std::vector<PcompRecord> pcomps;  // time order
};

struct GeneratorOptions {
    int turns = 40;
    bool lapse = true;             // one 3 s silence after a turn-final change
    double uncertain_rate = 0.05;  // share of labels carrying `@`
    double turn_gap_max = 0.8;     // upper bound of the offset between turns
    int max_words = 5;
};

/// Two-speaker conversation whose labels agree with the forward context, whose
/// IPUs are separated by at least 300 ms of silence and whose PCOMP intervals
/// start and end at word edges. Turns alternate; the listener produces hrt
/// tokens only inside the speaker's pauses.
SynthConversation consistent_conversation(Rng& rng, std::string id, std::string speaker_a,
                                          std::string speaker_b, const GeneratorOptions& options = {});

struct TableRow {
    std::string speaker;
    std::vector<std::int64_t> counts;  // in inventory order (coll omitted for PCOMP)
};

/// Single-label counts per speaker, in table order; rows 2k and 2k+1 share a
/// conversation.
const std::vector<TableRow>& ipu_single_table();
const std::vector<TableRow>& pcomp_single_table();

/// Frequent combined PCOMP labels and their corpus counts.
const std::vector<std::pair<std::string, std::int64_t>>& pcomp_combined_counts();

/// Conversation whose `layer` tiers hold exactly the label multisets given per
/// speaker, one-word IPUs in shuffled order. For the PCOMP layer the IPU tiers
/// mirror the intervals with `hold`.
Conversation label_fixture(Rng& rng, std::string id, Layer layer,
                           const std::pair<std::string, std::vector<std::string>>& a,
                           const std::pair<std::string, std::vector<std::string>>& b);

/// One conversation per pair of table rows.
std::vector<Conversation> table_fixture(Layer layer);

/// Two annotations of one recording: A has 135 IPUs, B the 124 of them that
/// A's boundaries agree with, labelled identically in 108 cases.
std::pair<Conversation, Conversation> agreement_fixture();

/// 100 s of 008M/028F (window 200-300 s): a stretch of questions by 008M each
/// answered by a short change of 028F around 270 s.
Conversation question_series_fixture();

/// 600 s of 038F/039F: 038F holds the floor with 039F producing hrt tokens,
/// and the roles invert after 300 s.
Conversation asymmetric_fixture();

}  // namespace turntake::synth
