#pragma once

#include "turntake/conversation.hpp"
#include "turntake/schema.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace turntake {

enum class DistributionMode { SingleOnly, CombinedOnly, All };

std::string_view distribution_mode_name(DistributionMode mode);

/// Label counts per speaker. Columns follow the fixed table order of the layer
/// for single labels; combined labels follow in alphabetical order, those
/// containing `coll` last. In `All` mode every `@` label goes to a final
/// "uncertain" column.
struct DistributionTable {
    Layer layer = Layer::Ipu;
    DistributionMode mode = DistributionMode::All;
    std::vector<std::string> columns;
    std::vector<std::string> speakers;
    std::vector<std::vector<std::int64_t>> counts;  // speakers x columns
    std::int64_t unparsed = 0;                      // labels that failed to parse, not counted

    std::int64_t cell(std::string_view speaker, std::string_view column) const;
    std::vector<std::int64_t> totals() const;
    std::int64_t grand_total() const;

    /// Column shares of the totals row in percent, rounded to one decimal by
    /// largest remainder so that they add up to exactly 100.0.
    std::vector<double> percentages() const;

    /// Header, one row per speaker, TOTAL and % rows.
    std::string to_csv() const;
    std::string to_text() const;
};

inline constexpr std::string_view kUncertainColumn = "uncertain";

/// Speakers appear in order of first occurrence; a speaker present in several
/// conversations gets one merged row. With a grouping, labels are counted by
/// macro category instead of canonical text.
DistributionTable label_distribution(const std::vector<Conversation>& convs, Layer layer,
                                     DistributionMode mode, const MacroScheme* grouping = nullptr);

struct SpeakingTime {
    std::string speaker;
    Seconds seconds = 0.0;
    std::size_t ipus = 0;
};

/// Summed durations and counts of annotated IPU intervals, per speaker.
std::vector<SpeakingTime> speaking_time(const Conversation& conv);

struct TurnStructure {
    std::string speaker;          // empty for the overall summary
    std::int64_t tcu_holding = 0;  // hold
    std::int64_t holding = 0;      // hold + cont
    std::int64_t yielding = 0;     // change + question + incomplete
    std::int64_t mixed = 0;        // combined labels with parts on both sides
    Seconds speaking_time = 0.0;
    std::size_t ipus = 0;

    /// "holding:yielding", e.g. "137:52".
    std::string ratio_text() const;
    /// holding / yielding; empty when nothing yields.
    std::optional<double> ratio() const;
    /// TCUs per turn, (hold + yielding) / yielding; empty when nothing yields.
    std::optional<double> mean_tcus_per_turn() const;
};

struct TurnStructureOptions {
    bool include_uncertain = false;
};

/// PCOMP-based turn structure per speaker (in order of first occurrence)
/// followed by the overall summary. A combined label counts only when all of
/// its parts other than `coll` lie on the same side.
std::vector<TurnStructure> turn_structure(const std::vector<Conversation>& convs,
                                          const TurnStructureOptions& options = {});

std::string turn_structure_csv(const std::vector<TurnStructure>& rows);
std::string turn_structure_text(const std::vector<TurnStructure>& rows);

}  // namespace turntake
