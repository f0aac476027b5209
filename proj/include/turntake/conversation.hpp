#pragma once

#include "turntake/textgrid.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace turntake {

/// The tiers of one speaker: orthographic transcription, labelled IPUs and
/// (optionally) labelled PCOMP intervals.
struct SpeakerTiers {
    std::string id;
    Tier words;
    Tier ipu;
    std::optional<Tier> pcomp;
};

struct Conversation {
    std::string id;
    SpeakerTiers a;
    SpeakerTiers b;
    Seconds xmin = 0.0;
    Seconds xmax = 0.0;

    const SpeakerTiers& speaker(int k) const { return k == 0 ? a : b; }
};

/// Tier naming convention `<layer>-<speakerID>` with per-layer prefixes, plus
/// explicit overrides from a mapping file (`<layer>-<speaker><TAB><tier name>`).
struct TierNaming {
    std::string words_prefix = "ORT";
    std::string ipu_prefix = "IPU";
    std::string pcomp_prefix = "PCOMP";
    std::map<std::string, std::string> overrides;

    /// Applies mapping-file overrides on top of `base` (the default naming if omitted).
    static TierNaming with_mapping_file(std::string_view text);
    static TierNaming with_mapping_file(std::string_view text, TierNaming base);
    std::string tier_name(std::string_view prefix, std::string_view speaker) const;
};

/// Speaker IDs in tier order, discovered from `<ipu_prefix>-<speaker>` tiers
/// (or from overrides naming IPU tiers).
std::vector<std::string> discover_speakers(const TextGrid& grid, const TierNaming& naming = {});

/// Builds a two-speaker conversation. Throws TierLookupError when a required
/// tier is missing and std::invalid_argument when the grid does not hold
/// exactly two speakers.
Conversation conversation_from_grid(const TextGrid& grid, std::string id,
                                    const TierNaming& naming = {});

/// Inverse of conversation_from_grid: ORT/IPU/PCOMP per speaker, speaker A first.
TextGrid grid_from_conversation(const Conversation& conv, const TierNaming& naming = {});

}  // namespace turntake
