#include "turntake/conversation.hpp"

#include <algorithm>
#include <stdexcept>

namespace turntake {

TierNaming TierNaming::with_mapping_file(std::string_view text) { return with_mapping_file(text, TierNaming{}); }

TierNaming TierNaming::with_mapping_file(std::string_view text, TierNaming base) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos)
            throw std::invalid_argument("tier mapping line " + std::to_string(line_no) +
                                        ": expected <layer>-<speaker><TAB><tier name>");
        base.overrides[std::string(line.substr(0, tab))] = std::string(line.substr(tab + 1));
    }
    return base;
}

std::string TierNaming::tier_name(std::string_view prefix, std::string_view speaker) const {
    std::string key = std::string(prefix) + "-" + std::string(speaker);
    const auto it = overrides.find(key);
    return it == overrides.end() ? key : it->second;
}

std::vector<std::string> discover_speakers(const TextGrid& grid, const TierNaming& naming) {
    std::vector<std::string> speakers;
    const std::string prefix = naming.ipu_prefix + "-";
    for (const Tier& tier : grid.tiers) {
        std::string speaker;
        for (const auto& [key, name] : naming.overrides)
            if (name == tier.name && key.rfind(prefix, 0) == 0) speaker = key.substr(prefix.size());
        if (speaker.empty() && tier.name.rfind(prefix, 0) == 0) speaker = tier.name.substr(prefix.size());
        // IPU-auto-<spk> tiers are proposals written by `segment`, not annotations.
        if (speaker.empty() || speaker.rfind("auto-", 0) == 0) continue;
        if (std::find(speakers.begin(), speakers.end(), speaker) == speakers.end())
            speakers.push_back(speaker);
    }
    return speakers;
}

Conversation conversation_from_grid(const TextGrid& grid, std::string id, const TierNaming& naming) {
    const auto speakers = discover_speakers(grid, naming);
    if (speakers.size() != 2)
        throw std::invalid_argument("expected exactly two speakers with '" + naming.ipu_prefix +
                                    "-<speaker>' tiers, found " + std::to_string(speakers.size()));

    auto load = [&](const std::string& spk) {
        SpeakerTiers s;
        s.id = spk;
        s.words = extract_tier(grid, naming.tier_name(naming.words_prefix, spk), TierMatch::Exact);
        s.ipu = extract_tier(grid, naming.tier_name(naming.ipu_prefix, spk), TierMatch::Exact);
        const std::string pcomp = naming.tier_name(naming.pcomp_prefix, spk);
        for (const Tier& t : grid.tiers)
            if (t.name == pcomp) s.pcomp = t;
        return s;
    };

    Conversation conv;
    conv.id = std::move(id);
    conv.a = load(speakers[0]);
    conv.b = load(speakers[1]);
    conv.xmin = grid.xmin;
    conv.xmax = grid.xmax;
    return conv;
}

TextGrid grid_from_conversation(const Conversation& conv, const TierNaming& naming) {
    TextGrid grid;
    grid.xmin = conv.xmin;
    grid.xmax = conv.xmax;
    for (const SpeakerTiers* s : {&conv.a, &conv.b}) {
        Tier words = s->words;
        words.name = naming.tier_name(naming.words_prefix, s->id);
        Tier ipu = s->ipu;
        ipu.name = naming.tier_name(naming.ipu_prefix, s->id);
        grid.tiers.push_back(std::move(words));
        grid.tiers.push_back(std::move(ipu));
        if (s->pcomp) {
            Tier pcomp = *s->pcomp;
            pcomp.name = naming.tier_name(naming.pcomp_prefix, s->id);
            grid.tiers.push_back(std::move(pcomp));
        }
    }
    return grid;
}

}  // namespace turntake
