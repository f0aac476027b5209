#pragma once

#include "turntake/conversation.hpp"
#include "turntake/schema.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace turntake {

struct DynamicsEntry {
    Seconds start = 0.0;
    Seconds end = 0.0;
    std::string category;
    bool operator==(const DynamicsEntry&) const = default;
};

struct DynamicsTrack {
    std::string speaker;
    std::vector<DynamicsEntry> entries;  // ordered by start, non-overlapping
    bool operator==(const DynamicsTrack&) const = default;
};

/// One track per speaker (A first). Every annotated interval becomes an entry
/// whose category is normalize_for_dynamics of its label; NonLabel and
/// unparseable intervals are dropped. With a window, entries are clipped to it
/// and entries outside it are dropped.
std::vector<DynamicsTrack> build_tracks(const Conversation& conv, Layer layer, const MacroScheme& scheme,
                                        std::optional<Span> window = std::nullopt);

class PaletteError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Category -> `#RRGGBB`.
struct Palette {
    std::map<std::string, std::string> colors;

    /// Throws PaletteError for a category without a color.
    const std::string& color(const std::string& category) const;
};

/// Colors for every category normalize_for_dynamics can produce on the layer.
/// Turn-yielding labels are warm, turn-holding labels cool, hrt blue and the
/// residue class grey.
Palette default_palette(Layer layer);

/// Reads `category=#RRGGBB` lines (blank lines and `#` comments skipped) on
/// top of `base`.
Palette palette_from_file(std::string_view text, Palette base);

struct SvgOptions {
    double width_px = 1200.0;
    double band_px = 28.0;
    Seconds tick_every = 10.0;
};

/// Deterministic SVG: one band per track, one `class="entry"` rect per entry
/// scaled linearly over the window, a legend of the categories present and a
/// time axis. Throws std::invalid_argument for a window without positive length.
std::string render_svg(const std::vector<DynamicsTrack>& tracks, Span window, const Palette& palette,
                       const SvgOptions& options = {});

/// Columns speaker,start,end,category; tracks in order, entries in time order.
std::string export_csv(const std::vector<DynamicsTrack>& tracks);

/// Inverse of export_csv for tracks with entries; leading `#` lines are
/// skipped. Throws std::invalid_argument on malformed rows.
std::vector<DynamicsTrack> import_csv(std::string_view text);

}  // namespace turntake
