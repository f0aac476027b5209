#include "turntake/stats.hpp"

#include "turntake/csv.hpp"
#include "turntake/segment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace turntake {
namespace {

const Tier& layer_tier(const SpeakerTiers& s, Layer layer) {
    if (layer == Layer::Ipu) return s.ipu;
    if (!s.pcomp) throw std::invalid_argument("speaker " + s.id + " has no PCOMP tier");
    return *s.pcomp;
}

std::size_t row_of(std::vector<std::string>& keys, const std::string& key) {
    const auto it = std::find(keys.begin(), keys.end(), key);
    if (it != keys.end()) return static_cast<std::size_t>(it - keys.begin());
    keys.push_back(key);
    return keys.size() - 1;
}

std::string percent_text(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", p);
    return buf;
}

// Aligned plain-text table; first column left-aligned, the rest right-aligned.
std::string aligned(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& r : rows)
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (width.size() <= c) width.push_back(0);
            width[c] = std::max(width[c], r[c].size());
        }
    std::ostringstream out;
    for (const auto& r : rows) {
        std::string line;
        for (std::size_t c = 0; c < r.size(); ++c) {
            const std::string pad(width[c] - r[c].size(), ' ');
            if (c == 0) line += r[c] + pad;
            else line += "  " + pad + r[c];
        }
        out << line << '\n';
    }
    return out.str();
}

}  // namespace

std::string_view distribution_mode_name(DistributionMode mode) {
    switch (mode) {
        case DistributionMode::SingleOnly: return "single";
        case DistributionMode::CombinedOnly: return "combined";
        case DistributionMode::All: return "all";
    }
    return "all";
}

std::int64_t DistributionTable::cell(std::string_view speaker, std::string_view column) const {
    const auto r = std::find(speakers.begin(), speakers.end(), speaker);
    const auto c = std::find(columns.begin(), columns.end(), column);
    if (r == speakers.end() || c == columns.end()) return 0;
    return counts[static_cast<std::size_t>(r - speakers.begin())][static_cast<std::size_t>(c - columns.begin())];
}

std::vector<std::int64_t> DistributionTable::totals() const {
    std::vector<std::int64_t> t(columns.size(), 0);
    for (const auto& row : counts)
        for (std::size_t c = 0; c < row.size(); ++c) t[c] += row[c];
    return t;
}

std::int64_t DistributionTable::grand_total() const {
    const auto t = totals();
    return std::accumulate(t.begin(), t.end(), std::int64_t{0});
}

std::vector<double> DistributionTable::percentages() const {
    const auto t = totals();
    const std::int64_t total = std::accumulate(t.begin(), t.end(), std::int64_t{0});
    std::vector<double> out(t.size(), 0.0);
    if (total == 0) return out;

    // Work in tenths of a percent.
    std::vector<std::int64_t> tenths(t.size());
    std::vector<std::pair<std::int64_t, std::size_t>> remainders;
    std::int64_t assigned = 0;
    for (std::size_t c = 0; c < t.size(); ++c) {
        tenths[c] = t[c] * 1000 / total;
        assigned += tenths[c];
        remainders.emplace_back(t[c] * 1000 % total, c);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });
    for (std::size_t k = 0; assigned < 1000 && k < remainders.size(); ++k, ++assigned) ++tenths[remainders[k].second];
    for (std::size_t c = 0; c < t.size(); ++c) out[c] = static_cast<double>(tenths[c]) / 10.0;
    return out;
}

std::string DistributionTable::to_csv() const {
    std::ostringstream out;
    out << "speaker";
    for (const auto& c : columns) out << ',' << csv_field(c);
    out << ",sum\n";
    auto row = [&](const std::string& name, const std::vector<std::int64_t>& values) {
        out << csv_field(name);
        for (auto v : values) out << ',' << v;
        out << ',' << std::accumulate(values.begin(), values.end(), std::int64_t{0}) << '\n';
    };
    for (std::size_t r = 0; r < speakers.size(); ++r) row(speakers[r], counts[r]);
    row("TOTAL", totals());
    out << '%';
    for (double p : percentages()) out << ',' << percent_text(p);
    out << ',' << (grand_total() ? "100.0" : "0.0") << '\n';
    return out.str();
}

std::string DistributionTable::to_text() const {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"speaker"};
    header.insert(header.end(), columns.begin(), columns.end());
    header.push_back("sum");
    rows.push_back(header);
    auto add = [&](const std::string& name, const std::vector<std::int64_t>& values) {
        std::vector<std::string> r{name};
        for (auto v : values) r.push_back(std::to_string(v));
        r.push_back(std::to_string(std::accumulate(values.begin(), values.end(), std::int64_t{0})));
        rows.push_back(std::move(r));
    };
    for (std::size_t r = 0; r < speakers.size(); ++r) add(speakers[r], counts[r]);
    add("TOTAL", totals());
    std::vector<std::string> pct{"%"};
    for (double p : percentages()) pct.push_back(percent_text(p));
    pct.push_back(grand_total() ? "100.0" : "0.0");
    rows.push_back(std::move(pct));
    return aligned(rows);
}

DistributionTable label_distribution(const std::vector<Conversation>& convs, Layer layer, DistributionMode mode,
                                     const MacroScheme* grouping) {
    DistributionTable table;
    table.layer = layer;
    table.mode = mode;

    std::vector<std::string> fixed;
    if (mode != DistributionMode::CombinedOnly) {
        if (grouping) {
            fixed = grouping->categories;
        } else {
            for (const auto& l : inventory(layer))
                if (l != "coll") fixed.push_back(l);
        }
    }
    std::vector<std::string> columns = fixed;
    struct Hit {
        std::size_t row;
        std::string column;
    };
    std::vector<Hit> hits;

    for (const Conversation& conv : convs) {
        for (int k = 0; k < 2; ++k) {
            const SpeakerTiers& s = conv.speaker(k);
            const std::size_t row = row_of(table.speakers, s.id);
            for (const LabeledSpan& span : labeled_spans(layer_tier(s, layer), layer)) {
                if (!span.label) {
                    ++table.unparsed;
                    continue;
                }
                const LabelExpr& l = *span.label;
                std::string column;
                if (l.uncertain) {
                    if (mode != DistributionMode::All) continue;
                    column = kUncertainColumn;
                } else if (l.is_combined() ? mode == DistributionMode::SingleOnly
                                           : mode == DistributionMode::CombinedOnly) {
                    continue;
                } else {
                    column = grouping ? macro_category(l, *grouping) : canonical_text(l);
                }
                row_of(columns, column);
                hits.push_back({row, std::move(column)});
            }
        }
    }

    // Observed extra columns after the fixed ones: coll combinations last, uncertain at the end.
    std::vector<std::string> extra(columns.begin() + static_cast<std::ptrdiff_t>(fixed.size()), columns.end());
    std::sort(extra.begin(), extra.end(), [](const std::string& x, const std::string& y) {
        const bool ux = x == kUncertainColumn, uy = y == kUncertainColumn;
        if (ux != uy) return uy;
        const bool cx = x.find("coll") != std::string::npos, cy = y.find("coll") != std::string::npos;
        if (cx != cy) return cy;
        return x < y;
    });
    if (mode == DistributionMode::All && std::find(extra.begin(), extra.end(), kUncertainColumn) == extra.end())
        extra.emplace_back(kUncertainColumn);
    table.columns = fixed;
    table.columns.insert(table.columns.end(), extra.begin(), extra.end());

    table.counts.assign(table.speakers.size(), std::vector<std::int64_t>(table.columns.size(), 0));
    for (const Hit& h : hits) {
        const auto c = std::find(table.columns.begin(), table.columns.end(), h.column);
        ++table.counts[h.row][static_cast<std::size_t>(c - table.columns.begin())];
    }
    return table;
}

std::vector<SpeakingTime> speaking_time(const Conversation& conv) {
    std::vector<SpeakingTime> out;
    for (int k = 0; k < 2; ++k) {
        const SpeakerTiers& s = conv.speaker(k);
        SpeakingTime t{s.id, 0.0, 0};
        for (const Interval& iv : s.ipu.intervals) {
            if (is_non_label(iv.text)) continue;
            t.seconds += iv.xmax - iv.xmin;
            ++t.ipus;
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::string TurnStructure::ratio_text() const { return std::to_string(holding) + ":" + std::to_string(yielding); }

std::optional<double> TurnStructure::ratio() const {
    if (yielding == 0) return std::nullopt;
    return static_cast<double>(holding) / static_cast<double>(yielding);
}

std::optional<double> TurnStructure::mean_tcus_per_turn() const {
    if (yielding == 0) return std::nullopt;
    return static_cast<double>(tcu_holding + yielding) / static_cast<double>(yielding);
}

std::vector<TurnStructure> turn_structure(const std::vector<Conversation>& convs,
                                          const TurnStructureOptions& options) {
    enum class Side { None, Hold, Cont, Yield };
    auto side = [](const std::string& part) {
        if (part == "hold") return Side::Hold;
        if (part == "cont") return Side::Cont;
        if (part == "change" || part == "question" || part == "incomplete") return Side::Yield;
        return Side::None;
    };

    std::vector<std::string> ids;
    std::vector<TurnStructure> rows;
    for (const Conversation& conv : convs) {
        const auto times = speaking_time(conv);
        for (int k = 0; k < 2; ++k) {
            const SpeakerTiers& s = conv.speaker(k);
            const std::size_t r = row_of(ids, s.id);
            if (r == rows.size()) rows.push_back(TurnStructure{s.id});
            TurnStructure& row = rows[r];
            row.speaking_time += times[static_cast<std::size_t>(k)].seconds;
            row.ipus += times[static_cast<std::size_t>(k)].ipus;

            for (const LabeledSpan& span : labeled_spans(layer_tier(s, Layer::Pcomp), Layer::Pcomp)) {
                if (!span.label || (span.label->uncertain && !options.include_uncertain)) continue;
                bool any_hold = false, any_yield = false, any_other = false, only_hold = true;
                for (const auto& p : span.label->parts) {
                    if (p == "coll") continue;
                    const Side x = side(p);
                    any_hold |= x == Side::Hold || x == Side::Cont;
                    any_yield |= x == Side::Yield;
                    any_other |= x == Side::None;
                    only_hold &= x == Side::Hold;
                }
                if (!any_hold && !any_yield) continue;
                if (any_other || (any_hold && any_yield)) {
                    ++row.mixed;
                } else if (any_yield) {
                    ++row.yielding;
                } else {
                    ++row.holding;
                    if (only_hold) ++row.tcu_holding;
                }
            }
        }
    }

    TurnStructure overall;
    for (const TurnStructure& r : rows) {
        overall.tcu_holding += r.tcu_holding;
        overall.holding += r.holding;
        overall.yielding += r.yielding;
        overall.mixed += r.mixed;
        overall.speaking_time += r.speaking_time;
        overall.ipus += r.ipus;
    }
    rows.push_back(std::move(overall));
    return rows;
}

namespace {

std::vector<std::vector<std::string>> turn_structure_rows(const std::vector<TurnStructure>& rows) {
    auto num = [](std::optional<double> v, const char* fmt) {
        if (!v) return std::string("undefined");
        char buf[32];
        std::snprintf(buf, sizeof buf, fmt, *v);
        return std::string(buf);
    };
    std::vector<std::vector<std::string>> out{{"speaker", "hold", "holding", "yielding", "mixed", "ratio",
                                               "tcus_per_turn", "speaking_time_s", "ipus"}};
    for (const TurnStructure& r : rows)
        out.push_back({r.speaker.empty() ? "TOTAL" : r.speaker, std::to_string(r.tcu_holding),
                       std::to_string(r.holding), std::to_string(r.yielding), std::to_string(r.mixed),
                       r.ratio_text(), num(r.mean_tcus_per_turn(), "%.2f"), num(r.speaking_time, "%.3f"),
                       std::to_string(r.ipus)});
    return out;
}

}  // namespace

std::string turn_structure_csv(const std::vector<TurnStructure>& rows) {
    std::ostringstream out;
    for (const auto& r : turn_structure_rows(rows)) {
        for (std::size_t c = 0; c < r.size(); ++c) out << (c ? "," : "") << csv_field(r[c]);
        out << '\n';
    }
    return out.str();
}

std::string turn_structure_text(const std::vector<TurnStructure>& rows) { return aligned(turn_structure_rows(rows)); }

}  // namespace turntake
