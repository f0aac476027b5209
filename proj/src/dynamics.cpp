#include "turntake/dynamics.hpp"

#include "turntake/csv.hpp"
#include "turntake/segment.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace turntake {
namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

bool is_hex_color(std::string_view s) {
    if (s.size() != 7 || s[0] != '#') return false;
    for (char c : s.substr(1))
        if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

std::vector<DynamicsTrack> build_tracks(const Conversation& conv, Layer layer, const MacroScheme& scheme,
                                        std::optional<Span> window) {
    std::vector<DynamicsTrack> tracks;
    for (int k = 0; k < 2; ++k) {
        const SpeakerTiers& s = conv.speaker(k);
        if (layer == Layer::Pcomp && !s.pcomp) throw std::invalid_argument("speaker " + s.id + " has no PCOMP tier");
        const Tier& tier = layer == Layer::Ipu ? s.ipu : *s.pcomp;
        DynamicsTrack track{s.id, {}};
        for (const LabeledSpan& span : labeled_spans(tier, layer)) {
            if (!span.label) continue;
            Seconds start = span.span.start, end = span.span.end;
            if (window) {
                if (end <= window->start || start >= window->end) continue;
                start = std::max(start, window->start);
                end = std::min(end, window->end);
            }
            track.entries.push_back({start, end, normalize_for_dynamics(*span.label, scheme)});
        }
        tracks.push_back(std::move(track));
    }
    return tracks;
}

const std::string& Palette::color(const std::string& category) const {
    const auto it = colors.find(category);
    if (it == colors.end()) throw PaletteError("no color for category '" + category + "'");
    return it->second;
}

Palette default_palette(Layer layer) {
    const std::string residue(kResidue);
    if (layer == Layer::Ipu)
        return Palette{{{"hold", "#7FB03F"},
                        {"incomplete-hold", "#3FB8AF"},
                        {"change", "#D62728"},
                        {"question", "#E377C2"},
                        {"trail-off", "#FF7F0E"},
                        {"self-interruption", "#8C564B"},
                        {"hrt", "#1F77B4"},
                        {residue, "#9E9E9E"}}};
    return Palette{{{"hold", "#7FB03F"},
                    {"cont", "#C9A227"},
                    {"part", "#3FB8AF"},
                    {"hes", "#2E8B57"},
                    {"disruption", "#5F9EA0"},
                    {"change", "#D62728"},
                    {"question", "#E377C2"},
                    {"q-part", "#F7B6D2"},
                    {"incomplete", "#FF7F0E"},
                    {"hrt", "#1F77B4"},
                    {residue, "#9E9E9E"}}};
}

Palette palette_from_file(std::string_view text, Palette base) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw PaletteError("palette line " + std::to_string(line_no) + ": expected category=#RRGGBB");
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty() || !is_hex_color(value))
            throw PaletteError("palette line " + std::to_string(line_no) + ": expected category=#RRGGBB");
        base.colors[std::string(key)] = std::string(value);
    }
    return base;
}

std::string render_svg(const std::vector<DynamicsTrack>& tracks, Span window, const Palette& palette,
                       const SvgOptions& options) {
    if (!(window.end - window.start > kTimeEpsilon))
        throw std::invalid_argument("dynamics window must have positive length");

    const double left = 80.0, right = 20.0, top = 10.0, gap = 10.0;
    const double plot_w = options.width_px - left - right;
    if (plot_w <= 0.0) throw std::invalid_argument("SVG width too small");
    const double scale = plot_w / (window.end - window.start);
    const double x0 = left;
    auto x_of = [&](Seconds t) { return x0 + (t - window.start) * scale; };

    std::set<std::string> present;
    for (const auto& t : tracks)
        for (const auto& e : t.entries)
            if (e.end > window.start && e.start < window.end) present.insert(e.category);

    const double axis_y = top + static_cast<double>(tracks.size()) * (options.band_px + gap);
    const double legend_y = axis_y + 40.0;
    const double height = legend_y + 20.0 * static_cast<double>(present.size()) + 10.0;

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(options.width_px)
        << "\" height=\"" << num(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";

    for (std::size_t i = 0; i < tracks.size(); ++i) {
        const DynamicsTrack& t = tracks[i];
        const double y = top + static_cast<double>(i) * (options.band_px + gap);
        out << "<g class=\"track\" data-speaker=\"" << xml_escape(t.speaker) << "\">\n"
            << "<text x=\"4\" y=\"" << num(y + options.band_px / 2 + 4) << "\">" << xml_escape(t.speaker)
            << "</text>\n";
        for (const DynamicsEntry& e : t.entries) {
            const Seconds s = std::max(e.start, window.start), f = std::min(e.end, window.end);
            if (f <= s) continue;
            out << "<rect class=\"entry\" x=\"" << num(x_of(s)) << "\" y=\"" << num(y) << "\" width=\""
                << num((f - s) * scale) << "\" height=\"" << num(options.band_px) << "\" fill=\""
                << palette.color(e.category) << "\"><title>" << xml_escape(e.category) << "</title></rect>\n";
        }
        out << "</g>\n";
    }

    out << "<g class=\"axis\">\n"
        << "<line x1=\"" << num(x0) << "\" y1=\"" << num(axis_y) << "\" x2=\"" << num(x0 + plot_w) << "\" y2=\""
        << num(axis_y) << "\" stroke=\"black\"/>\n";
    if (options.tick_every > 0.0) {
        for (auto k = static_cast<long long>(std::ceil(window.start / options.tick_every - 1e-9));; ++k) {
            const Seconds t = static_cast<double>(k) * options.tick_every;
            if (t > window.end + kTimeEpsilon) break;
            char label[32];
            std::snprintf(label, sizeof label, "%g", t);
            out << "<line x1=\"" << num(x_of(t)) << "\" y1=\"" << num(axis_y) << "\" x2=\"" << num(x_of(t))
                << "\" y2=\"" << num(axis_y + 5) << "\" stroke=\"black\"/>"
                << "<text x=\"" << num(x_of(t)) << "\" y=\"" << num(axis_y + 17)
                << "\" text-anchor=\"middle\">" << label << "</text>\n";
        }
    }
    out << "<text x=\"" << num(x0 + plot_w) << "\" y=\"" << num(axis_y + 30)
        << "\" text-anchor=\"end\">time (s)</text>\n</g>\n";

    out << "<g class=\"legend\">\n";
    double ly = legend_y;
    for (const std::string& c : present) {
        out << "<rect class=\"legend-swatch\" x=\"" << num(x0) << "\" y=\"" << num(ly) << "\" width=\"12\" height=\"12\" fill=\""
            << palette.color(c) << "\"/><text x=\"" << num(x0 + 18) << "\" y=\"" << num(ly + 10) << "\">"
            << xml_escape(c) << "</text>\n";
        ly += 20.0;
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

std::string export_csv(const std::vector<DynamicsTrack>& tracks) {
    std::ostringstream out;
    out << "speaker,start,end,category\n";
    for (const auto& t : tracks)
        for (const auto& e : t.entries)
            out << csv_field(t.speaker) << ',' << format_time(e.start) << ',' << format_time(e.end) << ','
                << csv_field(e.category) << '\n';
    return out.str();
}

std::vector<DynamicsTrack> import_csv(std::string_view text) {
    while (text.starts_with('#')) {
        const std::size_t nl = text.find('\n');
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    }
    const auto rows = parse_csv(text);
    if (rows.empty() || rows.front() != std::vector<std::string>{"speaker", "start", "end", "category"})
        throw std::invalid_argument("dynamics CSV must start with the header speaker,start,end,category");
    auto number = [](const std::string& s, std::size_t row) {
        double v = 0.0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size())
            throw std::invalid_argument("dynamics CSV row " + std::to_string(row) + ": bad number '" + s + "'");
        return v;
    };
    std::vector<DynamicsTrack> tracks;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != 4)
            throw std::invalid_argument("dynamics CSV row " + std::to_string(r + 1) + ": expected 4 fields");
        if (tracks.empty() || tracks.back().speaker != row[0]) tracks.push_back({row[0], {}});
        tracks.back().entries.push_back({number(row[1], r + 1), number(row[2], r + 1), row[3]});
    }
    return tracks;
}

}  // namespace turntake
