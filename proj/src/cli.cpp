#include "turntake/cli.hpp"

#include "turntake/agreement.hpp"
#include "turntake/conversation.hpp"
#include "turntake/dynamics.hpp"
#include "turntake/lint.hpp"
#include "turntake/segment.hpp"
#include "turntake/stats.hpp"
#include "turntake/textgrid.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

namespace turntake {
namespace fs = std::filesystem;

namespace {

struct RunConfig {
    std::string command;
    std::vector<std::string> inputs;
    std::string config_path;
    std::string out = "turntake-out";
    std::string format = "both";
    std::string tier_map;
    std::string words_prefix = "ORT";
    std::string ipu_prefix = "IPU";
    std::string pcomp_prefix = "PCOMP";
    std::string token_map;
    double threshold_ms = 150.0;
    double tolerance_ms = 20.0;
    double lapse_s = 2.0;
    std::string orphans = "attach-right";
    bool include_laughter = false;
    bool include_noise = false;
    std::string layer;
    std::string scheme = "turn-taking";
    bool keep_uncertainty = false;
    bool include_uncertain = false;
    bool per_conversation = false;
    std::string name = "corpus";
    std::string from_s;
    std::string to_s;
    std::string palette;
    double width_px = 1200.0;
    std::string form = "long";
};

class CommandError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

std::string number_text(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CommandError("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

std::optional<double> parse_seconds(const std::string& text, const char* flag) {
    if (text.empty()) return std::nullopt;
    double v = 0.0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size())
        throw CommandError(std::string(flag) + ": not a number: '" + text + "'");
    return v;
}

Layer parse_layer(const std::string& name) {
    if (const auto l = layer_from_name(name)) return *l;
    throw CommandError("unknown layer '" + name + "' (expected IPU or PCOMP)");
}

class Runner {
public:
    Runner(RunConfig cfg, std::vector<std::pair<std::string, std::string>> echo, std::ostream& out,
           std::ostream& err)
        : cfg_(std::move(cfg)), echo_(std::move(echo)), out_(out), err_(err) {}

    int run() {
        if (cfg_.command == "validate") return validate();
        if (cfg_.command == "segment") return segment();
        if (cfg_.command == "agree") return agree();
        if (cfg_.command == "stats") return stats();
        if (cfg_.command == "dynamics") return dynamics();
        if (cfg_.command == "convert") return convert();
        throw CommandError("unknown command '" + cfg_.command + "'");
    }

private:
    TierNaming naming() const {
        TierNaming base;
        base.words_prefix = cfg_.words_prefix;
        base.ipu_prefix = cfg_.ipu_prefix;
        base.pcomp_prefix = cfg_.pcomp_prefix;
        if (cfg_.tier_map.empty()) return base;
        return TierNaming::with_mapping_file(read_file(cfg_.tier_map), base);
    }

    TokenClassifier classifier() const {
        if (cfg_.token_map.empty()) return TokenClassifier::defaults();
        return TokenClassifier::from_mapping(read_file(cfg_.token_map));
    }

    LintOptions lint_options() const {
        LintOptions opt;
        opt.threshold = cfg_.threshold_ms / 1000.0;
        opt.tolerance = cfg_.tolerance_ms / 1000.0;
        opt.lapse = cfg_.lapse_s;
        opt.classifier = classifier();
        return opt;
    }

    TextGrid load_grid(const std::string& path) const {
        try {
            return parse_textgrid(read_file(path));
        } catch (const TextGridError& e) {
            throw CommandError(path + ": " + e.what());
        }
    }

    Conversation load_conversation(const std::string& path) const {
        try {
            return conversation_from_grid(load_grid(path), stem_of(path), naming());
        } catch (const CommandError&) {
            throw;
        } catch (const std::exception& e) {
            throw CommandError(path + ": " + e.what());
        }
    }

    // Runs `body` per input; failures are reported and turn the exit code to 1.
    bool for_each_input(const std::function<void(const std::string&)>& body) {
        bool ok = true;
        for (const std::string& path : cfg_.inputs) {
            try {
                body(path);
            } catch (const std::exception& e) {
                err_ << "error: " << e.what() << '\n';
                ok = false;
            }
        }
        return ok;
    }

    std::string header(const char* comment_open, const char* comment_close = "") const {
        std::ostringstream h;
        h << comment_open << "turntake " << cfg_.command << comment_close << '\n';
        for (const auto& in : cfg_.inputs) h << comment_open << "input = " << in << comment_close << '\n';
        for (const auto& [k, v] : echo_) h << comment_open << k << " = " << v << comment_close << '\n';
        return h.str();
    }

    void write(const std::string& name, const std::string& content) {
        fs::create_directories(cfg_.out);
        const fs::path path = fs::path(cfg_.out) / name;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw CommandError("cannot write '" + path.string() + "'");
        f << content;
        if (!f) throw CommandError("cannot write '" + path.string() + "'");
    }

    bool want_text() const { return cfg_.format == "text" || cfg_.format == "both"; }
    bool want_csv() const { return cfg_.format == "csv" || cfg_.format == "both"; }

    void report(const std::string& base, const std::string& text, const std::string& csv) {
        if (want_text()) write(base + ".txt", header("# ") + text);
        if (want_csv()) write(base + ".csv", header("# ") + csv);
    }

    int validate() {
        const LintOptions opt = lint_options();
        bool any_errors = false;
        const bool ok = for_each_input([&](const std::string& path) {
            const Conversation conv = load_conversation(path);
            const auto diags = lint_conversation(conv, opt);
            std::size_t counts[3] = {0, 0, 0};
            for (const Diagnostic& d : diags) ++counts[static_cast<int>(d.severity)];
            any_errors |= counts[0] > 0;
            report(conv.id + "_all_diagnostics", diagnostics_text(path, diags), diagnostics_csv(path, diags));

            if (conv.a.pcomp && conv.b.pcomp) {
                const auto cross = cross_layer_report(conv, opt.tolerance);
                std::ostringstream text, csv;
                text << "IPU ends:";
                for (auto c : {BoundaryClass::Coincident, BoundaryClass::Inside, BoundaryClass::Outside})
                    text << ' ' << boundary_class_name(c) << '=' << cross.count_ipu(c);
                text << "\nPCOMP ends:";
                for (auto c : {BoundaryClass::Coincident, BoundaryClass::Inside, BoundaryClass::Outside})
                    text << ' ' << boundary_class_name(c) << '=' << cross.count_pcomp(c);
                text << '\n';
                csv << "speaker,layer,time,class\n";
                for (const auto& b : cross.ipu_ends)
                    csv << b.speaker << ",IPU," << format_time(b.time) << ',' << boundary_class_name(b.cls) << '\n';
                for (const auto& b : cross.pcomp_ends)
                    csv << b.speaker << ",PCOMP," << format_time(b.time) << ',' << boundary_class_name(b.cls) << '\n';
                report(conv.id + "_PCOMP_crosslayer", text.str(), csv.str());
            }
            out_ << path << ": " << counts[0] << " errors, " << counts[1] << " warnings, " << counts[2]
                 << " info\n";
        });
        if (!ok) return kExitFailure;
        return any_errors ? kExitLintErrors : kExitOk;
    }

    int segment() {
        SegmentOptions opt;
        opt.threshold = cfg_.threshold_ms / 1000.0;
        opt.include_laughter = cfg_.include_laughter;
        opt.include_noise = cfg_.include_noise;
        if (cfg_.orphans == "attach-right") opt.orphans = OrphanPolicy::AttachRight;
        else if (cfg_.orphans == "attach-left") opt.orphans = OrphanPolicy::AttachLeft;
        else opt.orphans = OrphanPolicy::Standalone;
        const TokenClassifier cls = classifier();
        const TierNaming names = naming();

        const bool ok = for_each_input([&](const std::string& path) {
            TextGrid grid = load_grid(path);
            const std::string word_prefix = names.words_prefix + "-";
            std::vector<std::pair<std::string, Tier>> word_tiers;
            for (const Tier& t : grid.tiers) {
                std::string speaker;
                for (const auto& [key, name] : names.overrides)
                    if (name == t.name && key.rfind(word_prefix, 0) == 0) speaker = key.substr(word_prefix.size());
                if (speaker.empty() && t.name.rfind(word_prefix, 0) == 0) speaker = t.name.substr(word_prefix.size());
                if (!speaker.empty()) word_tiers.emplace_back(speaker, t);
            }
            if (word_tiers.empty()) throw CommandError(path + ": no '" + word_prefix + "<speaker>' tiers");

            out_ << path << ':';
            for (const auto& [speaker, words] : word_tiers) {
                const auto proposals = propose_ipus(words, cls, opt);
                Tier tier{names.ipu_prefix + "-auto-" + speaker, grid.xmin, grid.xmax, {}};
                Seconds cursor = grid.xmin;
                for (const IpuProposal& p : proposals) {
                    if (p.start > cursor + kTimeEpsilon) tier.intervals.push_back({cursor, p.start, ""});
                    tier.intervals.push_back({p.start, p.end, "<ipu>"});
                    cursor = p.end;
                }
                if (cursor < grid.xmax - kTimeEpsilon || tier.intervals.empty())
                    tier.intervals.push_back({cursor, grid.xmax, ""});
                std::erase_if(grid.tiers, [&](const Tier& t) { return t.name == tier.name; });
                grid.tiers.push_back(std::move(tier));
                out_ << ' ' << speaker << '=' << proposals.size();
            }
            out_ << '\n';
            write(stem_of(path) + "_IPU_segment.TextGrid", serialize_textgrid(grid));
        });
        return ok ? kExitOk : kExitFailure;
    }

    int agree() {
        if (cfg_.inputs.size() != 2) throw CommandError("agree takes exactly two files (annotator A, annotator B)");
        const Layer layer = parse_layer(cfg_.layer.empty() ? "IPU" : cfg_.layer);
        const Seconds tol = cfg_.tolerance_ms / 1000.0;
        const Conversation a = load_conversation(cfg_.inputs[0]);
        const Conversation b = load_conversation(cfg_.inputs[1]);

        std::vector<std::string> warnings;
        if (!time_equal(a.xmin, b.xmin, tol) || !time_equal(a.xmax, b.xmax, tol))
            warnings.push_back("recording domains differ: [" + format_time(a.xmin) + ", " + format_time(a.xmax) +
                               "] vs [" + format_time(b.xmin) + ", " + format_time(b.xmax) + "]");
        std::vector<std::string> ids_a{a.a.id, a.b.id}, ids_b{b.a.id, b.b.id};
        std::sort(ids_a.begin(), ids_a.end());
        std::sort(ids_b.begin(), ids_b.end());
        if (ids_a != ids_b) throw CommandError("the two files annotate different speakers");

        const TokenClassifier cls = classifier();
        std::vector<AlignedPair> pairs;
        BoundaryAgreement bounds;
        for (int k = 0; k < 2; ++k) {
            const SpeakerTiers& sa = a.speaker(k);
            const SpeakerTiers& sb = b.speaker(a.a.id == b.a.id ? k : 1 - k);
            const auto tier = [&](const SpeakerTiers& s) -> const Tier& {
                if (layer == Layer::Ipu) return s.ipu;
                if (!s.pcomp) throw CommandError("speaker " + s.id + " has no PCOMP tier");
                return *s.pcomp;
            };
            const auto aligned = align(tier(sa), tier(sb), tol);
            pairs.insert(pairs.end(), aligned.begin(), aligned.end());

            std::vector<Seconds> candidates, ends_a, ends_b;
            for (const Interval& w : sa.words.intervals) {
                try {
                    if (cls.classify(w.text) == TokenClass::Word) candidates.push_back(w.xmax);
                } catch (const UnclassifiableTokenError&) {
                }
            }
            for (const auto& s : labeled_spans(tier(sa), layer)) ends_a.push_back(s.span.end);
            for (const auto& s : labeled_spans(tier(sb), layer)) ends_b.push_back(s.span.end);
            if (candidates.empty()) continue;
            const auto r = boundary_agreement(ends_a, ends_b, candidates, tol);
            bounds.both += r.both;
            bounds.only_a += r.only_a;
            bounds.only_b += r.only_b;
            bounds.neither += r.neither;
            bounds.uncovered_a.insert(bounds.uncovered_a.end(), r.uncovered_a.begin(), r.uncovered_a.end());
            bounds.uncovered_b.insert(bounds.uncovered_b.end(), r.uncovered_b.begin(), r.uncovered_b.end());
        }
        const std::size_t n_candidates = bounds.both + bounds.only_a + bounds.only_b + bounds.neither;
        if (n_candidates)
            bounds.agreement = static_cast<double>(bounds.both + bounds.neither) / static_cast<double>(n_candidates);

        std::vector<const MacroScheme*> groupings{&scheme_by_name(layer, "turn-taking")};
        if (layer == Layer::Ipu) groupings.push_back(&scheme_by_name(layer, "completeness"));
        const AgreementReport rep = agreement_report(pairs, layer, groupings, cfg_.keep_uncertainty);

        std::ostringstream text;
        for (const auto& w : warnings) {
            text << "warning: " << w << '\n';
            err_ << "warning: " << w << '\n';
        }
        text << report_text(rep);
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "boundaries: candidates = %zu, both = %zu, only A = %zu, only B = %zu, neither = %zu, "
                      "agreement = %.4f\n",
                      n_candidates, bounds.both, bounds.only_a, bounds.only_b, bounds.neither, bounds.agreement);
        text << buf;
        text << "boundaries off candidate positions: A = " << bounds.uncovered_a.size()
             << ", B = " << bounds.uncovered_b.size() << '\n';

        std::ostringstream csv;
        csv << "scope,metric,value\n";
        for (const auto& w : warnings) csv << "header,warning," << '"' << w << "\"\n";
        csv << "alignment,aligned," << rep.n_aligned << "\nalignment,unmatched_a," << rep.n_unmatched_a
            << "\nalignment,unmatched_b," << rep.n_unmatched_b << '\n';
        auto kappa_rows = [&](const std::string& scope, const KappaSummary& s) {
            csv << scope << ",n," << s.matrix.total() << '\n' << scope << ",agreements," << s.matrix.trace() << '\n';
            if (!s.error.empty()) {
                csv << scope << ",kappa,undefined\n";
                return;
            }
            for (const auto& [k, v] : std::vector<std::pair<const char*, double>>{{"p_o", s.cohen.p_o},
                                                                                  {"cohen_p_e", s.cohen.p_e},
                                                                                  {"cohen_kappa", s.cohen.kappa},
                                                                                  {"fleiss_p_e", s.fleiss.p_e},
                                                                                  {"fleiss_kappa", s.fleiss.kappa},
                                                                                  {"fleiss_z", s.fleiss.z}})
                csv << scope << ',' << k << ',' << format_time(v) << '\n';
        };
        kappa_rows("labels", rep.raw);
        for (const auto& [name, s] : rep.grouped) kappa_rows(name, s);
        csv << "partial,full," << rep.partial.full << "\npartial,partial," << rep.partial.partial
            << "\npartial,none," << rep.partial.none << "\npartial,unparsed," << rep.partial.unparsed << '\n';
        csv << "boundaries,candidates," << n_candidates << "\nboundaries,both," << bounds.both
            << "\nboundaries,only_a," << bounds.only_a << "\nboundaries,only_b," << bounds.only_b
            << "\nboundaries,neither," << bounds.neither << "\nboundaries,agreement," << format_time(bounds.agreement)
            << '\n';

        const std::string base = a.id + "_" + std::string(layer_name(layer));
        report(base + "_agreement", text.str(), csv.str());
        if (want_csv()) {
            write(base + "_confusion-labels.csv", header("# ") + rep.raw.matrix.to_csv());
            for (const auto& [name, s] : rep.grouped)
                write(base + "_confusion-" + name + ".csv", header("# ") + s.matrix.to_csv());
        }
        out_ << text.str();
        return kExitOk;
    }

    int stats() {
        std::vector<Conversation> convs;
        const bool ok = for_each_input([&](const std::string& path) { convs.push_back(load_conversation(path)); });
        std::sort(convs.begin(), convs.end(),
                  [](const Conversation& x, const Conversation& y) { return x.id < y.id; });

        std::vector<Layer> layers;
        const bool all_pcomp = std::all_of(convs.begin(), convs.end(),
                                           [](const Conversation& c) { return c.a.pcomp && c.b.pcomp; });
        if (cfg_.layer.empty() || cfg_.layer == "all") {
            layers.push_back(Layer::Ipu);
            if (all_pcomp && !convs.empty()) layers.push_back(Layer::Pcomp);
        } else {
            layers.push_back(parse_layer(cfg_.layer));
            if (layers.back() == Layer::Pcomp && !all_pcomp) throw CommandError("not every input has PCOMP tiers");
        }

        auto emit = [&](const std::string& name, const std::vector<Conversation>& group) {
            for (Layer layer : layers) {
                const std::string base = name + "_" + std::string(layer_name(layer));
                for (auto mode : {DistributionMode::SingleOnly, DistributionMode::CombinedOnly, DistributionMode::All}) {
                    const auto table = label_distribution(group, layer, mode);
                    report(base + "_distribution-" + std::string(distribution_mode_name(mode)), table.to_text(),
                           table.to_csv());
                }
                const MacroScheme& scheme = scheme_by_name(layer, cfg_.scheme);
                const auto grouped = label_distribution(group, layer, DistributionMode::All, &scheme);
                report(base + "_distribution-" + scheme.name, grouped.to_text(), grouped.to_csv());

                if (layer == Layer::Pcomp) {
                    TurnStructureOptions opt;
                    opt.include_uncertain = cfg_.include_uncertain;
                    const auto rows = turn_structure(group, opt);
                    report(base + "_turns", turn_structure_text(rows), turn_structure_csv(rows));
                } else {
                    std::ostringstream text, csv;
                    csv << "conversation,speaker,speaking_time_s,ipus\n";
                    for (const Conversation& c : group)
                        for (const SpeakingTime& t : speaking_time(c)) {
                            char buf[64];
                            std::snprintf(buf, sizeof buf, "%.3f", t.seconds);
                            csv << c.id << ',' << t.speaker << ',' << buf << ',' << t.ipus << '\n';
                            text << c.id << ' ' << t.speaker << ": " << buf << " s in " << t.ipus << " IPUs\n";
                        }
                    report(base + "_speaking", text.str(), csv.str());
                }
            }
        };
        emit(cfg_.name, convs);
        if (cfg_.per_conversation)
            for (const Conversation& c : convs) emit(c.id, {c});
        out_ << "stats: " << convs.size() << " conversations written to " << cfg_.out << '\n';
        return ok ? kExitOk : kExitFailure;
    }

    int dynamics() {
        const Layer layer = parse_layer(cfg_.layer.empty() ? "IPU" : cfg_.layer);
        const MacroScheme& scheme = scheme_by_name(layer, cfg_.scheme);
        Palette palette = default_palette(layer);
        if (!cfg_.palette.empty()) palette = palette_from_file(read_file(cfg_.palette), palette);
        const auto from = parse_seconds(cfg_.from_s, "--from-s");
        const auto to = parse_seconds(cfg_.to_s, "--to-s");
        SvgOptions svg;
        svg.width_px = cfg_.width_px;

        const bool ok = for_each_input([&](const std::string& path) {
            const Conversation conv = load_conversation(path);
            const Span window{from.value_or(conv.xmin), to.value_or(conv.xmax)};
            if (!(window.end > window.start))
                throw CommandError(path + ": empty time window [" + format_time(window.start) + ", " +
                                   format_time(window.end) + "]");
            const auto tracks = build_tracks(conv, layer, scheme, window);
            const std::string base = conv.id + "_" + std::string(layer_name(layer)) + "_dynamics";
            std::string doc = render_svg(tracks, window, palette, svg);
            const std::size_t decl_end = doc.find('\n') + 1;
            doc.insert(decl_end, header("<!-- ", " -->"));
            write(base + ".svg", doc);
            write(base + ".csv", header("# ") + export_csv(tracks));
            std::size_t n = 0;
            for (const auto& t : tracks) n += t.entries.size();
            out_ << path << ": " << n << " entries\n";
        });
        return ok ? kExitOk : kExitFailure;
    }

    int convert() {
        const TextGridForm form = cfg_.form == "short" ? TextGridForm::Short : TextGridForm::Long;
        const bool ok = for_each_input([&](const std::string& path) {
            write(stem_of(path) + "_all_converted.TextGrid", serialize_textgrid(load_grid(path), form));
            out_ << path << ": converted\n";
        });
        return ok ? kExitOk : kExitFailure;
    }

    RunConfig cfg_;
    std::vector<std::pair<std::string, std::string>> echo_;
    std::ostream& out_;
    std::ostream& err_;
};

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        const std::string line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(std::string_view(line).substr(0, eq));
        if (key.rfind("--", 0) == 0) key.erase(0, 2);
        if (key.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
        out.emplace_back(std::move(key), trim(std::string_view(line).substr(eq + 1)));
    }
    return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Turn-taking annotation toolkit for dyadic conversations in Praat TextGrids", "turntake"};
    app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    auto common = [&](CLI::App* s, bool lint_settings) {
        s->add_option("inputs", cfg.inputs, "TextGrid files")
            ->required()
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
        s->add_option("--config", cfg.config_path, "config file of `key = value` lines (default: $TURNTAKE_CONFIG)");
        s->add_option("--out", cfg.out, "output directory");
        s->add_option("--tier-map", cfg.tier_map, "tier mapping file: `<layer>-<speaker><TAB><tier name>` lines");
        s->add_option("--words-prefix", cfg.words_prefix, "prefix of orthographic tiers");
        s->add_option("--ipu-prefix", cfg.ipu_prefix, "prefix of IPU tiers");
        s->add_option("--pcomp-prefix", cfg.pcomp_prefix, "prefix of PCOMP tiers");
        if (lint_settings) {
            s->add_option("--token-map", cfg.token_map, "token class mapping file: `key<TAB>class` lines");
            s->add_option("--ipu-threshold-ms", cfg.threshold_ms, "minimum silence separating IPUs")
                ->check(CLI::PositiveNumber);
            s->add_option("--tolerance-ms", cfg.tolerance_ms, "boundary tolerance")->check(CLI::NonNegativeNumber);
        }
    };
    auto formats = [&](CLI::App* s) {
        s->add_option("--format", cfg.format, "report formats")->check(CLI::IsMember({"text", "csv", "both"}));
    };

    CLI::App* validate = app.add_subcommand("validate", "lint labels and segmentation; exit 2 on errors");
    common(validate, true);
    formats(validate);
    validate->add_option("--lapse-s", cfg.lapse_s, "silence after an hrt counted as a lapse")
        ->check(CLI::PositiveNumber);

    CLI::App* segment = app.add_subcommand("segment", "propose IPUs from word tiers into IPU-auto-<speaker> tiers");
    common(segment, true);
    segment->add_option("--orphans", cfg.orphans, "breath groups isolated by long silences")
        ->check(CLI::IsMember({"attach-right", "attach-left", "standalone"}));
    segment->add_flag("--include-laughter", cfg.include_laughter, "laughter joins IPUs like breathing");
    segment->add_flag("--include-noise", cfg.include_noise, "noises join IPUs like breathing");

    CLI::App* agree = app.add_subcommand("agree", "inter-annotator agreement between two annotations of one recording");
    common(agree, true);
    formats(agree);
    agree->add_option("--layer", cfg.layer, "IPU or PCOMP (default IPU)");
    agree->add_flag("--keep-uncertainty", cfg.keep_uncertainty, "treat `@` labels as distinct categories");

    CLI::App* stats = app.add_subcommand("stats", "label distributions and turn structure over a corpus");
    common(stats, false);
    formats(stats);
    stats->add_option("--layer", cfg.layer, "IPU, PCOMP or all (default all)");
    stats->add_option("--scheme", cfg.scheme, "macro scheme for the grouped table")
        ->check(CLI::IsMember({"turn-taking", "completeness"}));
    stats->add_option("--name", cfg.name, "name of the corpus-level reports");
    stats->add_flag("--per-conversation", cfg.per_conversation, "also write reports per conversation");
    stats->add_flag("--include-uncertain", cfg.include_uncertain, "count `@` labels in the turn structure");

    CLI::App* dynamics = app.add_subcommand("dynamics", "colour-coded label timelines as SVG and CSV");
    common(dynamics, false);
    dynamics->add_option("--layer", cfg.layer, "IPU or PCOMP (default IPU)");
    dynamics->add_option("--scheme", cfg.scheme, "macro scheme used to clean combined labels")
        ->check(CLI::IsMember({"turn-taking", "completeness"}));
    dynamics->add_option("--from-s", cfg.from_s, "window start in seconds (default: recording start)");
    dynamics->add_option("--to-s", cfg.to_s, "window end in seconds (default: recording end)");
    dynamics->add_option("--palette", cfg.palette, "palette file: `category=#RRGGBB` lines");
    dynamics->add_option("--width-px", cfg.width_px, "SVG width")->check(CLI::PositiveNumber);

    CLI::App* convert = app.add_subcommand("convert", "rewrite TextGrids as UTF-8 in long or short form");
    common(convert, false);
    convert->add_option("--form", cfg.form, "long or short text form")->check(CLI::IsMember({"long", "short"}));

    // Config values are inserted ahead of the user's flags; the last value wins.
    std::vector<std::string> argv = args;
    CLI::App* chosen = nullptr;
    if (!argv.empty()) chosen = app.get_subcommand_no_throw(argv.front());
    if (chosen) {
        std::string config_path;
        for (std::size_t i = 1; i < argv.size(); ++i) {
            if (argv[i] == "--config" && i + 1 < argv.size()) config_path = argv[i + 1];
            else if (argv[i].rfind("--config=", 0) == 0) config_path = argv[i].substr(9);
        }
        if (config_path.empty())
            if (const char* env = std::getenv("TURNTAKE_CONFIG"); env && *env) config_path = env;
        if (!config_path.empty()) {
            std::vector<std::pair<std::string, std::string>> entries;
            try {
                entries = parse_config(read_file(config_path));
            } catch (const std::exception& e) {
                err << "error: config " << config_path << ": " << e.what() << '\n';
                return kExitFailure;
            }
            std::vector<std::string> injected;
            for (const auto& [key, value] : entries) {
                if (key == "config") continue;
                const std::string flag = "--" + key;
                if (chosen->get_option_no_throw(flag)) {
                    injected.push_back(flag + "=" + value);
                    continue;
                }
                bool known = false;
                for (const CLI::App* s : app.get_subcommands({}))
                    known |= s->get_option_no_throw(flag) != nullptr;
                if (!known) {
                    err << "error: config " << config_path << ": unknown key '" << key << "'\n";
                    return kExitFailure;
                }
            }
            argv.insert(argv.begin() + 1, injected.begin(), injected.end());
            cfg.config_path = config_path;
        }
    }

    try {
        std::vector<std::string> reversed(argv.rbegin(), argv.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitFailure;
    }

    CLI::App* sub = app.get_subcommands().front();
    cfg.command = sub->get_name();

    // Fully materialized configuration, echoed into report headers.
    const std::map<std::string, std::string> values{
        {"config", cfg.config_path},
        {"out", cfg.out},
        {"format", cfg.format},
        {"tier-map", cfg.tier_map},
        {"words-prefix", cfg.words_prefix},
        {"ipu-prefix", cfg.ipu_prefix},
        {"pcomp-prefix", cfg.pcomp_prefix},
        {"token-map", cfg.token_map},
        {"ipu-threshold-ms", number_text(cfg.threshold_ms)},
        {"tolerance-ms", number_text(cfg.tolerance_ms)},
        {"lapse-s", number_text(cfg.lapse_s)},
        {"orphans", cfg.orphans},
        {"include-laughter", cfg.include_laughter ? "true" : "false"},
        {"include-noise", cfg.include_noise ? "true" : "false"},
        {"layer", cfg.layer.empty() ? (cfg.command == "stats" ? "all" : "IPU") : cfg.layer},
        {"scheme", cfg.scheme},
        {"keep-uncertainty", cfg.keep_uncertainty ? "true" : "false"},
        {"include-uncertain", cfg.include_uncertain ? "true" : "false"},
        {"per-conversation", cfg.per_conversation ? "true" : "false"},
        {"name", cfg.name},
        {"from-s", cfg.from_s.empty() ? "start" : cfg.from_s},
        {"to-s", cfg.to_s.empty() ? "end" : cfg.to_s},
        {"palette", cfg.palette},
        {"width-px", number_text(cfg.width_px)},
        {"form", cfg.form},
    };
    std::vector<std::pair<std::string, std::string>> echo;
    for (const CLI::Option* o : sub->get_options()) {
        if (o->get_lnames().empty()) continue;
        const auto it = values.find(o->get_lnames().front());
        if (it != values.end()) echo.emplace_back(it->first, it->second);
    }

    try {
        return Runner(std::move(cfg), std::move(echo), out, err).run();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace turntake
