#include "turntake/lint.hpp"

#include "turntake/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <sstream>

namespace turntake {
namespace {

enum class Expect { None, Same, Other };

Expect ipu_expectation(std::string_view part) {
    if (part == "hold" || part == "incomplete-hold") return Expect::Same;
    if (part == "change" || part == "question" || part == "trail-off" || part == "self-interruption")
        return Expect::Other;
    return Expect::None;
}

// q-part and coll carry no forward-looking turn-taking claim of their own.
Expect pcomp_expectation(std::string_view part) {
    if (part == "hold" || part == "cont" || part == "part" || part == "hes" || part == "disruption")
        return Expect::Same;
    if (part == "change" || part == "question" || part == "incomplete") return Expect::Other;
    return Expect::None;
}

struct Event {
    int who;
    const LabeledSpan* span;
};

std::vector<Event> merge_events(const std::vector<LabeledSpan>& a, const std::vector<LabeledSpan>& b) {
    std::vector<Event> events;
    events.reserve(a.size() + b.size());
    for (const auto& s : a) events.push_back({0, &s});
    for (const auto& s : b) events.push_back({1, &s});
    std::stable_sort(events.begin(), events.end(), [](const Event& x, const Event& y) {
        return x.span->span.start < y.span->span.start;
    });
    return events;
}

Severity downgrade(Severity s) { return s == Severity::Error ? Severity::Warning : Severity::Info; }

Diagnostic make(Severity sev, std::string rule, Span range, std::string speaker, std::string msg,
                const LabeledSpan* on = nullptr) {
    if (on && on->label && on->label->uncertain) sev = downgrade(sev);
    return {sev, std::move(rule), range, std::move(speaker), std::move(msg)};
}

std::string fmt(Seconds t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", t);
    return buf;
}

void label_errors(Layer layer, const std::string& speaker, const std::vector<LabeledSpan>& spans,
                  std::vector<Diagnostic>& out) {
    const std::string prefix(layer_name(layer));
    for (const auto& s : spans) {
        if (s.label) continue;
        std::string rule = prefix + "-LABEL";
        if (layer == Layer::Pcomp) {
            try {
                parse_label(layer, s.text);
            } catch (const LoneCollError&) {
                rule = "PCOMP-COLL";
            } catch (const LabelError&) {
            }
        }
        out.push_back(make(Severity::Error, rule, s.span, speaker, s.error));
    }
}

void forward_context(Layer layer, const Conversation& conv, const std::vector<LabeledSpan>& a,
                     const std::vector<LabeledSpan>& b, const LintOptions& opt,
                     std::vector<Diagnostic>& out) {
    const auto expect = layer == Layer::Ipu ? ipu_expectation : pcomp_expectation;
    const std::string prefix(layer_name(layer));
    const auto events = merge_events(a, b);
    const std::string* ids[2] = {&conv.a.id, &conv.b.id};

    Seconds max_end_before = -1e300;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const Event& e = events[i];
        const LabeledSpan& s = *e.span;
        const std::string& who = *ids[e.who];

        if (layer == Layer::Ipu && s.is_hrt()) {
            // Silence after the token: zero if earlier speech is still running.
            std::optional<Seconds> next_speech;
            if (max_end_before > s.span.end) next_speech = s.span.end;
            std::optional<Seconds> beyond_lapse;
            for (std::size_t j = i + 1; j < events.size() && !next_speech.has_value(); ++j) {
                const Span& f = events[j].span->span;
                if (f.start > s.span.end + opt.lapse) {
                    beyond_lapse = f.start;
                    break;
                }
                if (f.end > s.span.end) next_speech = std::max(f.start, s.span.end);
            }
            if (!next_speech) next_speech = beyond_lapse;
            if (next_speech && *next_speech - s.span.end > opt.lapse)
                out.push_back(make(Severity::Warning, prefix + "-R4", s.span, who,
                                   "hrt followed by " + fmt(*next_speech - s.span.end) +
                                       " s without speech (lapse)",
                                   &s));
        }
        max_end_before = std::max(max_end_before, s.span.end);

        if (!s.label) continue;
        bool wants_same = false, wants_other = false;
        for (const auto& p : s.label->parts) {
            const Expect x = expect(p);
            wants_same |= x == Expect::Same;
            wants_other |= x == Expect::Other;
        }
        if (wants_same == wants_other) continue;  // no claim, or a combined label covering both

        const std::string text = canonical_text(*s.label);
        if (wants_same) {
            for (std::size_t j = i + 1; j < events.size(); ++j) {
                const Event& f = events[j];
                if (f.who != e.who && f.span->is_hrt()) continue;
                if (f.who != e.who)
                    out.push_back(make(Severity::Warning, prefix + "-R1", s.span, who,
                                       "'" + text + "' but " + *ids[f.who] + " speaks next at " +
                                           fmt(f.span->span.start),
                                       &s));
                break;
            }
            continue;
        }

        const Event* next_non_hrt = nullptr;
        bool other_spoke = false;
        for (std::size_t j = i + 1; j < events.size(); ++j) {
            const Event& f = events[j];
            if (f.span->is_hrt()) {
                other_spoke |= f.who != e.who;
                continue;
            }
            next_non_hrt = &f;
            break;
        }
        if (!next_non_hrt || next_non_hrt->who != e.who) continue;
        if (s.label->has("question") && !other_spoke) {
            out.push_back(make(Severity::Warning, prefix + "-R3", s.span, who,
                               "'" + text + "' is not followed by any speech from the other speaker",
                               &s));
        } else {
            out.push_back(make(Severity::Warning, prefix + "-R2", s.span, who,
                               "'" + text + "' but the same speaker continues at " +
                                   fmt(next_non_hrt->span->span.start),
                               &s));
        }
    }
}

struct Token {
    Span span;
    TokenClass cls;
};

std::vector<Token> classify_tokens(const SpeakerTiers& s, const TokenClassifier& classifier,
                                   std::vector<Diagnostic>* out) {
    std::vector<Token> tokens;
    tokens.reserve(s.words.intervals.size());
    for (const Interval& iv : s.words.intervals) {
        TokenClass cls = TokenClass::Noise;
        try {
            cls = classifier.classify(iv.text);
        } catch (const UnclassifiableTokenError& e) {
            if (out) out->push_back(make(Severity::Warning, "ORT-TOKEN", iv.span(), s.id, e.what()));
        }
        tokens.push_back({iv.span(), cls});
    }
    return tokens;
}

// Index of the token containing `t` (first one whose end is beyond t).
std::size_t token_at(const std::vector<Token>& tokens, Seconds t) {
    const auto it = std::upper_bound(tokens.begin(), tokens.end(), t,
                                     [](Seconds v, const Token& tok) { return v < tok.span.end; });
    return static_cast<std::size_t>(it - tokens.begin());
}

bool strictly_inside_word(const std::vector<Token>& tokens, Seconds t, Seconds tol) {
    const std::size_t k = token_at(tokens, t);
    if (k >= tokens.size()) return false;
    const Token& tok = tokens[k];
    return tok.cls == TokenClass::Word && t > tok.span.start + tol && t < tok.span.end - tol;
}

bool near_word_edge(const std::vector<Token>& tokens, Seconds t, Seconds tol, bool start_edge) {
    std::size_t k = token_at(tokens, t - tol);
    for (; k < tokens.size() && tokens[k].span.start <= t + tol; ++k) {
        if (tokens[k].cls != TokenClass::Word) continue;
        const Seconds edge = start_edge ? tokens[k].span.start : tokens[k].span.end;
        if (std::abs(edge - t) <= tol) return true;
    }
    return false;
}

std::string_view class_at(const std::vector<Token>& tokens, Seconds t) {
    const std::size_t k = token_at(tokens, t);
    return k < tokens.size() ? token_class_name(tokens[k].cls) : "nothing";
}

}  // namespace

std::string_view severity_name(Severity s) {
    switch (s) {
        case Severity::Error: return "error";
        case Severity::Warning: return "warning";
        case Severity::Info: return "info";
    }
    return "info";
}

std::vector<Diagnostic> lint_ipu_forward_context(const Conversation& conv, const LintOptions& opt) {
    const auto a = labeled_spans(conv.a.ipu, Layer::Ipu);
    const auto b = labeled_spans(conv.b.ipu, Layer::Ipu);
    std::vector<Diagnostic> out;
    label_errors(Layer::Ipu, conv.a.id, a, out);
    label_errors(Layer::Ipu, conv.b.id, b, out);
    forward_context(Layer::Ipu, conv, a, b, opt, out);
    return out;
}

std::vector<Diagnostic> lint_ipu_segmentation(const Conversation& conv, const LintOptions& opt) {
    std::vector<Diagnostic> out;
    for (const SpeakerTiers* s : {&conv.a, &conv.b}) {
        const auto ipus = labeled_spans(s->ipu, Layer::Ipu);
        const auto tokens = classify_tokens(*s, opt.classifier, &out);

        for (std::size_t k = 0; k + 1 < ipus.size(); ++k) {
            const LabeledSpan& p = ipus[k];
            const LabeledSpan& q = ipus[k + 1];
            const Seconds gap = q.span.start - p.span.end;
            if (gap >= opt.threshold - kTimeEpsilon) continue;
            if (q.label && q.label->has("hrt")) continue;
            out.push_back(make(Severity::Warning, "IPU-SEG1", {p.span.end, q.span.start}, s->id,
                               "IPUs separated by only " + fmt(gap) + " s", &q));
        }

        // Silence runs, merged the same way pauses() does.
        std::vector<Span> runs;
        for (const Token& t : tokens) {
            if (t.cls != TokenClass::Silence) continue;
            if (!runs.empty() && time_equal(runs.back().end, t.span.start))
                runs.back().end = t.span.end;
            else
                runs.push_back(t.span);
        }
        std::size_t r = 0;
        for (const LabeledSpan& ipu : ipus) {
            while (r < runs.size() && runs[r].end <= ipu.span.start) ++r;
            for (std::size_t k = r; k < runs.size() && runs[k].start < ipu.span.end; ++k) {
                const Span& run = runs[k];
                if (run.start < ipu.span.start + opt.tolerance || run.end > ipu.span.end - opt.tolerance)
                    continue;
                if (run.duration() < opt.threshold - kTimeEpsilon) continue;
                out.push_back(make(Severity::Warning, "IPU-SEG2", run, s->id,
                                   "IPU contains a silence of " + fmt(run.duration()) + " s", &ipu));
            }
        }

        for (const LabeledSpan& ipu : ipus) {
            for (const Seconds edge : {ipu.span.start, ipu.span.end}) {
                if (!strictly_inside_word(tokens, edge, opt.tolerance)) continue;
                out.push_back(make(Severity::Warning, "IPU-SEG3", {edge, edge}, s->id,
                                   "IPU boundary at " + fmt(edge) + " falls inside a word", &ipu));
            }
        }
    }
    return out;
}

std::vector<Diagnostic> lint_pcomp(const Conversation& conv, const LintOptions& opt) {
    std::vector<Diagnostic> out;
    std::vector<LabeledSpan> spans[2];
    for (int k = 0; k < 2; ++k) {
        const SpeakerTiers& s = conv.speaker(k);
        if (!s.pcomp) continue;
        spans[k] = labeled_spans(*s.pcomp, Layer::Pcomp);
        label_errors(Layer::Pcomp, s.id, spans[k], out);

        const auto tokens = classify_tokens(s, opt.classifier, nullptr);
        for (std::size_t i = 0; i < spans[k].size(); ++i) {
            const LabeledSpan& p = spans[k][i];
            const bool continuation = i > 0 && time_equal(spans[k][i - 1].span.end, p.span.start, opt.tolerance);
            if (!continuation && !near_word_edge(tokens, p.span.start, opt.tolerance, true))
                out.push_back(make(Severity::Warning, "PCOMP-EDGE", {p.span.start, p.span.start}, s.id,
                                   "PCOMP interval starts inside " +
                                       std::string(class_at(tokens, p.span.start)) + ", not at a speech onset",
                                   &p));
            if (!near_word_edge(tokens, p.span.end, opt.tolerance, false))
                out.push_back(make(Severity::Warning, "PCOMP-EDGE", {p.span.end, p.span.end}, s.id,
                                   "PCOMP interval ends inside " +
                                       std::string(class_at(tokens, p.span.end - kTimeEpsilon)) +
                                       ", not at a word end",
                                   &p));
        }
    }
    if (conv.a.pcomp && conv.b.pcomp) forward_context(Layer::Pcomp, conv, spans[0], spans[1], opt, out);
    return out;
}

std::vector<Diagnostic> lint_conversation(const Conversation& conv, const LintOptions& opt) {
    std::vector<Diagnostic> all = lint_ipu_forward_context(conv, opt);
    for (auto&& more : {lint_ipu_segmentation(conv, opt), lint_pcomp(conv, opt)})
        all.insert(all.end(), more.begin(), more.end());
    std::stable_sort(all.begin(), all.end(), [](const Diagnostic& x, const Diagnostic& y) {
        if (x.range.start != y.range.start) return x.range.start < y.range.start;
        if (x.speaker != y.speaker) return x.speaker < y.speaker;
        return x.rule < y.rule;
    });
    return all;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
    return std::any_of(diags.begin(), diags.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

std::string diagnostics_text(std::string_view file, const std::vector<Diagnostic>& diags) {
    std::ostringstream out;
    for (const Diagnostic& d : diags)
        out << file << ':' << fmt(d.range.start) << '-' << fmt(d.range.end) << ':'
            << severity_name(d.severity) << ':' << d.rule << ":[" << d.speaker << "] " << d.message << '\n';
    return out.str();
}

std::string diagnostics_csv(std::string_view file, const std::vector<Diagnostic>& diags) {
    std::ostringstream out;
    out << "file,start,end,speaker,severity,rule,message\n";
    for (const Diagnostic& d : diags)
        out << csv_field(file) << ',' << fmt(d.range.start) << ',' << fmt(d.range.end) << ','
            << csv_field(d.speaker) << ',' << severity_name(d.severity) << ',' << d.rule << ','
            << csv_field(d.message) << '\n';
    return out.str();
}

std::string_view boundary_class_name(BoundaryClass c) {
    switch (c) {
        case BoundaryClass::Coincident: return "coincident";
        case BoundaryClass::Inside: return "inside";
        case BoundaryClass::Outside: return "outside";
    }
    return "outside";
}

std::size_t CrossLayerReport::count_ipu(BoundaryClass c) const {
    return static_cast<std::size_t>(
        std::count_if(ipu_ends.begin(), ipu_ends.end(), [c](const auto& b) { return b.cls == c; }));
}

std::size_t CrossLayerReport::count_pcomp(BoundaryClass c) const {
    return static_cast<std::size_t>(
        std::count_if(pcomp_ends.begin(), pcomp_ends.end(), [c](const auto& b) { return b.cls == c; }));
}

CrossLayerReport cross_layer_report(const Conversation& conv, Seconds tolerance) {
    auto classify = [tolerance](Seconds t, const std::vector<LabeledSpan>& against) {
        bool inside = false;
        for (const LabeledSpan& s : against) {
            if (std::abs(s.span.start - t) <= tolerance || std::abs(s.span.end - t) <= tolerance)
                return BoundaryClass::Coincident;
            inside |= t > s.span.start && t < s.span.end;
        }
        return inside ? BoundaryClass::Inside : BoundaryClass::Outside;
    };

    CrossLayerReport report;
    for (const SpeakerTiers* s : {&conv.a, &conv.b}) {
        if (!s->pcomp) continue;
        const auto ipus = labeled_spans(s->ipu, Layer::Ipu);
        const auto pcomps = labeled_spans(*s->pcomp, Layer::Pcomp);
        for (const auto& ipu : ipus) report.ipu_ends.push_back({s->id, ipu.span.end, classify(ipu.span.end, pcomps)});
        for (const auto& pc : pcomps) report.pcomp_ends.push_back({s->id, pc.span.end, classify(pc.span.end, ipus)});
    }
    return report;
}

}  // namespace turntake
