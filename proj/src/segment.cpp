#include "turntake/segment.hpp"

#include <algorithm>

namespace turntake {
namespace {

std::string_view trim(std::string_view s) {
    const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return s;
}

enum class Role { Speech, Bridge, Gap };

Role role_of(TokenClass c, const SegmentOptions& opt) {
    switch (c) {
        case TokenClass::Word: return Role::Speech;
        case TokenClass::Breath:
        case TokenClass::Smack: return Role::Bridge;
        case TokenClass::Laughter: return opt.include_laughter ? Role::Bridge : Role::Gap;
        case TokenClass::Noise: return opt.include_noise ? Role::Bridge : Role::Gap;
        case TokenClass::Silence: break;
    }
    return Role::Gap;
}

}  // namespace

std::string_view token_class_name(TokenClass c) {
    switch (c) {
        case TokenClass::Word: return "word";
        case TokenClass::Silence: return "silence";
        case TokenClass::Breath: return "breath";
        case TokenClass::Smack: return "smack";
        case TokenClass::Laughter: return "laughter";
        case TokenClass::Noise: return "noise";
    }
    return "word";
}

std::optional<TokenClass> token_class_from_name(std::string_view name) {
    for (TokenClass c : {TokenClass::Word, TokenClass::Silence, TokenClass::Breath, TokenClass::Smack,
                         TokenClass::Laughter, TokenClass::Noise})
        if (token_class_name(c) == name) return c;
    return std::nullopt;
}

UnclassifiableTokenError::UnclassifiableTokenError(const std::string& text)
    : std::runtime_error("no token class for marker '" + text + "'") {}

bool glob_match(std::string_view pattern, std::string_view text) {
    std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

TokenClassifier TokenClassifier::defaults() {
    return TokenClassifier({
        {"<breath*>", TokenClass::Breath},
        {"<inbreath>", TokenClass::Breath},
        {"<outbreath>", TokenClass::Breath},
        {"<in>", TokenClass::Breath},
        {"<out>", TokenClass::Breath},
        {"<smack*>", TokenClass::Smack},
        {"<laugh*>", TokenClass::Laughter},
        {"<noise*>", TokenClass::Noise},
        {"<cough*>", TokenClass::Noise},
        {"<glottal*>", TokenClass::Noise},
        {"<sil>", TokenClass::Silence},
        {"<pause>", TokenClass::Silence},
    });
}

TokenClassifier TokenClassifier::from_mapping(std::string_view text) {
    std::vector<Rule> rules;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty() || trim(line).front() == '#') continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos)
            throw std::invalid_argument("classifier mapping line " + std::to_string(line_no) +
                                        ": expected key<TAB>class");
        const auto cls = token_class_from_name(trim(line.substr(tab + 1)));
        if (!cls)
            throw std::invalid_argument("classifier mapping line " + std::to_string(line_no) +
                                        ": unknown class '" + std::string(trim(line.substr(tab + 1))) + "'");
        rules.push_back({std::string(trim(line.substr(0, tab))), *cls});
    }
    const TokenClassifier base = defaults();
    rules.insert(rules.end(), base.rules().begin(), base.rules().end());
    return TokenClassifier(std::move(rules));
}

TokenClass TokenClassifier::classify(std::string_view text) const {
    const std::string_view t = trim(text);
    if (t.empty()) return TokenClass::Silence;
    for (const Rule& r : rules_)
        if (glob_match(r.pattern, t)) return r.cls;
    if (t.front() == '<' && t.back() == '>') throw UnclassifiableTokenError(std::string(t));
    return TokenClass::Word;
}

std::vector<IpuProposal> propose_ipus(const Tier& word_tier, const TokenClassifier& classifier,
                                      const SegmentOptions& options) {
    if (!(options.threshold > 0)) throw std::invalid_argument("IPU threshold must be positive");

    struct Group {
        std::size_t first, last;
        bool has_speech;
    };
    std::vector<Group> groups;
    Seconds pending_gap = 0.0;
    bool open = false;

    const auto& ivs = word_tier.intervals;
    for (std::size_t i = 0; i < ivs.size(); ++i) {
        const Role role = role_of(classifier.classify(ivs[i].text), options);
        if (role == Role::Gap) {
            pending_gap += ivs[i].xmax - ivs[i].xmin;
            continue;
        }
        if (!open || pending_gap >= options.threshold - kTimeEpsilon) {
            groups.push_back({i, i, role == Role::Speech});
            open = true;
        } else {
            groups.back().last = i;
            groups.back().has_speech |= role == Role::Speech;
        }
        pending_gap = 0.0;
    }

    // Fold orphan breath/smack groups into a neighbouring speech group.
    std::vector<Group> merged;
    if (options.orphans == OrphanPolicy::Standalone) {
        merged = groups;
    } else {
        const bool any_speech =
            std::any_of(groups.begin(), groups.end(), [](const Group& g) { return g.has_speech; });
        if (!any_speech) return {};
        if (options.orphans == OrphanPolicy::AttachRight) {
            std::optional<std::size_t> carry;
            for (const Group& g : groups) {
                if (!g.has_speech) {
                    if (!carry) carry = g.first;
                    continue;
                }
                merged.push_back({carry.value_or(g.first), g.last, true});
                carry.reset();
            }
            if (carry) merged.back().last = groups.back().last;
        } else {
            std::optional<std::size_t> carry;
            for (auto it = groups.rbegin(); it != groups.rend(); ++it) {
                if (!it->has_speech) {
                    if (!carry) carry = it->last;
                    continue;
                }
                merged.push_back({it->first, carry.value_or(it->last), true});
                carry.reset();
            }
            if (carry) merged.back().first = groups.front().first;
            std::reverse(merged.begin(), merged.end());
        }
    }

    std::vector<IpuProposal> out;
    out.reserve(merged.size());
    for (const Group& g : merged) out.push_back({ivs[g.first].xmin, ivs[g.last].xmax, g.first, g.last});
    return out;
}

std::vector<Pause> pauses(const Tier& tier, const TokenClassifier& classifier) {
    std::vector<Pause> out;
    bool in_run = false;
    for (const Interval& iv : tier.intervals) {
        if (classifier.classify(iv.text) != TokenClass::Silence) {
            in_run = false;
            continue;
        }
        if (in_run) {
            out.back().end = iv.xmax;
            out.back().duration += iv.xmax - iv.xmin;
        } else {
            out.push_back({iv.xmin, iv.xmax, iv.xmax - iv.xmin});
            in_run = true;
        }
    }
    return out;
}

std::vector<Span> overlaps(const std::vector<Span>& a, const std::vector<Span>& b) {
    std::vector<Span> out;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const Seconds lo = std::max(a[i].start, b[j].start);
        const Seconds hi = std::min(a[i].end, b[j].end);
        if (hi - lo > kTimeEpsilon) {
            if (!out.empty() && time_equal(out.back().end, lo))
                out.back().end = hi;
            else
                out.push_back({lo, hi});
        }
        if (a[i].end < b[j].end)
            ++i;
        else
            ++j;
    }
    return out;
}

std::vector<LabeledSpan> labeled_spans(const Tier& tier, Layer layer) {
    std::vector<LabeledSpan> out;
    for (const Interval& iv : tier.intervals) {
        if (is_non_label(iv.text)) continue;
        LabeledSpan ls;
        ls.span = iv.span();
        ls.text = iv.text;
        try {
            ls.label = parse_label(layer, iv.text);
        } catch (const LabelError& e) {
            ls.error = e.what();
        }
        out.push_back(std::move(ls));
    }
    return out;
}

std::vector<TransitionOffset> transfer_offsets(const std::string& speaker_a,
                                               const std::vector<LabeledSpan>& ipus_a,
                                               const std::string& speaker_b,
                                               const std::vector<LabeledSpan>& ipus_b) {
    struct Event {
        int who;
        const LabeledSpan* ipu;
    };
    std::vector<Event> events;
    for (const auto& s : ipus_a) events.push_back({0, &s});
    for (const auto& s : ipus_b) events.push_back({1, &s});
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& x, const Event& y) { return x.ipu->span.start < y.ipu->span.start; });

    const auto yields = [](const LabeledSpan& s) {
        if (!s.label) return false;
        for (const auto& p : s.label->parts)
            if (p == "change" || p == "question" || p == "trail-off" || p == "self-interruption")
                return true;
        return false;
    };

    std::vector<TransitionOffset> out;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const Event& e = events[i];
        if (e.ipu->is_hrt() || !yields(*e.ipu)) continue;
        for (std::size_t j = i + 1; j < events.size(); ++j) {
            const Event& f = events[j];
            if (f.ipu->is_hrt()) continue;
            if (f.who != e.who)
                out.push_back({e.who == 0 ? speaker_a : speaker_b, f.who == 0 ? speaker_a : speaker_b,
                               e.ipu->span.end, f.ipu->span.start - e.ipu->span.end});
            break;
        }
    }
    return out;
}

}  // namespace turntake
