#include "turntake/schema.hpp"

#include <algorithm>

namespace turntake {
namespace {

std::string_view trim(std::string_view s) {
    const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return s;
}

MacroScheme make_scheme(std::string name, Layer layer, std::vector<std::string> categories,
                        std::map<std::string, std::string> mapping,
                        std::map<std::string, std::string> representative,
                        std::set<std::string> deferring = {}) {
    MacroScheme s;
    s.name = std::move(name);
    s.layer = layer;
    s.categories = std::move(categories);
    s.mapping = std::move(mapping);
    s.representative = std::move(representative);
    s.deferring = std::move(deferring);
    return s;
}

}  // namespace

std::string_view layer_name(Layer layer) { return layer == Layer::Ipu ? "IPU" : "PCOMP"; }

std::optional<Layer> layer_from_name(std::string_view name) {
    if (name == "IPU" || name == "ipu") return Layer::Ipu;
    if (name == "PCOMP" || name == "pcomp") return Layer::Pcomp;
    return std::nullopt;
}

const std::vector<std::string>& inventory(Layer layer) {
    static const std::vector<std::string> ipu{"hold",      "incomplete-hold",   "change", "question",
                                              "trail-off", "self-interruption", "hrt"};
    static const std::vector<std::string> pcomp{"hold", "cont", "change", "part", "q-part",    "question",
                                                "hes",  "coll", "hrt",    "disruption", "incomplete"};
    return layer == Layer::Ipu ? ipu : pcomp;
}

bool is_base_label(Layer layer, std::string_view name) {
    const auto& inv = inventory(layer);
    return std::find(inv.begin(), inv.end(), name) != inv.end();
}

bool LabelExpr::has(std::string_view name) const {
    return std::find(parts.begin(), parts.end(), name) != parts.end();
}

UnknownLabelError::UnknownLabelError(std::string name, Layer layer)
    : LabelError("unknown " + std::string(layer_name(layer)) + " label '" + name + "'"),
      name_(std::move(name)),
      layer_(layer) {}

LoneCollError::LoneCollError() : LabelError("'coll' must be combined with another label") {}

LabelExpr parse_label(Layer layer, std::string_view text) {
    std::string_view body = trim(text);
    if (body.empty()) throw MalformedCombinationError("empty label");

    LabelExpr label;
    label.layer = layer;
    if (body.back() == '@') {
        label.uncertain = true;
        body.remove_suffix(1);
    }
    if (body.empty()) throw MalformedCombinationError("label consists of '@' only");

    // Base names contain '-' but never '_', so '_' is an unambiguous separator.
    std::size_t start = 0;
    for (;;) {
        const std::size_t cut = body.find('_', start);
        const std::string_view part =
            body.substr(start, cut == std::string_view::npos ? std::string_view::npos : cut - start);
        if (part.empty()) throw MalformedCombinationError("empty part in '" + std::string(body) + "'");
        if (!is_base_label(layer, part)) throw UnknownLabelError(std::string(part), layer);
        label.parts.emplace_back(part);
        if (cut == std::string_view::npos) break;
        start = cut + 1;
    }
    if (label.parts.size() > 2)
        throw MalformedCombinationError("more than two parts in '" + std::string(body) + "'");
    std::sort(label.parts.begin(), label.parts.end());
    if (label.parts.size() == 2 && label.parts[0] == label.parts[1])
        throw MalformedCombinationError("duplicated part in '" + std::string(body) + "'");
    if (label.parts.size() == 1 && label.parts[0] == "coll") throw LoneCollError();
    return label;
}

std::string canonical_text(const LabelExpr& label) {
    std::string out;
    for (std::size_t k = 0; k < label.parts.size(); ++k) {
        if (k) out.push_back('_');
        out += label.parts[k];
    }
    if (label.uncertain) out.push_back('@');
    return out;
}

bool is_non_label(std::string_view text) {
    text = trim(text);
    return text.empty() || (text.size() >= 2 && text.front() == '<' && text.back() == '>');
}

const MacroScheme& ipu_turn_taking_scheme() {
    static const MacroScheme s = make_scheme(
        "turn-taking", Layer::Ipu, {"turn-hold", "turn-change", "hrt"},
        {{"hold", "turn-hold"},
         {"incomplete-hold", "turn-hold"},
         {"change", "turn-change"},
         {"question", "turn-change"},
         {"self-interruption", "turn-change"},
         {"trail-off", "turn-change"},
         {"hrt", "hrt"}},
        {{"turn-hold", "hold"}, {"turn-change", "change"}, {"hrt", "hrt"}});
    return s;
}

const MacroScheme& ipu_completeness_scheme() {
    static const MacroScheme s = make_scheme(
        "completeness", Layer::Ipu, {"complete", "incomplete", "hrt"},
        {{"hold", "complete"},
         {"change", "complete"},
         {"question", "complete"},
         {"incomplete-hold", "incomplete"},
         {"self-interruption", "incomplete"},
         {"trail-off", "incomplete"},
         {"hrt", "hrt"}},
        {{"complete", "hold"}, {"incomplete", "incomplete-hold"}, {"hrt", "hrt"}});
    return s;
}

const MacroScheme& pcomp_turn_taking_scheme() {
    static const MacroScheme s = make_scheme(
        "turn-taking", Layer::Pcomp, {"turn-hold", "turn-change", "hrt", "collaborative"},
        {{"hold", "turn-hold"},
         {"cont", "turn-hold"},
         {"part", "turn-hold"},
         {"hes", "turn-hold"},
         {"disruption", "turn-hold"},
         {"change", "turn-change"},
         {"question", "turn-change"},
         {"q-part", "turn-change"},
         {"incomplete", "turn-change"},
         {"hrt", "hrt"},
         {"coll", "collaborative"}},
        {{"turn-hold", "hold"}, {"turn-change", "change"}, {"hrt", "hrt"}, {"collaborative", "coll"}},
        {"coll"});
    return s;
}

const MacroScheme& scheme_by_name(Layer layer, std::string_view name) {
    if (layer == Layer::Ipu && name == "turn-taking") return ipu_turn_taking_scheme();
    if (layer == Layer::Ipu && name == "completeness") return ipu_completeness_scheme();
    if (layer == Layer::Pcomp && name == "turn-taking") return pcomp_turn_taking_scheme();
    throw std::invalid_argument("no " + std::string(layer_name(layer)) + " macro scheme named '" +
                                std::string(name) + "'");
}

std::string macro_category(const LabelExpr& label, const MacroScheme& scheme) {
    std::vector<const std::string*> effective;
    for (const auto& p : label.parts)
        if (!scheme.deferring.contains(p) || label.parts.size() == 1) effective.push_back(&p);
    if (effective.empty()) effective.push_back(&label.parts.front());

    std::string category;
    for (const std::string* p : effective) {
        const auto it = scheme.mapping.find(*p);
        if (it == scheme.mapping.end())
            throw std::invalid_argument("scheme '" + scheme.name + "' does not map '" + *p + "'");
        if (category.empty()) {
            category = it->second;
        } else if (category != it->second) {
            return std::string(kMixed);
        }
    }
    return category;
}

std::string normalize_for_dynamics(const LabelExpr& label, const MacroScheme& scheme) {
    if (label.parts.size() == 1) return label.parts.front();
    const std::string category = macro_category(label, scheme);
    if (category == kMixed) return std::string(kResidue);
    const auto it = scheme.representative.find(category);
    return it == scheme.representative.end() ? category : it->second;
}

}  // namespace turntake
