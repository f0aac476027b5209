#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace turntake {

enum class Layer { Ipu, Pcomp };

std::string_view layer_name(Layer layer);  // "IPU" / "PCOMP"
std::optional<Layer> layer_from_name(std::string_view name);

/// Base labels of a layer, in the column order used by the distribution
/// tables (IPU: hold .. hrt; PCOMP: hold .. incomplete, coll included).
const std::vector<std::string>& inventory(Layer layer);
bool is_base_label(Layer layer, std::string_view name);

/// A parsed turn-taking label: one or two distinct base labels of one layer,
/// kept in alphabetical order, plus the `@` uncertainty flag.
struct LabelExpr {
    Layer layer = Layer::Ipu;
    std::vector<std::string> parts;
    bool uncertain = false;

    bool is_combined() const { return parts.size() == 2; }
    bool has(std::string_view name) const;
    bool operator==(const LabelExpr&) const = default;
};

class LabelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class UnknownLabelError : public LabelError {
public:
    UnknownLabelError(std::string name, Layer layer);
    const std::string& name() const { return name_; }
    Layer layer() const { return layer_; }

private:
    std::string name_;
    Layer layer_;
};

class MalformedCombinationError : public LabelError {
public:
    using LabelError::LabelError;
};

class LoneCollError : public LabelError {
public:
    LoneCollError();
};

/// Parses `base(_base)?@?`. Surrounding whitespace is trimmed; anything else
/// must match exactly (case-sensitive).
LabelExpr parse_label(Layer layer, std::string_view text);

std::string canonical_text(const LabelExpr& label);

/// Empty or blank interval text and `<...>` markers (e.g. `<noise>`) carry no
/// turn-taking label.
bool is_non_label(std::string_view text);

/// Groups base labels of one layer into coarser categories. Labels listed in
/// `deferring` take the category of the label they are combined with (PCOMP
/// `coll` is never alone and marks no turn-taking direction by itself).
struct MacroScheme {
    std::string name;
    Layer layer = Layer::Ipu;
    std::vector<std::string> categories;            // report order
    std::map<std::string, std::string> mapping;     // base label -> category
    std::map<std::string, std::string> representative;  // category -> base label
    std::set<std::string> deferring;
};

inline constexpr std::string_view kMixed = "mixed";
inline constexpr std::string_view kResidue = "residue";

/// turn-hold / turn-change / hrt over the IPU inventory.
const MacroScheme& ipu_turn_taking_scheme();
/// complete / incomplete / hrt over the IPU inventory.
const MacroScheme& ipu_completeness_scheme();
/// turn-hold / turn-change / hrt over the PCOMP inventory.
const MacroScheme& pcomp_turn_taking_scheme();

/// Looks up a built-in scheme by layer and short name
/// ("turn-taking" or "completeness"). Throws std::invalid_argument.
const MacroScheme& scheme_by_name(Layer layer, std::string_view name);

/// Category shared by all parts, or kMixed.
std::string macro_category(const LabelExpr& label, const MacroScheme& scheme);

/// Cleaning used for timelines: drops `@`, keeps single labels as themselves,
/// maps agreeing combined labels to the representative base label of their
/// category and everything else to kResidue.
std::string normalize_for_dynamics(const LabelExpr& label, const MacroScheme& scheme);

}  // namespace turntake
