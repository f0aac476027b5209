#pragma once

#include "turntake/conversation.hpp"
#include "turntake/segment.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace turntake {

enum class Severity { Error, Warning, Info };

std::string_view severity_name(Severity s);

/// Rule ids:
///   IPU-LABEL, PCOMP-LABEL  label text does not parse (error)
///   PCOMP-COLL              `coll` used alone (error)
///   IPU-R1 / PCOMP-R1       same-speaker label, but the other speaker talks next
///   IPU-R2 / PCOMP-R2       turn-yielding label, but the same speaker talks next
///   IPU-R3 / PCOMP-R3       question with no speech at all from the other speaker
///   IPU-R4                  hrt followed by a lapse
///   IPU-SEG1                same-speaker IPUs closer than the threshold (later one not hrt)
///   IPU-SEG2                IPU containing a silence of at least the threshold
///   IPU-SEG3                IPU boundary inside a word
///   PCOMP-EDGE              PCOMP edge not at a speech onset / word end
///   ORT-TOKEN               unclassifiable marker on the orthographic tier
struct Diagnostic {
    Severity severity = Severity::Warning;
    std::string rule;
    Span range;
    std::string speaker;
    std::string message;

    bool operator==(const Diagnostic&) const = default;
};

struct LintOptions {
    Seconds threshold = 0.150;
    Seconds tolerance = 0.020;
    Seconds lapse = 2.0;
    TokenClassifier classifier = TokenClassifier::defaults();
};

std::vector<Diagnostic> lint_ipu_forward_context(const Conversation& conv, const LintOptions& opt = {});
std::vector<Diagnostic> lint_ipu_segmentation(const Conversation& conv, const LintOptions& opt = {});
std::vector<Diagnostic> lint_pcomp(const Conversation& conv, const LintOptions& opt = {});

/// All of the above, ordered by time, speaker and rule.
std::vector<Diagnostic> lint_conversation(const Conversation& conv, const LintOptions& opt = {});

bool has_errors(const std::vector<Diagnostic>& diags);

/// `file:start-end:severity:rule:[speaker] message`, one per line.
std::string diagnostics_text(std::string_view file, const std::vector<Diagnostic>& diags);
std::string diagnostics_csv(std::string_view file, const std::vector<Diagnostic>& diags);

enum class BoundaryClass { Coincident, Inside, Outside };

std::string_view boundary_class_name(BoundaryClass c);

struct BoundaryInstance {
    std::string speaker;
    Seconds time = 0.0;
    BoundaryClass cls = BoundaryClass::Outside;
};

/// IPU end boundaries classified against PCOMP boundaries (Coincident: a PCOMP
/// boundary lies within tolerance; Inside: strictly within a PCOMP interval)
/// and PCOMP end boundaries against IPU boundaries (Coincident: at an IPU
/// boundary; Inside: IPU-internal). Outside covers neither.
struct CrossLayerReport {
    std::vector<BoundaryInstance> ipu_ends;
    std::vector<BoundaryInstance> pcomp_ends;

    std::size_t count_ipu(BoundaryClass c) const;
    std::size_t count_pcomp(BoundaryClass c) const;
};

CrossLayerReport cross_layer_report(const Conversation& conv, Seconds tolerance = 0.020);

}  // namespace turntake
