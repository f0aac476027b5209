#pragma once

#include "turntake/schema.hpp"
#include "turntake/textgrid.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace turntake {

enum class MatchKind { Exact, UnmatchedA, UnmatchedB };

struct AlignedPair {
    MatchKind kind = MatchKind::Exact;
    std::optional<Interval> a;
    std::optional<Interval> b;
};

/// Greedy one-to-one matching of annotated intervals (NonLabel intervals are
/// ignored) whose start and end each differ by at most `tolerance`. Output is
/// ordered by time; unmatched intervals are segmentation disagreements.
std::vector<AlignedPair> align(const Tier& a, const Tier& b, Seconds tolerance = 0.020);

/// Square table of counts; rows are annotator A, columns annotator B.
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::vector<std::string> categories);

    const std::vector<std::string>& categories() const { return categories_; }
    std::size_t size() const { return categories_.size(); }

    std::int64_t& at(std::size_t row, std::size_t col) { return counts_[row * size() + col]; }
    std::int64_t at(std::size_t row, std::size_t col) const { return counts_[row * size() + col]; }

    /// Adds one observation, creating categories on demand.
    void add(const std::string& row, const std::string& col, std::int64_t n = 1);

    std::int64_t total() const;
    std::int64_t trace() const;
    std::int64_t row_sum(std::size_t row) const;
    std::int64_t col_sum(std::size_t col) const;

    std::string to_csv() const;

private:
    std::size_t index_of(const std::string& category);

    std::vector<std::string> categories_;
    std::vector<std::int64_t> counts_;
};

class UndefinedKappaError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct CohenResult {
    double p_o = 0.0;
    double p_e = 0.0;
    double kappa = 0.0;
};

/// Chance agreement from per-annotator marginals. Exactly 1 when p_o == 1.
CohenResult cohen_kappa(const ConfusionMatrix& m);

/// items x categories table: cell (i, k) = number of raters who put item i
/// into category k. Every row must sum to the same rater count n >= 2.
struct RatingTable {
    std::vector<std::string> categories;
    std::vector<std::vector<std::int64_t>> counts;

    /// Builds the table from per-item rater assignments.
    static RatingTable from_assignments(const std::vector<std::vector<std::string>>& items);
};

struct FleissResult {
    double p_bar = 0.0;  // mean per-item agreement
    double p_e = 0.0;    // chance agreement from pooled category shares
    double kappa = 0.0;
    double z = 0.0;      // kappa / SE under the no-agreement null
};

FleissResult fleiss_kappa(const RatingTable& ratings);

/// The equivalent two-rater table of a confusion matrix.
RatingTable ratings_from_matrix(const ConfusionMatrix& m);

/// Chance agreement implied by an observed agreement and a reported kappa.
double implied_expected_agreement(double p_o, double kappa);

struct BoundaryAgreement {
    std::size_t both = 0;
    std::size_t only_a = 0;
    std::size_t only_b = 0;
    std::size_t neither = 0;
    std::vector<Seconds> uncovered_a;  // boundaries of A with no candidate nearby
    std::vector<Seconds> uncovered_b;
    double agreement = 0.0;  // (both + neither) / candidates
};

BoundaryAgreement boundary_agreement(const std::vector<Seconds>& bounds_a,
                                     const std::vector<Seconds>& bounds_b,
                                     const std::vector<Seconds>& candidates, Seconds tolerance = 0.020);

enum class PartialKind { Full, Partial, None };

/// Compares label parts ignoring uncertainty.
PartialKind partial_kind(const LabelExpr& a, const LabelExpr& b);

struct PartialBreakdown {
    std::size_t full = 0;
    std::size_t partial = 0;
    std::size_t none = 0;
    std::size_t unparsed = 0;  // exact pairs where a label did not parse
};

PartialBreakdown partial_agreement(const std::vector<AlignedPair>& pairs, Layer layer);

struct ConfusionOptions {
    const MacroScheme* grouping = nullptr;
    bool keep_uncertainty = false;
};

/// Counts exact pairs by canonical label text or, with a grouping, by macro
/// category (kMixed for combined labels spanning categories). Pairs with an
/// unparseable label are skipped.
ConfusionMatrix confusion_table(const std::vector<AlignedPair>& pairs, Layer layer,
                                const ConfusionOptions& options = {});

struct KappaSummary {
    ConfusionMatrix matrix;
    CohenResult cohen;
    FleissResult fleiss;
    std::string error;  // set when kappa is undefined for this matrix
};

struct AgreementReport {
    Layer layer = Layer::Ipu;
    std::size_t n_aligned = 0;
    std::size_t n_unmatched_a = 0;
    std::size_t n_unmatched_b = 0;
    KappaSummary raw;
    std::vector<std::pair<std::string, KappaSummary>> grouped;  // by scheme name
    PartialBreakdown partial;
};

KappaSummary summarize(ConfusionMatrix m);

/// Aligns and scores one pair of tiers; `pairs` may pool several speakers.
AgreementReport agreement_report(const std::vector<AlignedPair>& pairs, Layer layer,
                                 const std::vector<const MacroScheme*>& groupings,
                                 bool keep_uncertainty = false);

/// Text summary: N aligned, unmatched counts, p_o, p_e, kappa, z, partial breakdown.
std::string report_text(const AgreementReport& report);

}  // namespace turntake
