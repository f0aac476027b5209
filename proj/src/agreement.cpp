#include "turntake/agreement.hpp"

#include "turntake/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

namespace turntake {

std::vector<AlignedPair> align(const Tier& tier_a, const Tier& tier_b, Seconds tolerance) {
    auto annotated = [](const Tier& t) {
        std::vector<const Interval*> out;
        for (const Interval& iv : t.intervals)
            if (!is_non_label(iv.text)) out.push_back(&iv);
        return out;
    };
    const auto a = annotated(tier_a);
    const auto b = annotated(tier_b);

    std::vector<AlignedPair> out;
    std::size_t j = 0;
    for (const Interval* x : a) {
        while (j < b.size() && b[j]->xmin < x->xmin - tolerance) {
            out.push_back({MatchKind::UnmatchedB, std::nullopt, *b[j]});
            ++j;
        }
        if (j < b.size() && std::abs(b[j]->xmin - x->xmin) <= tolerance &&
            std::abs(b[j]->xmax - x->xmax) <= tolerance) {
            out.push_back({MatchKind::Exact, *x, *b[j]});
            ++j;
        } else {
            out.push_back({MatchKind::UnmatchedA, *x, std::nullopt});
        }
    }
    for (; j < b.size(); ++j) out.push_back({MatchKind::UnmatchedB, std::nullopt, *b[j]});
    return out;
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> categories)
    : categories_(std::move(categories)), counts_(categories_.size() * categories_.size(), 0) {}

std::size_t ConfusionMatrix::index_of(const std::string& category) {
    const auto it = std::find(categories_.begin(), categories_.end(), category);
    if (it != categories_.end()) return static_cast<std::size_t>(it - categories_.begin());
    const std::size_t old_n = size();
    std::vector<std::int64_t> grown((old_n + 1) * (old_n + 1), 0);
    for (std::size_t r = 0; r < old_n; ++r)
        for (std::size_t c = 0; c < old_n; ++c) grown[r * (old_n + 1) + c] = counts_[r * old_n + c];
    counts_ = std::move(grown);
    categories_.push_back(category);
    return old_n;
}

void ConfusionMatrix::add(const std::string& row, const std::string& col, std::int64_t n) {
    const std::size_t r = index_of(row);
    const std::size_t c = index_of(col);
    at(r, c) += n;
}

std::int64_t ConfusionMatrix::total() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

std::int64_t ConfusionMatrix::trace() const {
    std::int64_t t = 0;
    for (std::size_t k = 0; k < size(); ++k) t += at(k, k);
    return t;
}

std::int64_t ConfusionMatrix::row_sum(std::size_t row) const {
    std::int64_t s = 0;
    for (std::size_t c = 0; c < size(); ++c) s += at(row, c);
    return s;
}

std::int64_t ConfusionMatrix::col_sum(std::size_t col) const {
    std::int64_t s = 0;
    for (std::size_t r = 0; r < size(); ++r) s += at(r, col);
    return s;
}

std::string ConfusionMatrix::to_csv() const {
    std::ostringstream out;
    out << "a\\b";
    for (const auto& c : categories_) out << ',' << csv_field(c);
    out << '\n';
    for (std::size_t r = 0; r < size(); ++r) {
        out << csv_field(categories_[r]);
        for (std::size_t c = 0; c < size(); ++c) out << ',' << at(r, c);
        out << '\n';
    }
    return out.str();
}

CohenResult cohen_kappa(const ConfusionMatrix& m) {
    const std::int64_t total = m.total();
    if (m.size() == 0 || total <= 0) throw std::invalid_argument("Cohen's kappa needs at least one observation");
    const double n = static_cast<double>(total);
    CohenResult r;
    r.p_o = static_cast<double>(m.trace()) / n;
    for (std::size_t k = 0; k < m.size(); ++k)
        r.p_e += (static_cast<double>(m.row_sum(k)) / n) * (static_cast<double>(m.col_sum(k)) / n);
    if (m.trace() == total) {
        r.kappa = 1.0;
    } else if (r.p_e >= 1.0) {
        throw UndefinedKappaError("Cohen's kappa undefined: chance agreement is 1");
    } else {
        r.kappa = (r.p_o - r.p_e) / (1.0 - r.p_e);
    }
    return r;
}

RatingTable RatingTable::from_assignments(const std::vector<std::vector<std::string>>& items) {
    RatingTable t;
    std::set<std::string> cats;
    for (const auto& item : items) cats.insert(item.begin(), item.end());
    t.categories.assign(cats.begin(), cats.end());
    for (const auto& item : items) {
        std::vector<std::int64_t> row(t.categories.size(), 0);
        for (const auto& c : item) {
            const auto it = std::lower_bound(t.categories.begin(), t.categories.end(), c);
            ++row[static_cast<std::size_t>(it - t.categories.begin())];
        }
        t.counts.push_back(std::move(row));
    }
    return t;
}

FleissResult fleiss_kappa(const RatingTable& ratings) {
    if (ratings.counts.empty()) throw std::invalid_argument("Fleiss' kappa needs at least one item");
    const std::size_t k_cats = ratings.categories.size();
    const std::int64_t raters =
        std::accumulate(ratings.counts.front().begin(), ratings.counts.front().end(), std::int64_t{0});
    if (raters < 2) throw std::invalid_argument("Fleiss' kappa needs at least two raters per item");

    const double n = static_cast<double>(raters);
    const double items = static_cast<double>(ratings.counts.size());
    std::vector<double> share(k_cats, 0.0);
    double sum_p_i = 0.0;
    bool all_agree = true;
    for (std::size_t i = 0; i < ratings.counts.size(); ++i) {
        const auto& row = ratings.counts[i];
        if (row.size() != k_cats) throw std::invalid_argument("rating row has the wrong number of categories");
        std::int64_t row_total = 0, sq = 0;
        for (std::size_t k = 0; k < k_cats; ++k) {
            row_total += row[k];
            sq += row[k] * row[k];
            share[k] += static_cast<double>(row[k]);
            if (row[k] != 0 && row[k] != raters) all_agree = false;
        }
        if (row_total != raters)
            throw std::invalid_argument("item " + std::to_string(i + 1) + " has " + std::to_string(row_total) +
                                        " ratings, expected " + std::to_string(raters));
        sum_p_i += static_cast<double>(sq - raters) / (n * (n - 1.0));
    }

    FleissResult r;
    r.p_bar = sum_p_i / items;
    double sum_pq = 0.0, sum_pq_qp = 0.0;
    for (double& p : share) {
        p /= items * n;
        r.p_e += p * p;
        const double q = 1.0 - p;
        sum_pq += p * q;
        sum_pq_qp += p * q * (q - p);
    }
    if (all_agree) {
        r.kappa = 1.0;
    } else if (r.p_e >= 1.0) {
        throw UndefinedKappaError("Fleiss' kappa undefined: chance agreement is 1");
    } else {
        r.kappa = (r.p_bar - r.p_e) / (1.0 - r.p_e);
    }
    if (sum_pq > 0.0) {
        const double se = std::sqrt(2.0) / (sum_pq * std::sqrt(items * n * (n - 1.0))) *
                          std::sqrt(sum_pq * sum_pq - sum_pq_qp);
        r.z = se > 0.0 ? r.kappa / se : 0.0;
    }
    return r;
}

RatingTable ratings_from_matrix(const ConfusionMatrix& m) {
    RatingTable t;
    t.categories = m.categories();
    for (std::size_t r = 0; r < m.size(); ++r)
        for (std::size_t c = 0; c < m.size(); ++c)
            for (std::int64_t k = 0; k < m.at(r, c); ++k) {
                std::vector<std::int64_t> row(m.size(), 0);
                ++row[r];
                ++row[c];
                t.counts.push_back(std::move(row));
            }
    return t;
}

double implied_expected_agreement(double p_o, double kappa) {
    if (kappa >= 1.0) throw std::invalid_argument("kappa must be below 1 to back-solve chance agreement");
    return (p_o - kappa) / (1.0 - kappa);
}

BoundaryAgreement boundary_agreement(const std::vector<Seconds>& bounds_a, const std::vector<Seconds>& bounds_b,
                                     const std::vector<Seconds>& candidates, Seconds tolerance) {
    if (candidates.empty()) throw std::invalid_argument("boundary agreement needs candidate positions");
    auto sorted = [](std::vector<Seconds> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    const auto a = sorted(bounds_a);
    const auto b = sorted(bounds_b);
    const auto c = sorted(candidates);
    auto near = [tolerance](const std::vector<Seconds>& set, Seconds t) {
        const auto it = std::lower_bound(set.begin(), set.end(), t - tolerance);
        return it != set.end() && *it <= t + tolerance;
    };

    BoundaryAgreement r;
    for (Seconds t : c) {
        const bool in_a = near(a, t);
        const bool in_b = near(b, t);
        if (in_a && in_b) ++r.both;
        else if (in_a) ++r.only_a;
        else if (in_b) ++r.only_b;
        else ++r.neither;
    }
    for (Seconds t : a)
        if (!near(c, t)) r.uncovered_a.push_back(t);
    for (Seconds t : b)
        if (!near(c, t)) r.uncovered_b.push_back(t);
    r.agreement = static_cast<double>(r.both + r.neither) / static_cast<double>(c.size());
    return r;
}

PartialKind partial_kind(const LabelExpr& a, const LabelExpr& b) {
    if (a.parts == b.parts) return PartialKind::Full;
    for (const auto& p : a.parts)
        if (b.has(p)) return PartialKind::Partial;
    return PartialKind::None;
}

PartialBreakdown partial_agreement(const std::vector<AlignedPair>& pairs, Layer layer) {
    PartialBreakdown r;
    for (const AlignedPair& p : pairs) {
        if (p.kind != MatchKind::Exact) continue;
        try {
            switch (partial_kind(parse_label(layer, p.a->text), parse_label(layer, p.b->text))) {
                case PartialKind::Full: ++r.full; break;
                case PartialKind::Partial: ++r.partial; break;
                case PartialKind::None: ++r.none; break;
            }
        } catch (const LabelError&) {
            ++r.unparsed;
        }
    }
    return r;
}

ConfusionMatrix confusion_table(const std::vector<AlignedPair>& pairs, Layer layer,
                                const ConfusionOptions& options) {
    auto category = [&](const LabelExpr& label) {
        if (options.grouping) return macro_category(label, *options.grouping);
        LabelExpr l = label;
        if (!options.keep_uncertainty) l.uncertain = false;
        return canonical_text(l);
    };

    std::vector<std::pair<std::string, std::string>> cells;
    std::set<std::string> seen;
    for (const AlignedPair& p : pairs) {
        if (p.kind != MatchKind::Exact) continue;
        try {
            auto x = category(parse_label(layer, p.a->text));
            auto y = category(parse_label(layer, p.b->text));
            seen.insert(x);
            seen.insert(y);
            cells.emplace_back(std::move(x), std::move(y));
        } catch (const LabelError&) {
        }
    }

    std::vector<std::string> order;
    if (options.grouping) {
        order = options.grouping->categories;
        if (seen.contains(std::string(kMixed))) order.emplace_back(kMixed);
    } else {
        order.assign(seen.begin(), seen.end());
    }
    ConfusionMatrix m(order);
    for (const auto& [x, y] : cells) m.add(x, y);
    return m;
}

KappaSummary summarize(ConfusionMatrix m) {
    KappaSummary s;
    try {
        s.cohen = cohen_kappa(m);
        s.fleiss = fleiss_kappa(ratings_from_matrix(m));
    } catch (const std::exception& e) {
        s.error = e.what();
    }
    s.matrix = std::move(m);
    return s;
}

AgreementReport agreement_report(const std::vector<AlignedPair>& pairs, Layer layer,
                                 const std::vector<const MacroScheme*>& groupings, bool keep_uncertainty) {
    AgreementReport r;
    r.layer = layer;
    for (const AlignedPair& p : pairs) {
        switch (p.kind) {
            case MatchKind::Exact: ++r.n_aligned; break;
            case MatchKind::UnmatchedA: ++r.n_unmatched_a; break;
            case MatchKind::UnmatchedB: ++r.n_unmatched_b; break;
        }
    }
    r.raw = summarize(confusion_table(pairs, layer, {nullptr, keep_uncertainty}));
    for (const MacroScheme* g : groupings)
        r.grouped.emplace_back(g->name, summarize(confusion_table(pairs, layer, {g, keep_uncertainty})));
    r.partial = partial_agreement(pairs, layer);
    return r;
}

std::string report_text(const AgreementReport& r) {
    std::ostringstream out;
    char buf[256];
    out << "layer: " << layer_name(r.layer) << '\n'
        << "aligned intervals: " << r.n_aligned << '\n'
        << "unmatched in A: " << r.n_unmatched_a << '\n'
        << "unmatched in B: " << r.n_unmatched_b << '\n';
    auto section = [&](const std::string& title, const KappaSummary& s) {
        out << "[" << title << "] categories: " << s.matrix.size() << ", N = " << s.matrix.total() << '\n';
        if (!s.error.empty()) {
            out << "  kappa: undefined (" << s.error << ")\n";
            return;
        }
        std::snprintf(buf, sizeof buf, "  agreements: %lld of %lld, p_o = %.4f\n",
                      static_cast<long long>(s.matrix.trace()), static_cast<long long>(s.matrix.total()), s.cohen.p_o);
        out << buf;
        std::snprintf(buf, sizeof buf, "  Cohen's kappa = %.4f (p_e = %.4f)\n", s.cohen.kappa, s.cohen.p_e);
        out << buf;
        std::snprintf(buf, sizeof buf, "  Fleiss' kappa = %.4f (P_bar = %.4f, P_e = %.4f, z = %.2f)\n",
                      s.fleiss.kappa, s.fleiss.p_bar, s.fleiss.p_e, s.fleiss.z);
        out << buf;
    };
    section("labels", r.raw);
    for (const auto& [name, s] : r.grouped) section(name, s);
    out << "partial agreement: full = " << r.partial.full << ", partial = " << r.partial.partial
        << ", none = " << r.partial.none;
    if (r.partial.unparsed) out << ", unparsed = " << r.partial.unparsed;
    out << '\n';
    return out.str();
}

}  // namespace turntake
