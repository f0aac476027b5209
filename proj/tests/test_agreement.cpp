#include "synth.hpp"
#include "turntake/agreement.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace turntake;

namespace {

// Observation-level expansion of a confusion matrix: one (row, col) per count.
std::vector<std::pair<std::size_t, std::size_t>> expand(const ConfusionMatrix& m) {
    std::vector<std::pair<std::size_t, std::size_t>> obs;
    for (std::size_t r = 0; r < m.size(); ++r)
        for (std::size_t c = 0; c < m.size(); ++c)
            for (std::int64_t k = 0; k < m.at(r, c); ++k) obs.emplace_back(r, c);
    return obs;
}

// Cohen by enumeration: p_e is the share of (a_i, b_j) pairs over all i, j that agree.
CohenResult brute_cohen(const ConfusionMatrix& m) {
    const auto obs = expand(m);
    const double n = static_cast<double>(obs.size());
    double agree = 0, chance = 0;
    std::vector<double> rows(m.size()), cols(m.size());
    for (const auto& [r, c] : obs) {
        agree += r == c;
        rows[r] += 1;
        cols[c] += 1;
    }
    for (std::size_t k = 0; k < m.size(); ++k) chance += rows[k] * cols[k];
    CohenResult res;
    res.p_o = agree / n;
    res.p_e = chance / (n * n);
    res.kappa = (res.p_o - res.p_e) / (1 - res.p_e);
    return res;
}

// Fleiss by enumeration of ordered rater pairs within items and of rating pairs overall.
FleissResult brute_fleiss(const std::vector<std::vector<int>>& items) {
    double p_bar = 0;
    std::vector<int> pooled;
    for (const auto& raters : items) {
        double agree = 0, pairs = 0;
        for (std::size_t x = 0; x < raters.size(); ++x)
            for (std::size_t y = 0; y < raters.size(); ++y)
                if (x != y) {
                    agree += raters[x] == raters[y];
                    pairs += 1;
                }
        p_bar += agree / pairs;
        pooled.insert(pooled.end(), raters.begin(), raters.end());
    }
    p_bar /= static_cast<double>(items.size());
    double same = 0;
    for (int x : pooled)
        for (int y : pooled) same += x == y;
    FleissResult r;
    r.p_bar = p_bar;
    r.p_e = same / (static_cast<double>(pooled.size()) * static_cast<double>(pooled.size()));
    r.kappa = (r.p_bar - r.p_e) / (1 - r.p_e);
    return r;
}

RatingTable table_of(const std::vector<std::vector<int>>& items, int k) {
    RatingTable t;
    for (int c = 0; c < k; ++c) t.categories.push_back("c" + std::to_string(c));
    for (const auto& raters : items) {
        std::vector<std::int64_t> row(static_cast<std::size_t>(k), 0);
        for (int r : raters) ++row[static_cast<std::size_t>(r)];
        t.counts.push_back(row);
    }
    return t;
}

ConfusionMatrix random_matrix(synth::Rng& rng, std::size_t k) {
    std::vector<std::string> cats;
    for (std::size_t c = 0; c < k; ++c) cats.push_back("c" + std::to_string(c));
    ConfusionMatrix m(cats);
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < k; ++c)
            m.at(r, c) = synth::uniform_int(rng, 0, r == c ? 40 : 10);
    if (m.total() == 0) m.at(0, 1) = 1;
    return m;
}

Tier labelled(std::vector<Interval> items, double xmax = 10.0) {
    return synth::fill_tier("IPU-X", 0.0, xmax, std::move(items));
}

std::size_t count(const std::vector<AlignedPair>& v, MatchKind k) {
    return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [k](const auto& p) { return p.kind == k; }));
}

}  // namespace

TEST_CASE("align: identical tiers") {
    const Tier t = labelled({{0, 1, "hold"}, {2, 3, "change"}, {4, 5, "<noise>"}});
    const auto pairs = align(t, t);
    CHECK(pairs.size() == 2);
    CHECK(count(pairs, MatchKind::Exact) == 2);
}

TEST_CASE("align: split interval") {
    const auto pairs = align(labelled({{0, 2, "hold"}}), labelled({{0, 1, "hold"}, {1, 2, "hold"}}));
    CHECK(count(pairs, MatchKind::UnmatchedA) == 1);
    CHECK(count(pairs, MatchKind::UnmatchedB) == 2);
    CHECK(count(pairs, MatchKind::Exact) == 0);
}

TEST_CASE("align: tolerance") {
    const Tier a = labelled({{0, 1, "hold"}});
    CHECK(count(align(a, labelled({{0.015, 0.99, "hold"}})), MatchKind::Exact) == 1);
    CHECK(count(align(a, labelled({{0.025, 1, "hold"}})), MatchKind::Exact) == 0);
    CHECK(count(align(a, labelled({{0.025, 1, "hold"}}), 0.03), MatchKind::Exact) == 1);
}

TEST_CASE("align is symmetric and ordered") {
    synth::Rng rng(8);
    for (int k = 0; k < 100; ++k) {
        std::vector<Interval> xa, xb;
        double t = 0;
        while (t < 90) {
            const double len = synth::uniform(rng, 0.2, 2.0);
            const int mode = synth::uniform_int(rng, 0, 3);
            if (mode != 1) xa.push_back({t, t + len, "hold"});
            if (mode != 2) xb.push_back({t, t + len + (mode == 3 ? 0.1 : 0.0), "hold"});
            t += len + synth::uniform(rng, 0.2, 1.0);
        }
        const Tier a = labelled(xa, 100), b = labelled(xb, 100);
        const auto ab = align(a, b), ba = align(b, a);
        CHECK(count(ab, MatchKind::Exact) == count(ba, MatchKind::Exact));
        CHECK(count(ab, MatchKind::UnmatchedA) == count(ba, MatchKind::UnmatchedB));
        CHECK(count(ab, MatchKind::UnmatchedB) == count(ba, MatchKind::UnmatchedA));
        CHECK(count(ab, MatchKind::Exact) + count(ab, MatchKind::UnmatchedA) == xa.size());
        CHECK(count(ab, MatchKind::Exact) + count(ab, MatchKind::UnmatchedB) == xb.size());
        double prev = -1;
        for (const auto& p : ab) {
            const double s = p.a ? p.a->xmin : p.b->xmin;
            CHECK(s >= prev);
            prev = s;
        }
    }
}

TEST_CASE("Cohen's kappa on a worked 2x2 matrix") {
    ConfusionMatrix m({"x", "y"});
    m.at(0, 0) = 20;
    m.at(0, 1) = 5;
    m.at(1, 0) = 10;
    m.at(1, 1) = 15;
    const auto r = cohen_kappa(m);
    CHECK(r.p_o == doctest::Approx(0.70).epsilon(1e-12));
    CHECK(r.p_e == doctest::Approx(0.50).epsilon(1e-12));
    CHECK(r.kappa == doctest::Approx(0.40).epsilon(1e-12));
}

TEST_CASE("Cohen's kappa edge cases") {
    ConfusionMatrix diag({"a", "b", "c"});
    diag.at(0, 0) = 3;
    diag.at(2, 2) = 9;
    CHECK(cohen_kappa(diag).kappa == 1.0);

    ConfusionMatrix one({"a"});
    one.at(0, 0) = 5;
    CHECK(cohen_kappa(one).kappa == 1.0);

    // Both annotators always pick one category each, but different ones.
    ConfusionMatrix off({"a", "b"});
    off.at(0, 1) = 4;
    CHECK(cohen_kappa(off).kappa == doctest::Approx(0.0));

    CHECK_THROWS_AS(cohen_kappa(ConfusionMatrix{}), std::invalid_argument);
    CHECK_THROWS_AS(cohen_kappa(ConfusionMatrix({"a"})), std::invalid_argument);
}

TEST_CASE("Cohen's kappa matches enumeration and is invariant under permutation") {
    synth::Rng rng(1);
    for (int n = 0; n < 300; ++n) {
        const std::size_t k = static_cast<std::size_t>(synth::uniform_int(rng, 2, 6));
        const ConfusionMatrix m = random_matrix(rng, k);
        const auto got = cohen_kappa(m);
        const auto want = brute_cohen(m);
        CHECK(std::fabs(got.p_o - want.p_o) < 1e-12);
        CHECK(std::fabs(got.p_e - want.p_e) < 1e-12);
        CHECK(std::fabs(got.kappa - want.kappa) < 1e-12);

        std::vector<std::size_t> perm(k);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::string> cats;
        for (std::size_t c = 0; c < k; ++c) cats.push_back("renamed" + std::to_string(perm[c]));
        ConfusionMatrix p(cats);
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = 0; c < k; ++c) p.at(perm[r], perm[c]) = m.at(r, c);
        CHECK(std::fabs(cohen_kappa(p).kappa - got.kappa) < 1e-12);
    }
}

TEST_CASE("outer-product marginals give zero kappa") {
    synth::Rng rng(2);
    for (int n = 0; n < 100; ++n) {
        const std::size_t k = static_cast<std::size_t>(synth::uniform_int(rng, 2, 5));
        std::vector<std::int64_t> r(k), c(k);
        for (auto& x : r) x = synth::uniform_int(rng, 1, 9);
        for (auto& x : c) x = synth::uniform_int(rng, 1, 9);
        ConfusionMatrix m(std::vector<std::string>(k, ""));
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) m.at(i, j) = r[i] * c[j];
        CHECK(std::fabs(cohen_kappa(m).kappa) < 1e-12);
    }
}

TEST_CASE("Fleiss' kappa matches enumeration") {
    synth::Rng rng(3);
    for (int n = 0; n < 300; ++n) {
        const int k = synth::uniform_int(rng, 2, 5);
        const int raters = synth::uniform_int(rng, 2, 6);
        std::vector<std::vector<int>> items(static_cast<std::size_t>(synth::uniform_int(rng, 2, 40)));
        for (auto& it : items) {
            const int base = synth::uniform_int(rng, 0, k - 1);
            for (int r = 0; r < raters; ++r)
                it.push_back(synth::chance(rng, 0.6) ? base : synth::uniform_int(rng, 0, k - 1));
        }
        const auto want = brute_fleiss(items);
        if (want.p_e >= 1.0) continue;
        const auto got = fleiss_kappa(table_of(items, k));
        CHECK(std::fabs(got.p_bar - want.p_bar) < 1e-12);
        CHECK(std::fabs(got.p_e - want.p_e) < 1e-12);
        if (want.p_bar < 1.0) CHECK(std::fabs(got.kappa - want.kappa) < 1e-12);
    }
}

TEST_CASE("Fleiss' kappa: small case evaluated by hand") {
    // Three items, two raters, one disagreement: (x,x), (x,y), (y,y).
    const auto t = RatingTable::from_assignments({{"x", "x"}, {"x", "y"}, {"y", "y"}});
    CHECK(t.categories == std::vector<std::string>{"x", "y"});
    const auto r = fleiss_kappa(t);
    CHECK(r.p_bar == doctest::Approx(2.0 / 3.0));
    CHECK(r.p_e == doctest::Approx(0.5));
    CHECK(r.kappa == doctest::Approx(1.0 / 3.0));
    // One disagreement always pools to an odd/odd split; a 4/2 split needs full agreement.
    const auto u = fleiss_kappa(RatingTable::from_assignments({{"x", "x"}, {"x", "x"}, {"y", "y"}}));
    CHECK(u.p_e == doctest::Approx((16.0 + 4.0) / 36.0));
    CHECK(u.kappa == 1.0);
}

TEST_CASE("Fleiss' kappa: validation and z") {
    CHECK(fleiss_kappa(RatingTable::from_assignments({{"a", "a"}, {"b", "b"}})).kappa == 1.0);
    RatingTable uneven{{"a", "b"}, {{2, 0}, {1, 2}}};
    CHECK_THROWS_AS(fleiss_kappa(uneven), std::invalid_argument);
    RatingTable single{{"a", "b"}, {{1, 0}, {0, 1}}};
    CHECK_THROWS_AS(fleiss_kappa(single), std::invalid_argument);

    // z against the variance formula evaluated directly.
    const std::vector<std::vector<int>> items{{0, 0, 1}, {1, 1, 1}, {0, 2, 2}, {2, 2, 2}, {0, 0, 0}, {1, 2, 1}};
    const auto r = fleiss_kappa(table_of(items, 3));
    const double N = 6, n = 3;
    double p[3] = {0, 0, 0};
    for (const auto& it : items)
        for (int x : it) p[x] += 1.0 / (N * n);
    double spq = 0, spqqp = 0;
    for (double pj : p) {
        spq += pj * (1 - pj);
        spqqp += pj * (1 - pj) * ((1 - pj) - pj);
    }
    const double se = std::sqrt(2.0) / (spq * std::sqrt(N * n * (n - 1))) * std::sqrt(spq * spq - spqqp);
    CHECK(r.z == doctest::Approx(r.kappa / se).epsilon(1e-12));
}

TEST_CASE("implied chance agreement") {
    CHECK(implied_expected_agreement(108.0 / 124.0, 0.84) == doctest::Approx(0.19355).epsilon(1e-4));
    CHECK_THROWS_AS(implied_expected_agreement(0.9, 1.0), std::invalid_argument);
    // Round trip through the kappa identity.
    const double p_o = 0.8, p_e = 0.3;
    CHECK(implied_expected_agreement(p_o, (p_o - p_e) / (1 - p_e)) == doctest::Approx(p_e));
}

TEST_CASE("paired annotation fixture") {
    const auto [a, b] = synth::agreement_fixture();
    auto pairs = align(a.a.ipu, b.a.ipu);
    const auto second = align(a.b.ipu, b.b.ipu);
    pairs.insert(pairs.end(), second.begin(), second.end());
    std::size_t labelled = 0;
    for (const Tier* t : {&a.a.ipu, &a.b.ipu})
        labelled += std::count_if(t->intervals.begin(), t->intervals.end(),
                                  [](const Interval& iv) { return !is_non_label(iv.text); });
    CHECK(labelled == 135);
    CHECK(count(pairs, MatchKind::Exact) == 124);
    CHECK(count(pairs, MatchKind::UnmatchedA) == 11);
    CHECK(count(pairs, MatchKind::UnmatchedB) == 0);

    const auto report = agreement_report(pairs, Layer::Ipu, {&ipu_turn_taking_scheme(), &ipu_completeness_scheme()});
    CHECK(report.raw.error.empty());
    CHECK(report.raw.matrix.trace() == 108);
    CHECK(report.raw.matrix.total() == 124);
    CHECK(report.raw.cohen.p_o == doctest::Approx(108.0 / 124.0));
    CHECK(report.raw.fleiss.p_bar == doctest::Approx(108.0 / 124.0));
    CHECK(report.raw.fleiss.kappa == doctest::Approx(0.84).epsilon(0.005));
    CHECK(report.raw.fleiss.p_e == doctest::Approx(0.194).epsilon(0.005));
    CHECK(report.raw.fleiss.z > 0.0);

    REQUIRE(report.grouped.size() == 2);
    for (const auto& [name, s] : report.grouped) {
        CHECK(s.error.empty());
        CHECK(s.matrix.size() == 3);
        CHECK(s.matrix.total() == 124);
        const auto want = brute_cohen(s.matrix);
        CHECK(std::fabs(s.cohen.kappa - want.kappa) < 1e-12);
    }

    const std::string text = report_text(report);
    CHECK(text.find("aligned intervals: 124") != std::string::npos);
    CHECK(text.find("unmatched in A: 11") != std::string::npos);
    CHECK(text.find("agreements: 108 of 124") != std::string::npos);
}

TEST_CASE("boundary agreement") {
    std::vector<Seconds> words;
    for (int k = 1; k <= 10; ++k) words.push_back(k * 0.5);
    const std::vector<Seconds> a{0.5, 1.5, 2.5, 3.5};
    const std::vector<Seconds> b{0.5, 1.5, 2.5, 3.5, 4.5};
    auto r = boundary_agreement(a, b, words);
    CHECK(r.both == 4);
    CHECK(r.only_a == 0);
    CHECK(r.only_b == 1);
    CHECK(r.neither == 5);
    CHECK(r.agreement == doctest::Approx(0.9));
    CHECK(boundary_agreement(a, a, words).agreement == 1.0);

    r = boundary_agreement({0.77}, {}, words);
    CHECK(r.uncovered_a == std::vector<Seconds>{0.77});
    CHECK_THROWS_AS(boundary_agreement(a, b, {}), std::invalid_argument);

    // Enumeration oracle over random subsets.
    synth::Rng rng(12);
    for (int n = 0; n < 200; ++n) {
        std::vector<Seconds> sa, sb;
        int both = 0, neither = 0;
        for (Seconds w : words) {
            const bool x = synth::chance(rng, 0.5), y = synth::chance(rng, 0.5);
            if (x) sa.push_back(w + synth::uniform(rng, -0.015, 0.015));
            if (y) sb.push_back(w);
            both += x && y;
            neither += !x && !y;
        }
        std::shuffle(sa.begin(), sa.end(), rng);
        const auto got = boundary_agreement(sa, sb, words);
        CHECK(got.both == static_cast<std::size_t>(both));
        CHECK(got.agreement == doctest::Approx((both + neither) / 10.0));
        CHECK(got.both + got.only_a + got.only_b + got.neither == words.size());
    }
}

TEST_CASE("partial agreement") {
    auto kind = [](const char* x, const char* y, Layer l = Layer::Ipu) {
        return partial_kind(parse_label(l, x), parse_label(l, y));
    };
    CHECK(kind("change_hrt", "change") == PartialKind::Partial);
    CHECK(kind("hrt", "hold_hrt", Layer::Pcomp) == PartialKind::Partial);
    CHECK(kind("hold", "hold_question") == PartialKind::Partial);
    CHECK(kind("hold", "change") == PartialKind::None);
    CHECK(kind("hold@", "hold") == PartialKind::Full);
    CHECK(kind("change_hold", "hold_change@") == PartialKind::Full);

    const Tier a = labelled({{0, 1, "change_hrt"}, {2, 3, "hold"}, {4, 5, "hold"}, {6, 7, "holdd"}});
    const Tier b = labelled({{0, 1, "change"}, {2, 3, "hold@"}, {4, 5, "change"}, {6, 7, "hold"}});
    const auto p = partial_agreement(align(a, b), Layer::Ipu);
    CHECK(p.full == 1);
    CHECK(p.partial == 1);
    CHECK(p.none == 1);
    CHECK(p.unparsed == 1);
}

TEST_CASE("confusion tables") {
    const Tier a = labelled({{0, 1, "hold"}, {2, 3, "hold@"}, {4, 5, "change_hold"}, {6, 7, "question"}});
    const Tier b = labelled({{0, 1, "hold"}, {2, 3, "hold"}, {4, 5, "change"}, {6, 7, "change"}});
    const auto pairs = align(a, b);

    auto m = confusion_table(pairs, Layer::Ipu);
    CHECK(m.categories() == std::vector<std::string>{"change", "change_hold", "hold", "question"});
    CHECK(m.at(2, 2) == 2);
    CHECK(m.total() == 4);

    m = confusion_table(pairs, Layer::Ipu, {nullptr, true});
    CHECK(m.categories().size() == 5);
    CHECK(m.trace() == 1);

    m = confusion_table(pairs, Layer::Ipu, {&ipu_turn_taking_scheme(), false});
    CHECK(m.categories() == std::vector<std::string>{"turn-hold", "turn-change", "hrt", "mixed"});
    CHECK(m.at(0, 0) == 2);
    CHECK(m.at(1, 1) == 1);
    CHECK(m.at(3, 1) == 1);

    const Tier same = labelled({{0, 1, "hold"}, {2, 3, "hold"}});
    const auto diag = confusion_table(align(same, same), Layer::Ipu);
    CHECK(diag.size() == 1);
    CHECK(diag.at(0, 0) == 2);
    const auto s = summarize(diag);
    CHECK(s.error.empty());
    CHECK(s.cohen.kappa == 1.0);

    CHECK(m.to_csv().rfind("a\\b,turn-hold,turn-change,hrt,mixed\n", 0) == 0);
}
