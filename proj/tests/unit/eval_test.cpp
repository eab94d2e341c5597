#include <protolink/error.hpp>
#include <protolink/eval.hpp>

#include "error_matchers.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace protolink {
namespace {

using testing::error_code_of;

Entity entity(std::string cui, std::string name) {
    Entity e;
    e.cui = std::move(cui);
    e.canonical_name = std::move(name);
    e.type_ids = {"T047"};
    e.type_names = {"Disease or Syndrome"};
    e.group_id = "DISO";
    e.group_name = "Disorders";
    return e;
}

Entity merged(std::string cui, std::string into) {
    Entity e;
    e.cui = std::move(cui);
    e.status = EntityStatus::MergedInto;
    e.merged_into = std::move(into);
    return e;
}

OntologySnapshot small_snapshot() {
    return OntologySnapshot::build({entity("C1", "renal failure"), entity("C2", "kidney disease"),
                                    entity("C3", "fever"), entity("C4", "house mice"), merged("C9", "C1")},
                                   {{"C1", "C2"}});
}

RankedResult ranked(std::size_t start, std::string gold, std::vector<std::string> cuis) {
    RankedResult r;
    r.mention = {"A1", start, start + 1};
    r.gold_cui = std::move(gold);
    for (std::size_t i = 0; i < cuis.size(); ++i) r.entities.push_back({cuis[i], 1.0 - 0.1 * static_cast<double>(i)});
    return r;
}

TEST(Recall, CountsGoldWithinTheCutoff) {
    const auto snap = small_snapshot();
    const std::vector<RankedResult> results{ranked(0, "C1", {"C1", "C2"}), ranked(2, "C9", {"C2", "C1"}),
                                            ranked(4, "C3", {"C2", "C4"}), ranked(6, "C3", {})};
    EXPECT_DOUBLE_EQ(recall_at(results, 1, snap), 0.25);
    EXPECT_DOUBLE_EQ(recall_at(results, 2, snap), 0.5);
    EXPECT_DOUBLE_EQ(recall_at(results, 100, snap), 0.5);
    // Unresolved form: C9 no longer matches C1.
    EXPECT_DOUBLE_EQ(recall_at(results, 2), 0.25);
    EXPECT_EQ(error_code_of([&] { recall_at(results, 0); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(error_code_of([] { recall_at(std::vector<RankedResult>{}, 1); }), ErrorCode::EmptyInput);
}

TEST(Recall, NonDecreasingInN) {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> pick(0, 9);
    std::vector<RankedResult> results;
    for (std::size_t i = 0; i < 200; ++i) {
        std::vector<std::string> cuis;
        for (int j = 0; j < 10; ++j) cuis.push_back("C" + std::to_string((pick(rng) + j) % 10));
        results.push_back(ranked(2 * i, "C" + std::to_string(pick(rng)), cuis));
    }
    double prev = 0.0;
    for (std::size_t n = 1; n <= 12; ++n) {
        const double r = recall_at(results, n);
        EXPECT_GE(r, prev);
        prev = r;
    }
}

TEST(Classify, ExactRelatedMissed) {
    const auto snap = small_snapshot();
    const std::vector<RankedResult> results{ranked(0, "C9", {"C1"}), ranked(2, "C1", {"C2", "C1"}),
                                            ranked(4, "C3", {"C4"}), ranked(6, "C3", {})};
    const auto run = classify_matches(results, snap);
    EXPECT_EQ(run.outcomes[0].outcome, Outcome::Exact);
    EXPECT_EQ(run.outcomes[0].gold_cui, "C1");
    EXPECT_EQ(run.outcomes[1].outcome, Outcome::Related);
    EXPECT_EQ(run.outcomes[2].outcome, Outcome::Missed);
    EXPECT_EQ(run.outcomes[3].outcome, Outcome::Missed);
    EXPECT_TRUE(run.outcomes[3].predicted_cui.empty());
    EXPECT_EQ(run.breakdown.total(), 4u);
    EXPECT_NEAR(run.breakdown.exact_fraction() + run.breakdown.related_fraction() + run.breakdown.missed_fraction(),
                1.0, 1e-9);
    EXPECT_EQ(error_code_of([&] { classify_matches(std::vector<RankedResult>{ranked(0, "C77", {"C1"})}, snap); }),
              ErrorCode::UnknownId);
    EXPECT_EQ(to_string(Outcome::Related), "related");
}

MatchOutcome outcome(std::size_t start, Outcome o) {
    MatchOutcome m;
    m.mention = {"A1", start, start + 1};
    m.outcome = o;
    return m;
}

TEST(Transition, CountsAndRowPercentages) {
    const std::vector<MatchOutcome> before{outcome(0, Outcome::Exact), outcome(1, Outcome::Exact),
                                           outcome(2, Outcome::Missed), outcome(3, Outcome::Missed),
                                           outcome(4, Outcome::Missed)};
    const std::vector<MatchOutcome> after{outcome(4, Outcome::Exact), outcome(3, Outcome::Related),
                                          outcome(2, Outcome::Missed), outcome(1, Outcome::Exact),
                                          outcome(0, Outcome::Missed)};
    const auto t = transition_heatmap(before, after);
    EXPECT_EQ(t.counts[0][0], 1u);
    EXPECT_EQ(t.counts[0][2], 1u);
    EXPECT_EQ(t.counts[2][0], 1u);
    EXPECT_EQ(t.counts[2][1], 1u);
    EXPECT_EQ(t.counts[2][2], 1u);
    EXPECT_DOUBLE_EQ(t.row_percent[0][0], 50.0);
    EXPECT_NEAR(t.row_percent[2][0] + t.row_percent[2][1] + t.row_percent[2][2], 100.0, 1e-6);
    EXPECT_EQ(t.row_percent[1][0], 0.0);

    const std::vector<MatchOutcome> fewer(after.begin(), after.begin() + 4);
    EXPECT_EQ(error_code_of([&] { transition_heatmap(before, fewer); }), ErrorCode::InvalidArgument);
    auto shifted = after;
    shifted[0].mention.start = 99;
    EXPECT_EQ(error_code_of([&] { transition_heatmap(before, shifted); }), ErrorCode::InvalidArgument);
}

class ArticleSim : public ::testing::Test {
protected:
    ArticleSim() {
        article.id = "A1";
        article.title = "Kidney injury";
        article.abstract = "Patients with renal failure and fever were seen.";
        const std::string text = article.text();
        for (const char* s : {"renal failure", "fever"}) {
            const auto at = text.find(s);
            article.mentions.push_back({at, at + std::string(s).size(), s, s[0] == 'r' ? "C1" : "C3"});
        }
    }

    MatchOutcome result(std::size_t i, std::string predicted, Outcome o) const {
        const auto& m = article.mentions[i];
        return {{article.id, m.start, m.end}, std::move(predicted), m.cui, o};
    }

    OntologySnapshot snap = small_snapshot();
    ReferenceEncoder enc{256};
    Article article;
};

TEST_F(ArticleSim, AllExactScoresOne) {
    const std::vector<MatchOutcome> out{result(0, "C1", Outcome::Exact), result(1, "C3", Outcome::Exact)};
    const auto rec = article_similarity(article, out, snap, enc);
    EXPECT_NEAR(rec.s_g, 1.0, 1e-6);
    EXPECT_NEAR(rec.s_p, 1.0, 1e-6);
    EXPECT_EQ(rec.r1, 1.0);
}

TEST_F(ArticleSim, ReplacementsFollowOutcomes) {
    const std::vector<MatchOutcome> out{result(0, "C2", Outcome::Related), result(1, "C4", Outcome::Missed)};
    const auto rec = article_similarity(article, out, snap, enc);
    // Independent reconstruction of both variants.
    const std::string pred = "Kidney injury\nPatients with kidney disease and house mice were seen.";
    const std::string gold = "Kidney injury\nPatients with renal failure and fever were seen.";
    EXPECT_NEAR(rec.s_p, testing::trigram_cosine(article.text(), pred, 256), 1e-6);
    EXPECT_NEAR(rec.s_g, testing::trigram_cosine(article.text(), gold, 256), 1e-6);
    EXPECT_EQ(rec.diff, rec.s_g - rec.s_p);
    EXPECT_EQ(rec.r1, 0.0);
    EXPECT_GT(rec.diff, 0.0);
}

TEST_F(ArticleSim, GoldEqualToPredictionGivesZeroDiff) {
    const std::vector<MatchOutcome> out{result(0, "C1", Outcome::Exact), result(1, "C3", Outcome::Exact)};
    const auto rec = article_similarity(article, out, snap, enc, true);
    EXPECT_EQ(rec.diff, 0.0);
    // A miss whose prediction shares the gold's canonical name.
    const auto twin = OntologySnapshot::build({entity("C1", "renal failure"), entity("C3", "fever"),
                                               entity("C5", "fever")});
    const std::vector<MatchOutcome> miss{result(0, "C1", Outcome::Exact), result(1, "C5", Outcome::Missed)};
    EXPECT_EQ(article_similarity(article, miss, twin, enc).diff, 0.0);
}

TEST_F(ArticleSim, Errors) {
    const std::vector<MatchOutcome> partial{result(0, "C1", Outcome::Exact)};
    EXPECT_EQ(error_code_of([&] { article_similarity(article, partial, snap, enc); }), ErrorCode::InvalidArgument);
    auto overlapping = article;
    overlapping.mentions.push_back({article.mentions[0].start + 2, article.mentions[0].end, "nal failure", "C1"});
    EXPECT_EQ(error_code_of([&] { article_similarity(overlapping, partial, snap, enc); }),
              ErrorCode::OverlappingSpans);
}

TEST(Regions, MeanPlusMinusOneSd) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g(0.0, 0.1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ArticleSimRecord> records;
    for (int i = 0; i < 400; ++i) {
        ArticleSimRecord r;
        r.article_id = "A" + std::to_string(i);
        r.diff = g(rng);
        r.r1 = u(rng);
        r.r1_reranked = u(rng);
        records.push_back(r);
    }
    double mean = 0;
    for (const auto& r : records) mean += r.diff;
    mean /= 400;
    double var = 0;
    for (const auto& r : records) var += (r.diff - mean) * (r.diff - mean);
    const double sd = std::sqrt(var / 400);

    const auto sel = select_regions(records, 200);
    EXPECT_NEAR(sel.mean, mean, 1e-12);
    EXPECT_NEAR(sel.stddev, sd, 1e-12);
    std::vector<double> r1;
    for (std::size_t i = 0; i < sel.records.size(); ++i) {
        const auto& r = sel.records[i];
        if (i > 0) {
            EXPECT_LE(sel.records[i - 1].diff, r.diff);
        }
        const Region want = r.diff < mean - sd ? Region::A : (r.diff > mean + sd ? Region::B : Region::None);
        EXPECT_EQ(r.region, want) << r.article_id;
        r1.push_back(r.r1);
    }
    const auto oracle = testing::oracle_moving_average(r1, 200);
    ASSERT_EQ(sel.smoothed_r1.size(), oracle.size());
    for (std::size_t i = 0; i < oracle.size(); ++i) EXPECT_NEAR(sel.smoothed_r1[i], oracle[i], 1e-12);
    EXPECT_EQ(sel.smoothed_r1_reranked.size(), 400u);
}

TEST(Regions, DegenerateSeries) {
    std::vector<ArticleSimRecord> flat(10);
    for (std::size_t i = 0; i < flat.size(); ++i) flat[i].article_id = "A" + std::to_string(i);
    const auto sel = select_regions(flat, 3);
    EXPECT_EQ(sel.stddev, 0.0);
    for (const auto& r : sel.records) EXPECT_EQ(r.region, Region::None);
    EXPECT_TRUE(sel.smoothed_r1_reranked.empty());

    std::vector<ArticleSimRecord> outlier(100);
    for (std::size_t i = 0; i < outlier.size(); ++i) outlier[i].article_id = "A" + std::to_string(i);
    outlier[42].diff = -1.0;
    const auto sel2 = select_regions(outlier);
    EXPECT_EQ(sel2.records.front().article_id, "A42");
    EXPECT_EQ(sel2.records.front().region, Region::A);
    EXPECT_EQ(error_code_of([] { select_regions({}); }), ErrorCode::EmptyInput);
}

TEST(MovingAverage, MatchesOracle) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t n : {1u, 5u, 37u}) {
        std::vector<double> v(n);
        for (auto& x : v) x = u(rng);
        for (std::size_t w : {1u, 2u, 3u, 10u, 200u}) {
            const auto got = centered_moving_average(v, w);
            const auto want = testing::oracle_moving_average(v, w);
            for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
        }
    }
    EXPECT_EQ(centered_moving_average(std::vector<double>{1, 2, 3}, 1), (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(error_code_of([] { centered_moving_average(std::vector<double>{1}, 0); }), ErrorCode::InvalidArgument);
}

TEST(WordCount, BucketsBySurfaceLength) {
    std::vector<MatchOutcome> outcomes;
    std::vector<std::string> surfaces;
    const std::vector<std::pair<std::string, Outcome>> data{
        {"fever", Outcome::Exact},        {"cough", Outcome::Missed},          {"mice", Outcome::Related},
        {"renal failure", Outcome::Exact}, {"house mice", Outcome::Related}, {"a b c", Outcome::Exact}};
    for (std::size_t i = 0; i < data.size(); ++i) {
        outcomes.push_back(outcome(i, data[i].second));
        surfaces.push_back(data[i].first);
    }
    const auto buckets = wordcount_buckets(outcomes, surfaces, 2);
    ASSERT_EQ(buckets.size(), 2u);
    EXPECT_EQ(buckets[0].words, 1u);
    EXPECT_EQ(buckets[0].total, 3u);
    EXPECT_DOUBLE_EQ(buckets[0].exact_rate, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(buckets[0].related_rate, 1.0 / 3.0);
    EXPECT_EQ(buckets[1].words, 2u);
    EXPECT_DOUBLE_EQ(buckets[1].exact_rate, 0.5);
    EXPECT_EQ(wordcount_buckets(outcomes, surfaces, 1).size(), 3u);
    surfaces.pop_back();
    EXPECT_EQ(error_code_of([&] { wordcount_buckets(outcomes, surfaces); }), ErrorCode::InvalidArgument);
}

} // namespace
} // namespace protolink
