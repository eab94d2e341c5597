// One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

#include "app/pipeline.hpp"
#include "app/run_config.hpp"
#include "oracles.hpp"

#include <protolink/context.hpp>
#include <protolink/encoding.hpp>
#include <protolink/error.hpp>
#include <protolink/eval.hpp>
#include <protolink/index.hpp>
#include <protolink/rerank.hpp>

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

namespace pl = protolink;
namespace t = protolink::testing;
using nlohmann::json;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

/// Collects failed checks; the first few messages end up in the detail.
class Checks {
public:
    void expect(bool ok, const std::string& what) {
        ++total_;
        if (ok) return;
        ++failed_;
        if (failed_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
    }
    Verdict verdict(std::string summary) const {
        if (failed_ == 0) return {true, std::move(summary)};
        return {false, std::to_string(failed_) + "/" + std::to_string(total_) + " checks failed: " + notes_};
    }

private:
    std::size_t total_ = 0;
    std::size_t failed_ = 0;
    std::string notes_;
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

pl::CandidateSet random_candidates(std::mt19937_64& rng, std::size_t n, std::size_t entities,
                                   const std::function<std::string(std::size_t)>& cui_of) {
    std::uniform_real_distribution<double> score(-0.2, 1.0);
    std::uniform_int_distribution<std::size_t> ent(0, entities - 1);
    pl::CandidateSet s;
    for (std::size_t i = 0; i < n; ++i) s.candidates.push_back({cui_of(ent(rng)), "alias" + std::to_string(i), score(rng)});
    std::sort(s.candidates.begin(), s.candidates.end(), pl::ranks_before);
    return s;
}

bool same_order(const pl::CandidateSet& in, const pl::RerankedSet& out) {
    if (in.candidates.size() != out.candidates.size()) return false;
    for (std::size_t i = 0; i < in.candidates.size(); ++i) {
        if (in.candidates[i].cui != out.candidates[i].cui || in.candidates[i].alias != out.candidates[i].alias) {
            return false;
        }
    }
    return true;
}

std::string uniform_cui(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "C%07zu", i);
    return buf;
}

// Runs of the fixture through the application layer, shared by several criteria.
class FixtureRuns {
public:
    FixtureRuns() { expected_ = json::parse(t::read_file(t::fixture_dir() / "expected.json")); }

    const json& expected() const { return expected_; }

    /// Output directory of `command` run with `overrides`; cached per key.
    std::filesystem::path run(const std::string& command, const std::vector<std::string>& overrides) {
        std::string key = command;
        for (const auto& o : overrides) key += "|" + o;
        if (auto it = dirs_.find(key); it != dirs_.end()) return it->second;
        const auto out = tmp_.path() / ("run" + std::to_string(dirs_.size()));
        auto cfg = pl::Config::load(t::fixture_dir() / "fixture.conf");
        cfg.set("paths.output", out.string());
        for (const auto& o : overrides) cfg.set_assignment(o);
        const auto rc = pl::app::RunConfig::from(cfg);
        if (command == "link") pl::app::link(rc);
        else pl::app::evaluate(rc);
        dirs_.emplace(key, out);
        return out;
    }

    json report(const std::vector<std::string>& overrides) {
        return json::parse(t::read_file(run("evaluate", overrides) / "report.json"));
    }

private:
    t::TempDir tmp_;
    json expected_;
    std::map<std::string, std::filesystem::path> dirs_;
};

FixtureRuns& fixture() {
    static FixtureRuns runs;
    return runs;
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::vector<json> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(json::parse(line));
    }
    return out;
}

Verdict search_oracle() {
    std::mt19937_64 rng(2024);
    const std::size_t n = 1000, dim = 64;
    std::vector<pl::AliasRow> rows;
    std::vector<float> data;
    for (std::size_t i = 0; i < n; ++i) {
        rows.push_back({uniform_cui(i / 2), "alias " + std::to_string(i % 2), static_cast<std::uint32_t>(i % 2)});
        const auto v = t::random_unit_floats(rng, dim);
        data.insert(data.end(), v.begin(), v.end());
    }
    const pl::PrototypeSpace space(dim, rows, data);
    std::vector<pl::UnitVector> queries;
    for (int q = 0; q < 100; ++q) queries.push_back(t::random_unit(rng, dim));

    const auto start = std::chrono::steady_clock::now();
    std::vector<pl::CandidateSet> got;
    for (const auto& q : queries) got.push_back(pl::search(space, q, 10, {}, 1));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::size_t equal = 0;
    for (std::size_t q = 0; q < queries.size(); ++q) {
        if (got[q].candidates == t::brute_force_topk(space, queries[q], 10)) ++equal;
    }
    const bool ok = equal == 100 && secs < 5.0;
    return {ok, std::to_string(equal) + "/100 queries equal, " + fmt(secs) + " s single-threaded"};
}

Verdict rerank_identity() {
    std::mt19937_64 rng(7);
    std::size_t kept = 0, total = 0;
    for (int i = 0; i < 500; ++i) {
        const auto s = random_candidates(rng, 20, 8, [](std::size_t e) { return "C" + std::to_string(e); });
        for (double a : {0.5, 1.0, 7.0}) {
            ++total;
            if (same_order(s, pl::parametric_rerank(s, {a, 0, 0}))) ++kept;
        }
    }
    return {kept == total, std::to_string(kept) + "/" + std::to_string(total) + " orderings preserved"};
}

Verdict worked_examples() {
    pl::CandidateSet s;
    s.candidates = {{"C1", "c1", 0.90}, {"C2", "c2a", 0.88}, {"C2", "c2b", 0.86}};
    const auto first = pl::parametric_rerank(s, {5, 0.1, 0.05});
    const auto second = pl::parametric_rerank(s, {1, 0, 1});
    Checks c;
    c.expect(first.candidates[0].cui == "C1", "C1 should stay first");
    c.expect(std::abs(first.candidates[0].adjusted - 4.64) <= 1e-9, "4.64 got " + fmt(first.candidates[0].adjusted));
    c.expect(std::abs(first.candidates[1].adjusted - 4.587) <= 1e-9, "4.587 got " + fmt(first.candidates[1].adjusted));
    c.expect(second.candidates[0].cui == "C2", "C2 should be promoted");
    c.expect(std::abs(second.candidates[0].adjusted - 2.88) <= 1e-9, "2.88 got " + fmt(second.candidates[0].adjusted));
    c.expect(std::abs(second.candidates[2].adjusted - 1.9) <= 1e-9, "1.9 got " + fmt(second.candidates[2].adjusted));
    return c.verdict("4.64 / 4.587 and 1.9 / 2.88 within 1e-9");
}

Verdict constant_shift() {
    std::mt19937_64 rng(99);
    const auto uniform = t::uniform_snapshot(12);
    const pl::ReferenceEncoder enc(64);
    const std::vector<std::string> types{"Disease or Syndrome"};
    std::size_t kept = 0;
    for (int i = 0; i < 500; ++i) {
        const auto s = random_candidates(rng, 15, 12, uniform_cui);
        const bool type_ok = same_order(s, pl::type_rerank(s, types, uniform, enc));
        const bool group_ok = same_order(s, pl::group_rerank(s, "Disorders", uniform, enc));
        if (type_ok && group_ok) ++kept;
    }

    // One candidate carries the mention's type and group, the rest do not.
    std::vector<pl::Entity> records;
    for (std::size_t i = 0; i < 6; ++i) {
        pl::Entity e;
        e.cui = uniform_cui(i);
        e.canonical_name = "entity " + std::to_string(i);
        e.type_ids = {"T"};
        e.group_id = "G";
        e.type_names = {i == 0 ? "Sign or Symptom" : "Pharmacologic Substance"};
        e.group_name = i == 0 ? "Disorders" : "Chemicals & Drugs";
        records.push_back(std::move(e));
    }
    const auto mixed = pl::OntologySnapshot::build(std::move(records));
    std::uniform_int_distribution<std::size_t> pick(0, 5);
    std::uniform_real_distribution<double> score(0.1, 0.9);
    const std::vector<std::string> mention_types{"Sign or Symptom"};
    std::size_t first = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const double delta = score(rng);
        pl::CandidateSet s;
        const std::size_t matching_pos = pick(rng);
        for (std::size_t i = 0; i < 6; ++i) {
            // Place entity 0 at a random position among equal scores.
            const std::size_t e = i == matching_pos ? 0 : (i < matching_pos ? i + 1 : i);
            s.candidates.push_back({uniform_cui(e), "a" + std::to_string(i), delta});
        }
        const auto ty = pl::type_rerank(s, mention_types, mixed, enc);
        const auto gr = pl::group_rerank(s, "Disorders", mixed, enc);
        if (ty.candidates[0].cui == uniform_cui(0) && gr.candidates[0].cui == uniform_cui(0)) ++first;
    }
    return {kept == 500 && first == 100,
            std::to_string(kept) + "/500 orderings preserved, " + std::to_string(first) + "/100 tie-breaks"};
}

Verdict grid_search_oracle() {
    auto& fx = fixture();
    const auto link_dir = fx.run("link", {});
    const auto lines = read_jsonl(link_dir / "candidates.jsonl");
    const std::size_t rerank_k = 10;

    std::vector<pl::DevExample> dev;
    for (const auto& j : lines) {
        pl::DevExample ex;
        for (const auto& c : j.at("candidates")) {
            if (ex.candidates.candidates.size() == rerank_k) break;
            ex.candidates.candidates.push_back({c.at("cui"), c.at("alias"), c.at("score").get<double>()});
        }
        ex.gold_cui = j.at("gold");
        dev.push_back(std::move(ex));
    }

    // Exhaustive scan with the naive reranker, first maximum in (a, b, c) order.
    const auto grid = pl::ParamGrid::defaults();
    auto hits_of = [&](double a, double b, double c) {
        std::size_t hits = 0;
        for (const auto& ex : dev) {
            if (t::oracle_parametric(ex.candidates.candidates, a, b, c).front().cui == ex.gold_cui) ++hits;
        }
        return hits;
    };
    std::size_t best_hits = 0;
    pl::RerankParams best{};
    std::size_t points = 0;
    for (double a : grid.a)
        for (double b : grid.b)
            for (double c : grid.c) {
                const std::size_t h = hits_of(a, b, c);
                if (points++ == 0 || h > best_hits) {
                    best_hits = h;
                    best = {a, b, c};
                }
            }

    const auto got = pl::grid_search(dev, grid, 4);
    const auto& exp = fx.expected().at("grid_search");
    const auto report = fx.report({"rerank.grid_search=true"});
    const auto& rep_best = report.at("grid_search").at("best");
    const double drop = report.at("ablation").at("full").get<double>() -
                        report.at("ablation").at("without_c").get<double>();

    Checks c;
    c.expect(got.params == best && got.hits == best_hits, "engine optimum differs from exhaustive scan");
    c.expect(got.points_evaluated == points && points == 180, "grid size " + std::to_string(points));
    c.expect(best.a == exp.at("a").get<double>() && best.b == exp.at("b").get<double>() &&
                 best.c == exp.at("c").get<double>() && best_hits == exp.at("hits").get<std::size_t>(),
             "scan disagrees with committed oracle values");
    c.expect(rep_best.at("a").get<double>() == best.a && rep_best.at("b").get<double>() == best.b &&
                 rep_best.at("c").get<double>() == best.c,
             "evaluate report optimum differs");
    c.expect(best.c > 0.0, "optimum has c = 0");
    c.expect(drop >= 0.05, "removing c drops R@1 by only " + fmt(drop));
    return c.verdict("optimum a=" + fmt(best.a) + " b=" + fmt(best.b) + " c=" + fmt(best.c) + ", R@1 " +
                     fmt(got.r_at_1) + ", drop without c " + fmt(drop));
}

Verdict end_to_end() {
    auto& fx = fixture();
    const auto& exp = fx.expected();
    const auto report = fx.report({});
    Checks c;
    for (const char* run : {"baseline", "reranked"}) {
        for (const char* n : {"1", "5"}) {
            const double got = report.at("recall").at(run).at(n);
            const double want = exp.at("recall").at(run).at(n);
            c.expect(got == want, std::string(run) + " R@" + n + " " + fmt(got) + " != " + fmt(want));
        }
        const auto& bd = report.at("breakdown").at(run);
        const auto& want = exp.at("breakdown").at(run).at("counts");
        for (const char* o : {"exact", "related", "missed"}) {
            c.expect(bd.at("counts").at(o) == want.at(o), std::string(run) + " " + o + " count");
        }
        const double sum =
            bd.at("exact").get<double>() + bd.at("related").get<double>() + bd.at("missed").get<double>();
        c.expect(std::abs(sum - 1.0) <= 1e-9, std::string(run) + " breakdown sums to " + fmt(sum));
    }
    const auto& tr = report.at("transition");
    c.expect(tr.at("counts") == exp.at("transition").at("counts"), "transition counts");
    for (std::size_t r = 0; r < 3; ++r) {
        double row = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            const double got = tr.at("row_percent")[r][k];
            const double want = exp.at("transition").at("row_percent")[r][k];
            c.expect(std::abs(got - want) <= 1e-9, "row_percent mismatch");
            row += got;
        }
        const bool empty_row = exp.at("transition").at("counts")[r] == json::array({0, 0, 0});
        c.expect(empty_row || std::abs(row - 100.0) <= 1e-6, "heatmap row " + std::to_string(r) + " sums to " + fmt(row));
    }

    const auto got_lines = read_jsonl(fx.run("link", {}) / "candidates.jsonl");
    const auto want_lines = read_jsonl(t::fixture_dir() / "expected_link.jsonl");
    std::size_t same = 0;
    for (std::size_t i = 0; i < std::min(got_lines.size(), want_lines.size()); ++i) same += got_lines[i] == want_lines[i];
    c.expect(got_lines.size() == want_lines.size() && same == want_lines.size(),
             "candidate lists " + std::to_string(same) + "/" + std::to_string(want_lines.size()));
    return c.verdict("R@1 " + fmt(report.at("recall").at("baseline").at("1")) + " -> " +
                     fmt(report.at("recall").at("reranked").at("1")) + ", " + std::to_string(same) +
                     " candidate lists identical to the oracle");
}

Verdict article_similarity() {
    auto e = [](std::string cui, std::string name) {
        pl::Entity x;
        x.cui = std::move(cui);
        x.canonical_name = std::move(name);
        x.type_ids = {"T047"};
        x.type_names = {"Disease or Syndrome"};
        x.group_id = "DISO";
        x.group_name = "Disorders";
        return x;
    };
    const auto snap = pl::OntologySnapshot::build({e("C1", "renal failure"), e("C2", "kidney disease"),
                                                    e("C3", "fever"), e("C4", "fever")});
    pl::Article article;
    article.id = "A1";
    article.title = "Kidney injury";
    article.abstract = "Patients with renal failure and fever were seen.";
    const std::string text = article.text();
    article.mentions = {{text.find("renal"), text.find("renal") + 13, "renal failure", "C1"},
                        {text.find("fever"), text.find("fever") + 5, "fever", "C3"}};
    auto outcome = [&](std::size_t i, std::string pred, pl::Outcome o) {
        const auto& m = article.mentions[i];
        return pl::MatchOutcome{{"A1", m.start, m.end}, std::move(pred), m.cui, o};
    };
    const pl::ReferenceEncoder doc(256);
    Checks c;
    const std::vector<pl::MatchOutcome> exact{outcome(0, "C1", pl::Outcome::Exact), outcome(1, "C3", pl::Outcome::Exact)};
    const auto all_exact = pl::article_similarity(article, exact, snap, doc);
    c.expect(std::abs(all_exact.s_g - 1.0) <= 1e-6 && std::abs(all_exact.s_p - 1.0) <= 1e-6, "all-exact S_G/S_P");
    const std::vector<pl::MatchOutcome> twin{outcome(0, "C1", pl::Outcome::Exact), outcome(1, "C4", pl::Outcome::Missed)};
    c.expect(pl::article_similarity(article, twin, snap, doc).diff == 0.0, "gold-equals-prediction diff");
    c.expect(pl::article_similarity(article, exact, snap, doc, true).diff == 0.0, "replace-all diff");

    std::mt19937_64 rng(400);
    std::normal_distribution<double> g(0.0, 0.05);
    std::vector<pl::ArticleSimRecord> records(400);
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].article_id = "A" + std::to_string(i);
        records[i].diff = g(rng);
    }
    double mean = 0.0;
    for (const auto& r : records) mean += r.diff;
    mean /= 400.0;
    double var = 0.0;
    for (const auto& r : records) var += (r.diff - mean) * (r.diff - mean);
    const double sd = std::sqrt(var / 400.0);
    const auto sel = pl::select_regions(records);
    std::size_t a = 0, b = 0, agree = 0;
    for (const auto& r : sel.records) {
        const pl::Region want = r.diff < mean - sd ? pl::Region::A : (r.diff > mean + sd ? pl::Region::B : pl::Region::None);
        agree += r.region == want;
        a += r.region == pl::Region::A;
        b += r.region == pl::Region::B;
    }
    c.expect(agree == 400, "region flags " + std::to_string(agree) + "/400");
    return c.verdict("S_G = S_P = 1 on all-exact, diff 0 on equal replacements, regions " + std::to_string(agree) +
                     "/400 (A " + std::to_string(a) + ", B " + std::to_string(b) + ")");
}

Verdict attention_oracle() {
    std::mt19937_64 rng(50);
    const std::vector<std::string> vocab{"the", "mice", "iron", "nigra", "of", "treated", "with", "cells", "dose", "SN"};
    std::uniform_int_distribution<std::size_t> word(0, vocab.size() - 1);
    const std::set<std::string> stop{"the", "of", "with"};
    const pl::StopwordSet stop_set(stop.begin(), stop.end());
    std::size_t equal = 0;
    for (int i = 0; i < 50; ++i) {
        const std::size_t k = 3 + static_cast<std::size_t>(i % 14);
        std::vector<std::string> tokens;
        for (std::size_t j = 0; j < k; ++j) tokens.push_back(vocab[word(rng)]);
        std::uniform_int_distribution<std::size_t> pos(0, k - 1);
        const std::size_t first = pos(rng);
        const std::size_t last = std::min(k - 1, first + pos(rng) % 4);
        const auto tensor = pl::synthetic_attention(1 + i % 4, 1 + i % 3, k, 1000 + static_cast<std::uint64_t>(i));
        std::vector<std::vector<std::vector<std::vector<float>>>> nested(tensor.layers());
        for (std::size_t l = 0; l < tensor.layers(); ++l) {
            nested[l].resize(tensor.heads());
            for (std::size_t h = 0; h < tensor.heads(); ++h) {
                nested[l][h].assign(k, std::vector<float>(k));
                for (std::size_t r = 0; r < k; ++r)
                    for (std::size_t col = 0; col < k; ++col) nested[l][h][r][col] = tensor.at(l, h, r, col);
            }
        }
        const auto got = pl::attention_enrich(tensor, tokens, {first, last}, "mention", stop_set);
        if (got == t::oracle_attention_enrich(nested, tokens, first, last, "mention", stop)) ++equal;
    }

    const std::vector<std::string> tokens{"iron", "accumulation", "in", "the", "substantia", "nigra", "(", "SN",
                                          ")",    "of",           "mice", "in", "the", "experiment", "."};
    const std::size_t k = tokens.size();
    std::vector<float> values(k * k, 1.0f / static_cast<float>(k));
    values[13 * k + 10] = 0.5f; // row "experiment", column "mice"
    const pl::AttentionTensor hand(1, 1, k, values);
    const auto mice = pl::attention_enrich(hand, tokens, {10, 10}, "mice", pl::default_stopwords());
    return {equal == 50 && mice == "mice: experiment",
            std::to_string(equal) + "/50 tensors match the oracle, hand-built tensor gives \"" + mice + "\""};
}

Verdict format_round_trips() {
    t::TempDir dir;
    std::mt19937_64 rng(5);
    Checks c;

    pl::EmbeddingStore store(384);
    for (int i = 0; i < 20; ++i) store.add("C" + std::to_string(i) + "#" + std::to_string(i % 3), t::random_unit(rng, 384));
    pl::write_embeddings(dir / "a.prot", store);
    const auto prot = pl::load_embeddings(dir / "a.prot");
    bool prot_ok = prot.size() == store.size() && prot.dim() == store.dim();
    for (std::size_t r = 0; prot_ok && r < store.size(); ++r) {
        prot_ok = prot.id(r) == store.id(r);
        for (std::size_t i = 0; prot_ok && i < 384; ++i) {
            prot_ok = std::bit_cast<std::uint32_t>(prot.vector(r)[i]) == std::bit_cast<std::uint32_t>(store.vector(r)[i]);
        }
    }
    c.expect(prot_ok, "PROT round trip");

    std::normal_distribution<float> g(0.0f, 3.0f);
    std::vector<std::string> tokens;
    std::vector<float> values;
    for (int i = 0; i < 30; ++i) {
        tokens.push_back(i % 2 ? "##piece" + std::to_string(i) : "w\xc3\xa9" + std::to_string(i));
        for (int d = 0; d < 24; ++d) values.push_back(g(rng));
    }
    pl::write_token_encodings(dir / "a.toke", pl::TokenEncodings(24, tokens, values));
    const auto toke = pl::load_token_encodings(dir / "a.toke");
    c.expect(toke.tokens() == tokens && std::equal(values.begin(), values.end(), toke.data().begin(),
                                                   [](float x, float y) {
                                                       return std::bit_cast<std::uint32_t>(x) ==
                                                              std::bit_cast<std::uint32_t>(y);
                                                   }),
             "TOKE round trip");

    const auto attn = pl::synthetic_attention(3, 4, 11, 8);
    pl::write_attention(dir / "a.attn", attn);
    const auto attn_back = pl::load_attention(dir / "a.attn");
    c.expect(attn_back.layers() == 3 && attn_back.heads() == 4 && attn_back.tokens() == 11 &&
                 t::read_file(dir / "a.attn") == [&] {
                     pl::write_attention(dir / "b.attn", attn_back);
                     return t::read_file(dir / "b.attn");
                 }(),
             "ATTN round trip");

    auto rejected = [&](const std::string& name, auto loader) {
        auto bytes = t::read_file(dir / name);
        bytes[1] = 'X';
        t::write_file(dir / ("bad-" + name), bytes);
        try {
            loader(dir / ("bad-" + name));
        } catch (const pl::Error& e) {
            return e.code() == pl::ErrorCode::BadMagic;
        }
        return false;
    };
    c.expect(rejected("a.prot", [](const auto& p) { pl::load_embeddings(p); }), "PROT bad magic");
    c.expect(rejected("a.toke", [](const auto& p) { pl::load_token_encodings(p); }), "TOKE bad magic");
    c.expect(rejected("a.attn", [](const auto& p) { pl::load_attention(p); }), "ATTN bad magic");
    return c.verdict("PROT/TOKE/ATTN bit-exact, corrupted magic rejected as bad-magic");
}

Verdict recall_monotonic() {
    auto& fx = fixture();
    std::string cutoffs;
    for (int n = 1; n <= 32; ++n) cutoffs += (n > 1 ? "," : "") + std::to_string(n);
    Checks c;
    std::size_t runs = 0;
    for (const char* context : {"none", "nc", "ac", "ic"}) {
        for (const char* mode : {"none", "parametric", "type", "group"}) {
            const auto report = fx.report({std::string("context.mode=") + context, std::string("rerank.mode=") + mode,
                                           "eval.recall_at=" + cutoffs});
            ++runs;
            for (const char* run : {"baseline", "reranked"}) {
                double prev = 0.0;
                for (int n = 1; n <= 32; ++n) {
                    const double r = report.at("recall").at(run).at(std::to_string(n));
                    c.expect(r >= prev, std::string(context) + "/" + mode + " " + run + " R@" + std::to_string(n));
                    prev = r;
                }
            }
            const auto& sweep = report.at("topk_sweep");
            for (const auto& row : sweep) {
                c.expect(row.at("r_at_5").get<double>() >= row.at("r_at_1").get<double>(), "sweep R@5 < R@1");
            }
        }
    }
    return c.verdict("R@n non-decreasing for n = 1..32 over " + std::to_string(runs) + " fixture runs");
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, Verdict (*)()>> criteria{
        {"search-oracle-equivalence", search_oracle},
        {"rerank-identity", rerank_identity},
        {"parametric-worked-examples", worked_examples},
        {"constant-shift-invariance", constant_shift},
        {"grid-search-oracle", grid_search_oracle},
        {"end-to-end-fixture", end_to_end},
        {"article-similarity", article_similarity},
        {"attention-enrichment-oracle", attention_oracle},
        {"format-round-trips", format_round_trips},
        {"recall-monotonicity", recall_monotonic},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        if (!v.pass) ++failed;
        std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
