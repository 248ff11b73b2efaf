#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "rlpt/corpus.hpp"
#include "rlpt/jsonl.hpp"
#include "rlpt/text.hpp"

using namespace rlpt;
namespace fs = std::filesystem;

namespace {

// Test-side exact Jaccard over word w-gram shingle sets.
std::set<std::string> shingle_set(const std::string& text, std::size_t w) {
    const auto toks = text::whitespace_tokens(text::casefold(text));
    std::set<std::string> out;
    if (toks.size() < w) {
        std::string all;
        for (std::size_t i = 0; i < toks.size(); ++i) {
            if (i) all.push_back(' ');
            all += toks[i];
        }
        out.insert(all);
        return out;
    }
    for (std::size_t i = 0; i + w <= toks.size(); ++i) {
        std::string s = toks[i];
        for (std::size_t k = 1; k < w; ++k) s += " " + toks[i + k];
        out.insert(s);
    }
    return out;
}

double exact_jaccard(const std::string& a, const std::string& b, std::size_t w) {
    const auto sa = shingle_set(a, w), sb = shingle_set(b, w);
    std::size_t inter = 0;
    for (const auto& s : sa) inter += sb.count(s);
    const std::size_t uni = sa.size() + sb.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::string word(std::mt19937_64& rng, int lexicon) {
    return "w" + std::to_string(rng() % static_cast<std::uint64_t>(lexicon));
}

std::string random_doc(std::mt19937_64& rng, std::size_t tokens, int lexicon) {
    std::string out;
    for (std::size_t i = 0; i < tokens; ++i) {
        if (i) out.push_back(' ');
        out += word(rng, lexicon);
    }
    return out;
}

fs::path temp_file(const std::string& name, const std::string& body) {
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream f(p);
    f << body;
    return p;
}

}  // namespace

TEST_CASE("ingest assigns ids and counts rejects") {
    const auto p = temp_file("rlpt_ingest.jsonl",
                             "{\"text\":\"abc\"}\n"
                             "{\"text\":\"def\",\"id\":\"given\"}\n"
                             "not json at all\n"
                             "{\"text\":\"ghi\",\"source\":\"wiki\"}\n");
    const auto res = corpus::ingest_documents(p);
    REQUIRE(res.documents.size() == 3);
    CHECK(res.rejects == 1);
    CHECK(res.documents[0].id == p.string() + ":1");
    CHECK(res.documents[1].id == "given");
    CHECK(res.documents[2].source == "wiki");

    const auto empty = temp_file("rlpt_ingest_empty.jsonl", "");
    const auto res2 = corpus::ingest_documents(empty);
    CHECK(res2.documents.empty());
    CHECK(res2.rejects == 0);

    CHECK_THROWS(corpus::ingest_documents("/no/such/file.jsonl"));
}

TEST_CASE("minhash determinism and jaccard estimates") {
    corpus::MinHashConfig cfg;
    cfg.seed = 99;
    corpus::Document d1{"a", "", "the quick brown fox jumps over the lazy dog again and again", {}};
    corpus::Document d2 = d1;
    d2.id = "b";

    const auto s1 = corpus::minhash_signature(d1, cfg);
    const auto s2 = corpus::minhash_signature(d2, cfg);
    CHECK(s1.hashes == s2.hashes);
    CHECK(s1.band_keys == s2.band_keys);
    CHECK(s1.hashes.size() == cfg.permutations);
    CHECK(s1.band_keys.size() == cfg.bands);

    // disjoint shingle sets: exact J = 0, estimate should be near 0
    std::mt19937_64 rng(5);
    corpus::Document da{"da", "", random_doc(rng, 80, 50), {}};
    corpus::Document db{"db", "", random_doc(rng, 80, 50), {}};
    // force disjoint lexicons
    db.text = "x" + db.text;
    for (auto& c : db.text)
        if (c == ' ') c = ' ';
    db.text = "";
    for (int i = 0; i < 80; ++i) db.text += (i ? " " : "") + ("z" + std::to_string(i));
    REQUIRE(exact_jaccard(da.text, db.text, cfg.shingle_size) == 0.0);
    CHECK(corpus::estimate_jaccard(corpus::minhash_signature(da, cfg),
                                   corpus::minhash_signature(db, cfg)) < 0.05);

    // 1-gram shingles on {a,b,c,d} vs {c,d,e,f}: exact J = 1/3
    corpus::MinHashConfig uni = cfg;
    uni.shingle_size = 1;
    corpus::Document wa{"wa", "", "a b c d", {}};
    corpus::Document wb{"wb", "", "c d e f", {}};
    REQUIRE(exact_jaccard(wa.text, wb.text, 1) == doctest::Approx(1.0 / 3));
    const double est = corpus::estimate_jaccard(corpus::minhash_signature(wa, uni),
                                                corpus::minhash_signature(wb, uni));
    CHECK(est == doctest::Approx(1.0 / 3).epsilon(0.45));  // +-0.15 absolute
    CHECK(std::abs(est - 1.0 / 3) < 0.15);
}

TEST_CASE("dedup keeps singletons and collapses exact duplicates") {
    corpus::DedupConfig cfg;
    cfg.minhash.seed = 3;

    std::vector<corpus::Document> one{{"only", "", "some unremarkable text with enough words", {}}};
    auto r1 = corpus::dedup_corpus(one, cfg);
    CHECK(r1.kept.size() == 1);
    CHECK(r1.dropped.empty());
    CHECK(r1.kept[0].flags.deduped);

    std::mt19937_64 rng(17);
    const std::string body = random_doc(rng, 60, 30);
    std::vector<corpus::Document> two{{"first", "", body, {}}, {"second", "", body, {}}};
    auto r2 = corpus::dedup_corpus(two, cfg);
    REQUIRE(r2.kept.size() == 1);
    CHECK(r2.kept[0].id == "first");  // earliest ingested wins
    REQUIRE(r2.dropped.size() == 1);
    CHECK(r2.dropped[0].dropped_id == "second");
    CHECK(r2.dropped[0].kept_id == "first");
    CHECK(r2.dropped[0].est_jaccard == doctest::Approx(1.0));
}

TEST_CASE("dedup collapses planted near-duplicates without losing distractors") {
    corpus::DedupConfig cfg;
    cfg.minhash.seed = 12;
    std::mt19937_64 rng(2024);

    std::vector<corpus::Document> docs;
    const int planted = 30;
    for (int i = 0; i < planted; ++i) {
        std::string base = random_doc(rng, 150, 400);
        std::string near = base;
        // flip one token; with 150 tokens true Jaccard stays >= 0.9
        const std::size_t cut = near.rfind(' ');
        near = near.substr(0, cut + 1) + "flipped";
        REQUIRE(exact_jaccard(base, near, cfg.minhash.shingle_size) >= 0.9);
        docs.push_back({"p" + std::to_string(i) + "a", "", base, {}});
        docs.push_back({"p" + std::to_string(i) + "b", "", near, {}});
    }
    const int distractors = 300;
    for (int i = 0; i < distractors; ++i)
        docs.push_back({"d" + std::to_string(i), "", random_doc(rng, 120, 4000), {}});

    const auto res = corpus::dedup_corpus(docs, cfg);
    int pairs_collapsed = 0;
    for (const auto& drop : res.dropped)
        if (drop.dropped_id[0] == 'p') ++pairs_collapsed;
    int distractors_dropped = 0;
    for (const auto& drop : res.dropped)
        if (drop.dropped_id[0] == 'd') ++distractors_dropped;
    CHECK(pairs_collapsed >= planted * 95 / 100);
    CHECK(distractors_dropped < distractors * 5 / 100);

    // dedup soundness on this fixture: kept docs are pairwise below threshold
    corpus::MinHasher hasher(cfg.minhash);
    std::vector<corpus::MinHashSignature> sigs;
    for (const auto& d : res.kept) sigs.push_back(hasher.signature(d.text));
    for (std::size_t i = 0; i < sigs.size(); ++i)
        for (std::size_t j = i + 1; j < sigs.size(); ++j)
            CHECK(corpus::estimate_jaccard(sigs[i], sigs[j]) < cfg.threshold);
}

TEST_CASE("pii masking") {
    corpus::Document d{"x", "", "mail me at a@b.com.", {}};
    CHECK(corpus::mask_pii(d).text == "mail me at <EMAIL>.");

    CHECK(corpus::mask_pii_text("server 10.0.0.1 and 10.0.0.2") ==
          "server <IP> and <IP>");
    CHECK(corpus::mask_pii_text("call 555-123-4567 now") == "call <PHONE> now");
    CHECK(corpus::mask_pii_text("dial +1 (800) 555 0199 today") == "dial <PHONE> today");
    CHECK(corpus::mask_pii_text("pi is 3.14159265 here") == "pi is 3.14159265 here");
    CHECK(corpus::mask_pii_text("years 2024 2025 2026 pass") == "years 2024 2025 2026 pass");
    CHECK(corpus::mask_pii_text("ip 999.1.1.1 is invalid") == "ip 999.1.1.1 is invalid");

    // no matches: byte-identical text, flag still set
    corpus::Document clean{"y", "", "nothing sensitive here", {}};
    const auto masked = corpus::mask_pii(clean);
    CHECK(masked.text == clean.text);
    CHECK(masked.flags.pii_masked);

    // idempotence over assorted inputs
    std::mt19937_64 rng(8);
    for (int i = 0; i < 200; ++i) {
        std::string s = random_doc(rng, 12, 30) + " a@b.com 10.0.0.1 555-123-4567";
        const std::string once = corpus::mask_pii_text(s);
        CHECK(corpus::mask_pii_text(once) == once);
    }
}

TEST_CASE("decontamination") {
    // oracle: recompute canonical 13-grams of both texts and intersect
    auto oracle_hit = [](const std::string& doc, const std::string& eval_text,
                         std::size_t n) {
        const auto dg = corpus::canonical_ngrams(doc, n);
        const auto eg = corpus::canonical_ngrams(eval_text, n);
        const std::set<std::string> es(eg.begin(), eg.end());
        return std::any_of(dg.begin(), dg.end(),
                           [&](const std::string& g) { return es.count(g) > 0; });
    };

    const std::string eval_text =
        "alpha beta gamma delta epsilon zeta eta theta iota kappa lambda mu nu xi";
    const auto idx = corpus::build_eval_index({eval_text}, 13);

    // 13 verbatim tokens from the eval file -> rejected
    corpus::Document bad{"bad", "",
                         "Noise ahead. alpha beta gamma delta epsilon zeta eta theta iota "
                         "kappa lambda mu nu. And more noise.",
                         {}};
    CHECK(corpus::contamination_hit(bad, idx).has_value());
    CHECK(oracle_hit(bad.text, eval_text, 13));

    // shorter than n tokens always passes
    corpus::Document shorty{"s", "", "alpha beta gamma", {}};
    CHECK_FALSE(corpus::contamination_hit(shorty, idx).has_value());

    // only a 12-token overlap -> passes
    corpus::Document twelve{"t", "",
                            "alpha beta gamma delta epsilon zeta eta theta iota kappa "
                            "lambda mu BREAK nu xi",
                            {}};
    CHECK_FALSE(corpus::contamination_hit(twelve, idx).has_value());
    CHECK_FALSE(oracle_hit(twelve.text, eval_text, 13));

    // canonicalization: case and punctuation do not hide contamination
    corpus::Document sneaky{"c", "",
                            "ALPHA, beta; GAMMA delta epsilon zeta eta theta iota kappa "
                            "lambda mu nu!",
                            {}};
    CHECK(corpus::contamination_hit(sneaky, idx).has_value());
}

TEST_CASE("quality filter") {
    corpus::QualityConfig cfg;
    corpus::HeuristicScorer scorer;

    std::string prose =
        "The study of small systems often begins with a careful inventory of their parts. "
        "Each part is named, measured, and placed into a table for later use. "
        "When the table is complete, the real work of comparison across systems can begin. "
        "This is slow, but the records produced are worth the effort.";
    REQUIRE(prose.size() >= 200);
    corpus::Document good{"g", "", prose, {}};
    const auto d = corpus::quality_filter(good, cfg, scorer);
    CHECK(d.pass);
    CHECK(d.score > cfg.score_cutoff);

    corpus::Document digits{"d", "", std::string(500, '7'), {}};
    CHECK(corpus::quality_filter(digits, cfg, scorer).reason == "alpha_ratio");

    corpus::Document tiny{"t", "", "too short to use", {}};
    CHECK(corpus::quality_filter(tiny, cfg, scorer).reason == "min_chars");

    std::string repeated;
    for (int i = 0; i < 30; ++i) repeated += "The same line appears again here.\n";
    corpus::Document rep{"r", "", repeated, {}};
    CHECK(corpus::quality_filter(rep, cfg, scorer).reason == "repeated_lines");
}

TEST_CASE("pipeline order, flags and determinism") {
    corpus::PipelineConfig cfg;
    cfg.dedup.minhash.seed = 4;
    corpus::HeuristicScorer scorer;

    std::string prose =
        "A long enough paragraph of readable text that passes each rule easily. "
        "It speaks about rivers, mills, lamps, and other quiet machinery of daily life. "
        "Sentences stay a reasonable length and the lines never repeat themselves. "
        "Contact the archivist at records@example.org for the full set.";
    const std::string contaminated =
        "filler before the overlap alpha beta gamma delta epsilon zeta eta theta iota "
        "kappa lambda mu nu and filler after the overlap to reach the length rule. "
        "More framing text follows so that only the planted overlap is special here.";

    const auto idx = corpus::build_eval_index(
        {"alpha beta gamma delta epsilon zeta eta theta iota kappa lambda mu nu xi"}, 13);

    std::vector<corpus::Document> docs{
        {"keep", "", prose, {}},
        {"dup", "", prose, {}},
        {"contam", "", contaminated + std::string(60, 'x'), {}},
        {"short", "", "tiny", {}},
    };

    auto run = [&] { return corpus::prepare_corpus(docs, idx, cfg, scorer); };
    const auto r1 = run();
    REQUIRE(r1.kept.size() == 1);
    CHECK(r1.kept[0].id == "keep");
    CHECK(r1.kept[0].flags.deduped);
    CHECK(r1.kept[0].flags.pii_masked);
    CHECK(r1.kept[0].flags.decontaminated);
    CHECK(r1.kept[0].flags.filtered);
    CHECK(r1.kept[0].text.find("<EMAIL>") != std::string::npos);

    REQUIRE(r1.rejects.size() == 3);
    CHECK(r1.rejects[0].stage == "dedup");
    CHECK(r1.rejects[1].stage == "decontaminate");
    CHECK(r1.rejects[1].reason == "contaminated");
    CHECK(r1.rejects[2].stage == "filter");
    CHECK(r1.rejects[2].reason == "min_chars");
    CHECK(r1.stats.size() == 4);

    // byte-identical reports on re-run
    const auto r2 = run();
    const fs::path p1 = fs::temp_directory_path() / "rlpt_pipe1.jsonl";
    const fs::path p2 = fs::temp_directory_path() / "rlpt_pipe2.jsonl";
    jsonl::write_documents(p1, r1.kept);
    jsonl::write_documents(p2, r2.kept);
    std::ifstream f1(p1), f2(p2);
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    CHECK(s1.str() == s2.str());

    // worker count must not change decisions
    auto cfg2 = cfg;
    cfg2.dedup.workers = 4;
    const auto r3 = corpus::prepare_corpus(docs, idx, cfg2, scorer);
    REQUIRE(r3.kept.size() == 1);
    CHECK(r3.kept[0].id == "keep");
    CHECK(r3.rejects.size() == r1.rejects.size());

    // decontamination completeness: kept docs share no n-gram with the index
    for (const auto& doc : r1.kept)
        for (const auto& g : corpus::canonical_ngrams(doc.text, idx.n))
            CHECK(idx.ngram_set.count(g) == 0);
}
