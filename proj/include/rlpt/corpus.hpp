#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace rlpt::corpus {

struct DocumentFlags {
    bool deduped = false;
    bool pii_masked = false;
    bool decontaminated = false;
    bool filtered = false;
    std::string filtered_reason;  // empty when the filter stage passed
};

struct Document {
    std::string id;
    std::string source;
    std::string text;
    DocumentFlags flags;
};

struct IngestResult {
    std::vector<Document> documents;
    std::size_t rejects = 0;
};

// Reads one JSON object per line; a missing "id" becomes "<path>:<line>"
// (1-based). Malformed lines are counted, not fatal; an unreadable file is.
IngestResult ingest_documents(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// MinHash / LSH near-deduplication

struct MinHashConfig {
    std::size_t shingle_size = 5;  // word shingles over casefolded tokens
    std::size_t permutations = 128;
    std::size_t bands = 16;
    std::size_t rows = 8;
    std::uint64_t seed = 1;
};

struct MinHashSignature {
    std::vector<std::uint64_t> hashes;     // one slot per permutation
    std::vector<std::uint64_t> band_keys;  // one key per band
};

// Precomputes the permutation coefficients once per config.
class MinHasher {
public:
    explicit MinHasher(const MinHashConfig& cfg);
    MinHashSignature signature(const std::string& doc_text) const;
    const MinHashConfig& config() const { return cfg_; }

private:
    MinHashConfig cfg_;
    std::vector<std::uint64_t> mul_, add_;
};

MinHashSignature minhash_signature(const Document& doc, const MinHashConfig& cfg);

// Fraction of matching signature slots.
double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b);

struct DedupConfig {
    MinHashConfig minhash;
    double threshold = 0.8;
    unsigned workers = 1;
};

struct DropRecord {
    std::string dropped_id;
    std::string kept_id;  // cluster representative (earliest ingested)
    double est_jaccard = 0.0;
};

struct DedupResult {
    std::vector<Document> kept;  // ingest order preserved
    std::vector<DropRecord> dropped;
};

DedupResult dedup_corpus(std::vector<Document> docs, const DedupConfig& cfg);

// ---------------------------------------------------------------------------
// PII masking

// Replaces emails, IPv4 addresses and phone-number patterns with <EMAIL>,
// <IP>, <PHONE>. Everything else is preserved byte for byte. Idempotent.
std::string mask_pii_text(const std::string& text);
Document mask_pii(Document doc);

// ---------------------------------------------------------------------------
// Decontamination

// Casefold, map punctuation to spaces, collapse whitespace.
std::string canonicalize(std::string_view text);

std::vector<std::string> canonical_ngrams(std::string_view text, std::size_t n);

struct EvalSetIndex {
    std::size_t n = 13;
    std::unordered_set<std::string> ngram_set;
};

EvalSetIndex build_eval_index(const std::vector<std::string>& eval_texts, std::size_t n = 13);

// Returns the first overlapping n-gram, or nullopt when the document is clean.
std::optional<std::string> contamination_hit(const Document& doc, const EvalSetIndex& idx);

// ---------------------------------------------------------------------------
// Quality filtering

struct QualityConfig {
    std::size_t min_chars = 200;
    std::size_t max_chars = 100000;
    double min_alpha_ratio = 0.6;
    double min_mean_sentence_tokens = 3.0;
    double max_mean_sentence_tokens = 120.0;
    double max_repeated_line_ratio = 0.3;
    double score_cutoff = 0.3;
};

struct QualityStats {
    std::size_t chars = 0;
    double alpha_ratio = 0.0;
    double mean_sentence_tokens = 0.0;
    double repeated_line_ratio = 0.0;
};

QualityStats quality_stats(const std::string& text);

// The "model" stage of the filter. The default scorer is a deterministic
// weighted combination of the rule statistics; a learned model can be
// plugged in behind the same interface.
class QualityScorer {
public:
    virtual ~QualityScorer() = default;
    virtual double score(const Document& doc, const QualityStats& stats) const = 0;
};

class HeuristicScorer : public QualityScorer {
public:
    double score(const Document& doc, const QualityStats& stats) const override;
};

struct FilterDecision {
    bool pass = false;
    std::string reason;  // failed rule name when pass is false
    double score = 0.0;
};

FilterDecision quality_filter(const Document& doc, const QualityConfig& cfg,
                              const QualityScorer& scorer);

// ---------------------------------------------------------------------------
// Full pipeline: dedup -> PII -> decontaminate -> filter

struct PipelineConfig {
    DedupConfig dedup;
    std::size_t contamination_n = 13;
    QualityConfig quality;
};

struct RejectRecord {
    std::string id;
    std::string stage;
    std::string reason;
};

struct StageCounts {
    std::string stage;
    std::size_t input = 0;
    std::size_t kept = 0;
    std::size_t rejected = 0;
};

struct PipelineResult {
    std::vector<Document> kept;
    std::vector<RejectRecord> rejects;
    std::vector<DropRecord> dropped_pairs;
    std::vector<StageCounts> stats;
};

PipelineResult prepare_corpus(std::vector<Document> docs, const EvalSetIndex& idx,
                              const PipelineConfig& cfg, const QualityScorer& scorer);

}  // namespace rlpt::corpus
