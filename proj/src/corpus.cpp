#include "rlpt/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <random>
#include <regex>
#include <stdexcept>
#include <unordered_map>

#include "rlpt/kernels.hpp"
#include "rlpt/parallel.hpp"
#include "rlpt/text.hpp"

namespace rlpt::corpus {

using text::casefold;
using text::hash_bytes;
using text::mix64;

// ---------------------------------------------------------------------------
// MinHash

MinHasher::MinHasher(const MinHashConfig& cfg) : cfg_(cfg) {
    if (cfg.permutations != cfg.bands * cfg.rows)
        throw std::invalid_argument("minhash: permutations must equal bands*rows");
    std::mt19937_64 rng(cfg.seed);
    mul_.resize(cfg.permutations);
    add_.resize(cfg.permutations);
    for (std::size_t j = 0; j < cfg.permutations; ++j) {
        mul_[j] = rng() | 1ULL;  // odd multiplier keeps the map bijective mod 2^64
        add_[j] = rng();
    }
}

MinHashSignature MinHasher::signature(const std::string& doc_text) const {
    const auto tokens = text::whitespace_tokens(casefold(doc_text));
    std::vector<std::uint64_t> shingle_hashes;
    const std::size_t w = cfg_.shingle_size;
    if (tokens.size() < std::max<std::size_t>(w, 1)) {
        std::string all;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (i) all.push_back(' ');
            all += tokens[i];
        }
        shingle_hashes.push_back(hash_bytes(all, cfg_.seed));
    } else {
        shingle_hashes.reserve(tokens.size() - w + 1);
        for (std::size_t i = 0; i + w <= tokens.size(); ++i) {
            std::string sh = tokens[i];
            for (std::size_t k = 1; k < w; ++k) {
                sh.push_back(' ');
                sh += tokens[i + k];
            }
            shingle_hashes.push_back(hash_bytes(sh, cfg_.seed));
        }
    }

    MinHashSignature sig;
    sig.hashes.assign(cfg_.permutations, ~0ULL);
    const auto& ops = kernels::active();
    for (std::uint64_t x : shingle_hashes)
        ops.minhash_update(sig.hashes.data(), mul_.data(), add_.data(), x,
                           cfg_.permutations);

    sig.band_keys.resize(cfg_.bands);
    for (std::size_t b = 0; b < cfg_.bands; ++b) {
        std::uint64_t k = mix64(cfg_.seed ^ (0xb0bafe77ULL + 0x1000003ULL * b));
        for (std::size_t r = 0; r < cfg_.rows; ++r)
            k = mix64(k ^ sig.hashes[b * cfg_.rows + r]);
        sig.band_keys[b] = k;
    }
    return sig;
}

MinHashSignature minhash_signature(const Document& doc, const MinHashConfig& cfg) {
    return MinHasher(cfg).signature(doc.text);
}

double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
    if (a.hashes.size() != b.hashes.size() || a.hashes.empty())
        throw std::invalid_argument("estimate_jaccard: signature size mismatch");
    std::size_t same = 0;
    for (std::size_t j = 0; j < a.hashes.size(); ++j)
        same += a.hashes[j] == b.hashes[j];
    return static_cast<double>(same) / static_cast<double>(a.hashes.size());
}

// ---------------------------------------------------------------------------
// Dedup

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    // Representative is always the smaller (earlier-ingested) index.
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) parent[b] = a;
        else parent[a] = b;
    }
};

}  // namespace

DedupResult dedup_corpus(std::vector<Document> docs, const DedupConfig& cfg) {
    const std::size_t n = docs.size();
    DedupResult result;
    if (n == 0) return result;

    MinHasher hasher(cfg.minhash);
    std::vector<MinHashSignature> sigs(n);
    parallel_for(n, cfg.workers, [&](std::size_t i) {
        sigs[i] = hasher.signature(docs[i].text);
    });

    // Same band key in the same band -> candidate pair.
    UnionFind uf(n);
    for (std::size_t b = 0; b < cfg.minhash.bands; ++b) {
        std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
        for (std::size_t i = 0; i < n; ++i)
            buckets[sigs[i].band_keys[b]].push_back(i);
        for (const auto& [key, members] : buckets) {
            if (members.size() < 2) continue;
            for (std::size_t p = 0; p + 1 < members.size(); ++p)
                for (std::size_t q = p + 1; q < members.size(); ++q) {
                    const std::size_t i = members[p], j = members[q];
                    if (uf.find(i) == uf.find(j)) continue;
                    if (estimate_jaccard(sigs[i], sigs[j]) >= cfg.threshold)
                        uf.unite(i, j);
                }
        }
    }

    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = docs[i].id;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t rep = uf.find(i);
        docs[i].flags.deduped = true;
        if (rep == i) {
            result.kept.push_back(std::move(docs[i]));
        } else {
            result.dropped.push_back({ids[i], ids[rep],
                                      estimate_jaccard(sigs[i], sigs[rep])});
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// PII masking

namespace {

const std::regex& email_regex() {
    static const std::regex re(R"(([A-Za-z0-9._%+\-]+)@([A-Za-z0-9.\-]+)\.([A-Za-z]{2,}))");
    return re;
}

const std::regex& ip_regex() {
    static const std::regex re(R"((\d{1,3})\.(\d{1,3})\.(\d{1,3})\.(\d{1,3}))");
    return re;
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

std::string replace_matches(const std::string& in, const std::regex& re,
                            const char* placeholder,
                            bool (*validate)(const std::smatch&, const std::string&, std::size_t)) {
    std::string out;
    out.reserve(in.size());
    std::size_t last = 0;
    auto begin = std::sregex_iterator(in.begin(), in.end(), re);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        const std::size_t pos = static_cast<std::size_t>(m.position(0));
        if (validate && !validate(m, in, pos)) continue;
        out.append(in, last, pos - last);
        out += placeholder;
        last = pos + static_cast<std::size_t>(m.length(0));
    }
    out.append(in, last, in.size() - last);
    return out;
}

bool valid_ip(const std::smatch& m, const std::string& in, std::size_t pos) {
    for (int g = 1; g <= 4; ++g)
        if (std::stoi(m[g].str()) > 255) return false;
    // No digit or dot hugging the match; avoids chewing "1.2.3.4.5" apart.
    const std::size_t end = pos + static_cast<std::size_t>(m.length(0));
    if (pos > 0 && (is_word_char(in[pos - 1]) || in[pos - 1] == '.')) return false;
    if (end < in.size() && (is_word_char(in[end]) || in[end] == '.')) return false;
    return true;
}

bool phone_span_char(char c) {
    return std::isdigit(static_cast<unsigned char>(c)) != 0 || c == '-' ||
           c == '.' || c == ' ' || c == '(' || c == ')' || c == '+';
}

// Phone candidates are digit groups joined by -, ., spaces or parentheses,
// 7..15 digits total. Requires a leading +, a dash, parentheses, or a
// contiguous run of >=7 digits, and skips dotted-only spans (decimals,
// version numbers, already-masked IPs are gone by this point).
std::string mask_phones(const std::string& in) {
    std::string out;
    out.reserve(in.size());
    std::size_t i = 0;
    while (i < in.size()) {
        const char c = in[i];
        const bool starter = (std::isdigit(static_cast<unsigned char>(c)) != 0 ||
                              c == '+' || c == '(');
        // a digit right after '.' is a decimal tail, not a phone start
        const bool boundary =
            i == 0 || (!is_word_char(in[i - 1]) && in[i - 1] != '.');
        if (!starter || !boundary) {
            out.push_back(c);
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < in.size() && phone_span_char(in[j])) ++j;
        // trim trailing non-digits except a closing paren after a digit
        std::size_t end = j;
        while (end > i && !std::isdigit(static_cast<unsigned char>(in[end - 1])) &&
               in[end - 1] != ')')
            --end;
        const std::string span = in.substr(i, end - i);

        std::size_t digits = 0, run = 0, max_run = 0;
        bool has_dash = false, has_paren = false, dot_sep = false, other_sep = false;
        const bool has_plus = !span.empty() && span.front() == '+';
        for (char sc : span) {
            if (std::isdigit(static_cast<unsigned char>(sc))) {
                ++digits;
                max_run = std::max(max_run, ++run);
                continue;
            }
            run = 0;
            if (sc == '-') has_dash = true;
            else if (sc == '(' || sc == ')') has_paren = true;
            else if (sc == '.') dot_sep = true;
            else if (sc == ' ') other_sep = true;
        }
        const bool shape_ok = digits >= 7 && digits <= 15;
        const bool anchor = has_plus || has_dash || has_paren || max_run >= 7;
        const bool dotted_only = dot_sep && !has_dash && !has_paren && !other_sep && !has_plus;
        const bool tail_ok = end >= in.size() || !is_word_char(in[end]);
        if (shape_ok && anchor && !dotted_only && tail_ok && digits > 0) {
            out += "<PHONE>";
            i = end;
        } else {
            out.push_back(c);
            ++i;
        }
    }
    return out;
}

}  // namespace

std::string mask_pii_text(const std::string& in) {
    std::string s = replace_matches(in, email_regex(), "<EMAIL>", nullptr);
    s = replace_matches(s, ip_regex(), "<IP>", valid_ip);
    return mask_phones(s);
}

Document mask_pii(Document doc) {
    doc.text = mask_pii_text(doc.text);
    doc.flags.pii_masked = true;
    return doc;
}

// ---------------------------------------------------------------------------
// Decontamination

std::string canonicalize(std::string_view sv) {
    std::string mapped;
    mapped.reserve(sv.size());
    for (char c : sv) {
        const unsigned char u = static_cast<unsigned char>(c);
        if (u < 0x80 && std::ispunct(u)) mapped.push_back(' ');
        else if (u < 0x80) mapped.push_back(static_cast<char>(std::tolower(u)));
        else mapped.push_back(c);
    }
    return text::collapse_whitespace(mapped);
}

std::vector<std::string> canonical_ngrams(std::string_view sv, std::size_t n) {
    const auto tokens = text::whitespace_tokens(canonicalize(sv));
    std::vector<std::string> grams;
    if (n == 0 || tokens.size() < n) return grams;
    grams.reserve(tokens.size() - n + 1);
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string g = tokens[i];
        for (std::size_t k = 1; k < n; ++k) {
            g.push_back(' ');
            g += tokens[i + k];
        }
        grams.push_back(std::move(g));
    }
    return grams;
}

EvalSetIndex build_eval_index(const std::vector<std::string>& eval_texts, std::size_t n) {
    EvalSetIndex idx;
    idx.n = n;
    for (const auto& text : eval_texts)
        for (auto& g : canonical_ngrams(text, n))
            idx.ngram_set.insert(std::move(g));
    return idx;
}

std::optional<std::string> contamination_hit(const Document& doc, const EvalSetIndex& idx) {
    for (auto& g : canonical_ngrams(doc.text, idx.n))
        if (idx.ngram_set.count(g)) return g;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Quality filter

QualityStats quality_stats(const std::string& s) {
    QualityStats st;
    st.chars = s.size();

    std::size_t alpha = 0;
    for (unsigned char c : s)
        if (std::isalpha(c)) ++alpha;
    st.alpha_ratio = s.empty() ? 0.0 : static_cast<double>(alpha) / static_cast<double>(s.size());

    // Sentences for the statistic: pieces between terminal punctuation runs.
    std::size_t sentences = 0, total_tokens = 0;
    std::size_t start = 0;
    auto flush = [&](std::size_t end) {
        const std::size_t toks = text::count_whitespace_tokens(
            std::string_view(s).substr(start, end - start));
        if (toks > 0) {
            ++sentences;
            total_tokens += toks;
        }
    };
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (text::is_terminal_punct(s[i])) {
            flush(i);
            while (i + 1 < s.size() && text::is_terminal_punct(s[i + 1])) ++i;
            start = i + 1;
        }
    }
    flush(s.size());
    st.mean_sentence_tokens =
        sentences == 0 ? 0.0 : static_cast<double>(total_tokens) / static_cast<double>(sentences);

    std::size_t lines = 0, repeats = 0;
    std::unordered_set<std::string> seen;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t nl = s.find('\n', pos);
        const std::size_t end = nl == std::string::npos ? s.size() : nl;
        std::string line = text::trim(std::string_view(s).substr(pos, end - pos));
        if (!line.empty()) {
            ++lines;
            if (!seen.insert(std::move(line)).second) ++repeats;
        }
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
    st.repeated_line_ratio =
        lines == 0 ? 0.0 : static_cast<double>(repeats) / static_cast<double>(lines);
    return st;
}

double HeuristicScorer::score(const Document&, const QualityStats& st) const {
    // Trapezoid over mean sentence length: 0 outside [3,120], flat 1 on [8,60].
    double len = 0.0;
    const double m = st.mean_sentence_tokens;
    if (m > 3.0 && m < 120.0) {
        if (m < 8.0) len = (m - 3.0) / 5.0;
        else if (m <= 60.0) len = 1.0;
        else len = (120.0 - m) / 60.0;
    }
    const double alpha = std::clamp(st.alpha_ratio, 0.0, 1.0);
    const double unique = std::clamp(1.0 - st.repeated_line_ratio, 0.0, 1.0);
    return 0.4 * alpha + 0.3 * len + 0.3 * unique;
}

FilterDecision quality_filter(const Document& doc, const QualityConfig& cfg,
                              const QualityScorer& scorer) {
    const QualityStats st = quality_stats(doc.text);
    FilterDecision d;
    if (st.chars < cfg.min_chars) {
        d.reason = "min_chars";
    } else if (st.chars > cfg.max_chars) {
        d.reason = "max_chars";
    } else if (st.alpha_ratio < cfg.min_alpha_ratio) {
        d.reason = "alpha_ratio";
    } else if (st.mean_sentence_tokens < cfg.min_mean_sentence_tokens ||
               st.mean_sentence_tokens > cfg.max_mean_sentence_tokens) {
        d.reason = "sentence_len";
    } else if (st.repeated_line_ratio > cfg.max_repeated_line_ratio) {
        d.reason = "repeated_lines";
    }
    d.score = scorer.score(doc, st);
    if (d.reason.empty() && d.score < cfg.score_cutoff) d.reason = "quality_score";
    d.pass = d.reason.empty();
    return d;
}

// ---------------------------------------------------------------------------
// Pipeline

PipelineResult prepare_corpus(std::vector<Document> docs, const EvalSetIndex& idx,
                              const PipelineConfig& cfg, const QualityScorer& scorer) {
    PipelineResult out;
    const std::size_t n_in = docs.size();

    DedupResult dd = dedup_corpus(std::move(docs), cfg.dedup);
    for (const auto& drop : dd.dropped)
        out.rejects.push_back({drop.dropped_id, "dedup", "duplicate_of:" + drop.kept_id});
    out.dropped_pairs = std::move(dd.dropped);
    out.stats.push_back({"dedup", n_in, dd.kept.size(), n_in - dd.kept.size()});

    std::vector<Document> masked;
    masked.reserve(dd.kept.size());
    for (auto& doc : dd.kept) masked.push_back(mask_pii(std::move(doc)));
    out.stats.push_back({"pii", masked.size(), masked.size(), 0});

    std::vector<Document> clean;
    clean.reserve(masked.size());
    std::size_t contaminated = 0;
    for (auto& doc : masked) {
        if (auto hit = contamination_hit(doc, idx)) {
            ++contaminated;
            out.rejects.push_back({doc.id, "decontaminate", "contaminated"});
            continue;
        }
        doc.flags.decontaminated = true;
        clean.push_back(std::move(doc));
    }
    out.stats.push_back({"decontaminate", clean.size() + contaminated, clean.size(), contaminated});

    std::size_t filtered = 0;
    for (auto& doc : clean) {
        const FilterDecision d = quality_filter(doc, cfg.quality, scorer);
        doc.flags.filtered = true;
        if (!d.pass) {
            ++filtered;
            doc.flags.filtered_reason = d.reason;
            out.rejects.push_back({doc.id, "filter", d.reason});
            continue;
        }
        out.kept.push_back(std::move(doc));
    }
    out.stats.push_back({"filter", out.kept.size() + filtered, out.kept.size(), filtered});
    return out;
}

}  // namespace rlpt::corpus
