#include "rlpt/segmentation.hpp"

#include <algorithm>
#include <cctype>

#include "rlpt/text.hpp"

namespace rlpt::seg {

namespace {

bool is_opener(char c) {
    return c == '(' || c == '[' || c == '{' || c == '"' || c == '\'';
}

// Word immediately before position i (exclusive), leading punctuation
// stripped, casefolded. For "See Fig. 3" with i at the '.', yields "fig".
std::string word_before(std::string_view s, std::size_t i) {
    std::size_t b = i;
    while (b > 0 && !std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    while (b < i && !std::isalnum(static_cast<unsigned char>(s[b]))) ++b;
    return text::casefold(s.substr(b, i - b));
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view s, const SplitConfig& cfg) {
    std::vector<std::string> out;
    auto emit = [&](std::size_t begin, std::size_t end) {
        const std::string sent = text::trim(s.substr(begin, end - begin));
        if (sent.size() < cfg.min_chars) return;
        if (text::count_whitespace_tokens(sent) < cfg.min_tokens) return;
        out.push_back(sent);
    };

    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!text::is_terminal_punct(s[i])) continue;
        if (i + 1 >= s.size() || !std::isspace(static_cast<unsigned char>(s[i + 1])))
            continue;
        // decimal guard: 3.14 and friends never end a sentence mid-number
        if (s[i] == '.' && i > 0 && i + 1 < s.size() &&
            std::isdigit(static_cast<unsigned char>(s[i - 1])) &&
            std::isdigit(static_cast<unsigned char>(s[i + 1])))
            continue;
        std::size_t k = i + 1;
        while (k < s.size() && std::isspace(static_cast<unsigned char>(s[k]))) ++k;
        if (k == s.size()) break;  // trailing whitespace, remainder flush below
        if (!std::isupper(static_cast<unsigned char>(s[k])) && !is_opener(s[k]))
            continue;
        if (s[i] == '.') {
            const std::string w = word_before(s, i);
            if (std::find(cfg.abbreviations.begin(), cfg.abbreviations.end(), w) !=
                cfg.abbreviations.end())
                continue;
        }
        emit(start, i + 1);
        start = k;
        i = k - 1;
    }
    if (start < s.size()) emit(start, s.size());
    return out;
}

SegmentedText segment_document(const corpus::Document& doc, const SplitConfig& cfg) {
    return SegmentedText{doc.id, split_sentences(doc.text, cfg)};
}

std::vector<SegmentTriple> build_triples(const SegmentedText& seg) {
    std::vector<SegmentTriple> out;
    const auto& ss = seg.segments;
    const std::size_t n = ss.size();
    if (n < 3) return out;
    out.reserve(n - 2);
    for (std::size_t i = 2; i <= n - 1; ++i) {  // 1-based target index
        SegmentTriple t;
        t.doc_id = seg.doc_id;
        t.index = i;
        t.context.assign(ss.begin(), ss.begin() + static_cast<std::ptrdiff_t>(i - 1));
        t.target = ss[i - 1];
        t.successor = ss[i];
        t.window.assign(ss.begin() + static_cast<std::ptrdiff_t>(i - 1), ss.end());
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace rlpt::seg
