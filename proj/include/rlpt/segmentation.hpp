#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rlpt/corpus.hpp"

namespace rlpt::seg {

struct SplitConfig {
    std::size_t min_tokens = 3;
    std::size_t min_chars = 10;
    // Lowercased, without the trailing period. "e.g" covers "e.g.".
    std::vector<std::string> abbreviations = {"dr",  "mr",  "mrs", "ms",
                                              "prof", "fig", "eq",  "e.g",
                                              "i.e", "etc", "vs"};
};

// Rule-based boundary detection: split after . ! ? followed by whitespace and
// an uppercase or opening character, except after known abbreviations or
// inside decimal numbers. Sentences shorter than min_tokens/min_chars are
// dropped from the sequence entirely.
std::vector<std::string> split_sentences(std::string_view text,
                                         const SplitConfig& cfg = {});

struct SegmentedText {
    std::string doc_id;
    std::vector<std::string> segments;  // s_1..s_n
};

SegmentedText segment_document(const corpus::Document& doc, const SplitConfig& cfg = {});

struct SegmentTriple {
    std::string doc_id;
    std::size_t index = 0;             // 1-based i, 2 <= i <= n-1
    std::vector<std::string> context;  // s_1..s_{i-1}
    std::string target;                // s_i
    std::string successor;             // s_{i+1}
    std::vector<std::string> window;   // s_i..s_n, reference tail
};

// One triple per i in 2..n-1; empty when n < 3.
std::vector<SegmentTriple> build_triples(const SegmentedText& seg);

}  // namespace rlpt::seg
