#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rlpt/corpus.hpp"
#include "rlpt/segmentation.hpp"
#include "rlpt/tasks.hpp"
#include "rlpt/trainer.hpp"

namespace rlpt::jsonl {

using std::filesystem::path;

void write_documents(const path& p, std::span<const corpus::Document> docs);

void write_rejects(const path& p, std::span<const corpus::RejectRecord> rejects);

// Columns: stage,input,kept,rejected
void write_stats_csv(const path& p, std::span<const corpus::StageCounts> stats);

void write_segments(const path& p, std::span<const seg::SegmentedText> segs);
std::vector<seg::SegmentedText> read_segments(const path& p);

// {doc_id, i, context:[...], target, successor}
void write_triples(const path& p, std::span<const seg::SegmentTriple> triples);

void write_tasks(const path& p, std::span<const tasks::TaskInstance> items);
std::vector<tasks::TaskInstance> read_tasks(const path& p);

// {"id": ..., "question": ..., "gold": ...}
std::vector<trainer::QaTask> read_qa(const path& p);
void write_qa(const path& p, std::span<const trainer::QaTask> qa);

// Plain text corpus lines for SFT: {"text": ...}
std::vector<std::string> read_texts(const path& p);

}  // namespace rlpt::jsonl
