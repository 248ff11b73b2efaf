#include "rlpt/jsonl.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace rlpt::jsonl {

using nlohmann::json;

namespace {

std::ofstream open_out(const path& p) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write file: " + p.string());
    return f;
}

std::ifstream open_in(const path& p) {
    std::ifstream f(p);
    if (!f) throw std::runtime_error("cannot read file: " + p.string());
    return f;
}

}  // namespace

void write_documents(const path& p, std::span<const corpus::Document> docs) {
    auto f = open_out(p);
    for (const auto& d : docs) {
        json j = {{"id", d.id}, {"source", d.source}, {"text", d.text}};
        json flags = json::object();
        if (d.flags.deduped) flags["deduped"] = true;
        if (d.flags.pii_masked) flags["pii_masked"] = true;
        if (d.flags.decontaminated) flags["decontaminated"] = true;
        if (d.flags.filtered) flags["filtered"] = true;
        if (!d.flags.filtered_reason.empty()) flags["filtered_reason"] = d.flags.filtered_reason;
        j["flags"] = std::move(flags);
        f << j.dump() << '\n';
    }
}

void write_rejects(const path& p, std::span<const corpus::RejectRecord> rejects) {
    auto f = open_out(p);
    for (const auto& r : rejects)
        f << json{{"id", r.id}, {"stage", r.stage}, {"reason", r.reason}}.dump() << '\n';
}

void write_stats_csv(const path& p, std::span<const corpus::StageCounts> stats) {
    auto f = open_out(p);
    f << "stage,input,kept,rejected\n";
    for (const auto& s : stats)
        f << s.stage << ',' << s.input << ',' << s.kept << ',' << s.rejected << '\n';
}

void write_segments(const path& p, std::span<const seg::SegmentedText> segs) {
    auto f = open_out(p);
    for (const auto& s : segs)
        f << json{{"doc_id", s.doc_id}, {"segments", s.segments}}.dump() << '\n';
}

std::vector<seg::SegmentedText> read_segments(const path& p) {
    auto f = open_in(p);
    std::vector<seg::SegmentedText> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        out.push_back({j.at("doc_id").get<std::string>(),
                       j.at("segments").get<std::vector<std::string>>()});
    }
    return out;
}

void write_triples(const path& p, std::span<const seg::SegmentTriple> triples) {
    auto f = open_out(p);
    for (const auto& t : triples) {
        f << json{{"doc_id", t.doc_id},
                  {"i", t.index},
                  {"context", t.context},
                  {"target", t.target},
                  {"successor", t.successor}}
                 .dump()
          << '\n';
    }
}

void write_tasks(const path& p, std::span<const tasks::TaskInstance> items) {
    auto f = open_out(p);
    for (const auto& t : items) {
        f << json{{"task_id", t.task_id},
                  {"kind", std::string(tasks::kind_name(t.kind))},
                  {"prompt", t.prompt},
                  {"target", t.target},
                  {"ref_window", t.ref_window},
                  {"loss_weight", t.loss_weight}}
                 .dump()
          << '\n';
    }
}

std::vector<tasks::TaskInstance> read_tasks(const path& p) {
    auto f = open_in(p);
    std::vector<tasks::TaskInstance> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        tasks::TaskInstance t;
        t.task_id = j.at("task_id").get<std::string>();
        t.kind = j.at("kind").get<std::string>() == "MSR" ? tasks::TaskKind::Msr
                                                          : tasks::TaskKind::Asr;
        t.prompt = j.at("prompt").get<std::string>();
        t.target = j.at("target").get<std::string>();
        t.ref_window = j.at("ref_window").get<std::string>();
        t.loss_weight = j.at("loss_weight").get<double>();
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<trainer::QaTask> read_qa(const path& p) {
    auto f = open_in(p);
    std::vector<trainer::QaTask> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(f, line)) {
        ++n;
        if (line.empty()) continue;
        const json j = json::parse(line);
        trainer::QaTask t;
        t.id = j.contains("id") ? j["id"].get<std::string>()
                                : p.filename().string() + ":" + std::to_string(n);
        t.question = j.at("question").get<std::string>();
        t.gold = j.at("gold").get<std::string>();
        out.push_back(std::move(t));
    }
    return out;
}

void write_qa(const path& p, std::span<const trainer::QaTask> qa) {
    auto f = open_out(p);
    for (const auto& t : qa)
        f << json{{"id", t.id}, {"question", t.question}, {"gold", t.gold}}.dump() << '\n';
}

std::vector<std::string> read_texts(const path& p) {
    auto f = open_in(p);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("text") || !j["text"].is_string()) continue;
        out.push_back(j["text"].get<std::string>());
    }
    return out;
}

}  // namespace rlpt::jsonl

namespace rlpt::corpus {

IngestResult ingest_documents(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read corpus file: " + path.string());
    IngestResult out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        const auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("text") ||
            !j["text"].is_string()) {
            ++out.rejects;
            continue;
        }
        Document d;
        d.text = j["text"].get<std::string>();
        d.id = j.contains("id") && j["id"].is_string()
                   ? j["id"].get<std::string>()
                   : path.string() + ":" + std::to_string(line_no);
        if (j.contains("source") && j["source"].is_string())
            d.source = j["source"].get<std::string>();
        out.documents.push_back(std::move(d));
    }
    return out;
}

}  // namespace rlpt::corpus
