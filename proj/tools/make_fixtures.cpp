// Regenerates the committed fixture corpora under tests/fixtures/. All
// content is derived from fixed seeds; rerunning reproduces the same bytes.
//
//   pattern_corpus.jsonl  docs whose next sentence is fully determined
//                         (a narrative cycle and question/answer chains)
//   varinfo_corpus.jsonl  three-step chains with ambiguous chain-to-chain
//                         hops, so information per sentence is uneven
//   coldstart.jsonl       SFT texts: task-formatted prompts with tagged
//                         completions, family-matched but randomly paired
//   qa_train.jsonl        arithmetic questions whose facts appear in the
//   qa_eval.jsonl         pattern corpus as plain text
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rlpt/tasks.hpp"
#include "rlpt/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Short sentences keep completions inside the policy window, start tag
// included, so inside-vs-outside the tags stays observable to the model.
const std::vector<std::string> kNarrative = {
    "The amber lamp glows warmly.", "A silver bell rings twice.",
    "The green moth rests here.",   "A quiet river bends south.",
    "The tall crane lifts beams.",  "A red kite drifts upward.",
    "The old clock ticks loudly.",  "A small boat rocks gently.",
    "The brown fox sleeps deeply.", "A warm wind moves past.",
};

const char* kNumberWords[] = {"zero", "one", "two",   "three", "four",
                              "five", "six", "seven", "eight", "nine"};

struct QaPair {
    int a = 0, b = 0;
    std::string question;
    std::string answer_sentence;
    std::string gold;  // the part after "Answer:"
};

std::vector<QaPair> qa_pairs() {
    std::vector<QaPair> out;
    for (int a = 2; a <= 3; ++a)
        for (int b = 1; b <= 4; ++b) {
            QaPair p;
            p.a = a;
            p.b = b;
            p.question = std::string("What is ") + kNumberWords[a] + " plus " +
                         kNumberWords[b] + "?";
            // short answers keep both operands inside the policy window at
            // the position where the sum word is emitted
            p.gold = std::string(kNumberWords[a + b]) + " exactly";
            p.answer_sentence = "Answer: " + p.gold + ".";
            out.push_back(std::move(p));
        }
    return out;
}

// Answer sentences expose only the sum, so a successor question must be a
// function of the sum alone or the corpus stops being deterministic under a
// short context window. canonical_for_sum picks that representative.
std::size_t canonical_for_sum(const std::vector<QaPair>& qa, int sum) {
    for (std::size_t i = 0; i < qa.size(); ++i)
        if (qa[i].a + qa[i].b == sum) return i;
    return 0;
}

const std::vector<std::string> kIngredients = {"flour", "water", "salt",
                                               "sugar", "butter", "yeast"};

// Filler context sentences. They appear only before the final context
// sentence, never as completions, so a sentence ending still pins down
// whether the prediction tags should open.
const std::vector<std::string> kFiller = {
    "The record notes this line.", "A reader skims the page.",
    "The entry continues as follows.", "Some context was given earlier.",
    "The passage carries on below.", "Another line sits above.",
};

struct VarChain {
    std::string a, b, c;
};

std::vector<VarChain> var_chains() {
    std::vector<VarChain> out;
    for (const auto& ing : kIngredients)
        out.push_back({"First we add the " + ing + " now.",
                       "Then we stir the " + ing + " gently.",
                       "Next we rest the " + ing + " briefly."});
    return out;
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out.push_back(' ');
        out += parts[i];
    }
    return out;
}

void write_docs(const fs::path& p, const std::vector<std::string>& texts,
                const std::string& source) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    for (std::size_t i = 0; i < texts.size(); ++i)
        f << json{{"id", source + "-" + std::to_string(i)},
                  {"source", source},
                  {"text", texts[i]}}
                 .dump()
          << '\n';
}

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rlpt::text::to_unit_double(rng()) *
                                    static_cast<double>(n)) %
           n;
}

std::string tagged(const std::string& completion) {
    return std::string(rlpt::tasks::kStartTag) + " " + completion + " " +
           std::string(rlpt::tasks::kEndTag);
}

std::string render_asr_text(const std::vector<std::string>& context,
                            const std::string& completion) {
    rlpt::seg::SegmentTriple t;
    t.context = context;
    t.window = {completion};
    const auto task = rlpt::tasks::render_asr_prompt(t);
    return task.prompt + tagged(completion);
}

std::string render_msr_text(const std::vector<std::string>& context,
                            const std::string& successor, const std::string& completion) {
    rlpt::seg::SegmentTriple t;
    t.context = context;
    t.successor = successor;
    t.window = {completion};
    const auto task = rlpt::tasks::render_msr_prompt(t);
    return task.prompt + tagged(completion);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"regenerate the committed fixture corpora"};
    std::string out_dir = "tests/fixtures";
    app.add_option("--out", out_dir, "output directory");
    CLI11_PARSE(app, argc, argv);
    fs::create_directories(out_dir);
    const fs::path out(out_dir);

    const auto qa = qa_pairs();
    const auto chains = var_chains();

    // --- pattern corpus: every sentence has a unique successor -------------
    std::vector<std::string> pattern_docs;
    for (std::size_t j = 0; j < kNarrative.size(); ++j) {
        std::vector<std::string> doc;
        for (std::size_t k = 0; k < 6; ++k)
            doc.push_back(kNarrative[(j + k) % kNarrative.size()]);
        pattern_docs.push_back(join(doc));
    }
    for (std::size_t p = 0; p < qa.size(); ++p) {
        std::vector<std::string> doc;
        std::size_t cur = p;
        for (std::size_t k = 0; k < 3; ++k) {
            const QaPair& q = qa[cur];
            doc.push_back(q.question);
            doc.push_back(q.answer_sentence);
            int next_sum = q.a + q.b + 1;
            if (next_sum > 7) next_sum = 3;
            cur = canonical_for_sum(qa, next_sum);
        }
        pattern_docs.push_back(join(doc));
    }
    write_docs(out / "pattern_corpus.jsonl", pattern_docs, "pattern");

    // --- variable-information corpus: chains deterministic inside, hops
    //     between chains ambiguous across docs ------------------------------
    std::vector<std::string> var_docs;
    for (std::size_t i = 0; i < chains.size(); ++i) {
        for (std::size_t hop : {1UL, 3UL}) {
            const VarChain& x = chains[i];
            const VarChain& y = chains[(i + hop) % chains.size()];
            var_docs.push_back(join({x.a, x.b, x.c, y.a, y.b, y.c}));
        }
    }
    write_docs(out / "varinfo_corpus.jsonl", var_docs, "varinfo");

    // --- cold start: formats and sentence shapes, no successor knowledge ---
    std::mt19937_64 rng(20250901);
    std::vector<std::string> cold;

    std::vector<std::string> qa_sentences;
    for (const auto& p : qa) {
        qa_sentences.push_back(p.question);
        qa_sentences.push_back(p.answer_sentence);
    }
    std::vector<std::string> var_sentences;
    for (const auto& c : chains) {
        var_sentences.push_back(c.a);
        var_sentences.push_back(c.b);
        var_sentences.push_back(c.c);
    }

    // Cold-start mixture: mostly family-matched random pairings (format and
    // sentence shapes), plus a fraction of true next-segment demonstrations
    // so reinforcement starts from weak corpus familiarity rather than a
    // blind uniform policy.
    for (int k = 0; k < 320; ++k) {
        const int family = k % 3;
        const bool demo = pick(rng, 10) < 3;
        std::vector<std::string> ctx;
        const std::size_t fillers = pick(rng, 3);
        for (std::size_t f = 0; f < fillers; ++f)
            ctx.push_back(kFiller[pick(rng, kFiller.size())]);
        std::string completion;
        if (family == 0) {
            const std::size_t i = pick(rng, kNarrative.size());
            ctx.push_back(kNarrative[i]);
            completion = demo ? kNarrative[(i + 1) % kNarrative.size()]
                              : kNarrative[pick(rng, kNarrative.size())];
        } else if (family == 1) {
            const QaPair& q = qa[pick(rng, qa.size())];
            if (pick(rng, 2)) {
                ctx.push_back(q.question);
                completion = demo ? q.answer_sentence
                                  : qa[pick(rng, qa.size())].answer_sentence;
            } else {
                ctx.push_back(q.answer_sentence);
                int next_sum = q.a + q.b + 1;
                if (next_sum > 7) next_sum = 3;
                completion = demo ? qa[canonical_for_sum(qa, next_sum)].question
                                  : qa[pick(rng, qa.size())].question;
            }
        } else {
            // chain-start sentences are the only contexts here, so sentence
            // endings stay unambiguous inside the fixed window
            const VarChain& c = chains[pick(rng, chains.size())];
            const VarChain& d = demo ? c : chains[pick(rng, chains.size())];
            ctx.push_back(c.a);
            const std::size_t mode = pick(rng, 5);
            if (mode < 2)
                completion = d.b + " " + d.c;  // two-step spans are common here
            else if (mode == 2)
                completion = d.b;
            else
                completion = d.c;
        }
        cold.push_back(render_asr_text(ctx, completion));
    }
    for (int k = 0; k < 80; ++k) {
        std::vector<std::string> all = kNarrative;
        all.insert(all.end(), qa_sentences.begin(), qa_sentences.end());
        for (const auto& c : chains) {
            all.push_back(c.b);
            all.push_back(c.c);
        }
        // fixed material slots; inventory sentences never precede <MASK>
        const std::string ctx = "The material text sits here.";
        const std::string succ = "More material text follows it.";
        const std::string completion = all[pick(rng, all.size())];
        cold.push_back(render_msr_text({ctx}, succ, completion));
    }

    {
        std::ofstream f(out / "coldstart.jsonl");
        for (std::size_t i = 0; i < cold.size(); ++i)
            f << json{{"id", "cold-" + std::to_string(i)}, {"text", cold[i]}}.dump() << '\n';
    }

    // raw text for the plain-NTP pretraining pass: the same documents the
    // next-segment tasks are built from
    {
        std::ofstream f(out / "pretrain.jsonl");
        std::size_t i = 0;
        for (const auto& t : pattern_docs)
            f << json{{"id", "pre-" + std::to_string(i++)}, {"text", t}}.dump() << '\n';
        for (const auto& t : var_docs)
            f << json{{"id", "pre-" + std::to_string(i++)}, {"text", t}}.dump() << '\n';
    }

    // --- arithmetic QA sets -------------------------------------------------
    {
        std::ofstream ftrain(out / "qa_train.jsonl");
        std::ofstream feval(out / "qa_eval.jsonl");
        for (std::size_t p = 0; p < qa.size(); ++p) {
            const json j = {{"id", "qa-" + std::to_string(p)},
                            {"question", qa[p].question},
                            {"gold", qa[p].gold}};
            ftrain << j.dump() << '\n';
            feval << j.dump() << '\n';
        }
    }

    std::cerr << "fixtures written to " << out.string() << ": " << pattern_docs.size()
              << " pattern docs, " << var_docs.size() << " varinfo docs, " << cold.size()
              << " cold-start texts, " << qa.size() << " qa pairs\n";
    return 0;
}
