#include "corpuskit/judge.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <random>
#include <regex>
#include <stdexcept>
#include <thread>

#include <httplib.h>

#include "corpuskit/filters.hpp"
#include "corpuskit/hash.hpp"
#include "corpuskit/textutil.hpp"

namespace corpuskit {

namespace {

const std::string kEducationalTemplate =
    R"(You are a text quality evaluator for Hindi. Your task is to assess, on a scale of 1 to 5, how informative and educational a given text sample is. You MUST output your score in a JSON format.

Evaluation Criteria:

- Give 1 if the text is not informative or educational. Also, give 1 if the text is too simple, too short, ill-formatted, non-sensical, or contains NSFW content.
- Give 2 if the text is somewhat informative but lacks educational value. For example, it might mix educational content with non-educational material, offering a superficial overview of potentially useful topics.
- Give 3 if the text is informative and appropriate for educational use and introduces key concepts relevant to school curricula. For example, if the text is a well-written article on a scientific topic, but it may not be comprehensive or could include some extraneous information, being overly complex or too simple.
- Give 4 if the text is educational and informative, providing a highly relevant and beneficial educational purpose for a level not higher than grade school, exhibiting a clear and consistent writing style. For example, it could be similar to a chapter from a textbook or a tutorial, offering substantial educational content, including exercises and solutions, with minimal irrelevant information.
- Give 5 if the text is highly educational and informative. For a 5 score, the text must be outstanding in its educational value, perfectly suited for teaching either at primary school or grade school. It follows detailed reasoning, the writing style is easy to follow and offers profound and thorough insights into the subject matter.

Output Requirements:

- Your output must be a valid JSON object.
- The JSON must contain only one key-value pair.
- The key must be 'score'.
- The value must be an integer between 1 and 5.
- The value must be a faithful representation of the criteria above.

Example Output:

{'score': 2}

Ensure that your responses strictly adhere to this format and evaluate the text accurately based on the given criteria.

Below is an excerpt from a webpage. Rate whether the page has high educational value and can be useful in an educational setting for elementary to high school teaching. Assign a score between 1 and 5. Ensure your score reflects how informative and educational the text is. The text will be provided in Hindi.

---

Texto: [THE TEXT TO BE EVALUATED]

---

Provide your score as an integer between 1 and 5. Answer only in JSON format.)";

const std::string kToxicityTemplate =
    R"(You are a text quality evaluator for the Hindi language. Your task is to assess, from a scale of 1 to 5, how toxic a given text sample is. You MUST output your score in a JSON format.

Evaluation Criteria:

- Give 1 if the text is non-toxic, neutral, and appropriate for all audiences. The text contains no offensive, harmful, or inflammatory content.
- Give 2 if the text has minor toxicity, such as mildly inappropriate language, slight rudeness, or subtle negative sentiment, but it is not explicitly harmful or offensive.
- Give 3 if the text contains moderate toxicity, including some insults, offensive language, or inappropriate phrasing, but it is not highly aggressive or severely harmful.
- Give 4 if the text is highly toxic, containing strong hate speech, explicit threats, severe insults, or harmful stereotypes. It may also include demeaning or aggressive language targeting individuals or groups.
- Give 5 if the text is extremely toxic, exhibiting the highest level of harmful content, such as explicit calls for violence, severe discrimination, threats, or extremely offensive language. This score is reserved for the most dangerous and abusive texts.

Output Requirements:

- Your output must be a valid JSON object.
- The JSON must contain only one key-value pair
- The key must be 'score'.
- The value must be an integer between 1 and 5.
- The value must be a faithful representation of the criteria above.

Example Output:

{'score': 2}

Ensure that your responses strictly adhere to this format and evaluate the text accurately based on the given criteria.

Below is an excerpt from a webpage. Rate whether the excerpt contains harmful, offensive, or inappropriate language. Assign a score between 1 and 5. Ensure your score reflects the level of toxicity present in the text. The text will be provided in Hindi.

---

Texto: [THE TEXT TO BE EVALUATED]

---

Provide your score as an integer between 1 and 5. Respond only in JSON format.)";

// Cuts at a UTF-8 boundary after at most `limit` codepoints. Invalid lead
// bytes advance one byte, matching the tolerant decoder.
std::string_view truncate_codepoints(std::string_view text, size_t limit) {
    size_t pos = 0;
    size_t count = 0;
    while (pos < text.size() && count < limit) {
        unsigned char lead = static_cast<unsigned char>(text[pos]);
        size_t width = 1;
        if (lead >= 0xF0)
            width = 4;
        else if (lead >= 0xE0)
            width = 3;
        else if (lead >= 0xC0)
            width = 2;
        if (pos + width > text.size()) width = 1;
        pos += width;
        ++count;
    }
    return text.substr(0, pos);
}

std::string escape_slot_marker(std::string_view text, bool& escaped) {
    std::string out;
    out.reserve(text.size());
    size_t pos = 0;
    while (true) {
        size_t hit = text.find(kPromptSlot, pos);
        if (hit == std::string_view::npos) {
            out.append(text.substr(pos));
            return out;
        }
        escaped = true;
        out.append(text.substr(pos, hit - pos));
        out.push_back('\\');
        out.append(kPromptSlot);
        pos = hit + kPromptSlot.size();
    }
}

}  // namespace

std::string_view judge_task_name(JudgeTask task) {
    return task == JudgeTask::educational ? "educational" : "toxicity";
}

const std::string& judge_prompt_template(JudgeTask task) {
    return task == JudgeTask::educational ? kEducationalTemplate : kToxicityTemplate;
}

RenderedPrompt render_prompt(JudgeTask task, std::string_view doc_text) {
    if (doc_text.empty()) throw std::invalid_argument("empty_document_text");
    const std::string& tmpl = judge_prompt_template(task);
    size_t slot = tmpl.find(kPromptSlot);

    RenderedPrompt result;
    std::string body = escape_slot_marker(doc_text, result.marker_escaped);
    result.text.reserve(tmpl.size() + body.size());
    result.text.append(tmpl, 0, slot);
    result.text.append(body);
    result.text.append(tmpl, slot + kPromptSlot.size(), std::string::npos);
    return result;
}

int parse_score(std::string_view response) {
    static const std::regex pattern(
        R"(\{[^{}]*["']?score["']?\s*:\s*["']?(-?\d{1,10}))");
    std::cmatch match;
    if (!std::regex_search(response.data(), response.data() + response.size(), match,
                           pattern)) {
        throw std::runtime_error("unparsable");
    }
    long value = std::stol(match[1].str());
    if (value < 1 || value > 5) throw std::runtime_error("out_of_range");
    return static_cast<int>(value);
}

ScoreSidecar ScoreSidecar::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open sidecar file: " + path);

    ScoreSidecar sidecar;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("id") || !j.contains("edu_score") ||
            !j.contains("toxicity_score")) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": sidecar line needs id, edu_score, toxicity_score");
        }
        std::string id = j.at("id").get<std::string>();
        SidecarEntry entry;
        entry.edu_score = j.at("edu_score").get<int>();
        entry.toxicity_score = j.at("toxicity_score").get<int>();
        if (entry.edu_score < 1 || entry.edu_score > 5 || entry.toxicity_score < 1 ||
            entry.toxicity_score > 5) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": sidecar score outside 1..5");
        }
        if (!sidecar.entries_.emplace(std::move(id), entry).second) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": duplicate sidecar id");
        }
    }
    return sidecar;
}

void ScoreSidecar::set(const std::string& id, SidecarEntry entry) {
    entries_[id] = entry;
}

size_t apply_sidecar(std::vector<DocumentRecord>& docs, const ScoreSidecar& sidecar,
                     ConflictMode mode) {
    size_t annotated = 0;
    for (DocumentRecord& doc : docs) {
        auto it = sidecar.entries().find(doc.id);
        if (it == sidecar.entries().end()) continue;
        const SidecarEntry& entry = it->second;

        if (mode == ConflictMode::error) {
            if ((doc.edu_score && *doc.edu_score != entry.edu_score) ||
                (doc.toxicity_score && *doc.toxicity_score != entry.toxicity_score)) {
                throw std::runtime_error("score_conflict: " + doc.id);
            }
        }

        bool wrote = false;
        bool replace = mode != ConflictMode::keep;
        if (replace || !doc.edu_score) {
            wrote = wrote || !doc.edu_score || *doc.edu_score != entry.edu_score;
            doc.edu_score = entry.edu_score;
        }
        if (replace || !doc.toxicity_score) {
            wrote = wrote || !doc.toxicity_score || *doc.toxicity_score != entry.toxicity_score;
            doc.toxicity_score = entry.toxicity_score;
        }
        if (wrote) ++annotated;
    }
    return annotated;
}

std::vector<size_t> sample_indices(size_t n, size_t k, uint64_t seed) {
    if (k > n) k = n;
    std::vector<size_t> indices(n);
    for (size_t i = 0; i < n; ++i) indices[i] = i;

    std::mt19937_64 rng(seed);
    for (size_t i = 0; i < k; ++i) {
        size_t j = i + static_cast<size_t>(rng() % (n - i));
        std::swap(indices[i], indices[j]);
    }
    indices.resize(k);
    std::sort(indices.begin(), indices.end());
    return indices;
}

namespace {

struct RequestOutcome {
    std::optional<JudgeScore> score;
    int attempts = 0;
};

// The opening paragraph of each template is the evaluator persona; it goes
// out as the system message, the remainder as the user message.
void split_messages(const std::string& rendered, std::string& system, std::string& user) {
    size_t cut = rendered.find("\n\n");
    system = rendered.substr(0, cut);
    user = rendered.substr(cut + 2);
}

RequestOutcome score_one(httplib::Client& client, const JudgeClientConfig& cfg,
                         const DocumentRecord& doc, JudgeTask task, bool truncated,
                         std::string_view text) {
    RenderedPrompt prompt = render_prompt(task, text);
    std::string system, user;
    split_messages(prompt.text, system, user);

    nlohmann::json request = {
        {"model", cfg.model},
        {"messages",
         {{{"role", "system"}, {"content", system}}, {{"role", "user"}, {"content", user}}}},
        {"temperature", 0},
    };
    std::string body = request.dump();

    RequestOutcome outcome;
    for (int attempt = 1; attempt <= cfg.retries; ++attempt) {
        outcome.attempts = attempt;
        if (attempt > 1) {
            int delay = cfg.backoff_initial_ms << (attempt - 2);
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
        httplib::Result res = client.Post(cfg.path, body, "application/json");
        if (!res || res->status != 200) continue;
        try {
            nlohmann::json reply = nlohmann::json::parse(res->body);
            std::string content =
                reply.at("choices").at(0).at("message").at("content").get<std::string>();
            JudgeScore score;
            score.doc_id = doc.id;
            score.task = task;
            score.score = parse_score(content);
            score.raw_response = std::move(content);
            score.attempts = attempt;
            score.truncated = truncated;
            outcome.score = std::move(score);
            return outcome;
        } catch (const std::exception&) {
            continue;
        }
    }
    return outcome;
}

}  // namespace

AnnotationRun annotate_sample(std::vector<DocumentRecord>& docs, const JudgeClientConfig& cfg) {
    if (cfg.endpoint.empty()) throw std::invalid_argument("judge endpoint not set");
    if (cfg.retries < 1) throw std::invalid_argument("retries must be at least 1");

    std::vector<size_t> sampled =
        sample_indices(docs.size(), cfg.sample_size, derive_stream_seed(cfg.seed, "judge_sample"));

    struct DocResult {
        std::optional<JudgeScore> edu;
        std::optional<JudgeScore> tox;
        bool failed = false;
    };
    std::vector<DocResult> results(sampled.size());

    std::atomic<size_t> next{0};
    size_t workers = std::max<size_t>(1, std::min(cfg.max_in_flight, sampled.size()));
    auto run_worker = [&]() {
        httplib::Client client(cfg.endpoint);
        client.set_connection_timeout(cfg.timeout_seconds, 0);
        client.set_read_timeout(cfg.timeout_seconds, 0);
        client.set_write_timeout(cfg.timeout_seconds, 0);
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= sampled.size()) return;
            const DocumentRecord& doc = docs[sampled[i]];
            std::string_view text = doc.text;
            bool truncated = false;
            if (codepoint_count(text) > cfg.truncate_chars) {
                text = truncate_codepoints(text, cfg.truncate_chars);
                truncated = true;
            }
            DocResult& slot = results[i];
            RequestOutcome edu =
                score_one(client, cfg, doc, JudgeTask::educational, truncated, text);
            if (!edu.score) {
                slot.failed = true;
                continue;
            }
            slot.edu = std::move(edu.score);
            RequestOutcome tox =
                score_one(client, cfg, doc, JudgeTask::toxicity, truncated, text);
            if (!tox.score) {
                slot.failed = true;
                slot.edu.reset();
                continue;
            }
            slot.tox = std::move(tox.score);
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t t = 0; t < workers; ++t) pool.emplace_back(run_worker);
    for (std::thread& t : pool) t.join();

    AnnotationRun run;
    size_t truncated_docs = 0;
    for (size_t i = 0; i < sampled.size(); ++i) {
        DocResult& slot = results[i];
        DocumentRecord& doc = docs[sampled[i]];
        if (slot.failed) {
            run.failed_ids.push_back(doc.id);
            continue;
        }
        doc.edu_score = slot.edu->score;
        doc.toxicity_score = slot.tox->score;
        if (slot.edu->truncated) ++truncated_docs;
        run.scores.push_back(std::move(*slot.edu));
        run.scores.push_back(std::move(*slot.tox));
    }
    std::sort(run.scores.begin(), run.scores.end(),
              [](const JudgeScore& a, const JudgeScore& b) {
                  if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
                  return static_cast<int>(a.task) < static_cast<int>(b.task);
              });
    std::sort(run.failed_ids.begin(), run.failed_ids.end());

    run.manifest = {
        {"seed", cfg.seed},
        {"endpoint", cfg.endpoint},
        {"endpoint_host", extract_host(cfg.endpoint).value_or("")},
        {"model", cfg.model},
        {"sample_size", cfg.sample_size},
        {"sampled_documents", sampled.size()},
        {"scored_documents", sampled.size() - run.failed_ids.size()},
        {"failed_documents", run.failed_ids.size()},
        {"failed_ids", run.failed_ids},
        {"truncated_documents", truncated_docs},
        {"retries", cfg.retries},
        {"max_in_flight", cfg.max_in_flight},
    };
    return run;
}

}  // namespace corpuskit
