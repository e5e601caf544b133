#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tloc/dataset_io.hpp"
#include "tloc/errors.hpp"
#include "tloc/llm_client.hpp"

namespace tloc {

// Seconds -> zero-padded "MM:SS", or "HH:MM:SS" from one hour up.
// Fractional seconds round to the nearest whole second.
inline std::string format_mmss(double seconds) {
    long long total = std::llround(std::max(0.0, seconds));
    char buf[32];
    if (total >= 3600)
        std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld", total / 3600, (total / 60) % 60, total % 60);
    else
        std::snprintf(buf, sizeof(buf), "%02lld:%02lld", total / 60, total % 60);
    return buf;
}

// Strict inverse of format_mmss: "MM:SS" or "HH:MM:SS" with minutes and
// seconds in [0, 59]. Anything else (e.g. "99:99") is rejected.
inline std::optional<double> parse_mmss(const std::string& text) {
    static const std::regex re(R"(^\s*(?:(\d{1,4}):)?([0-5]?\d):([0-5]\d)\s*$)");
    std::smatch m;
    if (!std::regex_match(text, m, re)) return std::nullopt;
    double hours = m[1].matched ? std::stod(m[1].str()) : 0.0;
    return hours * 3600.0 + std::stod(m[2].str()) * 60.0 + std::stod(m[3].str());
}

// The dense-caption context block sent to the generator: one line per
// event, "[MM:SS-MM:SS] sentence", sorted by start time.
struct GenerationContext {
    std::string video_id;
    double duration = 0.0;
    std::vector<std::string> lines;

    std::string text() const {
        std::string out;
        for (const auto& line : lines) {
            if (!out.empty()) out += '\n';
            out += line;
        }
        return out;
    }
};

inline GenerationContext build_context(const VideoRecord& record) {
    if (record.events.empty()) throw EmptyRecord("video " + record.video_id + " has no events");
    auto events = record.events;
    std::stable_sort(events.begin(), events.end(),
                     [](const CaptionedEvent& a, const CaptionedEvent& b) { return a.interval.start < b.interval.start; });
    GenerationContext ctx;
    ctx.video_id = record.video_id;
    ctx.duration = record.duration;
    for (const auto& ev : events)
        ctx.lines.push_back("[" + format_mmss(ev.interval.start) + "-" + format_mmss(ev.interval.end) + "] " +
                            ev.sentence);
    return ctx;
}

struct FewShotExample {
    std::string context_text;
    std::string reply_json;
};

inline const std::vector<FewShotExample>& default_few_shots() {
    static const std::vector<FewShotExample> shots = {
        {"[00:00-00:14] A man wheels a bicycle into the garage.\n"
         "[00:15-01:02] The man replaces the rear tire.\n"
         "[01:03-01:20] He rides the bicycle down the driveway.",
         R"([{"question": "When is the man's work put to the test?", "start_mmss": "01:03", "end_mmss": "01:20", )"
         R"("explanation": "Riding the bicycle down the driveway is the moment the repaired tire is actually tried out."}])"},
        {"[00:00-00:08] A girl stretches on a mat.\n"
         "[00:09-00:31] The girl performs a cartwheel sequence.\n"
         "[00:32-00:45] She bows to the judges.",
         R"([{"question": "When does the most acrobatic part of the routine happen?", "start_mmss": "00:09", )"
         R"("end_mmss": "00:31", "explanation": "The cartwheel sequence is far more acrobatic than stretching or bowing."}])"},
    };
    return shots;
}

inline std::string generation_system_prompt() {
    return "You write reasoning temporal localization questions for videos. You are given the timestamped captions "
           "of a video. Generate questions that ask when something happens without naming the target event "
           "directly, so answering requires reasoning over the captions or world knowledge. For every question "
           "also provide the start and end timestamps of the target event and an explanation of the reasoning. "
           "Reply with only a JSON list; each item must be an object with string fields \"question\", "
           "\"start_mmss\", \"end_mmss\", and \"explanation\". Timestamps use MM:SS, or HH:MM:SS for videos of an "
           "hour or longer.";
}

inline std::string generation_request_line(int n_questions) {
    return "Generate exactly " + std::to_string(n_questions) +
           " reasoning temporal localization questions for this video as a JSON list.";
}

// System message, then one user/assistant turn per few-shot example,
// then the real context: 2 + 2*|few_shots| messages.
inline std::vector<ChatMessage> build_generation_prompt(const GenerationContext& ctx,
                                                        const std::vector<FewShotExample>& few_shots,
                                                        int n_questions) {
    if (n_questions < 1) throw InvalidArgument("build_generation_prompt: n_questions must be >= 1");
    std::vector<ChatMessage> messages;
    messages.push_back({"system", generation_system_prompt()});
    for (const auto& shot : few_shots) {
        messages.push_back({"user", shot.context_text + "\n\n" + generation_request_line(1)});
        messages.push_back({"assistant", shot.reply_json});
    }
    messages.push_back({"user", ctx.text() + "\n\n" + generation_request_line(n_questions)});
    return messages;
}

struct GenerationParse {
    std::vector<RTLSample> samples;
    int rejected = 0;
};

namespace detail {

inline std::optional<nlohmann::json> find_json_list(const std::string& reply) {
    auto try_parse = [](const std::string& text) -> std::optional<nlohmann::json> {
        nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
        if (!j.is_discarded() && j.is_array()) return j;
        return std::nullopt;
    };
    if (auto j = try_parse(trim(reply))) return j;
    auto begin = reply.find('[');
    auto end = reply.rfind(']');
    if (begin == std::string::npos || end == std::string::npos || end <= begin) return std::nullopt;
    return try_parse(reply.substr(begin, end - begin + 1));
}

} // namespace detail

// Parses a generation reply into validated samples. Items with missing
// fields, unparseable times, inverted intervals, or intervals outside
// [0, duration + 1 s] are dropped and counted; the 1 s slack absorbs
// MM:SS rounding at the video's end. Accepted item k gets question id
// "<video_id>#g<k>".
inline GenerationParse parse_generation(const std::string& reply, const VideoRecord& record) {
    auto list = detail::find_json_list(reply);
    if (!list) throw WholeReplyUnparseable("no JSON list found in generation reply for video " + record.video_id);

    GenerationParse out;
    for (const auto& item : *list) {
        auto field = [&](const char* name) -> std::optional<std::string> {
            if (!item.is_object() || !item.contains(name) || !item[name].is_string()) return std::nullopt;
            return item[name].get<std::string>();
        };
        auto question = field("question");
        auto start_text = field("start_mmss");
        auto end_text = field("end_mmss");
        auto explanation = field("explanation");
        if (!question || !start_text || !end_text || !explanation ||
            detail::trim(*question).empty() || detail::trim(*explanation).empty()) {
            ++out.rejected;
            continue;
        }
        auto start = parse_mmss(*start_text);
        auto end = parse_mmss(*end_text);
        if (!start || !end || *start > *end || *end > record.duration + 1.0) {
            ++out.rejected;
            continue;
        }
        RTLSample sample;
        sample.video_id = record.video_id;
        sample.question_id = record.video_id + "#g" + std::to_string(out.samples.size());
        sample.question = detail::trim(*question);
        sample.interval = normalize_interval({*start, *end}, record.duration);
        sample.explanation = detail::trim(*explanation);
        sample.duration = record.duration;
        out.samples.push_back(std::move(sample));
    }
    return out;
}

struct DatagenOptions {
    int n_per_video = 3;
    std::vector<FewShotExample> few_shots = default_few_shots();
};

struct DatagenResult {
    std::vector<RTLSample> samples;
    int rejected = 0;
    int videos_processed = 0;
    int videos_skipped = 0; // records with no events
};

// Runs the full context -> prompt -> parse pipeline over a caption set.
// Generation calls fan out under the client's concurrency bound; output
// is assembled in video-id order regardless of completion order.
inline DatagenResult generate_rtl_dataset(const std::vector<VideoRecord>& records, ChatClient& client,
                                          const DatagenOptions& options = {}) {
    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return records[a].video_id < records[b].video_id; });

    std::vector<std::optional<GenerationParse>> parses(records.size());
    detail::parallel_for_indexed(order.size(), client.config().max_concurrency, [&](std::size_t k) {
        const VideoRecord& rec = records[order[k]];
        if (rec.events.empty()) return;
        auto prompt = build_generation_prompt(build_context(rec), options.few_shots, options.n_per_video);
        parses[order[k]] = parse_generation(client.chat(prompt), rec);
    });

    DatagenResult result;
    for (std::size_t k : order) {
        if (!parses[k]) {
            ++result.videos_skipped;
            continue;
        }
        ++result.videos_processed;
        result.rejected += parses[k]->rejected;
        for (auto& s : parses[k]->samples) result.samples.push_back(std::move(s));
    }
    return result;
}

} // namespace tloc
