#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "tloc/dataset_io.hpp"
#include "tloc/detail/rng.hpp"
#include "tloc/errors.hpp"
#include "tloc/text_grammar.hpp"
#include "tloc/time_codec.hpp"

namespace tloc {

enum class SourceTask { DenseCaptioning, EventLocalization, VideoQA, NLVQA, RTL };

inline std::string to_string(SourceTask t) {
    switch (t) {
        case SourceTask::DenseCaptioning: return "dense_captioning";
        case SourceTask::EventLocalization: return "event_localization";
        case SourceTask::VideoQA: return "video_qa";
        case SourceTask::NLVQA: return "nlvqa";
        case SourceTask::RTL: return "rtl";
    }
    throw InvalidArgument("unknown task enum value");
}

inline SourceTask task_from_string(const std::string& s) {
    if (s == "dense_captioning") return SourceTask::DenseCaptioning;
    if (s == "event_localization") return SourceTask::EventLocalization;
    if (s == "video_qa") return SourceTask::VideoQA;
    if (s == "nlvqa") return SourceTask::NLVQA;
    if (s == "rtl") return SourceTask::RTL;
    throw InvalidArgument("unknown task name '" + s + "'");
}

// One instruction-following training sample.
struct InstructionSample {
    std::string id;
    SourceTask task = SourceTask::NLVQA;
    std::string prompt;
    std::string answer;
    std::string video_id; // empty for samples with no associated video

    bool operator==(const InstructionSample&) const = default;
};

inline void to_json(nlohmann::json& j, const InstructionSample& s) {
    j = nlohmann::json{{"id", s.id}, {"task", to_string(s.task)}, {"prompt", s.prompt}, {"answer", s.answer}};
    if (!s.video_id.empty()) j["video_id"] = s.video_id;
}

inline void from_json(const nlohmann::json& j, InstructionSample& s) {
    s.id = j.at("id").get<std::string>();
    s.task = task_from_string(j.at("task").get<std::string>());
    s.prompt = j.at("prompt").get<std::string>();
    s.answer = j.at("answer").get<std::string>();
    s.video_id = j.value("video_id", std::string{});
}

// Prompt pools. The first entries are fixed wordings; the rest are
// paraphrases so training sees varied instructions. Selection is by
// index (callers draw the index however they like).

inline const std::vector<std::string>& dense_captioning_prompts() {
    static const std::vector<std::string> prompts = {
        "Provide a detailed description of the given video. Each sentence should begin with the start and end "
        "timestamps.",
        "Describe the video. Each sentence begins with start and end timestamps.",
        "Summarize everything that happens in this video, prefixing each sentence with its start and end timestamps.",
        "Write a timestamped account of the video. Every sentence must open with the start and end times of the "
        "event it describes.",
        "List the events in the video in order. Start each sentence with the start and end timestamps of the event.",
    };
    return prompts;
}

// "{sentence}" is replaced by the event sentence.
inline const std::vector<std::string>& event_localization_prompts() {
    static const std::vector<std::string> prompts = {
        "When does \"{sentence}\" happen in the video? Answer the question only using start and end timestamps.",
        "Locate when \"{sentence}\" occurs. Reply with only the start and end timestamps.",
        "At what time does \"{sentence}\" take place in the video? Respond with start and end timestamps only.",
        "Give only the start and end timestamps of the segment where \"{sentence}\".",
        "During which part of the video does \"{sentence}\" happen? Use only start and end timestamps in your "
        "answer.",
    };
    return prompts;
}

inline const std::string& vqa_suffix() {
    static const std::string suffix = "Answer the question using a single word or phrase.";
    return suffix;
}

// Events sorted by start time; answer is "token(start) token(end) sentence"
// per event, single-space separated.
inline InstructionSample format_dense_captioning(const VideoRecord& record, const TimeGrid& grid,
                                                 std::size_t prompt_index = 0, const TokenStyle& style = {}) {
    if (record.events.empty()) throw EmptyRecord("video " + record.video_id + " has no events");
    auto events = record.events;
    std::stable_sort(events.begin(), events.end(),
                     [](const CaptionedEvent& a, const CaptionedEvent& b) { return a.interval.start < b.interval.start; });
    std::string answer;
    for (const auto& ev : events) {
        if (!answer.empty()) answer += ' ';
        answer += render_time_token(encode_time(ev.interval.start, grid), style) + ' ' +
                  render_time_token(encode_time(ev.interval.end, grid), style) + ' ' + ev.sentence;
    }
    const auto& prompts = dense_captioning_prompts();
    InstructionSample s;
    s.id = record.video_id + "#dc";
    s.task = SourceTask::DenseCaptioning;
    s.prompt = prompts[prompt_index % prompts.size()];
    s.answer = answer;
    s.video_id = record.video_id;
    return s;
}

inline InstructionSample format_event_localization(const VideoRecord& record, std::size_t event_index,
                                                   const TimeGrid& grid, std::size_t prompt_index = 0,
                                                   const TokenStyle& style = {}) {
    if (event_index >= record.events.size())
        throw IndexOutOfRange("video " + record.video_id + ": event index " + std::to_string(event_index) +
                              " out of range (" + std::to_string(record.events.size()) + " events)");
    const auto& ev = record.events[event_index];
    const auto& prompts = event_localization_prompts();
    std::string prompt = prompts[prompt_index % prompts.size()];
    const std::string placeholder = "{sentence}";
    prompt.replace(prompt.find(placeholder), placeholder.size(), ev.sentence);

    InstructionSample s;
    s.id = record.video_id + "#el" + std::to_string(event_index);
    s.task = SourceTask::EventLocalization;
    s.prompt = prompt;
    s.answer = render_time_token(encode_time(ev.interval.start, grid), style) + ' ' +
               render_time_token(encode_time(ev.interval.end, grid), style);
    s.video_id = record.video_id;
    return s;
}

// Appends the short-answer suffix; idempotent when the question already
// carries it (some source datasets pre-apply the suffix).
inline InstructionSample format_vqa(const std::string& question, const std::string& short_answer,
                                    const std::string& id = {}, const std::string& video_id = {}) {
    const std::string q = detail::trim(question);
    const std::string a = detail::trim(short_answer);
    if (q.empty()) throw EmptyField("video_qa: empty question");
    if (a.empty()) throw EmptyField("video_qa: empty answer");

    InstructionSample s;
    s.id = id;
    s.task = SourceTask::VideoQA;
    s.prompt = q.ends_with(vqa_suffix()) ? q : q + ' ' + vqa_suffix();
    s.answer = a;
    s.video_id = video_id;
    return s;
}

inline InstructionSample format_rtl(const RTLSample& sample, const TimeGrid& grid, const TokenStyle& style = {}) {
    if (detail::trim(sample.question).empty())
        throw EmptyField("rtl sample " + sample.question_id + ": empty question");
    InstructionSample s;
    s.id = sample.question_id.empty() ? sample.video_id + "#rtl" : sample.question_id;
    s.task = SourceTask::RTL;
    s.prompt = sample.question;
    s.answer = render_rtl_answer(sample.interval, sample.explanation, grid, style);
    s.video_id = sample.video_id;
    return s;
}

// Pass-through of an existing instruction-tuning conversation turn.
inline InstructionSample format_nlvqa(const std::string& id, const std::string& prompt, const std::string& answer,
                                      const std::string& video_id = {}) {
    if (detail::trim(prompt).empty()) throw EmptyField("nlvqa: empty prompt");
    if (detail::trim(answer).empty()) throw EmptyField("nlvqa: empty answer");
    InstructionSample s;
    s.id = id;
    s.task = SourceTask::NLVQA;
    s.prompt = prompt;
    s.answer = answer;
    s.video_id = video_id;
    return s;
}

// ---------------------------------------------------------------------------
// Task mixing: per_task draws with replacement from each pool, then one
// global shuffle. Each pool draws under a child seed derived from
// (seed, task name), so adding a pool never perturbs the others.
// ---------------------------------------------------------------------------

struct MixSpec {
    long long per_task = 100000;
    std::uint64_t seed = 0;
    std::map<std::string, std::vector<InstructionSample>> task_sources;
};

inline std::vector<InstructionSample> mix(const MixSpec& spec) {
    if (spec.per_task < 1) throw InvalidCount("mix: per_task must be >= 1");
    for (const auto& [name, pool] : spec.task_sources)
        if (pool.empty()) throw EmptyPool("mix: pool '" + name + "' is empty");

    std::vector<InstructionSample> out;
    out.reserve(static_cast<std::size_t>(spec.per_task) * spec.task_sources.size());
    for (const auto& [name, pool] : spec.task_sources) {
        detail::Rng rng(detail::child_seed(spec.seed, name));
        for (long long i = 0; i < spec.per_task; ++i)
            out.push_back(pool[rng.below(pool.size())]);
    }
    detail::Rng shuffler(detail::child_seed(spec.seed, "__mix_shuffle__"));
    shuffler.shuffle(out);
    return out;
}

} // namespace tloc
