#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tloc/dataset_io.hpp"
#include "tloc/errors.hpp"
#include "tloc/interval.hpp"
#include "tloc/judge.hpp"
#include "tloc/text_grammar.hpp"
#include "tloc/time_codec.hpp"

namespace tloc {

// Intersection over union of two intervals. Two identical zero-length
// intervals count as a perfect match; otherwise a zero-length union or
// intersection scores 0.
inline double interval_iou(const Interval& a, const Interval& b) {
    const double inter = std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
    const double uni = (a.end - a.start) + (b.end - b.start) - inter;
    if (uni <= 0.0) return (a.start == b.start && a.end == b.end) ? 1.0 : 0.0;
    return inter / uni;
}

// What to do with questions whose prediction is missing or carries no
// parseable timestamps: score them as IOU 0, or drop them from the
// temporal metrics the way timestamp-less baselines are reported.
enum class MissingPolicy { ScoreZero, Exclude };

struct QuestionResult {
    std::string video_id;
    std::string question_id;
    double iou = 0.0;
    bool hit_at_half = false; // strictly over 0.5
    bool excluded = false;
    bool has_prediction = false;
    bool has_interval = false;
    std::optional<double> judge_relative;
};

struct VideoStats {
    double miou = 0.0;      // percent
    double p_at_half = 0.0; // percent
    int n_questions = 0;
};

struct EvalReport {
    double miou = 0.0;      // percent, averaged per video then across videos
    double p_at_half = 0.0; // percent, same two-level average
    std::optional<double> judge_score; // averaged over judged pairs
    std::map<std::string, VideoStats> per_video;
    int n_videos = 0;
    int n_questions = 0;
    int n_missing = 0;
    int n_excluded = 0;
    int n_unknown_predictions = 0;
    int n_judged = 0;
    int n_judge_clamped = 0;
    MissingPolicy missing_policy = MissingPolicy::ScoreZero;
    std::vector<QuestionResult> results; // per question, sorted; not serialized
};

inline void to_json(nlohmann::json& j, const VideoStats& v) {
    j = nlohmann::json{{"miou", v.miou}, {"p_at_half", v.p_at_half}, {"n_questions", v.n_questions}};
}

inline void to_json(nlohmann::json& j, const EvalReport& r) {
    j = nlohmann::json{{"miou", r.miou},
                       {"p_at_half", r.p_at_half},
                       {"judge_score", r.judge_score ? nlohmann::json(*r.judge_score) : nlohmann::json(nullptr)},
                       {"n_videos", r.n_videos},
                       {"n_questions", r.n_questions},
                       {"n_missing", r.n_missing},
                       {"n_excluded", r.n_excluded},
                       {"n_unknown_predictions", r.n_unknown_predictions},
                       {"n_judged", r.n_judged},
                       {"n_judge_clamped", r.n_judge_clamped},
                       {"missing_policy", r.missing_policy == MissingPolicy::ScoreZero ? "score-zero" : "exclude"},
                       {"per_video", r.per_video}};
}

struct EvalOptions {
    int steps = 100;
    MissingPolicy missing = MissingPolicy::ScoreZero;
    bool judge_raw_ratio = false; // emit pred/gt instead of 100*pred/gt
    TokenStyle style;
};

// Scores predictions against ground truth. mIOU and P@0.5 are averaged
// per video first, then across videos, so videos with many questions do
// not dominate; the judge score averages over all judged pairs directly.
inline EvalReport evaluate(const std::vector<RTLSample>& gt, const std::vector<Prediction>& preds,
                           const EvalOptions& options = {}, const JudgeFn& judge = nullptr) {
    std::map<std::pair<std::string, std::string>, const Prediction*> by_key;
    for (const auto& p : preds) {
        auto [it, inserted] = by_key.emplace(std::make_pair(p.video_id, p.question_id), &p);
        if (!inserted)
            throw DuplicatePrediction("duplicate prediction for (" + p.video_id + ", " + p.question_id + ")");
    }

    std::vector<const RTLSample*> ordered;
    ordered.reserve(gt.size());
    for (const auto& s : gt) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(), [](const RTLSample* a, const RTLSample* b) {
        return std::tie(a->video_id, a->question_id) < std::tie(b->video_id, b->question_id);
    });

    EvalReport report;
    report.missing_policy = options.missing;
    report.n_questions = static_cast<int>(gt.size());

    std::size_t matched = 0;
    double judge_sum = 0.0;
    for (const RTLSample* s : ordered) {
        QuestionResult qr;
        qr.video_id = s->video_id;
        qr.question_id = s->question_id;

        const TimeGrid grid{options.steps, s->duration};
        auto it = by_key.find(std::make_pair(s->video_id, s->question_id));
        if (it == by_key.end()) {
            ++report.n_missing;
            qr.excluded = options.missing == MissingPolicy::Exclude;
        } else {
            ++matched;
            qr.has_prediction = true;
            ParsedAnswer parsed = parse_answer(it->second->answer_text, grid, options.style);
            if (parsed.interval) {
                qr.has_interval = true;
                qr.iou = interval_iou(normalize_interval(*parsed.interval, s->duration), s->interval);
                qr.hit_at_half = qr.iou > 0.5;
            } else {
                qr.excluded = options.missing == MissingPolicy::Exclude;
            }
            if (judge && !detail::trim(parsed.explanation).empty() && !detail::trim(s->explanation).empty()) {
                JudgeVerdict verdict = judge(s->question, s->explanation, parsed.explanation);
                if (verdict.clamped) ++report.n_judge_clamped;
                double ratio = static_cast<double>(verdict.pred_score) / verdict.gt_score;
                qr.judge_relative = options.judge_raw_ratio ? ratio : 100.0 * ratio;
                judge_sum += *qr.judge_relative;
                ++report.n_judged;
            }
        }
        if (qr.excluded) ++report.n_excluded;
        report.results.push_back(std::move(qr));
    }
    report.n_unknown_predictions = static_cast<int>(preds.size() - matched);

    struct Accum {
        double iou_sum = 0.0;
        int hits = 0;
        int n = 0;
    };
    std::map<std::string, Accum> per_video;
    for (const auto& qr : report.results) {
        if (qr.excluded) continue;
        auto& acc = per_video[qr.video_id];
        acc.iou_sum += qr.iou;
        acc.hits += qr.hit_at_half ? 1 : 0;
        ++acc.n;
    }
    double miou_sum = 0.0, hit_sum = 0.0;
    for (const auto& [vid, acc] : per_video) {
        VideoStats vs;
        vs.n_questions = acc.n;
        vs.miou = 100.0 * acc.iou_sum / acc.n;
        vs.p_at_half = 100.0 * acc.hits / acc.n;
        miou_sum += vs.miou;
        hit_sum += vs.p_at_half;
        report.per_video.emplace(vid, vs);
    }
    report.n_videos = static_cast<int>(per_video.size());
    if (report.n_videos > 0) {
        report.miou = miou_sum / report.n_videos;
        report.p_at_half = hit_sum / report.n_videos;
    }
    if (report.n_judged > 0) report.judge_score = judge_sum / report.n_judged;
    return report;
}

} // namespace tloc
