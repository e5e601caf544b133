#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tloc/dataset_io.hpp"
#include "tloc/rtl_eval.hpp"
#include "tloc/slowfast_pool.hpp"
#include "tloc/text_grammar.hpp"

namespace tloc {

struct PredictRequest {
    std::string question;
    std::string video_id;
    double duration = 0.0;
    const PooledTokens* tokens = nullptr; // optional; lets a model-backed predictor slot in
};

class Predictor {
public:
    virtual ~Predictor() = default;
    virtual std::string predict(const PredictRequest& request) = 0;
    // Predictors declaring themselves reentrant may be called from
    // multiple threads; all reference predictors are.
    virtual bool reentrant() const { return true; }
};

// Upper-bound fixture: answers with the ground truth itself, so any score
// shortfall is pure codec rounding.
class OraclePredictor final : public Predictor {
public:
    OraclePredictor(std::vector<RTLSample> gt, int steps = 100, TokenStyle style = {})
        : steps_(steps), style_(std::move(style)) {
        for (auto& s : gt) {
            auto key = s.video_id + '\x1f' + s.question;
            by_question_.emplace(std::move(key), std::move(s));
        }
    }

    std::string predict(const PredictRequest& request) override {
        auto it = by_question_.find(request.video_id + '\x1f' + request.question);
        if (it == by_question_.end()) return "I cannot find this event.";
        const RTLSample& s = it->second;
        return render_rtl_answer(s.interval, s.explanation, TimeGrid{steps_, s.duration}, style_);
    }

private:
    int steps_;
    TokenStyle style_;
    std::map<std::string, RTLSample> by_question_;
};

// Trivial baseline: always claims the whole video.
class FullSpanPredictor final : public Predictor {
public:
    explicit FullSpanPredictor(int steps = 100, TokenStyle style = {}) : steps_(steps), style_(std::move(style)) {}

    std::string predict(const PredictRequest&) override {
        return "[" + render_time_token(1, style_) + " " + render_time_token(steps_, style_) +
               "] The event spans the video.";
    }

private:
    int steps_;
    TokenStyle style_;
};

// Baseline that answers in prose without any timestamps.
class SilentPredictor final : public Predictor {
public:
    std::string predict(const PredictRequest&) override {
        return "The description does not pinpoint an exact moment in the clip.";
    }
};

inline std::unique_ptr<Predictor> make_oracle_predictor(std::vector<RTLSample> gt, int steps = 100,
                                                        TokenStyle style = {}) {
    return std::make_unique<OraclePredictor>(std::move(gt), steps, std::move(style));
}

inline std::unique_ptr<Predictor> make_fullspan_predictor(int steps = 100, TokenStyle style = {}) {
    return std::make_unique<FullSpanPredictor>(steps, std::move(style));
}

inline std::unique_ptr<Predictor> make_silent_predictor() {
    return std::make_unique<SilentPredictor>();
}

struct PipelineOptions {
    int steps = 100;
    MissingPolicy missing = MissingPolicy::ScoreZero;
    bool judge_raw_ratio = false;
    TokenStyle style;
};

// Streams ground truth through a predictor, writes the predictions file,
// and evaluates it. Deterministic for deterministic predictors; the gt
// input order never affects the result.
inline EvalReport run_pipeline(const std::filesystem::path& gt_path, Predictor& predictor,
                               const std::filesystem::path& predictions_out, const PipelineOptions& options = {},
                               const JudgeFn& judge = nullptr) {
    auto gt = read_rtl_samples(gt_path);
    std::sort(gt.begin(), gt.end(), [](const RTLSample& a, const RTLSample& b) {
        return std::tie(a.video_id, a.question_id) < std::tie(b.video_id, b.question_id);
    });

    std::vector<Prediction> preds;
    preds.reserve(gt.size());
    for (const auto& s : gt) {
        PredictRequest req{s.question, s.video_id, s.duration, nullptr};
        preds.push_back({s.video_id, s.question_id, predictor.predict(req)});
    }
    write_jsonl(preds, predictions_out);

    EvalOptions eval_options;
    eval_options.steps = options.steps;
    eval_options.missing = options.missing;
    eval_options.judge_raw_ratio = options.judge_raw_ratio;
    eval_options.style = options.style;
    return evaluate(gt, preds, eval_options, judge);
}

} // namespace tloc
