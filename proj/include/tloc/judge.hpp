#pragma once

#include <functional>
#include <string>

namespace tloc {

// Scores assigned by a judge model to the ground-truth and predicted
// explanations of one QA pair, each on a 1-10 scale.
struct JudgeVerdict {
    int gt_score = 0;
    int pred_score = 0;
    std::string raw_reply;
    bool clamped = false; // a reply score fell outside [1, 10]
};

using JudgeFn = std::function<JudgeVerdict(const std::string& question, const std::string& gt_explanation,
                                           const std::string& pred_explanation)>;

} // namespace tloc
