#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "tloc/detail/text.hpp"
#include "tloc/errors.hpp"
#include "tloc/judge.hpp"

namespace tloc {

struct ChatMessage {
    std::string role;
    std::string content;
};

struct ChatConfig {
    std::string endpoint_url;   // full URL of the chat-completions endpoint
    std::string model_name = "gpt-4";
    std::string api_key;        // only ever sourced from the environment
    double temperature = 0.0;
    int max_retries = 2;
    double request_timeout_s = 30.0;
    int max_concurrency = 4;
    double backoff_base_s = 0.5; // doubles per retry; tests shrink it
};

// Env vars: TLOC_JUDGE_ENDPOINT, TLOC_JUDGE_MODEL, TLOC_JUDGE_API_KEY.
// The key is deliberately not accepted via flag or config file.
inline ChatConfig chat_config_from_env() {
    ChatConfig cfg;
    if (const char* v = std::getenv("TLOC_JUDGE_ENDPOINT")) cfg.endpoint_url = v;
    if (const char* v = std::getenv("TLOC_JUDGE_MODEL")) cfg.model_name = v;
    if (const char* v = std::getenv("TLOC_JUDGE_API_KEY")) cfg.api_key = v;
    return cfg;
}

struct ChatReply {
    int status = 0;
    std::string body;
};

// Transport seam: ships one HTTP implementation and one deterministic
// mock; tests add flaky variants for the retry contract.
class ChatTransport {
public:
    virtual ~ChatTransport() = default;
    virtual ChatReply send(const std::string& request_body, const ChatConfig& config) = 0;
};

class HttpTransport final : public ChatTransport {
public:
    ChatReply send(const std::string& request_body, const ChatConfig& config) override {
        const auto [base, path] = split_url(config.endpoint_url);
        httplib::Client client(base);
        const auto timeout = std::chrono::milliseconds(static_cast<long long>(config.request_timeout_s * 1000));
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);

        httplib::Headers headers;
        if (!config.api_key.empty()) headers.emplace("Authorization", "Bearer " + config.api_key);
        auto res = client.Post(path, headers, request_body, "application/json");
        if (!res) throw Timeout("request to " + config.endpoint_url + " failed: " + httplib::to_string(res.error()));
        return {res->status, res->body};
    }

private:
    static std::pair<std::string, std::string> split_url(const std::string& url) {
        if (url.empty()) throw InvalidArgument("no chat endpoint configured (set TLOC_JUDGE_ENDPOINT)");
        if (url.starts_with("https://"))
            throw InvalidArgument("https endpoints are not supported by this build; use an http endpoint");
        auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) throw InvalidArgument("endpoint URL '" + url + "' has no scheme");
        auto path_begin = url.find('/', scheme_end + 3);
        if (path_begin == std::string::npos) return {url, "/"};
        return {url.substr(0, path_begin), url.substr(path_begin)};
    }
};

// Markers the deterministic mock keys on to recognize its two structured
// callers (the judge and the RTL generator).
inline constexpr const char* kJudgeReplyKeyword = "SCORES:";
inline constexpr const char* kGenerationSchemaKeyword = "start_mmss";

// Fully offline stand-in for a chat model. Replies are pure functions of
// the request, so every pipeline built on it is bit-reproducible.
class MockTransport final : public ChatTransport {
public:
    ChatReply send(const std::string& request_body, const ChatConfig&) override {
        nlohmann::json req = nlohmann::json::parse(request_body);
        std::string system, last_user, all;
        for (const auto& m : req.at("messages")) {
            const std::string role = m.at("role").get<std::string>();
            const std::string content = m.at("content").get<std::string>();
            if (role == "system") system += content;
            if (role == "user") last_user = content;
            all += role + "\x1f" + content + "\x1e";
        }
        std::string text;
        if (system.find(kJudgeReplyKeyword) != std::string::npos)
            text = judge_reply(last_user);
        else if (system.find(kGenerationSchemaKeyword) != std::string::npos)
            text = generation_reply(last_user);
        else
            text = "mock:" + detail::to_hex(detail::fnv1a64(all));

        nlohmann::json body = {
            {"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}},
        };
        return {200, body.dump()};
    }

private:
    static std::string section(const std::string& text, const std::string& header) {
        auto begin = text.find(header);
        if (begin == std::string::npos) return {};
        begin += header.size();
        auto end = text.find("\n[", begin);
        return detail::trim(text.substr(begin, end == std::string::npos ? std::string::npos : end - begin));
    }

    // Reference always scores 8. A candidate identical to the reference
    // scores 8 (relative 100), an empty one scores 1, anything else gets
    // a stable hash-derived score in [1, 10].
    static std::string judge_reply(const std::string& user) {
        const std::string gt = section(user, "[Reference Explanation]");
        const std::string pred = section(user, "[Candidate Explanation]");
        int gt_score = 8;
        int pred_score;
        if (pred.empty())
            pred_score = 1;
        else if (pred == gt)
            pred_score = 8;
        else
            pred_score = 1 + static_cast<int>(detail::fnv1a64(gt + "\x1f" + pred) % 10);
        return std::string(kJudgeReplyKeyword) + " " + std::to_string(gt_score) + " " + std::to_string(pred_score);
    }

    static std::string generation_reply(const std::string& user) {
        static const std::regex line_re(R"(\[((?:\d+:)?\d+:\d+)-((?:\d+:)?\d+:\d+)\][ \t]*([^\n]*))");
        static const std::regex count_re(R"(exactly (\d+))");
        struct Event {
            std::string start, end, sentence;
        };
        std::vector<Event> events;
        for (auto it = std::sregex_iterator(user.begin(), user.end(), line_re); it != std::sregex_iterator(); ++it)
            events.push_back({(*it)[1].str(), (*it)[2].str(), detail::trim((*it)[3].str())});

        int n = 3;
        std::smatch m;
        if (std::regex_search(user, m, count_re)) n = std::stoi(m[1].str());

        nlohmann::json items = nlohmann::json::array();
        for (int k = 0; k < n && !events.empty(); ++k) {
            const Event& ev = events[static_cast<std::size_t>(k) % events.size()];
            std::string sentence = ev.sentence;
            if (!sentence.empty() && sentence.back() == '.') sentence.pop_back();
            items.push_back({{"question", "When does the part of the video where " + lowercase_first(sentence) +
                                              " take place?"},
                             {"start_mmss", ev.start},
                             {"end_mmss", ev.end},
                             {"explanation", ev.sentence}});
        }
        return items.dump();
    }

    static std::string lowercase_first(std::string s) {
        if (!s.empty() && s[0] >= 'A' && s[0] <= 'Z') s[0] = static_cast<char>(s[0] - 'A' + 'a');
        return s;
    }
};

// Chat-completion client: JSON-over-HTTP wire format, exponential backoff
// on transient failures, and a semaphore bounding in-flight requests so
// callers may fan out from many threads.
class ChatClient {
public:
    explicit ChatClient(ChatConfig config)
        : ChatClient(std::move(config), std::shared_ptr<ChatTransport>(std::make_shared<HttpTransport>())) {}

    ChatClient(ChatConfig config, std::shared_ptr<ChatTransport> transport)
        : config_(std::move(config)), transport_(std::move(transport)), slots_(config_.max_concurrency) {
        if (config_.max_retries < 0) throw InvalidArgument("max_retries must be >= 0");
        if (config_.max_concurrency < 1) throw InvalidArgument("max_concurrency must be >= 1");
    }

    const ChatConfig& config() const { return config_; }

    std::string chat(const std::vector<ChatMessage>& messages) {
        if (messages.empty()) throw InvalidArgument("chat: messages must be non-empty");
        nlohmann::json req{{"model", config_.model_name}, {"temperature", config_.temperature}};
        req["messages"] = nlohmann::json::array();
        for (const auto& m : messages)
            req["messages"].push_back({{"role", m.role}, {"content", m.content}});
        const std::string body = req.dump();

        std::string transient;
        bool timed_out = false;
        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            if (attempt > 0) backoff(attempt);
            ChatReply reply;
            try {
                slots_.acquire();
                struct Release {
                    std::counting_semaphore<>& s;
                    ~Release() { s.release(); }
                } release{slots_};
                reply = transport_->send(body, config_);
            } catch (const Timeout& e) {
                transient = e.what();
                timed_out = true;
                continue;
            }
            if (reply.status == 200) return extract_content(reply.body);
            if (reply.status == 401 || reply.status == 403)
                throw AuthError("chat endpoint rejected credentials (HTTP " + std::to_string(reply.status) + ")");
            if (reply.status == 408 || reply.status == 429 || reply.status >= 500) {
                transient = "HTTP " + std::to_string(reply.status);
                timed_out = false;
                continue;
            }
            throw MalformedReply("chat endpoint returned HTTP " + std::to_string(reply.status) + ": " +
                                 reply.body.substr(0, 200));
        }
        if (timed_out) throw Timeout("chat failed after " + std::to_string(config_.max_retries + 1) +
                                     " attempts: " + transient);
        throw RateLimited("chat failed after " + std::to_string(config_.max_retries + 1) +
                          " attempts: " + transient);
    }

    // Scores the ground-truth and predicted explanations in one call so
    // both land on a shared context, and re-asks once if the reply lacks
    // the machine-readable line.
    JudgeVerdict judge_explanation(const std::string& question, const std::string& gt_explanation,
                                   const std::string& pred_explanation) {
        if (detail::trim(question).empty() || detail::trim(gt_explanation).empty() ||
            detail::trim(pred_explanation).empty())
            throw InvalidArgument("judge_explanation: question and both explanations must be non-empty");

        std::vector<ChatMessage> messages = {
            {"system", judge_system_prompt()},
            {"user", "[Question]\n" + question + "\n[Reference Explanation]\n" + gt_explanation +
                         "\n[Candidate Explanation]\n" + pred_explanation},
        };
        std::string reply = chat(messages);
        if (auto verdict = parse_verdict(reply)) return *verdict;

        messages.push_back({"assistant", reply});
        messages.push_back({"user", "Your previous reply did not contain the required line. Reply again, ending "
                                    "with a single line of exactly this form: SCORES: <reference score> "
                                    "<candidate score>"});
        reply = chat(messages);
        if (auto verdict = parse_verdict(reply)) return *verdict;
        throw UnparseableVerdict("judge reply has no parseable SCORES line: " + reply.substr(0, 200));
    }

    static std::string judge_system_prompt() {
        return "You are an impartial evaluator of explanations for video question answering. You are given a "
               "question, a reference explanation, and a candidate explanation. Rate the helpfulness, relevance, "
               "accuracy, and level of details of each explanation. Ignore any timestamps mentioned in the "
               "explanations; judge only the explanatory content. Give each explanation a score from 1 to 10. End "
               "your reply with a single line of exactly this form: SCORES: <reference score> <candidate score>";
    }

    static std::optional<JudgeVerdict> parse_verdict(const std::string& reply) {
        static const std::regex scores_re(R"(SCORES:\s*(-?\d{1,9})\s+(-?\d{1,9}))");
        std::smatch m;
        if (!std::regex_search(reply, m, scores_re)) return std::nullopt;
        JudgeVerdict v;
        v.raw_reply = reply;
        int gt = std::stoi(m[1].str());
        int pred = std::stoi(m[2].str());
        v.gt_score = std::clamp(gt, 1, 10);
        v.pred_score = std::clamp(pred, 1, 10);
        v.clamped = v.gt_score != gt || v.pred_score != pred;
        return v;
    }

private:
    void backoff(int attempt) {
        const double seconds = config_.backoff_base_s * std::exp2(std::min(attempt - 1, 20));
        std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
    }

    static std::string extract_content(const std::string& body) {
        try {
            nlohmann::json j = nlohmann::json::parse(body);
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const std::exception& e) {
            throw MalformedReply(std::string("cannot extract assistant content: ") + e.what());
        }
    }

    ChatConfig config_;
    std::shared_ptr<ChatTransport> transport_;
    std::counting_semaphore<> slots_;
};

inline JudgeFn make_judge(std::shared_ptr<ChatClient> client) {
    return [client](const std::string& question, const std::string& gt_explanation,
                    const std::string& pred_explanation) {
        return client->judge_explanation(question, gt_explanation, pred_explanation);
    };
}

namespace detail {

// Runs fn(0..n-1) on up to `workers` threads; results keyed by index stay
// deterministic. The first exception wins and is rethrown after join.
template <class Fn>
void parallel_for_indexed(std::size_t n, int workers, Fn&& fn) {
    workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace detail

} // namespace tloc
