// Command-line surface for the temporal-localization toolkit: time-token
// codec, SlowFast pooling, instruction formatting, task mixing, RTL
// dataset generation, and RTL evaluation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tloc/tloc.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

struct GlobalFlags {
    int steps = 100;
    std::uint64_t seed = 0;
    LogLevel log_level = LogLevel::Info;

    bool info() const { return log_level >= LogLevel::Info; }
    bool debug() const { return log_level >= LogLevel::Debug; }
};

std::string dump_number(double v) {
    return json(v).dump(); // shortest round-trip representation
}

std::shared_ptr<tloc::ChatClient> make_chat_client(bool mock) {
    auto config = tloc::chat_config_from_env();
    if (mock) return std::make_shared<tloc::ChatClient>(config, std::make_shared<tloc::MockTransport>());
    return std::make_shared<tloc::ChatClient>(config);
}

tloc::MissingPolicy parse_missing(const std::string& name) {
    if (name == "score-zero") return tloc::MissingPolicy::ScoreZero;
    if (name == "exclude") return tloc::MissingPolicy::Exclude;
    throw tloc::InvalidArgument("unknown --missing policy '" + name + "'");
}

void write_report(const tloc::EvalReport& report, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw tloc::IoError("cannot open " + path.string() + " for writing");
    out << json(report).dump(2, ' ', false, json::error_handler_t::replace) << '\n';
}

void print_report_summary(const tloc::EvalReport& report, const GlobalFlags& flags) {
    if (!flags.info()) return;
    std::cout << "mIOU: " << dump_number(report.miou) << "\n"
              << "P@0.5: " << dump_number(report.p_at_half) << "\n";
    if (report.judge_score)
        std::cout << "judge score: " << dump_number(*report.judge_score) << " over " << report.n_judged
                  << " pairs\n";
    std::cout << "videos: " << report.n_videos << "  questions: " << report.n_questions
              << "  missing: " << report.n_missing << "  excluded: " << report.n_excluded << "\n";
    if (report.n_unknown_predictions > 0)
        std::cout << "predictions without ground truth: " << report.n_unknown_predictions << "\n";
}

// ---- format subcommands ------------------------------------------------

void run_format_densecap(const fs::path& input, const fs::path& out, const GlobalFlags& flags) {
    tloc::CaptionLoadStats stats;
    auto records = tloc::load_dense_captions(input, &stats);
    tloc::detail::Rng prompt_rng(tloc::detail::child_seed(flags.seed, "format-densecap"));
    std::vector<tloc::InstructionSample> samples;
    for (const auto& rec : records) {
        if (rec.events.empty()) continue;
        tloc::TimeGrid grid{flags.steps, rec.duration};
        samples.push_back(tloc::format_dense_captioning(
            rec, grid, prompt_rng.below(tloc::dense_captioning_prompts().size())));
    }
    tloc::write_jsonl(samples, out);
    if (flags.debug() && (stats.clamped_intervals || stats.swapped_intervals))
        std::cerr << "note: clamped " << stats.clamped_intervals << " and swapped " << stats.swapped_intervals
                  << " annotation intervals\n";
    if (flags.info()) std::cout << "wrote " << samples.size() << " samples to " << out.string() << "\n";
}

void run_format_eventloc(const fs::path& input, const fs::path& out, const GlobalFlags& flags) {
    auto records = tloc::load_dense_captions(input);
    tloc::detail::Rng prompt_rng(tloc::detail::child_seed(flags.seed, "format-eventloc"));
    std::vector<tloc::InstructionSample> samples;
    for (const auto& rec : records) {
        tloc::TimeGrid grid{flags.steps, rec.duration};
        for (std::size_t i = 0; i < rec.events.size(); ++i)
            samples.push_back(tloc::format_event_localization(
                rec, i, grid, prompt_rng.below(tloc::event_localization_prompts().size())));
    }
    tloc::write_jsonl(samples, out);
    if (flags.info()) std::cout << "wrote " << samples.size() << " samples to " << out.string() << "\n";
}

void run_format_vqa(const fs::path& input, const fs::path& out, const GlobalFlags& flags) {
    std::ifstream in(input);
    if (!in) throw tloc::IoError("cannot open " + input.string());
    std::vector<tloc::InstructionSample> samples;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (tloc::detail::trim(line).empty()) continue;
        try {
            json j = json::parse(line);
            samples.push_back(tloc::format_vqa(j.at("question").get<std::string>(),
                                               j.at("answer").get<std::string>(),
                                               j.value("id", "vqa#" + std::to_string(samples.size())),
                                               j.value("video_id", std::string{})));
        } catch (const tloc::Error&) {
            throw;
        } catch (const std::exception& e) {
            throw tloc::ParseError(input.string() + ": line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    tloc::write_jsonl(samples, out);
    if (flags.info()) std::cout << "wrote " << samples.size() << " samples to " << out.string() << "\n";
}

void run_format_rtl(const fs::path& input, const fs::path& out, const GlobalFlags& flags) {
    auto rtl = tloc::read_rtl_samples(input);
    std::vector<tloc::InstructionSample> samples;
    samples.reserve(rtl.size());
    for (const auto& s : rtl)
        samples.push_back(tloc::format_rtl(s, tloc::TimeGrid{flags.steps, s.duration}));
    tloc::write_jsonl(samples, out);
    if (flags.info()) std::cout << "wrote " << samples.size() << " samples to " << out.string() << "\n";
}

void run_format_nlvqa(const fs::path& input, const fs::path& out, const GlobalFlags& flags) {
    std::ifstream in(input);
    if (!in) throw tloc::IoError("cannot open " + input.string());
    std::vector<tloc::InstructionSample> samples;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (tloc::detail::trim(line).empty()) continue;
        try {
            json j = json::parse(line);
            samples.push_back(tloc::format_nlvqa(j.value("id", "nlvqa#" + std::to_string(samples.size())),
                                                 j.at("prompt").get<std::string>(),
                                                 j.at("answer").get<std::string>(),
                                                 j.value("video_id", std::string{})));
        } catch (const tloc::Error&) {
            throw;
        } catch (const std::exception& e) {
            throw tloc::ParseError(input.string() + ": line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    tloc::write_jsonl(samples, out);
    if (flags.info()) std::cout << "wrote " << samples.size() << " samples to " << out.string() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"temporal-localization toolkit"};
    app.require_subcommand(1);

    GlobalFlags flags;
    app.add_option("--steps", flags.steps, "number of time tokens")->capture_default_str();
    app.add_option("--seed", flags.seed, "seed for all randomized choices")->capture_default_str();
    std::map<std::string, LogLevel> level_names{
        {"quiet", LogLevel::Quiet}, {"info", LogLevel::Info}, {"debug", LogLevel::Debug}};
    app.add_option("--log-level", flags.log_level, "quiet|info|debug")
        ->transform(CLI::CheckedTransformer(level_names, CLI::ignore_case))
        ->default_val("info");

    // timecode encode / decode
    auto* timecode = app.add_subcommand("timecode", "convert between seconds and time tokens");
    timecode->require_subcommand(1);
    double tau = 0.0, length = 0.0;
    int token = 1;
    auto* encode = timecode->add_subcommand("encode", "seconds -> token index");
    encode->add_option("--tau", tau, "timestamp in seconds")->required();
    encode->add_option("--length", length, "video duration in seconds")->required();
    encode->fallthrough();
    encode->callback([&] { std::cout << tloc::encode_time(tau, {flags.steps, length}) << "\n"; });
    auto* decode = timecode->add_subcommand("decode", "token index -> seconds");
    decode->add_option("--token", token, "time token index")->required();
    decode->add_option("--length", length, "video duration in seconds")->required();
    decode->fallthrough();
    decode->callback([&] { std::cout << dump_number(tloc::decode_time(token, {flags.steps, length})) << "\n"; });
    timecode->fallthrough();

    // pool
    auto* pool_cmd = app.add_subcommand("pool", "SlowFast-pool an embedding grid");
    fs::path pool_input, pool_output;
    int pool_s = 2;
    std::string pool_order = "fast-first";
    pool_cmd->add_option("--input", pool_input, "LITEMB01 grid file")->required();
    pool_cmd->add_option("--s", pool_s, "spatial pooling ratio")->capture_default_str();
    pool_cmd->add_option("--output", pool_output, "output token file (LITEMB01, rows x 1 x 1 x dim)")->required();
    pool_cmd->add_option("--order", pool_order, "fast-first|slow-first")
        ->check(CLI::IsMember({"fast-first", "slow-first"}));
    pool_cmd->fallthrough();
    pool_cmd->callback([&] {
        auto grid = tloc::read_embedding_grid(pool_input);
        auto pooled = tloc::pool(grid, pool_s);
        auto matrix = pooled.concat(pool_order == "fast-first" ? tloc::TokenOrder::FastFirst
                                                               : tloc::TokenOrder::SlowFirst);
        tloc::EmbeddingGrid out;
        out.frames = matrix.rows;
        out.grid_h = 1;
        out.grid_w = 1;
        out.dim = matrix.cols;
        out.data.assign(matrix.data.begin(), matrix.data.end());
        tloc::write_embedding_grid(out, pool_output);
        if (flags.info())
            std::cout << "fast=" << pooled.fast.rows << " slow=" << pooled.slow.rows
                      << " total=" << pooled.total_tokens() << "\n";
    });

    // format <task>
    auto* format_cmd = app.add_subcommand("format", "convert annotations to instruction samples");
    format_cmd->require_subcommand(1);
    format_cmd->fallthrough();
    fs::path format_input, format_out;
    const std::pair<const char*, const char*> format_tasks[] = {
        {"densecap", "dense-caption JSON -> timestamped description samples"},
        {"eventloc", "dense-caption JSON -> one localization sample per event"},
        {"vqa", "question/answer JSONL -> short-answer QA samples"},
        {"rtl", "RTL JSONL -> bracketed interval + explanation samples"},
        {"nlvqa", "prompt/answer JSONL -> pass-through conversation samples"},
    };
    for (const auto& [task, description] : format_tasks) {
        auto* sub = format_cmd->add_subcommand(task, description);
        sub->add_option("--input", format_input, "input annotation file")->required();
        sub->add_option("--out", format_out, "output JSONL path")->required();
        sub->fallthrough();
    }
    format_cmd->get_subcommand("densecap")->callback([&] { run_format_densecap(format_input, format_out, flags); });
    format_cmd->get_subcommand("eventloc")->callback([&] { run_format_eventloc(format_input, format_out, flags); });
    format_cmd->get_subcommand("vqa")->callback([&] { run_format_vqa(format_input, format_out, flags); });
    format_cmd->get_subcommand("rtl")->callback([&] { run_format_rtl(format_input, format_out, flags); });
    format_cmd->get_subcommand("nlvqa")->callback([&] { run_format_nlvqa(format_input, format_out, flags); });

    // mix
    auto* mix_cmd = app.add_subcommand("mix", "mix task pools into one training stream");
    fs::path mix_spec_path, mix_out;
    long long per_task = 100000;
    mix_cmd->add_option("--spec", mix_spec_path, "JSON object mapping task name -> sample JSONL path")->required();
    mix_cmd->add_option("--out", mix_out, "output JSONL path")->required();
    mix_cmd->add_option("--per-task", per_task, "samples drawn per task")->capture_default_str();
    mix_cmd->fallthrough();
    mix_cmd->callback([&] {
        std::ifstream in(mix_spec_path);
        if (!in) throw tloc::IoError("cannot open " + mix_spec_path.string());
        json spec_json;
        try {
            spec_json = json::parse(in);
        } catch (const std::exception& e) {
            throw tloc::ParseError(mix_spec_path.string() + ": " + e.what());
        }
        if (!spec_json.is_object())
            throw tloc::SchemaError(mix_spec_path.string() + ": expected an object mapping task name to path");
        tloc::MixSpec spec;
        spec.per_task = per_task;
        spec.seed = flags.seed;
        for (const auto& [name, path] : spec_json.items()) {
            if (!path.is_string())
                throw tloc::SchemaError(mix_spec_path.string() + ": pool '" + name + "' is not a path string");
            spec.task_sources[name] = tloc::read_jsonl<tloc::InstructionSample>(path.get<std::string>());
        }
        auto mixed = tloc::mix(spec);
        tloc::write_jsonl(mixed, mix_out);
        if (flags.info())
            std::cout << "wrote " << mixed.size() << " samples (" << per_task << " per task x "
                      << spec.task_sources.size() << " tasks) to " << mix_out.string() << "\n";
    });

    // gen rtl
    auto* gen_cmd = app.add_subcommand("gen", "generate datasets");
    gen_cmd->require_subcommand(1);
    gen_cmd->fallthrough();
    auto* gen_rtl = gen_cmd->add_subcommand("rtl", "generate RTL samples from dense captions");
    fs::path gen_captions, gen_out;
    int n_per_video = 3;
    bool gen_mock = false;
    gen_rtl->add_option("--captions", gen_captions, "dense-caption JSON file")->required();
    gen_rtl->add_option("--out", gen_out, "output RTL JSONL path")->required();
    gen_rtl->add_option("--n-per-video", n_per_video, "questions requested per video")->capture_default_str();
    gen_rtl->add_flag("--mock", gen_mock, "use the offline deterministic backend");
    gen_rtl->fallthrough();
    gen_rtl->callback([&] {
        auto records = tloc::load_dense_captions(gen_captions);
        auto client = make_chat_client(gen_mock);
        tloc::DatagenOptions options;
        options.n_per_video = n_per_video;
        auto result = tloc::generate_rtl_dataset(records, *client, options);
        tloc::write_jsonl(result.samples, gen_out);
        if (flags.info())
            std::cout << "accepted=" << result.samples.size() << " rejected=" << result.rejected
                      << " videos=" << result.videos_processed << " skipped=" << result.videos_skipped << "\n";
    });

    // eval rtl
    auto* eval_cmd = app.add_subcommand("eval", "evaluate predictions");
    eval_cmd->require_subcommand(1);
    eval_cmd->fallthrough();
    auto* eval_rtl = eval_cmd->add_subcommand("rtl", "score RTL predictions against ground truth");
    fs::path eval_gt, eval_pred, eval_report_path;
    std::string judge_mode = "none", missing_mode = "score-zero";
    bool judge_raw_ratio = false;
    eval_rtl->add_option("--gt", eval_gt, "ground-truth RTL JSONL")->required();
    eval_rtl->add_option("--pred", eval_pred, "prediction JSONL")->required();
    eval_rtl->add_option("--judge", judge_mode, "none|mock|remote")
        ->check(CLI::IsMember({"none", "mock", "remote"}));
    eval_rtl->add_option("--missing", missing_mode, "score-zero|exclude")
        ->check(CLI::IsMember({"score-zero", "exclude"}));
    eval_rtl->add_flag("--judge-raw-ratio", judge_raw_ratio, "emit pred/gt instead of 100*pred/gt");
    eval_rtl->add_option("--report", eval_report_path, "output report JSON path")->required();
    eval_rtl->fallthrough();
    eval_rtl->callback([&] {
        auto gt = tloc::read_rtl_samples(eval_gt);
        auto preds = tloc::read_jsonl<tloc::Prediction>(eval_pred);
        tloc::EvalOptions options;
        options.steps = flags.steps;
        options.missing = parse_missing(missing_mode);
        options.judge_raw_ratio = judge_raw_ratio;
        tloc::JudgeFn judge;
        if (judge_mode != "none") judge = tloc::make_judge(make_chat_client(judge_mode == "mock"));
        auto report = tloc::evaluate(gt, preds, options, judge);
        write_report(report, eval_report_path);
        print_report_summary(report, flags);
        if (flags.info()) std::cout << "report written to " << eval_report_path.string() << "\n";
    });

    // run
    auto* run_cmd = app.add_subcommand("run", "run a reference predictor end to end");
    fs::path run_gt, run_report_path, run_pred_out;
    std::string predictor_name = "oracle", run_missing = "score-zero";
    run_cmd->add_option("--gt", run_gt, "ground-truth RTL JSONL")->required();
    run_cmd->add_option("--predictor", predictor_name, "oracle|fullspan|silent")
        ->check(CLI::IsMember({"oracle", "fullspan", "silent"}));
    run_cmd->add_option("--report", run_report_path, "output report JSON path")->required();
    run_cmd->add_option("--pred-out", run_pred_out, "predictions JSONL path (default: derived from --report)");
    run_cmd->add_option("--missing", run_missing, "score-zero|exclude")
        ->check(CLI::IsMember({"score-zero", "exclude"}));
    run_cmd->fallthrough();
    run_cmd->callback([&] {
        if (run_pred_out.empty()) {
            run_pred_out = run_report_path;
            run_pred_out.replace_extension();
            run_pred_out += ".predictions.jsonl";
        }
        std::unique_ptr<tloc::Predictor> predictor;
        if (predictor_name == "oracle")
            predictor = tloc::make_oracle_predictor(tloc::read_rtl_samples(run_gt), flags.steps);
        else if (predictor_name == "fullspan")
            predictor = tloc::make_fullspan_predictor(flags.steps);
        else
            predictor = tloc::make_silent_predictor();
        tloc::PipelineOptions options;
        options.steps = flags.steps;
        options.missing = parse_missing(run_missing);
        auto report = tloc::run_pipeline(run_gt, *predictor, run_pred_out, options);
        write_report(report, run_report_path);
        print_report_summary(report, flags);
        if (flags.info())
            std::cout << "predictions written to " << run_pred_out.string() << "\nreport written to "
                      << run_report_path.string() << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const tloc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
