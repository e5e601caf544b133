#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "tloc/dataset_io.hpp"
#include "tloc/task_format.hpp"
#include "test_util.hpp"

using namespace tloc;
using test_util::TempDir;

namespace {

const char* kToyCaptions = R"({
  "v1": {
    "duration": 36.0,
    "timestamps": [[0, 10], [12, 30], [32, 36]],
    "sentences": ["A woman is standing.", "The woman is dancing.", "The woman is sleeping."]
  }
})";

} // namespace

TEST_CASE("load_dense_captions reads the toy record") {
    TempDir dir;
    test_util::write_file(dir.file("caps.json"), kToyCaptions);
    auto records = load_dense_captions(dir.file("caps.json"));
    REQUIRE(records.size() == 1);
    CHECK(records[0].video_id == "v1");
    CHECK(records[0].duration == 36.0);
    REQUIRE(records[0].events.size() == 3);
    CHECK(records[0].events[0].sentence == "A woman is standing.");
    CHECK(records[0].events[2].interval == Interval{32.0, 36.0});
}

TEST_CASE("load_dense_captions handles the empty object") {
    TempDir dir;
    test_util::write_file(dir.file("caps.json"), "{}");
    CHECK(load_dense_captions(dir.file("caps.json")).empty());
}

TEST_CASE("load_dense_captions rejects mismatched lists") {
    TempDir dir;
    test_util::write_file(dir.file("caps.json"),
                          R"({"v9": {"duration": 10, "timestamps": [[0,1],[2,3]], "sentences": ["a","b","c"]}})");
    CHECK_THROWS_MATCHES(load_dense_captions(dir.file("caps.json")), SchemaError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("v9")));
}

TEST_CASE("load_dense_captions rejects malformed JSON and missing fields") {
    TempDir dir;
    test_util::write_file(dir.file("bad.json"), "{not json");
    CHECK_THROWS_AS(load_dense_captions(dir.file("bad.json")), ParseError);
    test_util::write_file(dir.file("nofield.json"), R"({"v1": {"duration": 10, "timestamps": [[0,1]]}})");
    CHECK_THROWS_AS(load_dense_captions(dir.file("nofield.json")), SchemaError);
    CHECK_THROWS_AS(load_dense_captions(dir.file("missing.json")), IoError);
}

TEST_CASE("load_dense_captions clamps out-of-range intervals with a counter") {
    TempDir dir;
    test_util::write_file(dir.file("caps.json"),
                          R"({"v1": {"duration": 20, "timestamps": [[-1, 5], [18, 25], [9, 3]],)"
                          R"( "sentences": ["a", "b", "c"]}})");
    CaptionLoadStats stats;
    auto records = load_dense_captions(dir.file("caps.json"), &stats);
    REQUIRE(records.size() == 1);
    const auto& events = records[0].events;
    CHECK(events[0].interval == Interval{0.0, 5.0});
    CHECK(events[1].interval == Interval{18.0, 20.0});
    CHECK(events[2].interval == Interval{3.0, 9.0});
    CHECK(stats.clamped_intervals == 2);
    CHECK(stats.swapped_intervals == 1);
    for (const auto& ev : events) CHECK(ev.interval.start <= ev.interval.end);
}

TEST_CASE("jsonl round trip preserves records") {
    TempDir dir;
    std::vector<RTLSample> samples;
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> dist(0.0, 50.0);
    for (int i = 0; i < 20; ++i) {
        RTLSample s;
        s.video_id = "v" + std::to_string(i % 5);
        s.question_id = s.video_id + "#" + std::to_string(i);
        s.question = "When does event " + std::to_string(i) + " happen?";
        double a = dist(rng), b = dist(rng);
        s.interval = {std::min(a, b), std::max(a, b)};
        s.explanation = "Because of event " + std::to_string(i) + ".";
        s.duration = 50.0;
        samples.push_back(std::move(s));
    }
    write_jsonl(samples, dir.file("s.jsonl"));
    CHECK(read_jsonl<RTLSample>(dir.file("s.jsonl")) == samples);

    std::vector<Prediction> preds = {{"v1", "q1", "[<1> <5>] ok"}, {"v2", "q2", "no timestamps"}};
    write_jsonl(preds, dir.file("p.jsonl"));
    CHECK(read_jsonl<Prediction>(dir.file("p.jsonl")) == preds);
}

TEST_CASE("instruction sample jsonl round trips across all tasks") {
    TempDir dir;
    std::vector<InstructionSample> samples;
    int i = 0;
    for (auto task : {SourceTask::DenseCaptioning, SourceTask::EventLocalization, SourceTask::VideoQA,
                      SourceTask::NLVQA, SourceTask::RTL}) {
        InstructionSample s;
        s.id = "s" + std::to_string(i);
        s.task = task;
        s.prompt = "prompt " + std::to_string(i);
        s.answer = "answer " + std::to_string(i);
        s.video_id = (i % 2 == 0) ? "vid" + std::to_string(i) : ""; // exercise the omitted field
        samples.push_back(std::move(s));
        ++i;
    }
    write_jsonl(samples, dir.file("inst.jsonl"));
    CHECK(read_jsonl<InstructionSample>(dir.file("inst.jsonl")) == samples);
}

TEST_CASE("jsonl reader reports the failing line") {
    TempDir dir;
    test_util::write_file(dir.file("p.jsonl"),
                          R"({"video_id": "v", "question_id": "q", "answer": "a"})"
                          "\n{oops\n");
    CHECK_THROWS_MATCHES(read_jsonl<Prediction>(dir.file("p.jsonl")), ParseError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("line 2")));
}

TEST_CASE("jsonl reader accepts empty files and blank lines") {
    TempDir dir;
    test_util::write_file(dir.file("e.jsonl"), "");
    CHECK(read_jsonl<Prediction>(dir.file("e.jsonl")).empty());
    test_util::write_file(dir.file("b.jsonl"),
                          "\n" R"({"video_id": "v", "question_id": "q", "answer": "a"})" "\n\n");
    CHECK(read_jsonl<Prediction>(dir.file("b.jsonl")).size() == 1);
}

TEST_CASE("read_rtl_samples assigns missing question ids per video") {
    TempDir dir;
    test_util::write_file(
        dir.file("rtl.jsonl"),
        R"({"video_id": "a", "question": "q?", "start": 0, "end": 1, "explanation": "e", "duration": 5})" "\n"
        R"({"video_id": "a", "question": "r?", "start": 1, "end": 2, "explanation": "e", "duration": 5})" "\n"
        R"({"video_id": "b", "question": "s?", "start": 2, "end": 3, "explanation": "e", "duration": 5})" "\n");
    auto samples = read_rtl_samples(dir.file("rtl.jsonl"));
    REQUIRE(samples.size() == 3);
    CHECK(samples[0].question_id == "a#0");
    CHECK(samples[1].question_id == "a#1");
    CHECK(samples[2].question_id == "b#0");
}

TEST_CASE("embedding grid round trip is byte-identical") {
    TempDir dir;
    EmbeddingGrid grid;
    grid.frames = 3;
    grid.grid_h = 2;
    grid.grid_w = 4;
    grid.dim = 5;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<float> dist(-100.0f, 100.0f);
    grid.data.resize(3 * 2 * 4 * 5);
    for (auto& v : grid.data) v = dist(rng);

    write_embedding_grid(grid, dir.file("g.bin"));
    write_embedding_grid(grid, dir.file("g2.bin"));
    CHECK(test_util::read_file(dir.file("g.bin")) == test_util::read_file(dir.file("g2.bin")));

    auto loaded = read_embedding_grid(dir.file("g.bin"));
    CHECK(loaded.frames == grid.frames);
    CHECK(loaded.grid_h == grid.grid_h);
    CHECK(loaded.grid_w == grid.grid_w);
    CHECK(loaded.dim == grid.dim);
    CHECK(loaded.data == grid.data);
}

TEST_CASE("a 1x1x1x1 grid serializes to 28 bytes") {
    TempDir dir;
    EmbeddingGrid grid;
    grid.frames = grid.grid_h = grid.grid_w = grid.dim = 1;
    grid.data = {3.5f};
    write_embedding_grid(grid, dir.file("one.bin"));
    CHECK(std::filesystem::file_size(dir.file("one.bin")) == 28);
    CHECK(read_embedding_grid(dir.file("one.bin")).data[0] == 3.5f);
}

TEST_CASE("embedding reader validates magic and size arithmetic") {
    TempDir dir;
    test_util::write_file(dir.file("bad.bin"), std::string("XXXXXXXX") + std::string(16, '\0'));
    CHECK_THROWS_AS(read_embedding_grid(dir.file("bad.bin")), BadMagic);

    // header declares 1x1x1x2 floats but carries only one
    std::string truncated("LITEMB01", 8);
    auto le32 = [](std::uint32_t v) {
        std::string s(4, '\0');
        for (int i = 0; i < 4; ++i) s[static_cast<size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFF);
        return s;
    };
    truncated += le32(1) + le32(1) + le32(1) + le32(2) + std::string(4, '\x01');
    test_util::write_file(dir.file("trunc.bin"), truncated);
    CHECK_THROWS_AS(read_embedding_grid(dir.file("trunc.bin")), TruncatedFile);

    // trailing garbage after the declared payload
    std::string oversized("LITEMB01", 8);
    oversized += le32(1) + le32(1) + le32(1) + le32(1) + std::string(8, '\x01');
    test_util::write_file(dir.file("over.bin"), oversized);
    CHECK_THROWS_AS(read_embedding_grid(dir.file("over.bin")), TruncatedFile);
}
