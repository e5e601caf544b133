#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "tloc/detail/text.hpp"
#include "tloc/embedding_grid.hpp"
#include "tloc/errors.hpp"
#include "tloc/interval.hpp"

namespace tloc {

struct CaptionedEvent {
    Interval interval;
    std::string sentence;
};

// One video's duration plus its timestamped sentences.
struct VideoRecord {
    std::string video_id;
    double duration = 0.0;
    std::vector<CaptionedEvent> events;
};

// One reasoning-temporal-localization QA pair.
struct RTLSample {
    std::string video_id;
    std::string question_id;
    std::string question;
    Interval interval;
    std::string explanation;
    double duration = 0.0;

    bool operator==(const RTLSample&) const = default;
};

struct Prediction {
    std::string video_id;
    std::string question_id;
    std::string answer_text;

    bool operator==(const Prediction&) const = default;
};

inline void to_json(nlohmann::json& j, const RTLSample& s) {
    j = nlohmann::json{{"video_id", s.video_id}, {"question_id", s.question_id}, {"question", s.question},
                       {"start", s.interval.start}, {"end", s.interval.end}, {"explanation", s.explanation},
                       {"duration", s.duration}};
}

inline void from_json(const nlohmann::json& j, RTLSample& s) {
    s.video_id = j.at("video_id").get<std::string>();
    s.question_id = j.value("question_id", std::string{});
    s.question = j.at("question").get<std::string>();
    s.interval.start = j.at("start").get<double>();
    s.interval.end = j.at("end").get<double>();
    s.explanation = j.at("explanation").get<std::string>();
    s.duration = j.at("duration").get<double>();
}

inline void to_json(nlohmann::json& j, const Prediction& p) {
    j = nlohmann::json{{"video_id", p.video_id}, {"question_id", p.question_id}, {"answer", p.answer_text}};
}

inline void from_json(const nlohmann::json& j, Prediction& p) {
    p.video_id = j.at("video_id").get<std::string>();
    p.question_id = j.at("question_id").get<std::string>();
    p.answer_text = j.at("answer").get<std::string>();
}

// ---------------------------------------------------------------------------
// Dense-captioning JSON (object keyed by video id, with "duration",
// "timestamps" and a parallel "sentences" list).
// ---------------------------------------------------------------------------

struct CaptionLoadStats {
    int clamped_intervals = 0; // out-of-range endpoints pulled into [0, duration]
    int swapped_intervals = 0; // inverted start/end pairs
};

inline std::vector<VideoRecord> load_dense_captions(const std::filesystem::path& path,
                                                    CaptionLoadStats* stats = nullptr) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(in);
    } catch (const std::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    if (!root.is_object()) throw SchemaError(path.string() + ": top level must be an object keyed by video id");

    CaptionLoadStats local;
    CaptionLoadStats& st = stats ? *stats : local;
    std::vector<VideoRecord> records;
    records.reserve(root.size());
    for (const auto& [video_id, body] : root.items()) {
        auto fail = [&](const std::string& what) { throw SchemaError("video " + video_id + ": " + what); };
        if (!body.is_object()) fail("entry is not an object");
        if (!body.contains("duration")) fail("missing field 'duration'");
        if (!body.contains("timestamps")) fail("missing field 'timestamps'");
        if (!body.contains("sentences")) fail("missing field 'sentences'");

        VideoRecord rec;
        rec.video_id = video_id;
        if (!body["duration"].is_number()) fail("'duration' is not a number");
        rec.duration = body["duration"].get<double>();
        if (!(rec.duration > 0.0)) fail("'duration' must be > 0");

        const auto& ts = body["timestamps"];
        const auto& sents = body["sentences"];
        if (!ts.is_array() || !sents.is_array()) fail("'timestamps' and 'sentences' must be lists");
        if (ts.size() != sents.size())
            fail("timestamps length " + std::to_string(ts.size()) + " != sentences length " +
                 std::to_string(sents.size()));

        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (!ts[i].is_array() || ts[i].size() != 2 || !ts[i][0].is_number() || !ts[i][1].is_number())
                fail("timestamp " + std::to_string(i) + " is not a [start, end] pair");
            if (!sents[i].is_string()) fail("sentence " + std::to_string(i) + " is not a string");
            CaptionedEvent ev;
            ev.sentence = detail::trim(sents[i].get<std::string>());
            if (ev.sentence.empty()) fail("sentence " + std::to_string(i) + " is empty");
            Interval raw{ts[i][0].get<double>(), ts[i][1].get<double>()};
            if (raw.start > raw.end) {
                std::swap(raw.start, raw.end);
                ++st.swapped_intervals;
            }
            ev.interval = normalize_interval(raw, rec.duration);
            if (ev.interval != raw) ++st.clamped_intervals;
            rec.events.push_back(std::move(ev));
        }
        records.push_back(std::move(rec));
    }
    return records;
}

// ---------------------------------------------------------------------------
// JSON-lines streams (one record per line).
// ---------------------------------------------------------------------------

template <class Record>
std::vector<Record> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<Record> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        try {
            out.push_back(nlohmann::json::parse(line).get<Record>());
        } catch (const std::exception& e) {
            throw ParseError(path.string() + ": line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

template <class Record>
void write_jsonl(const std::vector<Record>& records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    for (const auto& r : records)
        // invalid UTF-8 in free-text fields degrades to U+FFFD instead of failing the write
        out << nlohmann::json(r).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    if (!out) throw IoError("short write to " + path.string());
}

// Fills in missing question ids as "<video_id>#<ordinal>" with a 0-based
// per-video ordinal, in file order.
inline void assign_question_ids(std::vector<RTLSample>& samples) {
    std::unordered_map<std::string, int> ordinals;
    for (auto& s : samples) {
        int ord = ordinals[s.video_id]++;
        if (s.question_id.empty()) s.question_id = s.video_id + "#" + std::to_string(ord);
    }
}

inline std::vector<RTLSample> read_rtl_samples(const std::filesystem::path& path) {
    auto samples = read_jsonl<RTLSample>(path);
    assign_question_ids(samples);
    return samples;
}

// ---------------------------------------------------------------------------
// Binary embedding grids: ASCII magic "LITEMB01", four little-endian u32
// dims T H W D, then T*H*W*D little-endian f32 values.
// ---------------------------------------------------------------------------

inline constexpr char kEmbeddingMagic[8] = {'L', 'I', 'T', 'E', 'M', 'B', '0', '1'};

namespace detail {

inline void put_u32le(std::ostream& out, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                 static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    out.write(b, 4);
}

inline std::uint32_t get_u32le(const unsigned char* b) {
    return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
           static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

} // namespace detail

inline void write_embedding_grid(const EmbeddingGrid& grid, const std::filesystem::path& path) {
    grid.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(kEmbeddingMagic, 8);
    detail::put_u32le(out, static_cast<std::uint32_t>(grid.frames));
    detail::put_u32le(out, static_cast<std::uint32_t>(grid.grid_h));
    detail::put_u32le(out, static_cast<std::uint32_t>(grid.grid_w));
    detail::put_u32le(out, static_cast<std::uint32_t>(grid.dim));
    for (float f : grid.data) {
        auto bits = std::bit_cast<std::uint32_t>(f);
        detail::put_u32le(out, bits);
    }
    if (!out) throw IoError("short write to " + path.string());
}

inline EmbeddingGrid read_embedding_grid(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kEmbeddingMagic, 8) != 0)
        throw BadMagic(path.string() + ": not a LITEMB01 file");
    unsigned char header[16];
    if (!in.read(reinterpret_cast<char*>(header), 16))
        throw TruncatedFile(path.string() + ": header cut short");

    EmbeddingGrid grid;
    grid.frames = static_cast<int>(detail::get_u32le(header));
    grid.grid_h = static_cast<int>(detail::get_u32le(header + 4));
    grid.grid_w = static_cast<int>(detail::get_u32le(header + 8));
    grid.dim = static_cast<int>(detail::get_u32le(header + 12));

    std::uint64_t count = 1;
    for (std::uint64_t d : {detail::get_u32le(header), detail::get_u32le(header + 4),
                            detail::get_u32le(header + 8), detail::get_u32le(header + 12)}) {
        if (d == 0 || count > (1ULL << 40) / d)
            throw TruncatedFile(path.string() + ": implausible declared size " + grid.shape_string());
        count *= d;
    }

    std::vector<unsigned char> payload(count * 4);
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (static_cast<std::uint64_t>(in.gcount()) != payload.size())
        throw TruncatedFile(path.string() + ": declared " + std::to_string(payload.size()) +
                            " payload bytes, file has " + std::to_string(in.gcount()));
    if (in.peek() != std::char_traits<char>::eof())
        throw TruncatedFile(path.string() + ": trailing bytes after declared payload");

    grid.data.resize(count);
    for (std::uint64_t i = 0; i < count; ++i)
        grid.data[i] = std::bit_cast<float>(detail::get_u32le(payload.data() + i * 4));
    grid.validate();
    return grid;
}

} // namespace tloc
