#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "tloc/slowfast_pool.hpp"

using namespace tloc;

namespace {

EmbeddingGrid make_grid(int frames, int h, int w, int dim) {
    EmbeddingGrid g;
    g.frames = frames;
    g.grid_h = h;
    g.grid_w = w;
    g.dim = dim;
    g.data.assign(static_cast<std::size_t>(frames) * h * w * dim, 0.0f);
    return g;
}

EmbeddingGrid random_grid(std::mt19937_64& rng, int frames, int h, int w, int dim) {
    auto g = make_grid(frames, h, w, dim);
    std::uniform_real_distribution<float> dist(-10.0f, 10.0f);
    for (auto& v : g.data) v = dist(rng);
    return g;
}

// Nested-loop reference pooling, kept independent of the library kernels.
std::vector<std::vector<double>> reference_fast(const EmbeddingGrid& g) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(g.frames),
                                         std::vector<double>(static_cast<std::size_t>(g.dim), 0.0));
    for (int f = 0; f < g.frames; ++f)
        for (int c = 0; c < g.dim; ++c) {
            double sum = 0.0;
            for (int y = 0; y < g.grid_h; ++y)
                for (int x = 0; x < g.grid_w; ++x)
                    sum += g.at(f, y, x, c);
            out[f][c] = sum / (g.grid_h * g.grid_w);
        }
    return out;
}

} // namespace

TEST_CASE("fast_tokens averages each frame") {
    SECTION("constant input stays constant") {
        auto g = make_grid(3, 4, 4, 2);
        std::fill(g.data.begin(), g.data.end(), 1.0f);
        auto fast = fast_tokens(g);
        REQUIRE(fast.rows == 3);
        REQUIRE(fast.cols == 2);
        for (double v : fast.data) CHECK(v == 1.0);
    }
    SECTION("single 2x2 frame of 1..4 averages to 2.5") {
        auto g = make_grid(1, 2, 2, 1);
        g.data = {1.0f, 2.0f, 3.0f, 4.0f};
        auto fast = fast_tokens(g);
        CHECK(fast.at(0, 0) == 2.5);
    }
    SECTION("per-frame constants stay separated") {
        auto g = make_grid(2, 2, 2, 1);
        std::fill(g.data.begin(), g.data.begin() + 4, 0.0f);
        std::fill(g.data.begin() + 4, g.data.end(), 6.0f);
        auto fast = fast_tokens(g);
        CHECK(fast.at(0, 0) == 0.0);
        CHECK(fast.at(1, 0) == 6.0);
    }
}

TEST_CASE("select_slow_frames samples uniformly with endpoints") {
    CHECK(select_slow_frames(100, 4) == std::vector<int>{0, 33, 66, 99});
    CHECK(select_slow_frames(4, 4) == std::vector<int>{0, 1, 2, 3});
    CHECK(select_slow_frames(7, 2) == std::vector<int>{0, 6});
    CHECK(select_slow_frames(9, 1) == std::vector<int>{0});
    CHECK_THROWS_AS(select_slow_frames(3, 0), InvalidCount);
    CHECK_THROWS_AS(select_slow_frames(3, 4), InvalidCount);
}

TEST_CASE("select_slow_frames is non-decreasing and endpoint-inclusive") {
    for (int frames : {2, 3, 5, 17, 100, 731}) {
        for (int k = 2; k <= frames && k <= 64; ++k) {
            auto idx = select_slow_frames(frames, k);
            REQUIRE(idx.front() == 0);
            REQUIRE(idx.back() == frames - 1);
            for (std::size_t i = 1; i < idx.size(); ++i) REQUIRE(idx[i - 1] <= idx[i]);
        }
    }
}

TEST_CASE("slow_tokens pools s x s blocks") {
    SECTION("constant grid") {
        auto g = make_grid(4, 4, 4, 3);
        std::fill(g.data.begin(), g.data.end(), 1.0f);
        auto slow = slow_tokens(g, 2, {0, 1, 2, 3});
        REQUIRE(slow.rows == 16);
        for (double v : slow.data) CHECK(v == 1.0);
    }
    SECTION("2x2 frame collapses to its mean") {
        auto g = make_grid(1, 2, 2, 1);
        g.data = {1.0f, 2.0f, 3.0f, 4.0f};
        auto slow = slow_tokens(g, 2, {0});
        REQUIRE(slow.rows == 1);
        CHECK(slow.at(0, 0) == 2.5);
    }
    SECTION("block structure is preserved in row-major order") {
        auto g = make_grid(1, 4, 4, 1);
        for (int y = 0; y < 2; ++y)
            for (int x = 0; x < 2; ++x)
                g.at(0, y, x, 0) = 8.0f;
        auto slow = slow_tokens(g, 2, {0});
        REQUIRE(slow.rows == 4);
        CHECK(slow.at(0, 0) == 8.0);
        CHECK(slow.at(1, 0) == 0.0);
        CHECK(slow.at(2, 0) == 0.0);
        CHECK(slow.at(3, 0) == 0.0);
    }
    SECTION("indivisible spatial grid is rejected") {
        auto g = make_grid(1, 3, 4, 1);
        CHECK_THROWS_AS(slow_tokens(g, 2, {0}), IndivisibleGrid);
    }
}

TEST_CASE("pool emits frames + tokens_per_frame tokens") {
    SECTION("the 100-frame 16x16 configuration gives 356 tokens") {
        auto g = make_grid(100, 16, 16, 4);
        auto pooled = pool(g, 2);
        CHECK(pooled.fast.rows == 100);
        CHECK(pooled.slow.rows == 256);
        CHECK(pooled.total_tokens() == 356);
        CHECK(pooled.slow_frame_indices == select_slow_frames(100, 4));
    }
    SECTION("small shapes") {
        CHECK(pool(make_grid(4, 2, 2, 1), 2).total_tokens() == 8);
        CHECK(pool(make_grid(9, 4, 4, 2), 2).total_tokens() == 25);
    }
    SECTION("s=4 samples sixteen slow frames") {
        auto pooled = pool(make_grid(20, 4, 8, 2), 4);
        CHECK(pooled.slow_frame_indices.size() == 16);
        CHECK(pooled.slow.rows == 4 * 8); // M preserved
        CHECK(pooled.total_tokens() == 20 + 32);
        CHECK_THROWS_AS(pool(make_grid(8, 4, 4, 1), 4), InvalidCount); // s^2 > frames
    }
    SECTION("count invariant on random shapes") {
        std::mt19937_64 rng(99);
        std::uniform_int_distribution<int> frames_dist(4, 40), mul_dist(1, 4), dim_dist(1, 5);
        for (int i = 0; i < 50; ++i) {
            int s = 2;
            auto g = make_grid(frames_dist(rng), s * mul_dist(rng), s * mul_dist(rng), dim_dist(rng));
            CHECK(pool(g, s).total_tokens() == g.frames + g.tokens_per_frame());
        }
    }
}

TEST_CASE("mean of fast tokens preserves the global mean") {
    std::mt19937_64 rng(4242);
    for (int i = 0; i < 20; ++i) {
        auto g = random_grid(rng, 6, 4, 4, 3);
        auto fast = fast_tokens(g);
        for (int c = 0; c < g.dim; ++c) {
            double global = 0.0;
            for (int f = 0; f < g.frames; ++f)
                for (int y = 0; y < g.grid_h; ++y)
                    for (int x = 0; x < g.grid_w; ++x)
                        global += g.at(f, y, x, c);
            global /= g.frames * g.grid_h * g.grid_w;
            double fast_mean = 0.0;
            for (int f = 0; f < fast.rows; ++f) fast_mean += fast.at(f, c);
            fast_mean /= fast.rows;
            REQUIRE_THAT(fast_mean, Catch::Matchers::WithinRel(global, 1e-6));
        }
    }
}

TEST_CASE("fast tokens match the nested-loop reference") {
    std::mt19937_64 rng(31337);
    for (int i = 0; i < 30; ++i) {
        std::uniform_int_distribution<int> dim_dist(1, 4), frames_dist(1, 8), spatial_dist(1, 4);
        auto g = random_grid(rng, frames_dist(rng), 2 * spatial_dist(rng), 2 * spatial_dist(rng), dim_dist(rng));
        auto fast = fast_tokens(g);
        auto ref = reference_fast(g);
        for (int f = 0; f < g.frames; ++f)
            for (int c = 0; c < g.dim; ++c)
                REQUIRE_THAT(fast.at(f, c), Catch::Matchers::WithinAbs(ref[f][c], 1e-6));
    }
}

TEST_CASE("permuting frames permutes fast-token rows identically") {
    std::mt19937_64 rng(555);
    auto g = random_grid(rng, 6, 2, 2, 3);
    std::vector<int> perm = {3, 0, 5, 1, 4, 2};
    auto permuted = g;
    for (int f = 0; f < g.frames; ++f)
        for (int y = 0; y < g.grid_h; ++y)
            for (int x = 0; x < g.grid_w; ++x)
                for (int c = 0; c < g.dim; ++c)
                    permuted.at(f, y, x, c) = g.at(perm[static_cast<std::size_t>(f)], y, x, c);
    auto fast = fast_tokens(g);
    auto fast_permuted = fast_tokens(permuted);
    for (int f = 0; f < g.frames; ++f)
        for (int c = 0; c < g.dim; ++c)
            REQUIRE(fast_permuted.at(f, c) == fast.at(perm[static_cast<std::size_t>(f)], c));
}

TEST_CASE("concat order flag flips the pathways") {
    auto g = make_grid(2, 2, 2, 1);
    for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] = static_cast<float>(i);
    auto pooled = pool(g, 1); // s=1: slow pathway keeps single-frame tokens
    auto fast_first = pooled.concat(TokenOrder::FastFirst);
    auto slow_first = pooled.concat(TokenOrder::SlowFirst);
    REQUIRE(fast_first.rows == slow_first.rows);
    CHECK(fast_first.at(0, 0) == pooled.fast.at(0, 0));
    CHECK(slow_first.at(0, 0) == pooled.slow.at(0, 0));
    CHECK(slow_first.at(pooled.slow.rows, 0) == pooled.fast.at(0, 0));
}
