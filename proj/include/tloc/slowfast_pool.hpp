#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tloc/embedding_grid.hpp"
#include "tloc/errors.hpp"

namespace tloc {

enum class TokenOrder { FastFirst, SlowFirst };

// Result of SlowFast pooling: one fast token per frame plus
// (H/s)*(W/s) slow tokens for each of the sampled frames.
struct PooledTokens {
    TokenMatrix fast;                  // frames x dim
    TokenMatrix slow;                  // |indices| * (H/s) * (W/s) x dim
    int s = 2;                         // spatial pooling ratio
    std::vector<int> slow_frame_indices;

    int total_tokens() const { return fast.rows + slow.rows; }

    TokenMatrix concat(TokenOrder order = TokenOrder::FastFirst) const {
        const TokenMatrix& a = (order == TokenOrder::FastFirst) ? fast : slow;
        const TokenMatrix& b = (order == TokenOrder::FastFirst) ? slow : fast;
        TokenMatrix out(a.rows + b.rows, fast.cols);
        std::copy(a.data.begin(), a.data.end(), out.data.begin());
        std::copy(b.data.begin(), b.data.end(), out.data.begin() + a.data.size());
        return out;
    }
};

// One token per frame: the per-channel mean over the frame's spatial tokens.
inline TokenMatrix fast_tokens(const EmbeddingGrid& grid) {
    grid.validate();
    TokenMatrix out(grid.frames, grid.dim);
    const double inv_m = 1.0 / grid.tokens_per_frame();
    for (int f = 0; f < grid.frames; ++f) {
        for (int y = 0; y < grid.grid_h; ++y)
            for (int x = 0; x < grid.grid_w; ++x)
                for (int c = 0; c < grid.dim; ++c)
                    out.at(f, c) += grid.at(f, y, x, c);
        for (int c = 0; c < grid.dim; ++c)
            out.at(f, c) *= inv_m;
    }
    return out;
}

// Endpoint-inclusive uniform sampling of k frame indices out of `frames`.
// k = 1 degenerates to the first frame.
inline std::vector<int> select_slow_frames(int frames, int k) {
    if (k < 1 || k > frames)
        throw InvalidCount("select_slow_frames: k=" + std::to_string(k) + " outside [1, " +
                           std::to_string(frames) + "]");
    if (k == 1) return {0};
    std::vector<int> indices(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i)
        indices[static_cast<std::size_t>(i)] =
            static_cast<int>(std::llround(static_cast<double>(i) * (frames - 1) / (k - 1)));
    return indices;
}

// Non-overlapping s x s spatial average pooling over the selected frames,
// concatenated in frame order, row-major within each frame.
inline TokenMatrix slow_tokens(const EmbeddingGrid& grid, int s, const std::vector<int>& indices) {
    grid.validate();
    if (s < 1 || grid.grid_h % s != 0 || grid.grid_w % s != 0)
        throw IndivisibleGrid("slow_tokens: s=" + std::to_string(s) + " does not divide " +
                              std::to_string(grid.grid_h) + "x" + std::to_string(grid.grid_w));
    for (int f : indices)
        if (f < 0 || f >= grid.frames)
            throw IndexOutOfRange("slow_tokens: frame index " + std::to_string(f) + " outside grid");

    const int out_h = grid.grid_h / s;
    const int out_w = grid.grid_w / s;
    TokenMatrix out(static_cast<int>(indices.size()) * out_h * out_w, grid.dim);
    const double inv_win = 1.0 / (s * s);
    int row = 0;
    for (int f : indices) {
        for (int by = 0; by < out_h; ++by) {
            for (int bx = 0; bx < out_w; ++bx, ++row) {
                for (int dy = 0; dy < s; ++dy)
                    for (int dx = 0; dx < s; ++dx)
                        for (int c = 0; c < grid.dim; ++c)
                            out.at(row, c) += grid.at(f, by * s + dy, bx * s + dx, c);
                for (int c = 0; c < grid.dim; ++c)
                    out.at(row, c) *= inv_win;
            }
        }
    }
    return out;
}

// Full SlowFast reduction of a T x M token grid to T fast + M slow tokens,
// sampling s^2 frames for the slow pathway.
inline PooledTokens pool(const EmbeddingGrid& grid, int s = 2) {
    grid.validate();
    PooledTokens out;
    out.s = s;
    out.slow_frame_indices = select_slow_frames(grid.frames, s * s);
    out.fast = fast_tokens(grid);
    out.slow = slow_tokens(grid, s, out.slow_frame_indices);
    return out;
}

} // namespace tloc
