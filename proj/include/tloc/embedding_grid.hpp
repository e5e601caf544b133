#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tloc/errors.hpp"

namespace tloc {

// Per-frame visual token embeddings: frames x grid_h x grid_w x dim,
// stored frame-major, then row-major spatial, then channel.
struct EmbeddingGrid {
    int frames = 0;
    int grid_h = 0;
    int grid_w = 0;
    int dim = 0;
    std::vector<float> data;

    int tokens_per_frame() const { return grid_h * grid_w; }

    std::size_t index(int f, int y, int x, int c) const {
        return ((static_cast<std::size_t>(f) * grid_h + y) * grid_w + x) * dim + c;
    }

    float at(int f, int y, int x, int c) const { return data[index(f, y, x, c)]; }
    float& at(int f, int y, int x, int c) { return data[index(f, y, x, c)]; }

    void validate() const {
        if (frames < 1 || grid_h < 1 || grid_w < 1 || dim < 1)
            throw InvalidEmbeddingGrid("EmbeddingGrid: all dimensions must be >= 1 (" + shape_string() + ")");
        const std::size_t expected = static_cast<std::size_t>(frames) * grid_h * grid_w * dim;
        if (data.size() != expected)
            throw InvalidEmbeddingGrid("EmbeddingGrid: data has " + std::to_string(data.size()) +
                                       " values, shape " + shape_string() + " needs " + std::to_string(expected));
    }

    std::string shape_string() const {
        return std::to_string(frames) + "x" + std::to_string(grid_h) + "x" + std::to_string(grid_w) + "x" +
               std::to_string(dim);
    }
};

// Row-major rows x cols matrix of pooled token embeddings. Pooling
// accumulates in double regardless of the storage precision.
struct TokenMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    TokenMatrix() = default;
    TokenMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
};

} // namespace tloc
