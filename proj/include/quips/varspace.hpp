#pragma once

#include "quips/errors.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace quips {

// A coordinate universe: named matrix blocks, flattened to dense ordinals.
// Every polynomial, multivector and matrix expression in one computation
// shares a single VarSpace, which keeps variable alignment trivial.
class VarSpace {
public:
    struct Block {
        std::string name;
        std::size_t rows = 0, cols = 0;
        std::size_t base = 0;
    };

    std::size_t add_block(const std::string& name, std::size_t rows, std::size_t cols) {
        Block b{name, rows, cols, n_};
        n_ += rows * cols;
        blocks_.push_back(std::move(b));
        return blocks_.size() - 1;
    }

    std::size_t n_vars() const { return n_; }
    std::size_t n_blocks() const { return blocks_.size(); }
    const Block& block(std::size_t id) const { return blocks_.at(id); }

    std::size_t block_by_name(const std::string& name) const {
        for (std::size_t i = 0; i < blocks_.size(); ++i)
            if (blocks_[i].name == name) return i;
        throw UnknownArrow("no coordinate block named '" + name + "'");
    }

    // Flat ordinal of entry (r,c) of a block; 0-based indices.
    std::size_t var(std::size_t block_id, std::size_t r, std::size_t c) const {
        const Block& b = blocks_.at(block_id);
        if (r >= b.rows || c >= b.cols)
            throw DimensionMismatch("variable index outside block '" + b.name + "'");
        return b.base + r * b.cols + c;
    }

    // Inverse of var(): (block, row, col) of a flat ordinal.
    struct Loc { std::size_t block, row, col; };
    Loc locate(std::size_t v) const {
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            const Block& b = blocks_[i];
            if (v >= b.base && v < b.base + b.rows * b.cols) {
                std::size_t off = v - b.base;
                return {i, off / b.cols, off % b.cols};
            }
        }
        throw DimensionMismatch("variable ordinal out of range");
    }

    std::string var_name(std::size_t v) const {
        Loc l = locate(v);
        const Block& b = blocks_[l.block];
        return b.name + "[" + std::to_string(l.row + 1) + "," + std::to_string(l.col + 1) + "]";
    }

private:
    std::vector<Block> blocks_;
    std::size_t n_ = 0;
};

} // namespace quips
