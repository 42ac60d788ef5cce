#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dofair/errors.hpp"

namespace dofair {

enum class Dim : uint8_t { Race, Gender };

std::string_view dim_name(Dim dim);
std::optional<Dim> parse_dim(std::string_view name);

/// One demographic axis: the fixed, ordered label space everything is scored
/// against. Race has 7 labels, Gender has 2; the canonical strings are exactly
/// the ones the face classifier emits.
class Dimension {
public:
    static const Dimension& of(Dim kind);

    Dim kind() const { return kind_; }
    int size() const { return static_cast<int>(labels_.size()); }
    std::span<const std::string_view> labels() const { return labels_; }
    std::string_view label(int index) const { return labels_[static_cast<size_t>(index)]; }
    std::optional<int> index_of(std::string_view label) const;

private:
    Dimension(Dim kind, std::vector<std::string_view> labels)
        : kind_(kind), labels_(std::move(labels)) {}

    Dim kind_;
    std::vector<std::string_view> labels_;
};

/// A subset of one dimension's label space, stored as a bitmask over the
/// canonical label order. Value type; all set algebra the metrics need.
class LabelSet {
public:
    explicit LabelSet(Dim dim) : dim_(dim), bits_(0) {}
    LabelSet(Dim dim, std::initializer_list<std::string_view> labels);

    static LabelSet from_strings(Dim dim, std::span<const std::string> labels);
    static LabelSet from_bits(Dim dim, uint8_t bits);
    static LabelSet full(Dim dim);

    Dim dim() const { return dim_; }
    uint8_t bits() const { return bits_; }
    int size() const { return __builtin_popcount(bits_); }
    bool empty() const { return bits_ == 0; }

    bool contains(int index) const { return (bits_ >> index) & 1u; }
    bool contains(std::string_view label) const;
    void insert(int index) { bits_ = static_cast<uint8_t>(bits_ | (1u << index)); }
    void insert(std::string_view label);

    bool subset_of(const LabelSet& other) const {
        return dim_ == other.dim_ && (bits_ & ~other.bits_) == 0;
    }

    LabelSet intersect(const LabelSet& other) const;
    LabelSet unite(const LabelSet& other) const;
    LabelSet minus(const LabelSet& other) const;
    /// Complement within the dimension's label space.
    LabelSet complement() const;

    /// Label strings in canonical dimension order.
    std::vector<std::string> to_strings() const;

    bool operator==(const LabelSet& other) const = default;

private:
    Dim dim_;
    uint8_t bits_;
};

}  // namespace dofair
