#include "dofair/labels.hpp"

namespace dofair {

std::string_view dim_name(Dim dim) {
    return dim == Dim::Race ? "race" : "gender";
}

std::optional<Dim> parse_dim(std::string_view name) {
    if (name == "race") return Dim::Race;
    if (name == "gender") return Dim::Gender;
    return std::nullopt;
}

const Dimension& Dimension::of(Dim kind) {
    static const Dimension race(Dim::Race, {"White", "Black", "Indian", "East Asian",
                                            "Southeast Asian", "Middle Eastern", "Latino"});
    static const Dimension gender(Dim::Gender, {"Male", "Female"});
    return kind == Dim::Race ? race : gender;
}

std::optional<int> Dimension::index_of(std::string_view label) const {
    for (size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == label) return static_cast<int>(i);
    }
    return std::nullopt;
}

LabelSet::LabelSet(Dim dim, std::initializer_list<std::string_view> labels) : LabelSet(dim) {
    for (auto l : labels) insert(l);
}

LabelSet LabelSet::from_strings(Dim dim, std::span<const std::string> labels) {
    LabelSet out(dim);
    for (const auto& l : labels) out.insert(l);
    return out;
}

LabelSet LabelSet::from_bits(Dim dim, uint8_t bits) {
    LabelSet out(dim);
    out.bits_ = static_cast<uint8_t>(bits & (Dim::Race == dim ? 0x7fu : 0x03u));
    return out;
}

LabelSet LabelSet::full(Dim dim) {
    LabelSet out(dim);
    out.bits_ = static_cast<uint8_t>((1u << Dimension::of(dim).size()) - 1u);
    return out;
}

bool LabelSet::contains(std::string_view label) const {
    auto idx = Dimension::of(dim_).index_of(label);
    return idx && contains(*idx);
}

void LabelSet::insert(std::string_view label) {
    auto idx = Dimension::of(dim_).index_of(label);
    if (!idx) raise(Errc::InvalidLabel, "\"" + std::string(label) + "\" is not a " +
                                            std::string(dim_name(dim_)) + " label");
    insert(*idx);
}

LabelSet LabelSet::intersect(const LabelSet& other) const {
    LabelSet out(dim_);
    out.bits_ = static_cast<uint8_t>(bits_ & other.bits_);
    return out;
}

LabelSet LabelSet::unite(const LabelSet& other) const {
    LabelSet out(dim_);
    out.bits_ = static_cast<uint8_t>(bits_ | other.bits_);
    return out;
}

LabelSet LabelSet::minus(const LabelSet& other) const {
    LabelSet out(dim_);
    out.bits_ = static_cast<uint8_t>(bits_ & ~other.bits_);
    return out;
}

LabelSet LabelSet::complement() const {
    return full(dim_).minus(*this);
}

std::vector<std::string> LabelSet::to_strings() const {
    const auto& dimension = Dimension::of(dim_);
    std::vector<std::string> out;
    for (int i = 0; i < dimension.size(); ++i) {
        if (contains(i)) out.emplace_back(dimension.label(i));
    }
    return out;
}

}  // namespace dofair
