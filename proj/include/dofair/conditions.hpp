#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dofair/labels.hpp"
#include "dofair/record.hpp"

namespace dofair {

enum class ConditionBase { Baseline, DivBansal, DivBianchi };
enum class Augmentation { None, CoT, FaiVk, FaiRk };

/// One cell of the experiment matrix: a base generation prompt plus an
/// optional augmentation. Augmentations pair with a diversity base; an
/// explicit override permits augmenting Baseline for ablations.
struct Condition {
    ConditionBase base = ConditionBase::Baseline;
    Augmentation augmentation = Augmentation::None;

    bool requires_knowledge() const {
        return augmentation == Augmentation::FaiVk || augmentation == Augmentation::FaiRk;
    }
    bool is_diversity_intervention() const { return base != ConditionBase::Baseline; }

    bool operator==(const Condition&) const = default;
};

/// Codes like "baseline", "bansal", "bianchi+cot", "bansal+fai_rk".
std::string condition_code(const Condition& condition);
Condition parse_condition(const std::string& code);

/// Throws UnknownCondition when an augmentation is attached to Baseline and
/// the ablation override is off.
void validate_condition(const Condition& condition, bool allow_baseline_augmentation = false);

enum class KnowledgeKind { Verbalized, Retrieved };

struct KnowledgeProvenance {
    KnowledgeKind kind = KnowledgeKind::Verbalized;
    std::vector<std::string> doc_ids;  // empty for verbalized knowledge
};

struct GenerationPrompt {
    std::string text;
    Condition condition;
    std::string record_id;
    std::optional<KnowledgeProvenance> provenance;
};

struct RenderOptions {
    bool allow_baseline_augmentation = false;
};

/// Fills the paper-fixed templates for this record and condition. FAI
/// conditions require `knowledge` (the instruction text produced by the
/// knowledge ops) and record where it came from.
GenerationPrompt render_prompt(const DofairRecord& record, const Condition& condition,
                               const std::optional<std::string>& knowledge = std::nullopt,
                               const std::optional<KnowledgeProvenance>& provenance = std::nullopt,
                               const RenderOptions& options = {});

/// Raw template texts, slot form. These also live under templates/ as the
/// stable external interface; a test keeps both in sync.
namespace templates {
std::string generation_base(ConditionBase base, Dim dim);
std::string cot_suffix();
std::string fai_vk_prompt(Dim dim);
std::string fai_rk_prompt(Dim dim);
/// Maps a template to its stable file name under templates/.
std::string template_file_name(const std::string& kind, Dim dim);
}  // namespace templates

}  // namespace dofair
