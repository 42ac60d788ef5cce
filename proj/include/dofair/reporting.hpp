#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dofair/metrics.hpp"

namespace dofair {

struct TableRow {
    std::string model;
    std::string condition;
    MetricReport report;
};

/// Results table over (model, condition) rows. Metrics render as percentages
/// with 2 decimals. Within each model group the best value per metric column
/// is flagged (best FDD is the one closest to zero), and when the group has a
/// "baseline" row every other row gets per-metric delta columns against it.
std::string render_results_markdown(const std::vector<TableRow>& rows);
std::string render_results_csv(const std::vector<TableRow>& rows);

/// Inverse of render_results_csv, for round-trip checks and downstream
/// tooling: percentages come back as fractions.
std::vector<TableRow> parse_results_csv(const std::string& csv);

/// Per-record view of one condition's scores: image draws are averaged per
/// record before conditions are compared.
struct RecordOutcome {
    std::string record_id;
    double mean_involved_size = 0;  // mean |img.ID| over the record's images
    double mean_ida = 0;
};

struct CooccurrenceResult {
    double frac_diversity_up = 0;
    double frac_factuality_down_given_up = 0;
    double frac_joint = 0;  // always the product of the two above
    int n_records = 0;
};

/// Reads a run's scores.jsonl into per-record outcomes grouped by condition
/// code. A label counts as depicted when its face count is positive; repeated
/// ids keep the last row, matching how the run journal is replayed.
std::map<std::string, std::vector<RecordOutcome>> load_record_outcomes(
    const std::filesystem::path& run_dir);

/// Fraction of records whose depicted involved-set size grew under the
/// intervention, the fraction of those whose IDA strictly dropped, and their
/// product. Record ids must match exactly across the two lists.
CooccurrenceResult cooccurrence_analysis(const std::vector<RecordOutcome>& baseline,
                                         const std::vector<RecordOutcome>& intervened);

/// Averages the two conditional fractions over several interventions against
/// one baseline; the joint fraction is the product of the averages.
CooccurrenceResult cooccurrence_analysis(
    const std::vector<RecordOutcome>& baseline,
    const std::vector<std::vector<RecordOutcome>>& interventions);

/// Grouped bar chart of the four metrics per condition, self-contained SVG.
std::string render_metric_bars_svg(const std::vector<TableRow>& rows);

/// Figure-5-style nested donut: outer ring splits records by diversity
/// increase, inner ring carves out the joint diversity-up/factuality-down
/// share.
std::string render_cooccurrence_ring_svg(const CooccurrenceResult& result);

}  // namespace dofair
