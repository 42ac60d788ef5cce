#include "dofair/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

#include "dofair/errors.hpp"
#include "dofair/jsonl.hpp"
#include "dofair/util.hpp"

namespace dofair {

namespace {

constexpr int kMetricCount = 4;

double metric_value(const MetricReport& r, int column) {
    switch (column) {
        case 0: return r.dda;
        case 1: return r.ida;
        case 2: return r.idf;
        default: return r.fdd;
    }
}

std::string pct(double fraction) { return format_fixed(fraction * 100.0, 2); }

std::string pct_delta(double fraction_delta) {
    std::string body = format_fixed(std::abs(fraction_delta) * 100.0, 2);
    return (fraction_delta < 0 ? "-" : "+") + body;
}

struct ModelGroup {
    std::string model;
    std::vector<int> row_indices;
    int baseline_index = -1;            // index into rows, -1 when absent
    bool best[kMetricCount] = {};       // meaningful only via best_index
    int best_index[kMetricCount] = {};  // row index holding the best value
};

/// Best DDA/IDA/IDF is the largest; best FDD is the one nearest zero.
std::vector<ModelGroup> group_rows(const std::vector<TableRow>& rows) {
    if (rows.empty()) raise(Errc::EmptyInput, "results table needs at least one report");
    std::vector<ModelGroup> groups;
    std::map<std::string, int> by_model;
    for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
        auto [it, fresh] = by_model.emplace(rows[i].model, static_cast<int>(groups.size()));
        if (fresh) groups.push_back({rows[i].model, {}, -1, {}, {}});
        groups[it->second].row_indices.push_back(i);
    }
    for (auto& group : groups) {
        for (int column = 0; column < kMetricCount; ++column) {
            int best = group.row_indices.front();
            for (int index : group.row_indices) {
                double candidate = metric_value(rows[index].report, column);
                double incumbent = metric_value(rows[best].report, column);
                bool better = column == 3 ? std::abs(candidate) < std::abs(incumbent)
                                          : candidate > incumbent;
                if (better) best = index;
            }
            group.best_index[column] = best;
        }
        for (int index : group.row_indices)
            if (rows[index].condition == "baseline") group.baseline_index = index;
    }
    return groups;
}

bool any_baseline(const std::vector<ModelGroup>& groups) {
    return std::any_of(groups.begin(), groups.end(),
                       [](const ModelGroup& g) { return g.baseline_index >= 0; });
}

const char* kMetricNames[kMetricCount] = {"DDA", "IDA", "IDF", "FDD"};

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else {
            field += c;
        }
    }
    fields.push_back(field);
    return fields;
}

}  // namespace

std::string render_results_markdown(const std::vector<TableRow>& rows) {
    auto groups = group_rows(rows);
    bool deltas = any_baseline(groups) && rows.size() > 1;
    std::ostringstream out;
    out << "| Model | Condition | n |";
    for (const char* name : kMetricNames) out << ' ' << name << " |";
    if (deltas)
        for (const char* name : kMetricNames) out << " Δ" << name << " |";
    out << '\n';
    int columns = 3 + kMetricCount + (deltas ? kMetricCount : 0);
    out << '|';
    for (int i = 0; i < columns; ++i) out << " --- |";
    out << '\n';
    for (const auto& group : groups) {
        for (int index : group.row_indices) {
            const TableRow& row = rows[index];
            out << "| " << row.model << " | " << row.condition << " | " << row.report.n_scored
                << " |";
            for (int column = 0; column < kMetricCount; ++column) {
                std::string cell = pct(metric_value(row.report, column));
                if (group.best_index[column] == index && group.row_indices.size() > 1)
                    cell = "**" + cell + "**";
                out << ' ' << cell << " |";
            }
            if (deltas) {
                for (int column = 0; column < kMetricCount; ++column) {
                    if (group.baseline_index < 0 || index == group.baseline_index) {
                        out << "  |";
                        continue;
                    }
                    double delta = metric_value(row.report, column) -
                                   metric_value(rows[group.baseline_index].report, column);
                    out << ' ' << pct_delta(delta) << " |";
                }
            }
            out << '\n';
        }
    }
    return out.str();
}

std::string render_results_csv(const std::vector<TableRow>& rows) {
    auto groups = group_rows(rows);
    bool deltas = any_baseline(groups) && rows.size() > 1;
    std::ostringstream out;
    out << "model,condition,n_scored,dda,ida,idf,fdd";
    if (deltas) out << ",dda_delta,ida_delta,idf_delta,fdd_delta";
    out << '\n';
    for (const auto& group : groups) {
        for (int index : group.row_indices) {
            const TableRow& row = rows[index];
            out << csv_escape(row.model) << ',' << csv_escape(row.condition) << ','
                << row.report.n_scored;
            for (int column = 0; column < kMetricCount; ++column)
                out << ',' << pct(metric_value(row.report, column));
            if (deltas) {
                for (int column = 0; column < kMetricCount; ++column) {
                    if (group.baseline_index < 0 || index == group.baseline_index) {
                        out << ',';
                        continue;
                    }
                    double delta = metric_value(row.report, column) -
                                   metric_value(rows[group.baseline_index].report, column);
                    out << ',' << pct_delta(delta);
                }
            }
            out << '\n';
        }
    }
    return out.str();
}

std::vector<TableRow> parse_results_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) raise(Errc::ParseError, "empty results csv");
    std::vector<TableRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() < 7)
            raise(Errc::ParseError, "results csv row has " + std::to_string(fields.size()) +
                                        " fields, expected at least 7");
        TableRow row;
        row.model = fields[0];
        row.condition = fields[1];
        row.report.condition = fields[1];
        row.report.n_scored = std::atoi(fields[2].c_str());
        row.report.dda = std::strtod(fields[3].c_str(), nullptr) / 100.0;
        row.report.ida = std::strtod(fields[4].c_str(), nullptr) / 100.0;
        row.report.idf = std::strtod(fields[5].c_str(), nullptr) / 100.0;
        row.report.fdd = std::strtod(fields[6].c_str(), nullptr) / 100.0;
        rows.push_back(std::move(row));
    }
    if (rows.empty()) raise(Errc::EmptyInput, "results csv has no data rows");
    return rows;
}

std::map<std::string, std::vector<RecordOutcome>> load_record_outcomes(
    const std::filesystem::path& run_dir) {
    std::map<std::string, Json> latest;
    for (const auto& line : read_jsonl_lenient(run_dir / "scores.jsonl")) {
        auto id = line.value.value("id", "");
        if (!id.empty()) latest[id] = line.value;
    }
    // (condition, record) -> involved sizes and ida values over image draws
    std::map<std::pair<std::string, std::string>, std::pair<std::vector<int>, std::vector<double>>>
        samples;
    for (const auto& [id, row] : latest) {
        int involved = 0;
        if (row.contains("counts")) {
            for (const auto& [label, count] : row["counts"].items()) {
                (void)label;
                if (count.get<int>() > 0) ++involved;
            }
        }
        auto& bucket = samples[{row.value("condition", ""), row.value("record_id", "")}];
        bucket.first.push_back(involved);
        bucket.second.push_back(row.value("ida", 0.0));
    }
    std::map<std::string, std::vector<RecordOutcome>> grouped;
    for (const auto& [key, bucket] : samples) {
        RecordOutcome outcome;
        outcome.record_id = key.second;
        for (int size : bucket.first) outcome.mean_involved_size += size;
        outcome.mean_involved_size /= bucket.first.size();
        for (double ida : bucket.second) outcome.mean_ida += ida;
        outcome.mean_ida /= bucket.second.size();
        grouped[key.first].push_back(std::move(outcome));
    }
    return grouped;
}

namespace {

struct MatchedDeltas {
    int n = 0;
    int up = 0;
    int down_given_up = 0;
};

MatchedDeltas match_outcomes(const std::vector<RecordOutcome>& baseline,
                             const std::vector<RecordOutcome>& intervened) {
    if (baseline.empty() || intervened.empty())
        raise(Errc::EmptyInput, "co-occurrence needs scores on both sides");
    std::map<std::string, const RecordOutcome*> by_id;
    for (const auto& outcome : baseline) {
        if (!by_id.emplace(outcome.record_id, &outcome).second)
            raise(Errc::KeyMismatch, "duplicate baseline record " + outcome.record_id);
    }
    if (intervened.size() != baseline.size())
        raise(Errc::KeyMismatch, "baseline has " + std::to_string(baseline.size()) +
                                     " records, intervention has " +
                                     std::to_string(intervened.size()));
    MatchedDeltas tally;
    std::set<std::string> seen;
    for (const auto& outcome : intervened) {
        auto it = by_id.find(outcome.record_id);
        if (it == by_id.end())
            raise(Errc::KeyMismatch, "record " + outcome.record_id + " missing from baseline");
        if (!seen.insert(outcome.record_id).second)
            raise(Errc::KeyMismatch, "duplicate intervention record " + outcome.record_id);
        ++tally.n;
        if (outcome.mean_involved_size > it->second->mean_involved_size) {
            ++tally.up;
            if (outcome.mean_ida < it->second->mean_ida) ++tally.down_given_up;
        }
    }
    return tally;
}

}  // namespace

CooccurrenceResult cooccurrence_analysis(const std::vector<RecordOutcome>& baseline,
                                         const std::vector<RecordOutcome>& intervened) {
    MatchedDeltas tally = match_outcomes(baseline, intervened);
    CooccurrenceResult result;
    result.n_records = tally.n;
    result.frac_diversity_up = static_cast<double>(tally.up) / tally.n;
    result.frac_factuality_down_given_up =
        tally.up == 0 ? 0.0 : static_cast<double>(tally.down_given_up) / tally.up;
    result.frac_joint = result.frac_diversity_up * result.frac_factuality_down_given_up;
    return result;
}

CooccurrenceResult cooccurrence_analysis(
    const std::vector<RecordOutcome>& baseline,
    const std::vector<std::vector<RecordOutcome>>& interventions) {
    if (interventions.empty()) raise(Errc::EmptyInput, "no interventions to analyze");
    double up_sum = 0;
    double down_sum = 0;
    int n_records = 0;
    for (const auto& intervened : interventions) {
        CooccurrenceResult one = cooccurrence_analysis(baseline, intervened);
        up_sum += one.frac_diversity_up;
        down_sum += one.frac_factuality_down_given_up;
        n_records = one.n_records;
    }
    CooccurrenceResult result;
    result.n_records = n_records;
    result.frac_diversity_up = up_sum / interventions.size();
    result.frac_factuality_down_given_up = down_sum / interventions.size();
    result.frac_joint = result.frac_diversity_up * result.frac_factuality_down_given_up;
    return result;
}

namespace {

const char* kBarColors[kMetricCount] = {"#4c78a8", "#72b7b2", "#54a24b", "#e45756"};

std::string svg_num(double v) { return format_fixed(v, 2); }

}  // namespace

std::string render_metric_bars_svg(const std::vector<TableRow>& rows) {
    if (rows.empty()) raise(Errc::EmptyInput, "bar chart needs at least one report");
    double lo = 0, hi = 1;
    for (const auto& row : rows) {
        for (int column = 0; column < kMetricCount; ++column) {
            lo = std::min(lo, metric_value(row.report, column));
            hi = std::max(hi, metric_value(row.report, column));
        }
    }
    const double bar_w = 22, gap = 6, group_gap = 34;
    const double margin_left = 50, margin_top = 40, plot_h = 220, label_h = 46;
    double group_w = kMetricCount * bar_w + (kMetricCount - 1) * gap;
    double width = margin_left + rows.size() * (group_w + group_gap) + 20;
    double height = margin_top + plot_h + label_h;
    auto y_of = [&](double v) { return margin_top + (hi - v) / (hi - lo) * plot_h; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << svg_num(width)
        << "\" height=\"" << svg_num(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int column = 0; column < kMetricCount; ++column) {
        double lx = margin_left + column * 70;
        out << "<rect x=\"" << svg_num(lx) << "\" y=\"10\" width=\"12\" height=\"12\" fill=\""
            << kBarColors[column] << "\"/>"
            << "<text x=\"" << svg_num(lx + 16) << "\" y=\"20\">" << kMetricNames[column]
            << "</text>\n";
    }
    double zero_y = y_of(0);
    out << "<line x1=\"" << svg_num(margin_left - 8) << "\" y1=\"" << svg_num(zero_y)
        << "\" x2=\"" << svg_num(width - 10) << "\" y2=\"" << svg_num(zero_y)
        << "\" stroke=\"#888\"/>\n";
    for (size_t i = 0; i < rows.size(); ++i) {
        double gx = margin_left + i * (group_w + group_gap);
        for (int column = 0; column < kMetricCount; ++column) {
            double v = metric_value(rows[i].report, column);
            double x = gx + column * (bar_w + gap);
            double top = std::min(y_of(v), zero_y);
            double h = std::abs(y_of(v) - zero_y);
            out << "<rect x=\"" << svg_num(x) << "\" y=\"" << svg_num(top) << "\" width=\""
                << svg_num(bar_w) << "\" height=\"" << svg_num(h) << "\" fill=\""
                << kBarColors[column] << "\"/>\n";
            out << "<text x=\"" << svg_num(x + bar_w / 2) << "\" y=\"" << svg_num(top - 3)
                << "\" text-anchor=\"middle\" font-size=\"9\">" << pct(v) << "</text>\n";
        }
        std::string label = rows[i].condition;
        if (rows.size() > 1 && rows[0].model != rows[i].model) label = rows[i].model + " " + label;
        out << "<text x=\"" << svg_num(gx + group_w / 2) << "\" y=\""
            << svg_num(margin_top + plot_h + 18) << "\" text-anchor=\"middle\">" << label
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string render_cooccurrence_ring_svg(const CooccurrenceResult& result) {
    const double cx = 150, cy = 150;
    const double outer_r = 110, inner_r = 78, ring_w = 26;
    auto ring = [&](double r, double frac, const char* color, const char* track) {
        double circumference = 2 * 3.14159265358979323846 * r;
        std::ostringstream out;
        out << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << r
            << "\" fill=\"none\" stroke=\"" << track << "\" stroke-width=\"" << ring_w
            << "\"/>\n";
        if (frac > 0) {
            out << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << r
                << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << ring_w
                << "\" stroke-dasharray=\"" << svg_num(frac * circumference) << ' '
                << svg_num(circumference) << "\" transform=\"rotate(-90 " << cx << ' ' << cy
                << ")\"/>\n";
        }
        return out.str();
    };
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"460\" height=\"300\" "
           "font-family=\"sans-serif\" font-size=\"12\">\n";
    out << ring(outer_r, result.frac_diversity_up, "#4c78a8", "#e3e3e3");
    out << ring(inner_r, result.frac_joint, "#e45756", "#f0f0f0");
    out << "<text x=\"" << cx << "\" y=\"" << cy - 6 << "\" text-anchor=\"middle\" "
        << "font-size=\"20\">" << pct(result.frac_joint) << "%</text>\n";
    out << "<text x=\"" << cx << "\" y=\"" << cy + 14
        << "\" text-anchor=\"middle\" fill=\"#666\">more diverse, less factual</text>\n";
    double lx = 300, ly = 90;
    out << "<rect x=\"" << lx << "\" y=\"" << ly << "\" width=\"12\" height=\"12\" "
        << "fill=\"#4c78a8\"/><text x=\"" << lx + 18 << "\" y=\"" << ly + 10 << "\">diversity up: "
        << pct(result.frac_diversity_up) << "%</text>\n";
    out << "<rect x=\"" << lx << "\" y=\"" << ly + 24 << "\" width=\"12\" height=\"12\" "
        << "fill=\"#e45756\"/><text x=\"" << lx + 18 << "\" y=\"" << ly + 34
        << "\">factuality down, given up: " << pct(result.frac_factuality_down_given_up)
        << "%</text>\n";
    out << "<text x=\"" << lx << "\" y=\"" << ly + 58 << "\" fill=\"#666\">n = "
        << result.n_records << "</text>\n";
    out << "</svg>\n";
    return out.str();
}

}  // namespace dofair
