#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "dofair/reporting.hpp"
#include "helpers.hpp"

using namespace dofair;
using testutil::TempDir;

namespace {

TableRow make_row(std::string model, std::string condition, double dda, double ida, double idf,
                  double fdd, int n = 10) {
    TableRow row;
    row.model = std::move(model);
    row.condition = std::move(condition);
    row.report.condition = row.condition;
    row.report.n_scored = n;
    row.report.dda = dda;
    row.report.ida = ida;
    row.report.idf = idf;
    row.report.fdd = fdd;
    return row;
}

RecordOutcome outcome(std::string id, double involved_size, double ida) {
    return {std::move(id), involved_size, ida};
}

Errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return Errc::EmptyInput;
}

}  // namespace

TEST_CASE("metric cells render as two-decimal percentages") {
    auto md = render_results_markdown(
        {make_row("sim-t2i", "baseline", 0.7823, 0.645, 0.7143, -0.0514)});
    CHECK(md.find("| Model | Condition | n | DDA | IDA | IDF | FDD |") == 0);
    CHECK(md.find("| sim-t2i | baseline | 10 | 78.23 | 64.50 | 71.43 | -5.14 |") !=
          std::string::npos);
    CHECK(md.find("Δ") == std::string::npos);   // single report, nothing to compare
    CHECK(md.find("**") == std::string::npos);  // no bolding in a one-row group
}

TEST_CASE("a baseline row switches on deltas and bold best cells") {
    std::vector<TableRow> rows = {make_row("sim-t2i", "baseline", 0.80, 0.90, 0.85, 0.02),
                                  make_row("sim-t2i", "bansal", 0.70, 0.80, 0.75, 0.10)};
    auto md = render_results_markdown(rows);
    CHECK(md.find("ΔDDA") != std::string::npos);
    CHECK(md.find("ΔFDD") != std::string::npos);
    CHECK(md.find("**80.00**") != std::string::npos);
    CHECK(md.find("**90.00**") != std::string::npos);
    CHECK(md.find("**85.00**") != std::string::npos);
    CHECK(md.find("**2.00**") != std::string::npos);  // FDD closest to zero wins
    CHECK(md.find("| 70.00 |") != std::string::npos);
    CHECK(md.find("| 10.00 |") != std::string::npos);
    CHECK(md.find(" -10.00 |") != std::string::npos);
    CHECK(md.find(" +8.00 |") != std::string::npos);
    CHECK(md.find("|  |") != std::string::npos);  // the baseline row keeps empty delta cells

    auto csv = render_results_csv(rows);
    CHECK(csv.find("model,condition,n_scored,dda,ida,idf,fdd,"
                   "dda_delta,ida_delta,idf_delta,fdd_delta") == 0);
    CHECK(csv.find("sim-t2i,baseline,10,80.00,90.00,85.00,2.00,,,,") != std::string::npos);
    CHECK(csv.find("sim-t2i,bansal,10,70.00,80.00,75.00,10.00,-10.00,-10.00,-10.00,+8.00") !=
          std::string::npos);
}

TEST_CASE("groups from different models are ranked independently") {
    std::vector<TableRow> rows = {make_row("model-a", "baseline", 0.80, 0.90, 0.85, 0.02),
                                  make_row("model-b", "bansal", 0.99, 0.99, 0.99, 0.00)};
    auto md = render_results_markdown(rows);
    CHECK(md.find("**") == std::string::npos);  // each group has one row
    CHECK(md.find("ΔDDA") != std::string::npos);
    // model-b has no baseline of its own, so its delta cells stay empty
    auto b_row = md.find("| model-b |");
    REQUIRE(b_row != std::string::npos);
    CHECK(md.find("+19.00") == std::string::npos);
}

TEST_CASE("csv output parses back to the same numbers") {
    std::vector<TableRow> rows = {make_row("sim-t2i", "baseline", 0.80, 0.90, 0.85, 0.02),
                                  make_row("sim-t2i", "bansal", 0.7023, 0.8091, 0.7544, -0.0866),
                                  make_row("acme,t2i", "baseline", 0.55, 0.65, 0.60, 0.01, 7)};
    auto parsed = parse_results_csv(render_results_csv(rows));
    REQUIRE(parsed.size() == rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(parsed[i].model == rows[i].model);
        CHECK(parsed[i].condition == rows[i].condition);
        CHECK(parsed[i].report.n_scored == rows[i].report.n_scored);
        CHECK(parsed[i].report.dda == doctest::Approx(rows[i].report.dda).epsilon(1e-4));
        CHECK(parsed[i].report.ida == doctest::Approx(rows[i].report.ida).epsilon(1e-4));
        CHECK(parsed[i].report.idf == doctest::Approx(rows[i].report.idf).epsilon(1e-4));
        CHECK(parsed[i].report.fdd == doctest::Approx(rows[i].report.fdd).epsilon(1e-4));
    }
}

TEST_CASE("unusable csv input is a typed error") {
    CHECK(code_of([] { parse_results_csv(""); }) == Errc::ParseError);
    CHECK(code_of([] { parse_results_csv("model,condition,n_scored,dda,ida,idf,fdd\n"); }) ==
          Errc::EmptyInput);
    CHECK(code_of([] {
              parse_results_csv("model,condition,n_scored,dda,ida,idf,fdd\na,b,1,50.00\n");
          }) == Errc::ParseError);
}

TEST_CASE("empty tables are rejected everywhere") {
    CHECK(code_of([] { render_results_markdown({}); }) == Errc::EmptyInput);
    CHECK(code_of([] { render_results_csv({}); }) == Errc::EmptyInput);
    CHECK(code_of([] { render_metric_bars_svg({}); }) == Errc::EmptyInput);
}

TEST_CASE("co-occurrence fractions match a hand tally") {
    std::vector<RecordOutcome> baseline = {outcome("r1", 1, 0.9), outcome("r2", 1, 0.9),
                                           outcome("r3", 2, 0.8), outcome("r4", 2, 0.8)};
    // deltas: involved +1, +1, 0, -1; ida -0.1, +0.1, 0, 0; order shuffled on purpose
    std::vector<RecordOutcome> intervened = {outcome("r4", 1, 0.8), outcome("r1", 2, 0.8),
                                             outcome("r3", 2, 0.8), outcome("r2", 2, 1.0)};
    auto result = cooccurrence_analysis(baseline, intervened);
    CHECK(result.n_records == 4);
    CHECK(result.frac_diversity_up == 0.5);
    CHECK(result.frac_factuality_down_given_up == 0.5);
    CHECK(result.frac_joint == 0.25);
}

TEST_CASE("identical runs flag nothing") {
    std::vector<RecordOutcome> baseline = {outcome("r1", 1, 0.9), outcome("r2", 2, 0.8)};
    auto result = cooccurrence_analysis(baseline, baseline);
    CHECK(result.frac_diversity_up == 0.0);
    CHECK(result.frac_factuality_down_given_up == 0.0);
    CHECK(result.frac_joint == 0.0);
    CHECK(result.n_records == 2);
}

TEST_CASE("mismatched record sets are typed errors") {
    std::vector<RecordOutcome> baseline = {outcome("r1", 1, 0.9), outcome("r2", 1, 0.9),
                                           outcome("r3", 2, 0.8), outcome("r4", 2, 0.8)};
    std::vector<RecordOutcome> intervened = baseline;

    std::vector<RecordOutcome> none;
    CHECK(code_of([&] { cooccurrence_analysis(none, intervened); }) == Errc::EmptyInput);
    CHECK(code_of([&] { cooccurrence_analysis(baseline, none); }) == Errc::EmptyInput);

    auto short_side = intervened;
    short_side.pop_back();
    CHECK(code_of([&] { cooccurrence_analysis(baseline, short_side); }) == Errc::KeyMismatch);

    auto renamed = intervened;
    renamed[3].record_id = "r9";
    CHECK(code_of([&] { cooccurrence_analysis(baseline, renamed); }) == Errc::KeyMismatch);

    auto duplicated = intervened;
    duplicated[3].record_id = "r3";
    CHECK(code_of([&] { cooccurrence_analysis(baseline, duplicated); }) == Errc::KeyMismatch);

    auto bad_base = baseline;
    bad_base[1].record_id = "r1";
    CHECK(code_of([&] { cooccurrence_analysis(bad_base, intervened); }) == Errc::KeyMismatch);
}

TEST_CASE("several interventions average before the joint product") {
    std::vector<RecordOutcome> baseline = {outcome("r1", 1, 0.9), outcome("r2", 1, 0.9),
                                           outcome("r3", 1, 0.9), outcome("r4", 2, 0.8)};
    // A: r1, r2 up; only r1 loses ida -> up 0.5, down|up 0.5
    std::vector<RecordOutcome> a = {outcome("r1", 2, 0.8), outcome("r2", 2, 0.9),
                                    outcome("r3", 1, 0.9), outcome("r4", 2, 0.8)};
    // B: r1, r2, r3 up; r1 and r2 lose ida -> up 0.75, down|up 2/3
    std::vector<RecordOutcome> b = {outcome("r1", 2, 0.7), outcome("r2", 2, 0.8),
                                    outcome("r3", 2, 0.9), outcome("r4", 2, 0.8)};

    auto result = cooccurrence_analysis(baseline, std::vector{a, b});
    CHECK(result.n_records == 4);
    CHECK(result.frac_diversity_up == doctest::Approx(0.625).epsilon(1e-12));
    CHECK(result.frac_factuality_down_given_up ==
          doctest::Approx((0.5 + 2.0 / 3.0) / 2).epsilon(1e-12));
    // the joint share is the product of the averages, exactly, by construction
    CHECK(result.frac_joint == result.frac_diversity_up * result.frac_factuality_down_given_up);

    CHECK(code_of([&] { cooccurrence_analysis(baseline, std::vector<std::vector<RecordOutcome>>{}); }) ==
          Errc::EmptyInput);
}

TEST_CASE("record outcomes load from the scores journal") {
    TempDir dir("outcomes");
    {
        std::ofstream out(dir.path() / "scores.jsonl");
        out << R"({"id":"r1|baseline|0","record_id":"r1","condition":"baseline","counts":{"White":2,"Black":1},"ida":0.8})"
            << "\n";
        out << R"({"id":"r1|baseline|1","record_id":"r1","condition":"baseline","counts":{"White":1,"Black":0},"ida":1.0})"
            << "\n";
        out << R"({"id":"r2|baseline|0","record_id":"r2","condition":"baseline","counts":{"White":3},"ida":0.7})"
            << "\n";
        out << "this line is not json\n";
        // rewritten row for the same id: the later one wins
        out << R"({"id":"r2|baseline|0","record_id":"r2","condition":"baseline","counts":{"White":1,"Black":1,"Indian":1},"ida":0.5})"
            << "\n";
        out << R"({"id":"r1|bansal|0","record_id":"r1","condition":"bansal","counts":{"White":1,"Black":1},"ida":0.6})"
            << "\n";
    }

    auto grouped = load_record_outcomes(dir.path());
    REQUIRE(grouped.count("baseline") == 1);
    REQUIRE(grouped.count("bansal") == 1);
    REQUIRE(grouped["baseline"].size() == 2);
    REQUIRE(grouped["bansal"].size() == 1);

    const RecordOutcome* r1 = nullptr;
    const RecordOutcome* r2 = nullptr;
    for (const auto& o : grouped["baseline"]) {
        if (o.record_id == "r1") r1 = &o;
        if (o.record_id == "r2") r2 = &o;
    }
    REQUIRE(r1 != nullptr);
    REQUIRE(r2 != nullptr);
    CHECK(r1->mean_involved_size == doctest::Approx(1.5));  // draws saw 2 labels, then 1
    CHECK(r1->mean_ida == doctest::Approx(0.9));
    CHECK(r2->mean_involved_size == doctest::Approx(3.0));
    CHECK(r2->mean_ida == doctest::Approx(0.5));
    CHECK(grouped["bansal"][0].mean_involved_size == doctest::Approx(2.0));
}

TEST_CASE("the metric bar chart is a self-contained svg") {
    std::vector<TableRow> rows = {make_row("sim-t2i", "baseline", 0.80, 0.90, 0.85, 0.02),
                                  make_row("sim-t2i", "bansal", 0.70, 0.80, 0.75, -0.10)};
    auto svg = render_metric_bars_svg(rows);
    CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
    CHECK(svg.find("fill=\"#4c78a8\"") != std::string::npos);
    CHECK(svg.find("80.00") != std::string::npos);
    CHECK(svg.find("-10.00") != std::string::npos);  // negative FDD bar keeps its sign
    CHECK(svg.find("<line") != std::string::npos);   // zero line
    CHECK(svg.find(">baseline<") != std::string::npos);
    CHECK(svg.find(">bansal<") != std::string::npos);
    size_t rects = 0;
    for (size_t at = svg.find("<rect"); at != std::string::npos; at = svg.find("<rect", at + 1))
        ++rects;
    CHECK(rects == 4 + 8);  // legend swatches plus two groups of four bars
}

TEST_CASE("the co-occurrence ring encodes both fractions") {
    CooccurrenceResult result;
    result.frac_diversity_up = 0.386;
    result.frac_factuality_down_given_up = 0.6813;
    result.frac_joint = result.frac_diversity_up * result.frac_factuality_down_given_up;
    result.n_records = 304;

    auto svg = render_cooccurrence_ring_svg(result);
    CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
    CHECK(svg.find("stroke-dasharray=") != std::string::npos);
    CHECK(svg.find(">26.30%</text>") != std::string::npos);
    CHECK(svg.find("diversity up: 38.60%") != std::string::npos);
    CHECK(svg.find("factuality down, given up: 68.13%") != std::string::npos);
    CHECK(svg.find("n = 304") != std::string::npos);

    auto empty_svg = render_cooccurrence_ring_svg(CooccurrenceResult{});
    CHECK(empty_svg.find("stroke-dasharray=") == std::string::npos);  // tracks only
    CHECK(empty_svg.find(">0.00%</text>") != std::string::npos);
}
