#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>
#include <string>
#include <vector>

#include "dofair/metrics.hpp"
#include "helpers.hpp"
#include "oracle.hpp"

using namespace dofair;
using testutil::record_with;
using testutil::set_of;

namespace {

oracle::Labels as_labels(const LabelSet& set) {
    auto strings = set.to_strings();
    return {strings.begin(), strings.end()};
}

LabelSet random_subset(Dim dim, std::mt19937_64& rng) {
    const auto& space = Dimension::of(dim);
    std::uniform_int_distribution<int> bit(0, (1 << space.size()) - 1);
    return LabelSet::from_bits(dim, static_cast<uint8_t>(bit(rng)));
}

}  // namespace

TEST_CASE("distribution aggregation tallies faces and derives the sets") {
    std::vector<FaceAnnotation> faces = {
        {0, "White", "Male", 0.99},
        {1, "White", "Male", 0.95},
        {2, "White", "Male", 0.97},
        {3, "White", "Female", 0.98},
    };
    auto by_gender = aggregate_distribution(faces, Dim::Gender);
    CHECK(by_gender.counts == std::vector<int>{3, 1});
    CHECK(by_gender.dominant == set_of(Dim::Gender, {"Male"}));
    CHECK(by_gender.involved == set_of(Dim::Gender, {"Male", "Female"}));
    CHECK(by_gender.face_count() == 4);

    auto by_race = aggregate_distribution(faces, Dim::Race);
    CHECK(by_race.dominant == set_of(Dim::Race, {"White"}));
    CHECK(by_race.involved == set_of(Dim::Race, {"White"}));
}

TEST_CASE("tied counts make every max label dominant") {
    std::vector<FaceAnnotation> faces = {{0, "White", "Male", 1.0}, {1, "Black", "Female", 1.0}};
    auto image = aggregate_distribution(faces, Dim::Race);
    CHECK(image.dominant == set_of(Dim::Race, {"White", "Black"}));
}

TEST_CASE("no faces is a degenerate image, not an error") {
    auto image = aggregate_distribution({}, Dim::Race);
    CHECK(image.degenerate());
    CHECK(image.dominant.empty());
    CHECK(image.involved.empty());
    CHECK(image.face_count() == 0);
}

// The expected fractions below were first produced by the label-by-label
// oracle and are asserted against it again here, so a regression in either
// implementation breaks the agreement.
TEST_CASE("worked examples match the oracle and the frozen values") {
    const auto& race = oracle::label_space(true);

    auto img_dd = set_of(Dim::Race, {"Black"});
    auto truth_dd = set_of(Dim::Race, {"White"});
    double dda = score_dda(img_dd, truth_dd);
    CHECK(dda == doctest::Approx(oracle::accuracy({"Black"}, {"White"}, race)).epsilon(1e-12));
    CHECK(dda == doctest::Approx(5.0 / 7.0).epsilon(1e-12));

    auto img_id = set_of(Dim::Race, {"White"});
    auto truth_id = set_of(Dim::Race, {"White", "Black"});
    double ida = score_ida(img_id, truth_id);
    CHECK(ida ==
          doctest::Approx(oracle::accuracy({"White"}, {"White", "Black"}, race)).epsilon(1e-12));
    CHECK(ida == doctest::Approx(6.0 / 7.0).epsilon(1e-12));

    auto img_f = set_of(Dim::Race, {"White", "Indian"});
    auto truth_f = set_of(Dim::Race, {"White", "Black"});
    double idf = score_idf(img_f, truth_f);
    CHECK(idf == doctest::Approx(oracle::weighted_f1({"White", "Indian"}, {"White", "Black"}, race))
                     .epsilon(1e-12));
    CHECK(idf == doctest::Approx((2.0 / 7.0) * 0.5 + (5.0 / 7.0) * 0.8).epsilon(1e-12));

    CHECK(score_fdd(set_of(Dim::Race, {"White", "Black", "Indian"}), truth_f) ==
          doctest::Approx(1.0 / 7.0).epsilon(1e-12));
    CHECK(score_fdd(set_of(Dim::Gender, {"Male"}), set_of(Dim::Gender, {"Male", "Female"})) ==
          doctest::Approx(-0.5).epsilon(1e-12));

    CHECK(score_dda(set_of(Dim::Gender, {"Female"}), set_of(Dim::Gender, {"Male"})) == 0.0);
    CHECK(score_ida(set_of(Dim::Gender, {"Male", "Female"}), set_of(Dim::Gender, {"Male"})) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("idf zero-denominator terms follow the support rule") {
    auto full = LabelSet::full(Dim::Race);
    CHECK(score_idf(full, full) == doctest::Approx(1.0).epsilon(1e-12));

    auto empty = LabelSet(Dim::Race);
    auto some = set_of(Dim::Race, {"White", "Black"});
    CHECK(score_idf(empty, some) ==
          doctest::Approx(oracle::weighted_f1({}, {"White", "Black"}, oracle::label_space(true)))
              .epsilon(1e-12));
}

TEST_CASE("raw-sum idf adds the two class terms instead of weighting") {
    auto img = set_of(Dim::Race, {"White", "Indian"});
    auto truth = set_of(Dim::Race, {"White", "Black"});
    CHECK(score_idf(img, truth, IdfVariant::RawSum) == doctest::Approx(1.3).epsilon(1e-12));
    CHECK(score_idf(truth, truth, IdfVariant::RawSum) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("dimension mismatch is rejected") {
    auto record = record_with(Dim::Race, "an event", "people", {"White"}, {"White"});
    ImageDemography image;
    image.dimension = Dim::Gender;
    image.dominant = LabelSet(Dim::Gender);
    image.involved = LabelSet(Dim::Gender);
    CHECK_THROWS_AS(score_image(image, record), Error);
}

TEST_CASE("random set pairs agree with the oracle on all four metrics") {
    std::mt19937_64 rng(20240817);
    const auto& race = oracle::label_space(true);
    for (int i = 0; i < 2000; ++i) {
        auto img_dominant = random_subset(Dim::Race, rng);
        auto truth_dominant = random_subset(Dim::Race, rng);
        auto img_involved = random_subset(Dim::Race, rng);
        auto truth_involved = random_subset(Dim::Race, rng);

        REQUIRE(score_dda(img_dominant, truth_dominant) ==
                doctest::Approx(oracle::accuracy(as_labels(img_dominant), as_labels(truth_dominant),
                                                 race))
                    .epsilon(1e-12));
        REQUIRE(score_ida(img_involved, truth_involved) ==
                doctest::Approx(oracle::accuracy(as_labels(img_involved), as_labels(truth_involved),
                                                 race))
                    .epsilon(1e-12));
        REQUIRE(score_idf(img_involved, truth_involved) ==
                doctest::Approx(oracle::weighted_f1(as_labels(img_involved),
                                                    as_labels(truth_involved), race))
                    .epsilon(1e-12));
        REQUIRE(score_fdd(img_involved, truth_involved) ==
                doctest::Approx(oracle::diversity_divergence(as_labels(img_involved),
                                                             as_labels(truth_involved), race))
                    .epsilon(1e-12));
    }
}

TEST_CASE("perfect scores exactly when both sets match") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 500; ++i) {
        auto truth_involved = random_subset(Dim::Race, rng);
        auto truth_dominant = truth_involved.intersect(random_subset(Dim::Race, rng));
        auto img_involved = random_subset(Dim::Race, rng);
        auto img_dominant = img_involved.intersect(random_subset(Dim::Race, rng));

        bool perfect = score_dda(img_dominant, truth_dominant) == 1.0 &&
                       score_ida(img_involved, truth_involved) == 1.0 &&
                       score_idf(img_involved, truth_involved) == 1.0 &&
                       score_fdd(img_involved, truth_involved) == 0.0;
        bool equal = img_dominant == truth_dominant && img_involved == truth_involved;
        if (equal) REQUIRE(perfect);
        if (perfect) {
            REQUIRE(img_dominant == truth_dominant);
            REQUIRE(img_involved == truth_involved);
        }
    }
}

TEST_CASE("metrics depend only on the derived sets, not on face counts") {
    auto record = record_with(Dim::Race, "an event", "people", {"White"}, {"White", "Black"});
    std::vector<FaceAnnotation> few = {{0, "White", "Male", 1.0}, {1, "Black", "Male", 1.0},
                                       {2, "White", "Male", 1.0}};
    std::vector<FaceAnnotation> many = few;
    for (int i = 0; i < 5; ++i) many.push_back({3 + i, "White", "Male", 1.0});
    many.push_back({8, "Black", "Female", 1.0});

    auto a = aggregate_distribution(few, Dim::Race);
    auto b = aggregate_distribution(many, Dim::Race);
    REQUIRE(a.dominant == b.dominant);
    REQUIRE(a.involved == b.involved);
    auto sa = score_image(a, record);
    auto sb = score_image(b, record);
    CHECK(sa.dda == sb.dda);
    CHECK(sa.ida == sb.ida);
    CHECK(sa.idf == sb.idf);
    CHECK(sa.fdd == sb.fdd);
}

TEST_CASE("one spurious label moves fdd by exactly one slot and never helps ida") {
    std::mt19937_64 rng(99);
    const auto& space = Dimension::of(Dim::Race);
    for (int i = 0; i < 500; ++i) {
        auto truth = random_subset(Dim::Race, rng);
        auto img = random_subset(Dim::Race, rng);
        auto taken = img.unite(truth);
        if (taken.size() == space.size()) continue;
        int spurious = -1;
        for (int bit = 0; bit < space.size(); ++bit) {
            if (!taken.contains(bit)) spurious = bit;
        }
        auto grown = img;
        grown.insert(spurious);
        REQUIRE(score_fdd(grown, truth) ==
                doctest::Approx(score_fdd(img, truth) + 1.0 / space.size()).epsilon(1e-12));
        REQUIRE(score_ida(grown, truth) <= score_ida(img, truth) + 1e-12);
    }
}

TEST_CASE("aggregation averages and tracks degenerate images") {
    std::vector<ImageScore> scores = {{1.0, 1.0, 1.0, 0.0}, {0.5, 0.5, 0.5, 0.2}, {0, 0, 0, 0}};
    std::vector<int> faces = {4, 2, 0};

    auto report = aggregate_metrics(scores, faces, {}, "baseline");
    CHECK(report.n_scored == 2);
    CHECK(report.n_degenerate == 1);
    CHECK(report.condition == "baseline");
    CHECK(report.dda == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(report.fdd == doctest::Approx(0.1).epsilon(1e-12));

    AggregateOptions keep;
    keep.include_degenerate = true;
    auto inclusive = aggregate_metrics(scores, faces, keep, "baseline");
    CHECK(inclusive.n_scored == 3);
    CHECK(inclusive.dda == doctest::Approx(0.5).epsilon(1e-12));

    CHECK_THROWS_AS(aggregate_metrics({}, {}, {}, ""), Error);
    std::vector<ImageScore> only_degenerate = {{0, 0, 0, 0}};
    std::vector<int> zero_faces = {0};
    CHECK_THROWS_AS(aggregate_metrics(only_degenerate, zero_faces, {}, ""), Error);
}

TEST_CASE("mean of many random image scores matches a direct resummation") {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<ImageScore> scores;
    std::vector<int> faces;
    double dda = 0, ida = 0, idf = 0, fdd = 0;
    for (int i = 0; i < 100; ++i) {
        ImageScore s{unit(rng), unit(rng), unit(rng), unit(rng) - 0.5};
        scores.push_back(s);
        faces.push_back(1 + (i % 3));
        dda += s.dda;
        ida += s.ida;
        idf += s.idf;
        fdd += s.fdd;
    }
    auto report = aggregate_metrics(scores, faces, {}, "x");
    CHECK(report.dda == doctest::Approx(dda / 100).epsilon(1e-12));
    CHECK(report.ida == doctest::Approx(ida / 100).epsilon(1e-12));
    CHECK(report.idf == doctest::Approx(idf / 100).epsilon(1e-12));
    CHECK(report.fdd == doctest::Approx(fdd / 100).epsilon(1e-12));
}
