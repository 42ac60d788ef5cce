#pragma once

#include <span>
#include <string>
#include <vector>

#include "dofair/labels.hpp"
#include "dofair/record.hpp"

namespace dofair {

/// One detected face with its classified demographic traits.
struct FaceAnnotation {
    int face_id = 0;
    std::string race;
    std::string gender;
    double detection_confidence = 1.0;
};

/// Per-image label counts along one dimension, with the derived dominant (DD)
/// and involved (ID) sets. ND and UD are complements within the label space
/// and are computed on demand rather than stored.
struct ImageDemography {
    Dim dimension = Dim::Race;
    std::vector<int> counts;  // indexed by canonical label order
    LabelSet dominant{Dim::Race};
    LabelSet involved{Dim::Race};

    int face_count() const;
    bool degenerate() const { return involved.empty(); }
};

struct ImageScore {
    double dda = 0;
    double ida = 0;
    double idf = 0;
    double fdd = 0;
};

enum class IdfVariant {
    SupportWeighted,  // weighted-average semantics, default
    RawSum,           // the two F1 terms added as displayed in print; range up to 2
};

/// Tallies faces by the dimension's trait. All labels attaining the max count
/// are dominant; an empty face list yields all-zero counts and empty sets.
ImageDemography aggregate_distribution(std::span<const FaceAnnotation> faces, Dim dimension);

/// Builds the demography a ground-truth record asserts, for scoring against.
ImageDemography demography_from_sets(const LabelSet& dominant, const LabelSet& involved);

/// Accuracy of the dominant-group classification over the whole label space:
/// (#TrueDD + #TrueND) / #APD.
double score_dda(const LabelSet& image_dominant, const LabelSet& truth_dominant);

/// Accuracy of the involved-group classification: (#TrueID + #TrueUD) / #APD.
double score_ida(const LabelSet& image_involved, const LabelSet& truth_involved);

/// F1 over the involved class and the uninvolved class, combined
/// support-weighted by default. A term whose denominator is zero counts as 1
/// when its support is 0, else 0.
double score_idf(const LabelSet& image_involved, const LabelSet& truth_involved,
                 IdfVariant variant = IdfVariant::SupportWeighted);

/// Signed diversity divergence: (#ImageID - #GroundTruthID) / #APD.
/// Positive means over-diverse, negative under-diverse.
double score_fdd(const LabelSet& image_involved, const LabelSet& truth_involved);

/// All four metrics for one image against one record. DimensionMismatch if
/// the image and record dimensions differ.
ImageScore score_image(const ImageDemography& image, const DofairRecord& truth,
                       IdfVariant variant = IdfVariant::SupportWeighted);

struct AggregateOptions {
    bool include_degenerate = false;
};

/// Per-condition aggregate of image scores over one run.
struct MetricReport {
    std::string condition;
    int n_scored = 0;      // images included in the averages
    int n_degenerate = 0;  // zero-face images seen
    bool degenerate_included = false;
    double dda = 0;
    double ida = 0;
    double idf = 0;
    double fdd = 0;
};

/// Arithmetic mean of each metric. `face_counts` flags degenerate images
/// (zero faces); they are excluded from the averages unless the options say
/// otherwise. Throws EmptyRun when nothing is left to average.
MetricReport aggregate_metrics(std::span<const ImageScore> scores, std::span<const int> face_counts,
                               const AggregateOptions& options = {},
                               const std::string& condition = "");

}  // namespace dofair
