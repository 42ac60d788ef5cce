#include "dofair/metrics.hpp"

#include <numeric>

namespace dofair {

namespace {

void require_same_dim(const LabelSet& a, const LabelSet& b) {
    if (a.dim() != b.dim()) {
        raise(Errc::DimensionMismatch, "image and ground truth use different dimensions");
    }
}

// F1 over one class given the predicted and actual member sets.
double class_f1(const LabelSet& predicted, const LabelSet& actual) {
    int tp = predicted.intersect(actual).size();
    int fp = predicted.minus(actual).size();
    int fn = actual.minus(predicted).size();
    int denom = 2 * tp + fp + fn;
    if (denom == 0) return actual.empty() ? 1.0 : 0.0;
    return 2.0 * tp / denom;
}

}  // namespace

int ImageDemography::face_count() const {
    return std::accumulate(counts.begin(), counts.end(), 0);
}

ImageDemography aggregate_distribution(std::span<const FaceAnnotation> faces, Dim dimension) {
    const auto& space = Dimension::of(dimension);
    ImageDemography out;
    out.dimension = dimension;
    out.counts.assign(static_cast<size_t>(space.size()), 0);
    out.dominant = LabelSet(dimension);
    out.involved = LabelSet(dimension);

    for (const auto& face : faces) {
        const std::string& trait = dimension == Dim::Race ? face.race : face.gender;
        auto idx = space.index_of(trait);
        if (!idx) raise(Errc::InvalidLabel, "face trait \"" + trait + "\" is outside the " +
                                                std::string(dim_name(dimension)) + " space");
        ++out.counts[static_cast<size_t>(*idx)];
    }

    int max_count = 0;
    for (int c : out.counts) max_count = std::max(max_count, c);
    for (int i = 0; i < space.size(); ++i) {
        int c = out.counts[static_cast<size_t>(i)];
        if (c > 0) out.involved.insert(i);
        if (max_count > 0 && c == max_count) out.dominant.insert(i);
    }
    return out;
}

ImageDemography demography_from_sets(const LabelSet& dominant, const LabelSet& involved) {
    ImageDemography out;
    out.dimension = involved.dim();
    out.counts.assign(static_cast<size_t>(Dimension::of(out.dimension).size()), 0);
    out.dominant = dominant;
    out.involved = involved;
    for (int i = 0; i < Dimension::of(out.dimension).size(); ++i) {
        if (dominant.contains(i)) out.counts[static_cast<size_t>(i)] = 2;
        else if (involved.contains(i)) out.counts[static_cast<size_t>(i)] = 1;
    }
    return out;
}

double score_dda(const LabelSet& image_dominant, const LabelSet& truth_dominant) {
    require_same_dim(image_dominant, truth_dominant);
    int apd = Dimension::of(image_dominant.dim()).size();
    int true_dd = image_dominant.intersect(truth_dominant).size();
    int true_nd = image_dominant.complement().intersect(truth_dominant.complement()).size();
    return static_cast<double>(true_dd + true_nd) / apd;
}

double score_ida(const LabelSet& image_involved, const LabelSet& truth_involved) {
    require_same_dim(image_involved, truth_involved);
    int apd = Dimension::of(image_involved.dim()).size();
    int true_id = image_involved.intersect(truth_involved).size();
    int true_ud = image_involved.complement().intersect(truth_involved.complement()).size();
    return static_cast<double>(true_id + true_ud) / apd;
}

double score_idf(const LabelSet& image_involved, const LabelSet& truth_involved,
                 IdfVariant variant) {
    require_same_dim(image_involved, truth_involved);
    int apd = Dimension::of(image_involved.dim()).size();
    double f1_id = class_f1(image_involved, truth_involved);
    double f1_ud = class_f1(image_involved.complement(), truth_involved.complement());
    if (variant == IdfVariant::RawSum) return f1_id + f1_ud;
    int support_id = truth_involved.size();
    int support_ud = apd - support_id;
    return (support_id * f1_id + support_ud * f1_ud) / apd;
}

double score_fdd(const LabelSet& image_involved, const LabelSet& truth_involved) {
    require_same_dim(image_involved, truth_involved);
    int apd = Dimension::of(image_involved.dim()).size();
    return static_cast<double>(image_involved.size() - truth_involved.size()) / apd;
}

ImageScore score_image(const ImageDemography& image, const DofairRecord& truth,
                       IdfVariant variant) {
    if (image.dimension != truth.dimension) {
        raise(Errc::DimensionMismatch, "image demography does not match the record dimension");
    }
    ImageScore score;
    score.dda = score_dda(image.dominant, truth.dominant);
    score.ida = score_ida(image.involved, truth.involved);
    score.idf = score_idf(image.involved, truth.involved, variant);
    score.fdd = score_fdd(image.involved, truth.involved);
    return score;
}

MetricReport aggregate_metrics(std::span<const ImageScore> scores, std::span<const int> face_counts,
                               const AggregateOptions& options, const std::string& condition) {
    MetricReport report;
    report.condition = condition;
    report.degenerate_included = options.include_degenerate;

    double dda = 0, ida = 0, idf = 0, fdd = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        bool degenerate = i < face_counts.size() && face_counts[i] == 0;
        if (degenerate) ++report.n_degenerate;
        if (degenerate && !options.include_degenerate) continue;
        dda += scores[i].dda;
        ida += scores[i].ida;
        idf += scores[i].idf;
        fdd += scores[i].fdd;
        ++report.n_scored;
    }
    if (report.n_scored == 0) {
        raise(Errc::EmptyRun, "no scorable images" +
                                  std::string(report.n_degenerate > 0
                                                  ? " (only zero-face images present)"
                                                  : ""));
    }
    report.dda = dda / report.n_scored;
    report.ida = ida / report.n_scored;
    report.idf = idf / report.n_scored;
    report.fdd = fdd / report.n_scored;
    return report;
}

}  // namespace dofair
