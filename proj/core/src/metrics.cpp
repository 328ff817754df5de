#include "eyas/metrics.hpp"

#include <algorithm>

#include "eyas/error.hpp"

namespace eyas {

namespace {

struct Overlap {
    std::size_t a = 0, b = 0, both = 0;
};

Overlap overlap(const BinaryMask& a, const BinaryMask& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        fail(ErrorCode::dimension_mismatch, "masks differ in size");
    }
    Overlap o;
    auto pa = a.bits();
    auto pb = b.bits();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        const bool x = pa[i] != 0, y = pb[i] != 0;
        o.a += x;
        o.b += y;
        o.both += x && y;
    }
    return o;
}

}  // namespace

double iou(const BinaryMask& a, const BinaryMask& b) {
    const Overlap o = overlap(a, b);
    const std::size_t uni = o.a + o.b - o.both;
    return uni == 0 ? 1.0 : double(o.both) / double(uni);
}

double dice(const BinaryMask& a, const BinaryMask& b) {
    const Overlap o = overlap(a, b);
    return o.a + o.b == 0 ? 1.0 : 2.0 * double(o.both) / double(o.a + o.b);
}

double precision(const BinaryMask& pred, const BinaryMask& truth) {
    const Overlap o = overlap(pred, truth);
    if (o.a == 0) fail(ErrorCode::undefined_metric, "precision of an empty prediction");
    return double(o.both) / double(o.a);
}

double recall(const BinaryMask& pred, const BinaryMask& truth) {
    const Overlap o = overlap(pred, truth);
    if (o.b == 0) fail(ErrorCode::undefined_metric, "recall against an empty truth");
    return double(o.both) / double(o.b);
}

std::size_t ConfusionMatrix::total() const {
    std::size_t n = 0;
    for (const auto& row : counts)
        for (auto c : row) n += c;
    return n;
}

ConfusionMatrix confusion(const std::vector<std::string>& preds, const std::vector<std::string>& truths,
                          const std::vector<std::string>& labels) {
    if (preds.size() != truths.size()) fail(ErrorCode::length_mismatch, "predictions and truths differ in length");
    auto index = [&](const std::string& l) {
        auto it = std::find(labels.begin(), labels.end(), l);
        if (it == labels.end()) fail(ErrorCode::unknown_label, "label '" + l + "' not in the label list");
        return static_cast<std::size_t>(it - labels.begin());
    };
    ConfusionMatrix cm;
    cm.labels = labels;
    cm.counts.assign(labels.size(), std::vector<std::size_t>(labels.size(), 0));
    for (std::size_t i = 0; i < preds.size(); ++i) ++cm.counts[index(truths[i])][index(preds[i])];
    return cm;
}

double accuracy(const ConfusionMatrix& cm) {
    const std::size_t n = cm.total();
    if (n == 0) fail(ErrorCode::undefined_metric, "accuracy of an empty confusion matrix");
    std::size_t diag = 0;
    for (std::size_t i = 0; i < cm.counts.size(); ++i) diag += cm.counts[i][i];
    return double(diag) / double(n);
}

std::map<std::string, double> per_class_accuracy(const ConfusionMatrix& cm) {
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < cm.labels.size(); ++i) {
        std::size_t row = 0;
        for (auto c : cm.counts[i]) row += c;
        if (row > 0) out[cm.labels[i]] = double(cm.counts[i][i]) / double(row);
    }
    return out;
}

void SegmentationAccumulator::add(const BinaryMask& pred, const BinaryMask& truth) {
    iou_ += iou(pred, truth);
    dice_ += dice(pred, truth);
    ++n_;
    if (!pred.empty_foreground()) {
        precision_ += precision(pred, truth);
        ++np_;
    }
    if (!truth.empty_foreground()) {
        recall_ += recall(pred, truth);
        ++nr_;
    }
}

SegmentationSummary SegmentationAccumulator::summary() const {
    SegmentationSummary s;
    s.count = n_;
    if (n_ > 0) {
        s.mean_iou = iou_ / n_;
        s.mean_dice = dice_ / n_;
    }
    if (np_ > 0) s.mean_precision = precision_ / np_;
    if (nr_ > 0) s.mean_recall = recall_ / nr_;
    return s;
}

ClassificationSummary summarize(const std::vector<std::string>& preds, const std::vector<std::string>& truths,
                                const std::vector<std::string>& labels) {
    ClassificationSummary s;
    s.count = preds.size();
    if (preds.empty()) return s;
    const ConfusionMatrix cm = confusion(preds, truths, labels);
    s.accuracy = accuracy(cm);
    s.per_class = per_class_accuracy(cm);
    return s;
}

}  // namespace eyas
