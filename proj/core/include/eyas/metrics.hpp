#pragma once

#include <map>
#include <string>
#include <vector>

#include "eyas/image.hpp"

namespace eyas {

double iou(const BinaryMask& a, const BinaryMask& b);
double dice(const BinaryMask& a, const BinaryMask& b);
/// |pred & truth| / |pred|; an empty prediction is an undefined_metric error.
double precision(const BinaryMask& pred, const BinaryMask& truth);
/// |pred & truth| / |truth|; an empty truth is an undefined_metric error.
double recall(const BinaryMask& pred, const BinaryMask& truth);

struct ConfusionMatrix {
    std::vector<std::string> labels;
    /// counts[truth][predicted]
    std::vector<std::vector<std::size_t>> counts;

    std::size_t total() const;
};

ConfusionMatrix confusion(const std::vector<std::string>& preds, const std::vector<std::string>& truths,
                          const std::vector<std::string>& labels);
double accuracy(const ConfusionMatrix& cm);
/// Per-class recall; labels with no truth samples are left out.
std::map<std::string, double> per_class_accuracy(const ConfusionMatrix& cm);

struct SegmentationSummary {
    double mean_iou = 0.0;
    double mean_dice = 0.0;
    double mean_precision = 0.0;
    double mean_recall = 0.0;
    std::size_t count = 0;
};

struct ClassificationSummary {
    double accuracy = 0.0;
    std::map<std::string, double> per_class;
    std::size_t count = 0;
};

struct EvaluationReport {
    std::map<std::string, SegmentationSummary> segmentation;
    std::map<std::string, ClassificationSummary> classification;
    /// Extra figures such as localization hit rates and A/V accuracy.
    std::map<std::string, double> localization;
};

/// Accumulates per-image mask metrics; precision/recall samples whose
/// denominator is empty are skipped rather than averaged as NaN.
class SegmentationAccumulator {
public:
    void add(const BinaryMask& pred, const BinaryMask& truth);
    SegmentationSummary summary() const;

private:
    double iou_ = 0, dice_ = 0, precision_ = 0, recall_ = 0;
    std::size_t n_ = 0, np_ = 0, nr_ = 0;
};

ClassificationSummary summarize(const std::vector<std::string>& preds, const std::vector<std::string>& truths,
                                const std::vector<std::string>& labels);

}  // namespace eyas
