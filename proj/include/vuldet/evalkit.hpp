#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vuldet::evalkit {

struct TooFewPrograms : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooFewSamples : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfusionCounts {
    long tp = 0, fp = 0, fn = 0, tn = 0;
    long total() const { return tp + fp + fn + tn; }
};

// The five detection metrics; a zero denominator leaves the metric
// unset rather than silently zero.
struct MetricReport {
    std::optional<double> fpr, fnr, tpr, precision, f1;
};

MetricReport compute_metrics(const ConfusionCounts& c);

/// F1 from precision and recall, as combined in the report tables.
std::optional<double> f1_from(double precision, double tpr);

std::string format_metric(const std::optional<double>& m);

struct ProgramSplit {
    std::vector<std::string> train;
    std::vector<std::string> target;
};

/// Program-level 80/20 split: every gadget of a program lands on one
/// side.  Train side takes ceil(ratio * n) programs of the seeded
/// shuffle.
ProgramSplit split_programs(const std::vector<std::string>& programIds,
                            double ratio, uint64_t seed);

struct Fold {
    std::vector<int> train;
    std::vector<int> validation;
};

/// k disjoint folds covering 0..n-1, sizes differing by at most one.
std::vector<Fold> kfold(int n, int k, uint64_t seed);

}  // namespace vuldet::evalkit
