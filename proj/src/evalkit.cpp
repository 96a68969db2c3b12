#include "vuldet/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace vuldet::evalkit {

MetricReport compute_metrics(const ConfusionCounts& c) {
    MetricReport r;
    if (c.fp + c.tn > 0)
        r.fpr = static_cast<double>(c.fp) / (c.fp + c.tn);
    if (c.tp + c.fn > 0) {
        r.fnr = static_cast<double>(c.fn) / (c.tp + c.fn);
        r.tpr = static_cast<double>(c.tp) / (c.tp + c.fn);
    }
    if (c.tp + c.fp > 0)
        r.precision = static_cast<double>(c.tp) / (c.tp + c.fp);
    if (r.precision && r.tpr) r.f1 = f1_from(*r.precision, *r.tpr);
    return r;
}

std::optional<double> f1_from(double precision, double tpr) {
    if (precision + tpr <= 0.0) return std::nullopt;
    return 2.0 * precision * tpr / (precision + tpr);
}

std::string format_metric(const std::optional<double>& m) {
    if (!m) return "undefined";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *m);
    return buf;
}

ProgramSplit split_programs(const std::vector<std::string>& programIds,
                            double ratio, uint64_t seed) {
    if (programIds.size() < 2)
        throw TooFewPrograms("need at least 2 programs to split, have " +
                             std::to_string(programIds.size()));
    std::vector<std::string> ids = programIds;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (ids.size() < 2)
        throw TooFewPrograms("need at least 2 distinct programs to split");
    std::mt19937_64 rng(seed);
    std::shuffle(ids.begin(), ids.end(), rng);
    size_t nTrain = static_cast<size_t>(
        std::ceil(ratio * static_cast<double>(ids.size())));
    nTrain = std::min(nTrain, ids.size());
    ProgramSplit split;
    split.train.assign(ids.begin(), ids.begin() + nTrain);
    split.target.assign(ids.begin() + nTrain, ids.end());
    return split;
}

std::vector<Fold> kfold(int n, int k, uint64_t seed) {
    if (k < 2) throw std::invalid_argument("kfold requires k >= 2");
    if (n < k)
        throw TooFewSamples("kfold needs at least k samples: n=" +
                            std::to_string(n) + ", k=" + std::to_string(k));
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);

    std::vector<Fold> folds(k);
    int base = n / k, extra = n % k;
    int pos = 0;
    for (int f = 0; f < k; ++f) {
        int size = base + (f < extra ? 1 : 0);
        folds[f].validation.assign(idx.begin() + pos,
                                   idx.begin() + pos + size);
        pos += size;
    }
    for (int f = 0; f < k; ++f) {
        for (int g = 0; g < k; ++g) {
            if (g == f) continue;
            folds[f].train.insert(folds[f].train.end(),
                                  folds[g].validation.begin(),
                                  folds[g].validation.end());
        }
    }
    return folds;
}

}  // namespace vuldet::evalkit
