#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vuldet/blstm.hpp"
#include "vuldet/calltable.hpp"
#include "vuldet/evalkit.hpp"
#include "vuldet/gadget.hpp"
#include "vuldet/symbolizer.hpp"
#include "vuldet/vectorizer.hpp"

namespace vuldet::pipeline {

struct ModelVocabMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IdMismatch : std::runtime_error {
    IdMismatch(std::string what, std::vector<std::string> orphanIds)
        : std::runtime_error(std::move(what)), orphans(std::move(orphanIds)) {}
    std::vector<std::string> orphans;
};

struct PipelineConfig {
    // Key-point tables: an explicit path wins over the bundled mode.
    std::string callTablePath;
    std::string mode = "ALL";  // ALL | SEL-CWE119 | SEL-CWE399 | SEL-HYBRID
    std::string dataDir = "data";

    int tau = 50;
    int embeddingDim = 30;
    int embedWindow = 5;
    int embedNegatives = 5;
    int embedEpochs = 5;

    int hidden = 300;
    int layers = 2;
    double dropout = 0.5;
    int batchSize = 64;
    int epochs = 4;
    double learningRate = 1.0;
    double clipNorm = 5.0;
    int denseWidth = 0;  // 0 = hidden size
    bool maxPool = false;

    uint64_t seed = 1;
    int kfolds = 0;  // 0 = program-level holdout
    double holdout = 0.2;
    int maxChains = 8;
    int interprocHops = 3;
    bool shufflePieces = false;

    std::string corpusDir;
    std::string targetsDir;
    std::string dbPath;
    std::string vocabPath;
    std::string modelPath;
    std::string reportPath;
    std::string diffPath;      // unified diff file or directory
    std::string sardManifest;  // program class manifest
    std::string exportReview;
    std::string applyReview;
};

/// The key-point table selected by config (mode or explicit path).
dataflow::CallTable load_call_table(const PipelineConfig& cfg);
/// Union of every bundled table plus the explicit one; the symbolizer
/// keeps all of these names unrenamed.
dataflow::CallTable load_known_library_names(const PipelineConfig& cfg);

// SARD-style manifest: one record per line,
//   <path-prefix>\t<good|bad|mixed>[\t<file>:<line>[,<file>:<line>...]]
struct SardRecord {
    std::string pathPrefix;
    gadget::SardClass cls = gadget::SardClass::Good;
    gadget::FileLineSet flagged;
};
std::vector<SardRecord> load_sard_manifest(const std::string& path);

struct ExtractResult {
    gadget::GadgetDatabase db;
    size_t conflictRemoved = 0;
    size_t filesProcessed = 0;
    size_t filesSkipped = 0;
    double msPerGadget = 0.0;
    std::vector<std::string> diagnostics;
};

/// Full Step I-III front half: lex, dependency graph, call sites,
/// slices, gadget assembly, symbolization and labeling; persists the
/// database when cfg.dbPath is set.
ExtractResult run_extract(const PipelineConfig& cfg, std::ostream& log);

/// In-memory variant used by detection and the bindings.
ExtractResult extract_gadgets(const PipelineConfig& cfg,
                              const std::string& sourceDir,
                              std::ostream& log);

void export_review(const gadget::GadgetDatabase& db, const std::string& path);
size_t apply_review(gadget::GadgetDatabase& db, const std::string& path);

struct FoldMetrics {
    std::string name;
    evalkit::ConfusionCounts counts;
    evalkit::MetricReport metrics;
};

struct TrainOutput {
    blstm::TrainResult training;
    vectorizer::Vocabulary vocab;
    std::vector<FoldMetrics> folds;
};

/// Trains embeddings and the BLSTM from a labeled gadget database,
/// optionally k-fold; persists model/vocab and a metrics report.
TrainOutput run_train(const PipelineConfig& cfg, std::ostream& log);

struct Finding {
    std::string gadgetId;
    int label = 0;
    double probability = 0.0;
    std::string callee;
    std::vector<std::pair<std::string, int>> locations;
};

struct DetectReport {
    std::vector<Finding> findings;  // descending probability
    size_t gadgetsScanned = 0;
    std::vector<std::string> diagnostics;
};

DetectReport run_detect(const PipelineConfig& cfg, std::ostream& log);
void write_detect_report(const DetectReport& report, const std::string& path);

struct EvalResult {
    evalkit::ConfusionCounts counts;
    evalkit::MetricReport metrics;
};

/// Joins a detection report with a labeled database on gadget id.
EvalResult run_eval(const PipelineConfig& cfg,
                    const std::string& predictionsPath,
                    const std::string& truthPath, std::ostream& log);

/// Retrains with each layer count and reports validation metrics.
std::vector<FoldMetrics> run_sweep(const PipelineConfig& cfg,
                                   const std::vector<int>& layerCounts,
                                   std::ostream& log);

void write_metrics_report(const std::vector<FoldMetrics>& rows,
                          const std::string& path);
std::string metrics_table(const std::vector<FoldMetrics>& rows);

}  // namespace vuldet::pipeline
