// vuldet: extract data-dependency code gadgets around library/API call
// sites, train a BLSTM classifier over their token embeddings, and scan
// target sources for vulnerable gadgets.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vuldet/pipeline.hpp"

namespace {

void add_common_options(CLI::App* cmd, vuldet::pipeline::PipelineConfig& cfg) {
    cmd->set_config("--config", "",
                    "configuration file (flags here override it)");
    cmd->add_option("--data-dir", cfg.dataDir,
                    "directory holding the bundled call tables")
        ->capture_default_str();
    cmd->add_option("--call-table", cfg.callTablePath,
                    "explicit call table file (overrides --mode)");
    cmd->add_option("--mode", cfg.mode,
                    "key-point table: ALL, SEL-CWE119, SEL-CWE399, SEL-HYBRID")
        ->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
    cmd->add_option("--tau", cfg.tau, "token positions per gadget vector")
        ->capture_default_str();
    cmd->add_option("--dim", cfg.embeddingDim, "token embedding dimension")
        ->capture_default_str();
}

void add_network_options(CLI::App* cmd,
                         vuldet::pipeline::PipelineConfig& cfg) {
    cmd->add_option("--hidden", cfg.hidden, "hidden nodes per direction")
        ->capture_default_str();
    cmd->add_option("--layers", cfg.layers, "BLSTM layer count")
        ->capture_default_str();
    cmd->add_option("--dropout", cfg.dropout, "dropout rate")
        ->capture_default_str();
    cmd->add_option("--batch", cfg.batchSize, "minibatch size")
        ->capture_default_str();
    cmd->add_option("--epochs", cfg.epochs, "training epochs")
        ->capture_default_str();
    cmd->add_option("--lr", cfg.learningRate, "learning rate")
        ->capture_default_str();
    cmd->add_option("--clip", cfg.clipNorm,
                    "global gradient-norm clip (0 disables)")
        ->capture_default_str();
    cmd->add_option("--dense-width", cfg.denseWidth,
                    "dense layer width (0 = hidden size)")
        ->capture_default_str();
    cmd->add_flag("--max-pool", cfg.maxPool,
                  "pool BLSTM outputs by column max instead of final states");
    cmd->add_option("--embed-window", cfg.embedWindow, "skip-gram window")
        ->capture_default_str();
    cmd->add_option("--embed-negatives", cfg.embedNegatives,
                    "negative samples per context")
        ->capture_default_str();
    cmd->add_option("--embed-epochs", cfg.embedEpochs,
                    "embedding training epochs")
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "vuldet: data-dependency code-gadget extraction and BLSTM-based "
        "vulnerability detection"};
    app.require_subcommand(1);

    vuldet::pipeline::PipelineConfig cfg;

    // extract
    auto* extract = app.add_subcommand(
        "extract", "extract, label and persist code gadgets from a corpus");
    add_common_options(extract, cfg);
    extract->add_option("--corpus", cfg.corpusDir, "corpus directory")
        ->required();
    extract->add_option("--out", cfg.dbPath, "gadget database output path")
        ->required();
    extract->add_option("--diffs", cfg.diffPath,
                        "unified diff file or directory (NVD-style labels)");
    extract->add_option("--sard-manifest", cfg.sardManifest,
                        "program class manifest (SARD-style labels)");
    extract->add_option("--export-review", cfg.exportReview,
                        "write the label-1 review queue to this file");
    extract->add_option("--apply-review", cfg.applyReview,
                        "apply reviewed labels from this file");
    extract->add_option("--max-chains", cfg.maxChains,
                        "chain cap per call argument")
        ->capture_default_str();
    extract->add_option("--hops", cfg.interprocHops,
                        "interprocedural hop cap")
        ->capture_default_str();
    extract->add_flag("--shuffle-pieces", cfg.shufflePieces,
                      "randomize order-unconstrained gadget pieces (seeded)");

    // train
    auto* train = app.add_subcommand(
        "train", "train token embeddings and the BLSTM from a database");
    add_common_options(train, cfg);
    add_network_options(train, cfg);
    train->add_option("--db", cfg.dbPath, "gadget database")->required();
    train->add_option("--model-out", cfg.modelPath, "model output path")
        ->required();
    train->add_option("--vocab-out", cfg.vocabPath, "vocabulary output path")
        ->required();
    train->add_option("--report", cfg.reportPath, "metrics report path");
    train->add_option("--kfold", cfg.kfolds,
                      "k-fold cross validation (0 = program-level holdout)")
        ->capture_default_str();
    train->add_option("--holdout", cfg.holdout,
                      "held-out program fraction when not k-folding")
        ->capture_default_str();

    // detect
    auto* detect = app.add_subcommand(
        "detect", "scan target sources with a trained model");
    add_common_options(detect, cfg);
    detect->add_option("--model", cfg.modelPath, "trained model")->required();
    detect->add_option("--vocab", cfg.vocabPath, "matching vocabulary")
        ->required();
    detect->add_option("--targets", cfg.targetsDir, "target source directory")
        ->required();
    detect->add_option("--report", cfg.reportPath, "detection report path");
    detect->add_option("--max-chains", cfg.maxChains,
                       "chain cap per call argument")
        ->capture_default_str();
    detect->add_option("--hops", cfg.interprocHops, "interprocedural hop cap")
        ->capture_default_str();

    // eval
    auto* eval = app.add_subcommand(
        "eval", "confusion counts and metrics for a detection report");
    add_common_options(eval, cfg);
    std::string predictionsPath, truthPath;
    eval->add_option("--predictions", predictionsPath,
                     "detection report to score")
        ->required();
    eval->add_option("--truth", truthPath, "labeled gadget database")
        ->required();
    eval->add_option("--report", cfg.reportPath, "metrics report path");

    // sweep
    auto* sweep = app.add_subcommand(
        "sweep", "train across layer counts and tabulate F1");
    add_common_options(sweep, cfg);
    add_network_options(sweep, cfg);
    sweep->add_option("--db", cfg.dbPath, "gadget database")->required();
    sweep->add_option("--report", cfg.reportPath, "sweep report path");
    sweep->add_option("--kfold", cfg.kfolds,
                      "k-fold cross validation (0 = holdout)")
        ->capture_default_str();
    sweep->add_option("--holdout", cfg.holdout, "held-out fraction")
        ->capture_default_str();
    std::vector<int> layerCounts{1, 2, 3, 4, 5, 6};
    sweep->add_option("--layer-counts", layerCounts,
                      "layer counts to sweep")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(extract)) {
            vuldet::pipeline::run_extract(cfg, std::cout);
        } else if (app.got_subcommand(train)) {
            vuldet::pipeline::run_train(cfg, std::cout);
        } else if (app.got_subcommand(detect)) {
            auto report = vuldet::pipeline::run_detect(cfg, std::cout);
            std::cout << "scanned " << report.gadgetsScanned
                      << " gadgets\n";
            for (const auto& f : report.findings) {
                if (f.label != 1) continue;
                std::cout << f.probability << "  " << f.callee << "  ";
                for (size_t i = 0; i < f.locations.size(); ++i) {
                    if (i) std::cout << ',';
                    std::cout << f.locations[i].first << ':'
                              << f.locations[i].second;
                }
                std::cout << "  [" << f.gadgetId << "]\n";
            }
        } else if (app.got_subcommand(eval)) {
            vuldet::pipeline::run_eval(cfg, predictionsPath, truthPath,
                                       std::cout);
        } else if (app.got_subcommand(sweep)) {
            vuldet::pipeline::run_sweep(cfg, layerCounts, std::cout);
        }
    } catch (const vuldet::pipeline::IdMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (const auto& o : e.orphans) std::cerr << "  orphan " << o << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
