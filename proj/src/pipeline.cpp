#include "vuldet/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "vuldet/diff.hpp"
#include "vuldet/lexer.hpp"

namespace vuldet::pipeline {

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool is_source_file(const fs::path& p) {
    static const std::vector<std::string> kExts = {
        ".c", ".h", ".cc", ".cpp", ".cxx", ".hpp", ".hh", ".C"};
    std::string ext = p.extension().string();
    return std::find(kExts.begin(), kExts.end(), ext) != kExts.end();
}

// Program identity: the first path component under the corpus root, or
// the file itself for flat corpora.
std::string program_id(const fs::path& root, const fs::path& file) {
    std::error_code ec;
    fs::path rel = fs::relative(file, root, ec);
    if (ec || rel.empty()) return file.string();
    auto it = rel.begin();
    if (std::next(it) == rel.end()) return rel.begin()->string();
    return it->string();
}

std::string bundle_path(const PipelineConfig& cfg, const char* name) {
    return (fs::path(cfg.dataDir) / "call_tables" / name).string();
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (true) {
        size_t next = line.find(sep, pos);
        out.push_back(line.substr(
            pos, next == std::string::npos ? std::string::npos : next - pos));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

int label_as_int(gadget::Label l) {
    return l == gadget::Label::Vulnerable ? 1 : 0;
}

}  // namespace

dataflow::CallTable load_call_table(const PipelineConfig& cfg) {
    if (!cfg.callTablePath.empty())
        return dataflow::CallTable::load(cfg.callTablePath);
    if (cfg.mode == "SEL-CWE119")
        return dataflow::CallTable::load(bundle_path(cfg, "cwe119.txt"));
    if (cfg.mode == "SEL-CWE399")
        return dataflow::CallTable::load(bundle_path(cfg, "cwe399.txt"));
    if (cfg.mode == "SEL-HYBRID") {
        auto t = dataflow::CallTable::load(bundle_path(cfg, "cwe119.txt"));
        t.merge(dataflow::CallTable::load(bundle_path(cfg, "cwe399.txt")));
        return t;
    }
    if (cfg.mode == "ALL")
        return dataflow::CallTable::load(bundle_path(cfg, "all.txt"));
    throw std::runtime_error("unknown mode '" + cfg.mode +
                             "' (expected ALL, SEL-CWE119, SEL-CWE399 or "
                             "SEL-HYBRID)");
}

dataflow::CallTable load_known_library_names(const PipelineConfig& cfg) {
    dataflow::CallTable known;
    size_t loaded = 0;
    for (const char* name : {"all.txt", "cwe119.txt", "cwe399.txt"}) {
        std::string path = bundle_path(cfg, name);
        if (fs::exists(path)) {
            known.merge(dataflow::CallTable::load(path));
            ++loaded;
        }
    }
    if (!cfg.callTablePath.empty()) {
        known.merge(dataflow::CallTable::load(cfg.callTablePath));
        ++loaded;
    }
    if (loaded == 0)
        throw std::runtime_error(
            "no call tables found under " + cfg.dataDir +
            "/call_tables and no --call-table given");
    return known;
}

std::vector<SardRecord> load_sard_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open SARD manifest: " + path);
    std::vector<SardRecord> records;
    std::string line;
    size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_fields(line, '\t');
        if (fields.size() < 2)
            throw std::runtime_error(path + ":" + std::to_string(lineNo) +
                                     ": expected <path>\\t<class>[\\t<flags>]");
        SardRecord r;
        r.pathPrefix = fields[0];
        if (fields[1] == "good") r.cls = gadget::SardClass::Good;
        else if (fields[1] == "bad") r.cls = gadget::SardClass::Bad;
        else if (fields[1] == "mixed") r.cls = gadget::SardClass::Mixed;
        else
            throw std::runtime_error(path + ":" + std::to_string(lineNo) +
                                     ": class must be good, bad or mixed");
        if (fields.size() >= 3 && !fields[2].empty()) {
            for (const auto& pair : split_fields(fields[2], ',')) {
                size_t colon = pair.rfind(':');
                if (colon == std::string::npos)
                    throw std::runtime_error(path + ":" +
                                             std::to_string(lineNo) +
                                             ": flags must be file:line");
                r.flagged.insert({pair.substr(0, colon),
                                  std::stoi(pair.substr(colon + 1))});
            }
        }
        records.push_back(std::move(r));
    }
    return records;
}

ExtractResult extract_gadgets(const PipelineConfig& cfg,
                              const std::string& sourceDir,
                              std::ostream& log) {
    ExtractResult res;
    dataflow::CallTable table = load_call_table(cfg);
    dataflow::CallTable known = load_known_library_names(cfg);
    gadget::FileLineSet patchLines;
    if (!cfg.diffPath.empty())
        patchLines = gadget::load_patch_lines(cfg.diffPath);
    std::vector<SardRecord> sard;
    if (!cfg.sardManifest.empty())
        sard = load_sard_manifest(cfg.sardManifest);

    if (!fs::exists(sourceDir)) {
        log << "warning: corpus directory '" << sourceDir
            << "' does not exist\n";
        return res;
    }

    // Program -> sorted file list.
    std::map<std::string, std::vector<std::string>> programs;
    if (fs::is_regular_file(sourceDir)) {
        programs[fs::path(sourceDir).filename().string()] = {sourceDir};
    } else {
        for (const auto& e : fs::recursive_directory_iterator(sourceDir)) {
            if (!e.is_regular_file() || !is_source_file(e.path())) continue;
            programs[program_id(sourceDir, e.path())].push_back(
                e.path().string());
        }
    }
    for (auto& [prog, files] : programs) std::sort(files.begin(), files.end());

    auto sard_for = [&](const std::string& file,
                        const std::string& prog) -> const SardRecord* {
        for (const auto& r : sard) {
            if (file.rfind(r.pathPrefix, 0) == 0 || prog == r.pathPrefix ||
                file.find("/" + r.pathPrefix) != std::string::npos)
                return &r;
        }
        return nullptr;
    };

    dataflow::SliceOptions sliceOpt;
    sliceOpt.maxChains = cfg.maxChains;
    sliceOpt.maxInterproceduralHops = cfg.interprocHops;
    symbolizer::SymbolizeOptions symOpt;

    auto started = std::chrono::steady_clock::now();
    for (const auto& [prog, files] : programs) {
        std::vector<clex::SourceFile> lexed;
        for (const auto& f : files) {
            clex::SourceFile sf;
            try {
                sf = clex::lex_file(read_file(f), f);
            } catch (const std::exception& e) {
                res.diagnostics.push_back(f + ": " + e.what());
                ++res.filesSkipped;
                continue;
            }
            for (const auto& d : sf.diagnostics)
                res.diagnostics.push_back(d.message());
            ++res.filesProcessed;
            lexed.push_back(std::move(sf));
        }
        dataflow::DepGraph graph = dataflow::build_dep_graph(lexed);
        for (const auto& d : graph.diagnostics) {
            res.diagnostics.push_back(d.file + ":" + std::to_string(d.line) +
                                      ": " + d.message);
            ++res.filesSkipped;
        }
        for (const auto& site :
             dataflow::find_call_sites(graph, table)) {
            std::vector<dataflow::Slice> slices;
            if (site.args.empty()) {
                // Zero-argument key point: the gadget is the call itself.
                dataflow::Slice s;
                s.keyCall = site;
                s.argIndex = 0;
                s.direction = site.direction;
                s.chain = {site.stmt};
                slices.push_back(std::move(s));
            } else {
                for (int ai = 0; ai < static_cast<int>(site.args.size());
                     ++ai) {
                    auto part =
                        site.direction == dataflow::CallDirection::Backward
                            ? dataflow::backward_slice(graph, site, ai,
                                                       sliceOpt)
                            : dataflow::forward_slice(graph, site, ai,
                                                      sliceOpt);
                    slices.insert(slices.end(), part.begin(), part.end());
                }
            }
            gadget::AssembleOptions asmOpt;
            asmOpt.shufflePieces = cfg.shufflePieces;
            asmOpt.seed = cfg.seed;
            gadget::CodeGadget g = gadget::assemble(graph, slices, asmOpt);
            g.program = prog;

            const SardRecord* rec = sard_for(g.keyFile, prog);
            if (rec) {
                g.provenance = rec->cls == gadget::SardClass::Good
                                   ? gadget::Provenance::SardGood
                                   : gadget::Provenance::SardBadOrMixed;
                gadget::label_by_sard(g, rec->cls, rec->flagged);
            } else if (!patchLines.empty()) {
                g.provenance = gadget::Provenance::NvdDiff;
                gadget::label_by_diff(g, patchLines);
            } else {
                g.provenance = gadget::Provenance::Target;
                g.label = gadget::Label::Unlabeled;
            }
            g.symbolicText =
                symbolizer::symbolize(g, known, symOpt).canonical_text();
            res.db.gadgets.push_back(std::move(g));
        }
    }
    auto elapsed = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - started)
                       .count();
    res.msPerGadget =
        res.db.gadgets.empty() ? 0.0 : elapsed / res.db.gadgets.size();
    return res;
}

ExtractResult run_extract(const PipelineConfig& cfg, std::ostream& log) {
    ExtractResult res = extract_gadgets(cfg, cfg.corpusDir, log);
    for (const auto& d : res.diagnostics) log << "diagnostic: " << d << "\n";

    if (!cfg.applyReview.empty()) {
        size_t changed = apply_review(res.db, cfg.applyReview);
        log << "review: " << changed << " labels applied from "
            << cfg.applyReview << "\n";
    }

    auto resolved = gadget::resolve_conflicts(res.db);
    res.conflictRemoved = resolved.removed;
    res.db = std::move(resolved.db);

    if (!cfg.exportReview.empty()) {
        export_review(res.db, cfg.exportReview);
        log << "review queue written to " << cfg.exportReview << "\n";
    }

    auto counts = res.db.counts();
    size_t fwd = 0, bwd = 0, mixed = 0;
    for (const auto& g : res.db.gadgets) {
        if (g.direction == gadget::GadgetDirection::Forward) ++fwd;
        else if (g.direction == gadget::GadgetDirection::Backward) ++bwd;
        else ++mixed;
    }
    log << "gadgets: " << res.db.gadgets.size() << " (forward " << fwd
        << ", backward " << bwd << ", mixed-backward " << mixed << ")\n"
        << "labels: vulnerable " << counts.vulnerable << ", not-vulnerable "
        << counts.notVulnerable << ", unlabeled " << counts.unlabeled << "\n"
        << "conflict-labeled gadgets removed: " << res.conflictRemoved << "\n"
        << std::fixed << std::setprecision(2) << "extraction time: "
        << res.msPerGadget << " ms/gadget\n";
    if (res.db.gadgets.empty())
        log << "warning: no gadgets extracted\n";

    if (!cfg.dbPath.empty()) {
        gadget::save_database(res.db, cfg.dbPath);
        log << "database written to " << cfg.dbPath << "\n";
    }
    return res;
}

void export_review(const gadget::GadgetDatabase& db, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write review file: " + path);
    out << "# gadget review queue: edit the label column (0/1) and re-run "
           "with --apply-review\n";
    for (const auto& g : db.gadgets) {
        if (!g.needsReview) continue;
        out << g.id << '\t' << to_string(g.label) << '\t' << g.callee << '\t'
            << g.keyFile << ':' << g.keyLine << '\n';
    }
}

size_t apply_review(gadget::GadgetDatabase& db, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open review file: " + path);
    std::map<std::string, gadget::Label> overrides;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_fields(line, '\t');
        if (fields.size() < 2) continue;
        overrides[fields[0]] = fields[1] == "1"
                                   ? gadget::Label::Vulnerable
                                   : gadget::Label::NotVulnerable;
    }
    size_t changed = 0;
    for (auto& g : db.gadgets) {
        auto it = overrides.find(g.id);
        if (it == overrides.end()) continue;
        if (g.label != it->second) {
            g.label = it->second;
            ++changed;
        }
        g.needsReview = false;
    }
    return changed;
}

// ---------------------------------------------------------------------

namespace {

struct PreparedData {
    std::vector<symbolizer::SymbolicGadget> symbols;
    std::vector<int> labels;
    std::vector<gadget::GadgetDirection> directions;
    std::vector<std::string> programs;
    std::vector<std::string> ids;
};

PreparedData prepare(const gadget::GadgetDatabase& db,
                     const dataflow::CallTable& known, std::ostream& log,
                     bool requireLabels) {
    PreparedData out;
    size_t unlabeled = 0;
    for (const auto& g : db.gadgets) {
        if (requireLabels && g.label == gadget::Label::Unlabeled) {
            ++unlabeled;
            continue;
        }
        out.symbols.push_back(symbolizer::symbolize(g, known));
        out.labels.push_back(label_as_int(g.label));
        out.directions.push_back(g.direction);
        out.programs.push_back(g.program);
        out.ids.push_back(g.id);
    }
    if (unlabeled)
        log << "warning: " << unlabeled
            << " unlabeled gadgets excluded from training\n";
    return out;
}

std::vector<vectorizer::GadgetVector> encode_all(
    const PreparedData& data, const std::vector<size_t>& subset,
    const vectorizer::Vocabulary& vocab, int tau) {
    std::vector<vectorizer::GadgetVector> out;
    out.reserve(subset.size());
    for (size_t i : subset)
        out.push_back(vectorizer::encode(data.symbols[i], vocab, tau,
                                         data.directions[i],
                                         data.labels[i]));
    return out;
}

// Identical gadget texts share ids, so validation aligns by position
// rather than joining on detect()'s id field.
evalkit::ConfusionCounts confusion_of(
    const blstm::BlstmModel& model,
    const std::vector<vectorizer::GadgetVector>& items) {
    evalkit::ConfusionCounts c;
    for (size_t b = 0; b < items.size(); b += 64) {
        size_t e = std::min(items.size(), b + 64);
        std::vector<const nn::Matrix*> batch;
        for (size_t k = b; k < e; ++k) batch.push_back(&items[k].matrix);
        nn::Matrix probs =
            blstm::blstm_forward(model, batch, blstm::Mode::Infer);
        for (size_t k = b; k < e; ++k) {
            int pred = probs(static_cast<int>(k - b), 1) > 0.5 ? 1 : 0;
            int truth = items[k].label;
            if (pred == 1 && truth == 1) ++c.tp;
            else if (pred == 1 && truth == 0) ++c.fp;
            else if (pred == 0 && truth == 1) ++c.fn;
            else ++c.tn;
        }
    }
    return c;
}

blstm::TrainConfig train_config_of(const PipelineConfig& cfg) {
    blstm::TrainConfig tc;
    tc.batchSize = cfg.batchSize;
    tc.epochs = cfg.epochs;
    tc.dropout = cfg.dropout;
    tc.learningRate = cfg.learningRate;
    tc.clipNorm = cfg.clipNorm;
    tc.seed = cfg.seed;
    return tc;
}

blstm::BlstmModel fresh_model(const PipelineConfig& cfg, int layers) {
    auto model = blstm::BlstmModel::make(
        layers, cfg.hidden, cfg.embeddingDim, cfg.tau,
        cfg.denseWidth > 0 ? cfg.denseWidth : cfg.hidden,
        cfg.maxPool ? blstm::Pooling::MaxPool : blstm::Pooling::FinalStates,
        cfg.dropout);
    model.init_weights(cfg.seed);
    return model;
}

vectorizer::EmbeddingConfig embed_config_of(const PipelineConfig& cfg) {
    vectorizer::EmbeddingConfig ec;
    ec.dim = cfg.embeddingDim;
    ec.window = cfg.embedWindow;
    ec.negatives = cfg.embedNegatives;
    ec.epochs = cfg.embedEpochs;
    ec.seed = cfg.seed;
    return ec;
}

TrainOutput train_core(const PipelineConfig& cfg,
                       const gadget::GadgetDatabase& db, std::ostream& log,
                       int layers) {
    dataflow::CallTable known = load_known_library_names(cfg);
    PreparedData data = prepare(db, known, log, /*requireLabels=*/true);
    if (data.symbols.empty())
        throw blstm::EmptyDatabase("gadget database has no labeled gadgets");

    TrainOutput out;
    blstm::TrainConfig tc = train_config_of(cfg);

    std::vector<size_t> all(data.symbols.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = i;

    if (cfg.kfolds > 0) {
        out.vocab = vectorizer::train_embeddings(data.symbols,
                                                 embed_config_of(cfg));
        auto folds = evalkit::kfold(static_cast<int>(data.symbols.size()),
                                    cfg.kfolds, cfg.seed);
        for (size_t f = 0; f < folds.size(); ++f) {
            std::vector<size_t> tr(folds[f].train.begin(),
                                   folds[f].train.end());
            std::vector<size_t> va(folds[f].validation.begin(),
                                   folds[f].validation.end());
            auto trained = blstm::train(encode_all(data, tr, out.vocab,
                                                   cfg.tau),
                                        fresh_model(cfg, layers), tc, &log);
            FoldMetrics fm;
            fm.name = "fold-" + std::to_string(f + 1);
            fm.counts = confusion_of(trained.model,
                                     encode_all(data, va, out.vocab, cfg.tau));
            fm.metrics = evalkit::compute_metrics(fm.counts);
            out.folds.push_back(std::move(fm));
        }
        // Final model retrained on every fold.
        out.training = blstm::train(encode_all(data, all, out.vocab, cfg.tau),
                                    fresh_model(cfg, layers), tc, &log);
    } else if (cfg.holdout > 0.0) {
        auto split = evalkit::split_programs(data.programs,
                                             1.0 - cfg.holdout, cfg.seed);
        std::set<std::string> trainProgs(split.train.begin(),
                                         split.train.end());
        std::vector<size_t> tr, va;
        for (size_t i = 0; i < data.symbols.size(); ++i)
            (trainProgs.count(data.programs[i]) ? tr : va).push_back(i);
        std::vector<symbolizer::SymbolicGadget> trainSymbols;
        for (size_t i : tr) trainSymbols.push_back(data.symbols[i]);
        out.vocab =
            vectorizer::train_embeddings(trainSymbols, embed_config_of(cfg));
        out.training = blstm::train(encode_all(data, tr, out.vocab, cfg.tau),
                                    fresh_model(cfg, layers), tc, &log);
        FoldMetrics fm;
        fm.name = "holdout";
        fm.counts = confusion_of(out.training.model,
                                 encode_all(data, va, out.vocab, cfg.tau));
        fm.metrics = evalkit::compute_metrics(fm.counts);
        out.folds.push_back(std::move(fm));
    } else {
        out.vocab = vectorizer::train_embeddings(data.symbols,
                                                 embed_config_of(cfg));
        out.training = blstm::train(encode_all(data, all, out.vocab, cfg.tau),
                                    fresh_model(cfg, layers), tc, &log);
    }
    out.training.model.vocabHash = out.vocab.content_hash();
    return out;
}

}  // namespace

TrainOutput run_train(const PipelineConfig& cfg, std::ostream& log) {
    gadget::GadgetDatabase db = gadget::load_database(cfg.dbPath);
    if (db.gadgets.empty())
        throw blstm::EmptyDatabase("gadget database is empty: " + cfg.dbPath);
    TrainOutput out = train_core(cfg, db, log, cfg.layers);
    if (!cfg.vocabPath.empty()) {
        out.vocab.save(cfg.vocabPath);
        log << "vocabulary written to " << cfg.vocabPath << "\n";
    }
    if (!cfg.modelPath.empty()) {
        out.training.model.save(cfg.modelPath);
        log << "model written to " << cfg.modelPath << "\n";
    }
    if (!out.folds.empty()) {
        log << metrics_table(out.folds);
        if (!cfg.reportPath.empty())
            write_metrics_report(out.folds, cfg.reportPath);
    }
    return out;
}

DetectReport run_detect(const PipelineConfig& cfg, std::ostream& log) {
    blstm::BlstmModel model = blstm::BlstmModel::load(cfg.modelPath);
    vectorizer::Vocabulary vocab = vectorizer::Vocabulary::load(cfg.vocabPath);
    if (model.vocabHash != vocab.content_hash())
        throw ModelVocabMismatch(
            "model was trained with a different vocabulary (hash mismatch)");

    const std::string dir =
        cfg.targetsDir.empty() ? cfg.corpusDir : cfg.targetsDir;
    ExtractResult extracted = extract_gadgets(cfg, dir, log);
    for (const auto& d : extracted.diagnostics)
        log << "diagnostic: " << d << "\n";

    dataflow::CallTable known = load_known_library_names(cfg);
    PreparedData data =
        prepare(extracted.db, known, log, /*requireLabels=*/false);

    DetectReport report;
    report.gadgetsScanned = data.symbols.size();
    report.diagnostics = extracted.diagnostics;
    if (data.symbols.empty()) return report;

    std::vector<size_t> all(data.symbols.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = i;
    auto encoded = encode_all(data, all, vocab, model.tau);

    std::vector<const nn::Matrix*> batch;
    // Classify in input order, then sort findings by probability.
    for (size_t b = 0; b < encoded.size(); b += 64) {
        size_t e = std::min(encoded.size(), b + 64);
        batch.clear();
        for (size_t k = b; k < e; ++k) batch.push_back(&encoded[k].matrix);
        nn::Matrix probs =
            blstm::blstm_forward(model, batch, blstm::Mode::Infer);
        for (size_t k = b; k < e; ++k) {
            Finding f;
            f.gadgetId = data.ids[k];
            f.probability = probs(static_cast<int>(k - b), 1);
            f.label = f.probability > 0.5 ? 1 : 0;
            const auto& g = extracted.db.gadgets[k];
            f.callee = g.callee;
            for (const auto& st : g.statements)
                f.locations.emplace_back(st.file, st.line);
            report.findings.push_back(std::move(f));
        }
    }
    std::stable_sort(report.findings.begin(), report.findings.end(),
                     [](const Finding& a, const Finding& b) {
                         return a.probability > b.probability;
                     });

    if (!cfg.reportPath.empty()) {
        write_detect_report(report, cfg.reportPath);
        log << "report written to " << cfg.reportPath << "\n";
    }
    return report;
}

void write_detect_report(const DetectReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    out << "# id\tclass\tprobability\tkey-call\tlocations\n";
    for (const auto& f : report.findings) {
        out << f.gadgetId << '\t' << f.label << '\t' << std::setprecision(6)
            << std::fixed << f.probability << '\t' << f.callee << '\t';
        for (size_t i = 0; i < f.locations.size(); ++i) {
            if (i) out << ';';
            out << f.locations[i].first << ':' << f.locations[i].second;
        }
        out << '\n';
    }
}

EvalResult run_eval(const PipelineConfig& cfg,
                    const std::string& predictionsPath,
                    const std::string& truthPath, std::ostream& log) {
    (void)cfg;
    std::ifstream in(predictionsPath);
    if (!in)
        throw std::runtime_error("cannot open predictions: " +
                                 predictionsPath);
    std::map<std::string, int> predictions;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_fields(line, '\t');
        if (fields.size() < 2) continue;
        predictions.emplace(fields[0], std::stoi(fields[1]));
    }

    gadget::GadgetDatabase truthDb = gadget::load_database(truthPath);
    std::map<std::string, int> truth;
    for (const auto& g : truthDb.gadgets) {
        if (g.label == gadget::Label::Unlabeled) continue;
        truth.emplace(g.id, label_as_int(g.label));
    }

    std::vector<std::string> orphans;
    for (const auto& [id, p] : predictions)
        if (!truth.count(id)) orphans.push_back("prediction:" + id);
    for (const auto& [id, t] : truth)
        if (!predictions.count(id)) orphans.push_back("truth:" + id);
    if (!orphans.empty()) {
        std::string what = "gadget ids do not align (" +
                           std::to_string(orphans.size()) + " orphans)";
        throw IdMismatch(what, std::move(orphans));
    }

    EvalResult res;
    for (const auto& [id, p] : predictions) {
        int t = truth.at(id);
        if (p == 1 && t == 1) ++res.counts.tp;
        else if (p == 1 && t == 0) ++res.counts.fp;
        else if (p == 0 && t == 1) ++res.counts.fn;
        else ++res.counts.tn;
    }
    res.metrics = evalkit::compute_metrics(res.counts);

    FoldMetrics row;
    row.name = "eval";
    row.counts = res.counts;
    row.metrics = res.metrics;
    log << metrics_table({row});
    if (!cfg.reportPath.empty()) write_metrics_report({row}, cfg.reportPath);
    return res;
}

std::vector<FoldMetrics> run_sweep(const PipelineConfig& cfg,
                                   const std::vector<int>& layerCounts,
                                   std::ostream& log) {
    gadget::GadgetDatabase db = gadget::load_database(cfg.dbPath);
    if (db.gadgets.empty())
        throw blstm::EmptyDatabase("gadget database is empty: " + cfg.dbPath);
    std::vector<FoldMetrics> rows;
    for (int layers : layerCounts) {
        log << "=== layers=" << layers << " ===\n";
        TrainOutput out = train_core(cfg, db, log, layers);
        // Aggregate fold counts into one row per layer count.
        FoldMetrics row;
        row.name = "L=" + std::to_string(layers);
        for (const auto& f : out.folds) {
            row.counts.tp += f.counts.tp;
            row.counts.fp += f.counts.fp;
            row.counts.fn += f.counts.fn;
            row.counts.tn += f.counts.tn;
        }
        row.metrics = evalkit::compute_metrics(row.counts);
        rows.push_back(std::move(row));
    }
    log << metrics_table(rows);
    if (!cfg.reportPath.empty()) write_metrics_report(rows, cfg.reportPath);
    return rows;
}

void write_metrics_report(const std::vector<FoldMetrics>& rows,
                          const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    out << "# name\tTP\tFP\tFN\tTN\tFPR\tFNR\tTPR\tP\tF1\n";
    for (const auto& r : rows) {
        out << r.name << '\t' << r.counts.tp << '\t' << r.counts.fp << '\t'
            << r.counts.fn << '\t' << r.counts.tn << '\t'
            << evalkit::format_metric(r.metrics.fpr) << '\t'
            << evalkit::format_metric(r.metrics.fnr) << '\t'
            << evalkit::format_metric(r.metrics.tpr) << '\t'
            << evalkit::format_metric(r.metrics.precision) << '\t'
            << evalkit::format_metric(r.metrics.f1) << '\n';
    }
}

std::string metrics_table(const std::vector<FoldMetrics>& rows) {
    std::ostringstream out;
    out << std::left << std::setw(12) << "name" << std::right << std::setw(7)
        << "TP" << std::setw(7) << "FP" << std::setw(7) << "FN"
        << std::setw(7) << "TN" << std::setw(11) << "FPR" << std::setw(11)
        << "FNR" << std::setw(11) << "TPR" << std::setw(11) << "P"
        << std::setw(11) << "F1" << "\n";
    for (const auto& r : rows) {
        out << std::left << std::setw(12) << r.name << std::right
            << std::setw(7) << r.counts.tp << std::setw(7) << r.counts.fp
            << std::setw(7) << r.counts.fn << std::setw(7) << r.counts.tn
            << std::setw(11) << evalkit::format_metric(r.metrics.fpr)
            << std::setw(11) << evalkit::format_metric(r.metrics.fnr)
            << std::setw(11) << evalkit::format_metric(r.metrics.tpr)
            << std::setw(11) << evalkit::format_metric(r.metrics.precision)
            << std::setw(11) << evalkit::format_metric(r.metrics.f1) << "\n";
    }
    return out.str();
}

}  // namespace vuldet::pipeline
