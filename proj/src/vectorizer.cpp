#include "vuldet/vectorizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <random>

namespace vuldet::vectorizer {

namespace {

constexpr char kMagic[4] = {'G', 'V', 'O', 'C'};
constexpr uint32_t kVersion = 1;

void write_bytes(std::ostream& out, const void* p, size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
void read_bytes(std::istream& in, void* p, size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in) throw std::runtime_error("truncated vocabulary file");
}

}  // namespace

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write vocabulary: " + path);
    write_bytes(out, kMagic, 4);
    write_bytes(out, &kVersion, 4);
    uint64_t n = tokens.size();
    uint64_t d = static_cast<uint64_t>(dim);
    write_bytes(out, &n, 8);
    write_bytes(out, &d, 8);
    for (const auto& t : tokens) {
        uint32_t len = static_cast<uint32_t>(t.size());
        write_bytes(out, &len, 4);
        write_bytes(out, t.data(), t.size());
    }
    write_bytes(out, table.data(), table.size() * sizeof(double));
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open vocabulary: " + path);
    char magic[4];
    read_bytes(in, magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error(path + ": not a vocabulary file");
    uint32_t version = 0;
    read_bytes(in, &version, 4);
    if (version != kVersion)
        throw std::runtime_error(path + ": unsupported vocabulary version " +
                                 std::to_string(version));
    uint64_t n = 0, d = 0;
    read_bytes(in, &n, 8);
    read_bytes(in, &d, 8);
    Vocabulary v;
    v.dim = static_cast<int>(d);
    v.tokens.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
        uint32_t len = 0;
        read_bytes(in, &len, 4);
        std::string t(len, '\0');
        if (len) read_bytes(in, t.data(), len);
        v.index[t] = static_cast<int>(i);
        v.tokens.push_back(std::move(t));
    }
    v.table = nn::Matrix(static_cast<int>(n), v.dim);
    read_bytes(in, v.table.data(), v.table.size() * sizeof(double));
    return v;
}

uint64_t Vocabulary::content_hash() const {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&](const void* p, size_t n) {
        const unsigned char* b = static_cast<const unsigned char*>(p);
        for (size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    for (const auto& t : tokens) mix(t.data(), t.size() + 1);
    mix(&dim, sizeof dim);
    mix(table.data(), table.size() * sizeof(double));
    return h;
}

Vocabulary train_embeddings(
    const std::vector<std::vector<std::string>>& corpus,
    const EmbeddingConfig& cfg) {
    if (corpus.empty()) throw EmptyCorpus("embedding corpus is empty");
    if (cfg.dim < 1) throw std::invalid_argument("embedding dim must be >= 1");

    // Vocabulary by frequency (descending, then lexicographic), after
    // the PAD/UNK specials.
    std::map<std::string, long> counts;
    size_t totalWords = 0;
    for (const auto& seq : corpus) {
        for (const auto& t : seq) {
            ++counts[t];
            ++totalWords;
        }
    }
    if (totalWords == 0) throw EmptyCorpus("embedding corpus has no tokens");

    std::vector<std::pair<std::string, long>> byFreq;
    for (auto& [t, c] : counts)
        if (c >= cfg.minCount) byFreq.emplace_back(t, c);
    std::sort(byFreq.begin(), byFreq.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });

    Vocabulary v;
    v.dim = cfg.dim;
    v.tokens = {"<pad>", "<unk>"};
    for (auto& [t, c] : byFreq) v.tokens.push_back(t);
    for (size_t i = 0; i < v.tokens.size(); ++i)
        v.index[v.tokens[i]] = static_cast<int>(i);

    const int vocabN = static_cast<int>(v.tokens.size());
    const int d = cfg.dim;
    const int first = 2;  // first trainable index

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> initDist(-0.5 / d, 0.5 / d);

    std::vector<double> syn0(static_cast<size_t>(vocabN) * d, 0.0);
    std::vector<double> syn1(static_cast<size_t>(vocabN) * d, 0.0);
    for (int w = first; w < vocabN; ++w)
        for (int k = 0; k < d; ++k)
            syn0[static_cast<size_t>(w) * d + k] = initDist(rng);

    // Negative-sampling distribution: unigram^0.75, cumulative search.
    std::vector<double> cumulative;
    std::vector<int> sampleIds;
    {
        double total = 0.0;
        for (int w = first; w < vocabN; ++w) {
            total += std::pow(
                static_cast<double>(counts[v.tokens[w]]), 0.75);
            cumulative.push_back(total);
            sampleIds.push_back(w);
        }
        for (auto& c : cumulative) c /= total;
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto draw_negative = [&]() {
        double r = unif(rng);
        size_t lo =
            std::lower_bound(cumulative.begin(), cumulative.end(), r) -
            cumulative.begin();
        if (lo >= sampleIds.size()) lo = sampleIds.size() - 1;
        return sampleIds[lo];
    };

    // Sentences as index sequences; tokens under min-count train as UNK.
    std::vector<std::vector<int>> sentences;
    sentences.reserve(corpus.size());
    for (const auto& seq : corpus) {
        std::vector<int> ids;
        ids.reserve(seq.size());
        for (const auto& t : seq) ids.push_back(v.lookup(t));
        sentences.push_back(std::move(ids));
    }

    const size_t trainTotal =
        static_cast<size_t>(cfg.epochs) * std::max<size_t>(totalWords, 1);
    size_t processed = 0;
    std::vector<double> accum(d);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (const auto& sent : sentences) {
            for (size_t pos = 0; pos < sent.size(); ++pos) {
                double alpha = std::max(
                    cfg.minAlpha,
                    cfg.alpha * (1.0 - static_cast<double>(processed) /
                                           (trainTotal + 1)));
                ++processed;
                int center = sent[pos];
                // dynamic window, word2vec style
                int b = static_cast<int>(rng() % cfg.window);
                int lo = static_cast<int>(pos) - cfg.window + b;
                int hi = static_cast<int>(pos) + cfg.window - b;
                for (int j = std::max(0, lo);
                     j <= std::min<int>(static_cast<int>(sent.size()) - 1, hi);
                     ++j) {
                    if (j == static_cast<int>(pos)) continue;
                    int context = sent[j];
                    double* vin = &syn0[static_cast<size_t>(context) * d];
                    std::fill(accum.begin(), accum.end(), 0.0);
                    // positive sample plus cfg.negatives negatives
                    for (int s = 0; s <= cfg.negatives; ++s) {
                        int target;
                        double labelVal;
                        if (s == 0) {
                            target = center;
                            labelVal = 1.0;
                        } else {
                            target = draw_negative();
                            if (target == center) continue;
                            labelVal = 0.0;
                        }
                        double* vout = &syn1[static_cast<size_t>(target) * d];
                        double dot = 0.0;
                        for (int k = 0; k < d; ++k) dot += vin[k] * vout[k];
                        double f = 1.0 / (1.0 + std::exp(-dot));
                        double gAlpha = (labelVal - f) * alpha;
                        for (int k = 0; k < d; ++k) {
                            accum[k] += gAlpha * vout[k];
                            vout[k] += gAlpha * vin[k];
                        }
                    }
                    for (int k = 0; k < d; ++k) vin[k] += accum[k];
                }
            }
        }
    }

    v.table = nn::Matrix(vocabN, d);
    for (int w = first; w < vocabN; ++w)
        for (int k = 0; k < d; ++k)
            v.table(w, k) = syn0[static_cast<size_t>(w) * d + k];
    // PAD row stays zero; UNK is the mean of all trained embeddings so
    // unseen tokens do not collide with padding.
    if (vocabN > first) {
        for (int k = 0; k < d; ++k) {
            double sum = 0.0;
            for (int w = first; w < vocabN; ++w) sum += v.table(w, k);
            v.table(Vocabulary::kUnk, k) = sum / (vocabN - first);
        }
    }
    return v;
}

Vocabulary train_embeddings(
    const std::vector<symbolizer::SymbolicGadget>& corpus,
    const EmbeddingConfig& config) {
    std::vector<std::vector<std::string>> seqs;
    seqs.reserve(corpus.size());
    for (const auto& g : corpus) seqs.push_back(g.token_texts());
    return train_embeddings(seqs, config);
}

GadgetVector encode(const symbolizer::SymbolicGadget& g,
                    const Vocabulary& vocab, int tau,
                    gadget::GadgetDirection direction, int label) {
    if (tau < 1) throw std::invalid_argument("tau must be >= 1");
    GadgetVector out;
    out.gadgetId = g.gadgetId;
    out.label = label;
    out.direction = direction;
    out.matrix = nn::Matrix(tau, vocab.dim);

    std::vector<int> ids;
    ids.reserve(g.tokens.size());
    for (const auto& t : g.tokens) ids.push_back(vocab.lookup(t.text));

    const bool backwardFamily = direction != gadget::GadgetDirection::Forward;
    const int n = static_cast<int>(ids.size());
    int srcBegin = 0, dstBegin = 0, count = n;
    if (n > tau) {
        // Backward gadgets keep the tail (the key call is the last
        // statement); forward gadgets keep the head.
        count = tau;
        srcBegin = backwardFamily ? n - tau : 0;
    } else if (n < tau) {
        dstBegin = backwardFamily ? tau - n : 0;
    }
    for (int i = 0; i < count; ++i) {
        int id = ids[srcBegin + i];
        for (int k = 0; k < vocab.dim; ++k)
            out.matrix(dstBegin + i, k) = vocab.table(id, k);
    }
    // Truncation must preserve the key-call end of the sequence.
    if (n > 0 && count > 0) {
        if (backwardFamily) {
            assert(ids[srcBegin + count - 1] == ids[n - 1]);
        } else {
            assert(ids[srcBegin] == ids[0]);
        }
    }
    return out;
}

}  // namespace vuldet::vectorizer
