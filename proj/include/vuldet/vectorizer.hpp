#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "vuldet/gadget.hpp"
#include "vuldet/matrix.hpp"
#include "vuldet/symbolizer.hpp"

namespace vuldet::vectorizer {

struct EmptyCorpus : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Token vocabulary with a distributed-representation embedding table.
// Index 0 is PAD (embedding fixed to the zero vector), index 1 is UNK
// (the mean of all trained embeddings).
struct Vocabulary {
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;

    std::vector<std::string> tokens;  // [0]="<pad>", [1]="<unk>"
    std::unordered_map<std::string, int> index;
    int dim = 0;
    nn::Matrix table;  // tokens.size() x dim

    int lookup(const std::string& token) const {
        auto it = index.find(token);
        return it == index.end() ? kUnk : it->second;
    }
    size_t size() const { return tokens.size(); }

    void save(const std::string& path) const;
    static Vocabulary load(const std::string& path);
    uint64_t content_hash() const;
};

struct EmbeddingConfig {
    int dim = 30;
    int window = 5;
    int negatives = 5;
    int epochs = 5;
    int minCount = 1;  // rarer tokens fall back to UNK
    double alpha = 0.025;
    double minAlpha = 1e-4;
    uint64_t seed = 1;
};

/// Skip-gram with negative sampling over token sequences.  Deterministic
/// for a fixed seed (single-threaded, one RNG stream).
Vocabulary train_embeddings(const std::vector<std::vector<std::string>>& corpus,
                            const EmbeddingConfig& config);

/// Convenience overload over symbolic gadgets.
Vocabulary train_embeddings(
    const std::vector<symbolizer::SymbolicGadget>& corpus,
    const EmbeddingConfig& config);

// Fixed-size network input: tau rows of d-dimensional token embeddings.
struct GadgetVector {
    std::string gadgetId;
    nn::Matrix matrix;  // tau x dim
    int label = 0;
    gadget::GadgetDirection direction = gadget::GadgetDirection::Backward;
};

/// Maps the gadget's token sequence onto exactly `tau` embedding rows.
/// Backward and mixed-backward gadgets pad or truncate at the beginning
/// (keeping the key call at the end); forward gadgets at the end.
GadgetVector encode(const symbolizer::SymbolicGadget& g,
                    const Vocabulary& vocab, int tau,
                    gadget::GadgetDirection direction,
                    int label = 0);

}  // namespace vuldet::vectorizer
