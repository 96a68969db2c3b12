#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vuldet/matrix.hpp"
#include "vuldet/vectorizer.hpp"

namespace vuldet::blstm {

using nn::Matrix;

struct EmptyDatabase : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One direction of one layer.  Peephole weights are element-wise
// vectors: the input and forget gates peek at c_{t-1}, the output gate
// at c_t.
struct LstmLayerParams {
    Matrix Wxi, Wxf, Wxo, Wxc;  // h x d_in
    Matrix Whi, Whf, Who, Whc;  // h x h
    Matrix Wci, Wcf, Wco;       // h x 1
    Matrix bi, bf, bo, bc;      // h x 1

    int hidden() const { return Wxi.rows(); }
    int input() const { return Wxi.cols(); }
    void allocate(int h, int dIn);
};

enum class Pooling { FinalStates, MaxPool };
enum class Mode { Train, Infer };

struct TrainConfig {
    int batchSize = 64;
    int epochs = 4;
    double dropout = 0.5;
    double learningRate = 1.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    uint64_t seed = 1;
    double clipNorm = 5.0;  // global-norm gradient clip; 0 disables
};

struct BlstmModel {
    int layers = 0;
    int hidden = 0;
    int inputDim = 0;
    int tau = 0;
    int denseWidth = 0;
    Pooling pooling = Pooling::FinalStates;
    double dropout = 0.5;
    uint64_t vocabHash = 0;

    std::vector<std::array<LstmLayerParams, 2>> dirs;  // [layer][fwd,bwd]
    Matrix denseW, denseB;  // k x 2h, k x 1
    Matrix softW, softB;    // 2 x k, 2 x 1

    static BlstmModel make(int layers, int hidden, int inputDim, int tau,
                           int denseWidth = -1,
                           Pooling pooling = Pooling::FinalStates,
                           double dropout = 0.5);
    /// Uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)) weights, forget-gate
    /// bias 1, all other biases 0.
    void init_weights(uint64_t seed);
    BlstmModel zeros_like() const;

    // All parameter tensors in the fixed serialization order.
    std::vector<Matrix*> tensors();
    std::vector<const Matrix*> tensors() const;
    std::vector<std::pair<std::string, Matrix*>> named_tensors();

    void save(const std::string& path) const;
    static BlstmModel load(const std::string& path);
    std::string serialize() const;  // byte-exact container image
};

/// One peephole-LSTM cell step.  All pointers are vectors of the layer's
/// hidden size except x (the layer's input size).
void lstm_cell_step(const LstmLayerParams& p, const double* x,
                    const double* hPrev, const double* cPrev, double* hOut,
                    double* cOut);

struct StepCache {
    std::vector<double> i, f, o, g, c, h, tanhC;
};
struct LayerCache {
    Matrix input;                           // tau x d_in (post-dropout below)
    std::array<std::vector<StepCache>, 2> steps;  // indexed by time t
    Matrix output;                          // tau x 2h, after dropout
    Matrix mask;                            // dropout mask (empty = ones)
};
struct SeqCache {
    std::vector<LayerCache> layers;
    std::vector<double> feature, dense, logits, probs;
    std::vector<int> poolArg;  // max-pool argmax per feature column
};
struct ForwardCache {
    Mode mode = Mode::Infer;
    std::vector<SeqCache> seqs;
};

/// Runs the network over a batch of tau x d inputs and returns the n x 2
/// softmax probabilities.  Train mode applies inverted dropout to every
/// BLSTM layer output (rng required); Infer mode needs no scaling.
Matrix blstm_forward(const BlstmModel& model,
                     const std::vector<const Matrix*>& batch, Mode mode,
                     std::mt19937_64* rng = nullptr,
                     ForwardCache* cache = nullptr);

/// Gradients of the mean cross-entropy loss for every parameter, via
/// backpropagation through time over all steps and both directions.
BlstmModel blstm_backward(const BlstmModel& model, const ForwardCache& cache,
                          const std::vector<int>& labels);

double cross_entropy(const Matrix& probs, const std::vector<int>& labels);

// ADAMAX: first moment with bias correction, infinity-norm second moment.
struct AdamaxState {
    BlstmModel m, u;
    long step = 0;
};

/// Core update rule on raw spans; exposed for direct verification.
void adamax_step(double* theta, const double* grad, double* m, double* u,
                 size_t n, long t, const TrainConfig& cfg);
void adamax_update(BlstmModel& params, const BlstmModel& grads,
                   AdamaxState& state, const TrainConfig& cfg);

void clip_gradients(BlstmModel& grads, double maxNorm);

struct TrainResult {
    BlstmModel model;
    std::vector<double> epochLoss;
};

using EpochCallback =
    std::function<void(int epoch, double loss, const BlstmModel& model)>;

/// Minibatch training over encoded gadget vectors.  Deterministic for a
/// fixed seed: one RNG stream drives the shuffle and the dropout masks.
/// A single-class dataset trains with a warning on `log`.
TrainResult train(const std::vector<vectorizer::GadgetVector>& data,
                  BlstmModel model, const TrainConfig& cfg,
                  std::ostream* log = nullptr,
                  const EpochCallback& onEpoch = {});

struct Detection {
    std::string gadgetId;
    int label = 0;           // argmax class; exact 0.5 resolves to 0
    double probability = 0;  // P(vulnerable)
};

/// Classifies encoded gadgets, most probable vulnerabilities first.
std::vector<Detection> detect(const BlstmModel& model,
                              const std::vector<vectorizer::GadgetVector>& items);

}  // namespace vuldet::blstm
