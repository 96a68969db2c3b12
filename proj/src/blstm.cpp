#include "vuldet/blstm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace vuldet::blstm {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void ew_mul_add(const std::vector<double>& a, const Matrix& diag,
                std::vector<double>& out) {
    for (size_t k = 0; k < a.size(); ++k) out[k] += a[k] * diag[k];
}

constexpr char kMagic[4] = {'G', 'B', 'L', 'M'};
constexpr uint32_t kVersion = 1;

}  // namespace

void LstmLayerParams::allocate(int h, int dIn) {
    Wxi = Matrix(h, dIn);
    Wxf = Matrix(h, dIn);
    Wxo = Matrix(h, dIn);
    Wxc = Matrix(h, dIn);
    Whi = Matrix(h, h);
    Whf = Matrix(h, h);
    Who = Matrix(h, h);
    Whc = Matrix(h, h);
    Wci = Matrix(h, 1);
    Wcf = Matrix(h, 1);
    Wco = Matrix(h, 1);
    bi = Matrix(h, 1);
    bf = Matrix(h, 1);
    bo = Matrix(h, 1);
    bc = Matrix(h, 1);
}

BlstmModel BlstmModel::make(int layers, int hidden, int inputDim, int tau,
                            int denseWidth, Pooling pooling, double dropout) {
    BlstmModel m;
    m.layers = layers;
    m.hidden = hidden;
    m.inputDim = inputDim;
    m.tau = tau;
    m.denseWidth = denseWidth > 0 ? denseWidth : hidden;
    m.pooling = pooling;
    m.dropout = dropout;
    m.dirs.resize(layers);
    for (int l = 0; l < layers; ++l) {
        int dIn = l == 0 ? inputDim : 2 * hidden;
        m.dirs[l][0].allocate(hidden, dIn);
        m.dirs[l][1].allocate(hidden, dIn);
    }
    m.denseW = Matrix(m.denseWidth, 2 * hidden);
    m.denseB = Matrix(m.denseWidth, 1);
    m.softW = Matrix(2, m.denseWidth);
    m.softB = Matrix(2, 1);
    return m;
}

std::vector<std::pair<std::string, Matrix*>> BlstmModel::named_tensors() {
    std::vector<std::pair<std::string, Matrix*>> out;
    const char* gate[15] = {"Wxi", "Wxf", "Wxo", "Wxc", "Whi",
                            "Whf", "Who", "Whc", "Wci", "Wcf",
                            "Wco", "bi",  "bf",  "bo",  "bc"};
    for (size_t l = 0; l < dirs.size(); ++l) {
        for (int d = 0; d < 2; ++d) {
            LstmLayerParams& p = dirs[l][d];
            Matrix* ts[15] = {&p.Wxi, &p.Wxf, &p.Wxo, &p.Wxc, &p.Whi,
                              &p.Whf, &p.Who, &p.Whc, &p.Wci, &p.Wcf,
                              &p.Wco, &p.bi,  &p.bf,  &p.bo,  &p.bc};
            std::string prefix = "layer" + std::to_string(l) +
                                 (d == 0 ? ".fwd." : ".bwd.");
            for (int k = 0; k < 15; ++k)
                out.emplace_back(prefix + gate[k], ts[k]);
        }
    }
    out.emplace_back("dense.W", &denseW);
    out.emplace_back("dense.b", &denseB);
    out.emplace_back("softmax.W", &softW);
    out.emplace_back("softmax.b", &softB);
    return out;
}

std::vector<Matrix*> BlstmModel::tensors() {
    std::vector<Matrix*> out;
    for (auto& [name, t] : named_tensors()) out.push_back(t);
    return out;
}

std::vector<const Matrix*> BlstmModel::tensors() const {
    auto& self = const_cast<BlstmModel&>(*this);
    std::vector<const Matrix*> out;
    for (auto* t : self.tensors()) out.push_back(t);
    return out;
}

void BlstmModel::init_weights(uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto ends_with = [](const std::string& s, const std::string& suffix) {
        return s.size() >= suffix.size() &&
               s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    for (auto& [name, t] : named_tensors()) {
        bool isBias = ends_with(name, ".bi") || ends_with(name, ".bf") ||
                      ends_with(name, ".bo") || ends_with(name, ".bc") ||
                      ends_with(name, ".b");
        if (isBias) {
            // forget gate opens at 1, the rest start closed at 0
            t->fill(ends_with(name, ".bf") ? 1.0 : 0.0);
            continue;
        }
        int fanIn = t->cols() == 1 ? hidden : t->cols();
        double s = std::sqrt(1.0 / fanIn);
        std::uniform_real_distribution<double> dist(-s, s);
        for (size_t i = 0; i < t->size(); ++i) (*t)[i] = dist(rng);
    }
}

BlstmModel BlstmModel::zeros_like() const {
    BlstmModel z = make(layers, hidden, inputDim, tau, denseWidth, pooling,
                        dropout);
    z.vocabHash = vocabHash;
    return z;
}

// ---------------------------------------------------------------------

void lstm_cell_step(const LstmLayerParams& p, const double* x,
                    const double* hPrev, const double* cPrev, double* hOut,
                    double* cOut) {
    const int h = p.hidden();
    std::vector<double> preF(p.bf.data(), p.bf.data() + h);
    std::vector<double> preI(p.bi.data(), p.bi.data() + h);
    std::vector<double> preG(p.bc.data(), p.bc.data() + h);
    nn::matvec_add(p.Wxf, x, preF.data());
    nn::matvec_add(p.Whf, hPrev, preF.data());
    nn::matvec_add(p.Wxi, x, preI.data());
    nn::matvec_add(p.Whi, hPrev, preI.data());
    nn::matvec_add(p.Wxc, x, preG.data());
    nn::matvec_add(p.Whc, hPrev, preG.data());
    for (int k = 0; k < h; ++k) {
        preF[k] += p.Wcf[k] * cPrev[k];
        preI[k] += p.Wci[k] * cPrev[k];
    }
    std::vector<double> preO(p.bo.data(), p.bo.data() + h);
    nn::matvec_add(p.Wxo, x, preO.data());
    nn::matvec_add(p.Who, hPrev, preO.data());
    for (int k = 0; k < h; ++k) {
        double f = sigmoid(preF[k]);
        double i = sigmoid(preI[k]);
        double g = std::tanh(preG[k]);
        double c = f * cPrev[k] + i * g;
        cOut[k] = c;
        preO[k] += p.Wco[k] * c;  // output gate peeks at c_t
    }
    for (int k = 0; k < h; ++k) hOut[k] = sigmoid(preO[k]) * std::tanh(cOut[k]);
}

namespace {

// Full-cache step used by forward/backward.
void cell_step_cached(const LstmLayerParams& p, const double* x,
                      const double* hPrev, const double* cPrev,
                      StepCache& sc) {
    const int h = p.hidden();
    sc.i.assign(p.bi.data(), p.bi.data() + h);
    sc.f.assign(p.bf.data(), p.bf.data() + h);
    sc.o.assign(p.bo.data(), p.bo.data() + h);
    sc.g.assign(p.bc.data(), p.bc.data() + h);
    sc.c.assign(h, 0.0);
    sc.h.assign(h, 0.0);
    sc.tanhC.assign(h, 0.0);
    nn::matvec_add(p.Wxi, x, sc.i.data());
    nn::matvec_add(p.Whi, hPrev, sc.i.data());
    nn::matvec_add(p.Wxf, x, sc.f.data());
    nn::matvec_add(p.Whf, hPrev, sc.f.data());
    nn::matvec_add(p.Wxo, x, sc.o.data());
    nn::matvec_add(p.Who, hPrev, sc.o.data());
    nn::matvec_add(p.Wxc, x, sc.g.data());
    nn::matvec_add(p.Whc, hPrev, sc.g.data());
    for (int k = 0; k < h; ++k) {
        sc.i[k] = sigmoid(sc.i[k] + p.Wci[k] * cPrev[k]);
        sc.f[k] = sigmoid(sc.f[k] + p.Wcf[k] * cPrev[k]);
        sc.g[k] = std::tanh(sc.g[k]);
        sc.c[k] = sc.f[k] * cPrev[k] + sc.i[k] * sc.g[k];
        sc.o[k] = sigmoid(sc.o[k] + p.Wco[k] * sc.c[k]);
        sc.tanhC[k] = std::tanh(sc.c[k]);
        sc.h[k] = sc.o[k] * sc.tanhC[k];
    }
}

}  // namespace

Matrix blstm_forward(const BlstmModel& model,
                     const std::vector<const Matrix*>& batch, Mode mode,
                     std::mt19937_64* rng, ForwardCache* cache) {
    const int h = model.hidden;
    const int tau = model.tau;
    const bool train = mode == Mode::Train;
    if (train && model.dropout > 0.0 && rng == nullptr)
        throw std::invalid_argument("train-mode dropout needs an RNG");
    if (cache) {
        cache->mode = mode;
        cache->seqs.clear();
        cache->seqs.resize(batch.size());
    }

    Matrix probs(static_cast<int>(batch.size()), 2);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    for (size_t n = 0; n < batch.size(); ++n) {
        const Matrix& x = *batch[n];
        nn::require_shape(x, tau, model.inputDim, "blstm input");
        SeqCache local;
        SeqCache& sq = cache ? cache->seqs[n] : local;
        sq.layers.resize(model.layers);

        Matrix current = x;
        for (int l = 0; l < model.layers; ++l) {
            LayerCache& lc = sq.layers[l];
            lc.input = current;
            lc.output = Matrix(tau, 2 * h);
            for (int d = 0; d < 2; ++d) {
                const LstmLayerParams& p = model.dirs[l][d];
                lc.steps[d].resize(tau);
                std::vector<double> hPrev(h, 0.0), cPrev(h, 0.0);
                for (int s = 0; s < tau; ++s) {
                    int t = d == 0 ? s : tau - 1 - s;
                    StepCache& sc = lc.steps[d][t];
                    cell_step_cached(p, &lc.input(t, 0), hPrev.data(),
                                     cPrev.data(), sc);
                    hPrev = sc.h;
                    cPrev = sc.c;
                    for (int k = 0; k < h; ++k)
                        lc.output(t, d * h + k) = sc.h[k];
                }
            }
            if (train && model.dropout > 0.0) {
                lc.mask = Matrix(tau, 2 * h);
                const double keep = 1.0 - model.dropout;
                for (size_t i = 0; i < lc.mask.size(); ++i)
                    lc.mask[i] = unif(*rng) < keep ? 1.0 / keep : 0.0;
                for (size_t i = 0; i < lc.output.size(); ++i)
                    lc.output[i] *= lc.mask[i];
            }
            current = lc.output;
        }

        // Sequence feature: final forward state and final backward state
        // (the backward direction finishes at t = 0), or column max.
        sq.feature.assign(2 * h, 0.0);
        if (model.layers > 0) {
            const Matrix& out = sq.layers.back().output;
            if (model.pooling == Pooling::FinalStates) {
                for (int k = 0; k < h; ++k) sq.feature[k] = out(tau - 1, k);
                for (int k = 0; k < h; ++k)
                    sq.feature[h + k] = out(0, h + k);
            } else {
                sq.poolArg.assign(2 * h, 0);
                for (int j = 0; j < 2 * h; ++j) {
                    double best = out(0, j);
                    int arg = 0;
                    for (int t = 1; t < tau; ++t) {
                        if (out(t, j) > best) {
                            best = out(t, j);
                            arg = t;
                        }
                    }
                    sq.feature[j] = best;
                    sq.poolArg[j] = arg;
                }
            }
        }

        sq.dense.assign(model.denseWidth, 0.0);
        for (int k = 0; k < model.denseWidth; ++k) sq.dense[k] = model.denseB[k];
        nn::matvec_add(model.denseW, sq.feature.data(), sq.dense.data());
        for (auto& z : sq.dense) z = std::tanh(z);

        sq.logits.assign(2, 0.0);
        sq.logits[0] = model.softB[0];
        sq.logits[1] = model.softB[1];
        nn::matvec_add(model.softW, sq.dense.data(), sq.logits.data());

        double mx = std::max(sq.logits[0], sq.logits[1]);
        double e0 = std::exp(sq.logits[0] - mx);
        double e1 = std::exp(sq.logits[1] - mx);
        sq.probs = {e0 / (e0 + e1), e1 / (e0 + e1)};
        probs(static_cast<int>(n), 0) = sq.probs[0];
        probs(static_cast<int>(n), 1) = sq.probs[1];
    }
    return probs;
}

double cross_entropy(const Matrix& probs, const std::vector<int>& labels) {
    double loss = 0.0;
    for (size_t n = 0; n < labels.size(); ++n)
        loss -= std::log(std::max(
            probs(static_cast<int>(n), labels[n]), 1e-300));
    return labels.empty() ? 0.0 : loss / labels.size();
}

BlstmModel blstm_backward(const BlstmModel& model, const ForwardCache& cache,
                          const std::vector<int>& labels) {
    if (cache.seqs.size() != labels.size())
        throw std::invalid_argument("labels do not match cached batch");
    const int h = model.hidden;
    const int tau = model.tau;
    const double invN = labels.empty() ? 0.0 : 1.0 / labels.size();
    BlstmModel g = model.zeros_like();

    for (size_t n = 0; n < cache.seqs.size(); ++n) {
        const SeqCache& sq = cache.seqs[n];

        // Softmax + cross-entropy head.
        std::vector<double> dLogits = {sq.probs[0] * invN,
                                       sq.probs[1] * invN};
        dLogits[labels[n]] -= invN;
        nn::outer_add(dLogits.data(), sq.dense.data(), g.softW);
        g.softB[0] += dLogits[0];
        g.softB[1] += dLogits[1];

        std::vector<double> dDense(model.denseWidth, 0.0);
        nn::matvec_t_add(model.softW, dLogits.data(), dDense.data());
        for (int k = 0; k < model.denseWidth; ++k)
            dDense[k] *= 1.0 - sq.dense[k] * sq.dense[k];  // through tanh
        nn::outer_add(dDense.data(), sq.feature.data(), g.denseW);
        for (int k = 0; k < model.denseWidth; ++k) g.denseB[k] += dDense[k];

        std::vector<double> dFeature(2 * h, 0.0);
        nn::matvec_t_add(model.denseW, dDense.data(), dFeature.data());

        Matrix dOut(tau, 2 * h);
        if (model.layers > 0) {
            if (model.pooling == Pooling::FinalStates) {
                for (int k = 0; k < h; ++k) dOut(tau - 1, k) += dFeature[k];
                for (int k = 0; k < h; ++k)
                    dOut(0, h + k) += dFeature[h + k];
            } else {
                for (int j = 0; j < 2 * h; ++j)
                    dOut(sq.poolArg[j], j) += dFeature[j];
            }
        }

        for (int l = model.layers - 1; l >= 0; --l) {
            const LayerCache& lc = sq.layers[l];
            if (lc.mask.size() > 0)
                for (size_t i = 0; i < dOut.size(); ++i) dOut[i] *= lc.mask[i];

            const int dIn = model.dirs[l][0].input();
            Matrix dInput(tau, dIn);
            for (int d = 0; d < 2; ++d) {
                const LstmLayerParams& p = model.dirs[l][d];
                LstmLayerParams& gp = g.dirs[l][d];
                std::vector<double> dhCarry(h, 0.0), dcCarry(h, 0.0);
                std::vector<double> dh(h), dc(h), dpI(h), dpF(h), dpO(h),
                    dpG(h);
                // Iterate in reverse processing order; the "previous"
                // step of the backward direction lives at t + 1.
                for (int s = tau - 1; s >= 0; --s) {
                    int t = d == 0 ? s : tau - 1 - s;
                    int tPrev = d == 0 ? t - 1 : t + 1;
                    const StepCache& sc = lc.steps[d][t];
                    const bool hasPrev = s > 0;
                    const std::vector<double>* prevC =
                        hasPrev ? &lc.steps[d][tPrev].c : nullptr;
                    const std::vector<double>* prevH =
                        hasPrev ? &lc.steps[d][tPrev].h : nullptr;

                    for (int k = 0; k < h; ++k)
                        dh[k] = dOut(t, d * h + k) + dhCarry[k];
                    for (int k = 0; k < h; ++k) {
                        double doK = dh[k] * sc.tanhC[k];
                        dpO[k] = doK * sc.o[k] * (1.0 - sc.o[k]);
                        dc[k] = dh[k] * sc.o[k] *
                                    (1.0 - sc.tanhC[k] * sc.tanhC[k]) +
                                dcCarry[k] + dpO[k] * p.Wco[k];
                        double cPrevK = hasPrev ? (*prevC)[k] : 0.0;
                        dpF[k] = dc[k] * cPrevK * sc.f[k] * (1.0 - sc.f[k]);
                        dpI[k] = dc[k] * sc.g[k] * sc.i[k] * (1.0 - sc.i[k]);
                        dpG[k] = dc[k] * sc.i[k] * (1.0 - sc.g[k] * sc.g[k]);
                        dcCarry[k] = dc[k] * sc.f[k] + dpF[k] * p.Wcf[k] +
                                     dpI[k] * p.Wci[k];
                    }
                    std::fill(dhCarry.begin(), dhCarry.end(), 0.0);
                    nn::matvec_t_add(p.Whi, dpI.data(), dhCarry.data());
                    nn::matvec_t_add(p.Whf, dpF.data(), dhCarry.data());
                    nn::matvec_t_add(p.Who, dpO.data(), dhCarry.data());
                    nn::matvec_t_add(p.Whc, dpG.data(), dhCarry.data());

                    const double* xt = &lc.input(t, 0);
                    nn::outer_add(dpI.data(), xt, gp.Wxi);
                    nn::outer_add(dpF.data(), xt, gp.Wxf);
                    nn::outer_add(dpO.data(), xt, gp.Wxo);
                    nn::outer_add(dpG.data(), xt, gp.Wxc);
                    if (hasPrev) {
                        nn::outer_add(dpI.data(), prevH->data(), gp.Whi);
                        nn::outer_add(dpF.data(), prevH->data(), gp.Whf);
                        nn::outer_add(dpO.data(), prevH->data(), gp.Who);
                        nn::outer_add(dpG.data(), prevH->data(), gp.Whc);
                        for (int k = 0; k < h; ++k) {
                            gp.Wci[k] += dpI[k] * (*prevC)[k];
                            gp.Wcf[k] += dpF[k] * (*prevC)[k];
                        }
                    }
                    for (int k = 0; k < h; ++k) {
                        gp.Wco[k] += dpO[k] * sc.c[k];
                        gp.bi[k] += dpI[k];
                        gp.bf[k] += dpF[k];
                        gp.bo[k] += dpO[k];
                        gp.bc[k] += dpG[k];
                    }
                    double* dx = &dInput(t, 0);
                    nn::matvec_t_add(p.Wxi, dpI.data(), dx);
                    nn::matvec_t_add(p.Wxf, dpF.data(), dx);
                    nn::matvec_t_add(p.Wxo, dpO.data(), dx);
                    nn::matvec_t_add(p.Wxc, dpG.data(), dx);
                }
            }
            dOut = dInput;  // becomes the layer below's output gradient
        }
    }
    return g;
}

// ---------------------------------------------------------------------

void adamax_step(double* theta, const double* grad, double* m, double* u,
                 size_t n, long t, const TrainConfig& cfg) {
    const double correction =
        cfg.learningRate / (1.0 - std::pow(cfg.beta1, t));
    for (size_t k = 0; k < n; ++k) {
        m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * grad[k];
        u[k] = std::max(cfg.beta2 * u[k], std::fabs(grad[k]));
        theta[k] -= correction * m[k] / (u[k] + cfg.epsilon);
    }
}

void adamax_update(BlstmModel& params, const BlstmModel& grads,
                   AdamaxState& state, const TrainConfig& cfg) {
    ++state.step;
    auto pt = params.tensors();
    auto gt = const_cast<BlstmModel&>(grads).tensors();
    auto mt = state.m.tensors();
    auto ut = state.u.tensors();
    for (size_t i = 0; i < pt.size(); ++i) {
        adamax_step(pt[i]->data(), gt[i]->data(), mt[i]->data(),
                    ut[i]->data(), pt[i]->size(), state.step, cfg);
    }
}

void clip_gradients(BlstmModel& grads, double maxNorm) {
    if (maxNorm <= 0.0) return;
    double sq = 0.0;
    for (auto* t : grads.tensors())
        for (size_t i = 0; i < t->size(); ++i) sq += (*t)[i] * (*t)[i];
    double norm = std::sqrt(sq);
    if (norm <= maxNorm) return;
    double scale = maxNorm / norm;
    for (auto* t : grads.tensors())
        for (size_t i = 0; i < t->size(); ++i) (*t)[i] *= scale;
}

// ---------------------------------------------------------------------

TrainResult train(const std::vector<vectorizer::GadgetVector>& data,
                  BlstmModel model, const TrainConfig& cfg, std::ostream* log,
                  const EpochCallback& onEpoch) {
    if (data.empty()) throw EmptyDatabase("no gadget vectors to train on");
    {
        bool any0 = false, any1 = false;
        for (const auto& d : data) (d.label ? any1 : any0) = true;
        if ((!any0 || !any1) && log)
            *log << "warning: training database contains a single class\n";
    }

    std::mt19937_64 rng(cfg.seed);
    std::vector<size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    AdamaxState state;
    state.m = model.zeros_like();
    state.u = model.zeros_like();

    TrainResult res;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double lossSum = 0.0;
        size_t seen = 0;
        for (size_t b = 0; b < order.size(); b += cfg.batchSize) {
            size_t e = std::min(order.size(),
                                b + static_cast<size_t>(cfg.batchSize));
            std::vector<const Matrix*> batch;
            std::vector<int> labels;
            for (size_t k = b; k < e; ++k) {
                batch.push_back(&data[order[k]].matrix);
                labels.push_back(data[order[k]].label);
            }
            ForwardCache cache;
            Matrix probs =
                blstm_forward(model, batch, Mode::Train, &rng, &cache);
            lossSum += cross_entropy(probs, labels) * labels.size();
            seen += labels.size();
            BlstmModel grads = blstm_backward(model, cache, labels);
            clip_gradients(grads, cfg.clipNorm);
            adamax_update(model, grads, state, cfg);
        }
        double epochLoss = seen ? lossSum / seen : 0.0;
        res.epochLoss.push_back(epochLoss);
        if (log)
            *log << "epoch " << epoch << "/" << cfg.epochs
                 << " loss=" << epochLoss << "\n";
        if (onEpoch) onEpoch(epoch, epochLoss, model);
    }
    res.model = std::move(model);
    return res;
}

std::vector<Detection> detect(
    const BlstmModel& model,
    const std::vector<vectorizer::GadgetVector>& items) {
    std::vector<Detection> out;
    out.reserve(items.size());
    const size_t kChunk = 64;
    for (size_t b = 0; b < items.size(); b += kChunk) {
        size_t e = std::min(items.size(), b + kChunk);
        std::vector<const Matrix*> batch;
        for (size_t k = b; k < e; ++k) batch.push_back(&items[k].matrix);
        Matrix probs = blstm_forward(model, batch, Mode::Infer);
        for (size_t k = b; k < e; ++k) {
            Detection d;
            d.gadgetId = items[k].gadgetId;
            d.probability = probs(static_cast<int>(k - b), 1);
            d.label = d.probability > 0.5 ? 1 : 0;  // exact tie -> 0
            out.push_back(std::move(d));
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Detection& a, const Detection& b) {
                         return a.probability > b.probability;
                     });
    return out;
}

// ---------------------------------------------------------------------
// Persistence.

std::string BlstmModel::serialize() const {
    std::ostringstream out(std::ios::binary);
    auto put = [&](const void* p, size_t n) {
        out.write(static_cast<const char*>(p),
                  static_cast<std::streamsize>(n));
    };
    put(kMagic, 4);
    put(&kVersion, 4);
    int32_t header[6] = {static_cast<int32_t>(layers),
                         static_cast<int32_t>(hidden),
                         static_cast<int32_t>(inputDim),
                         static_cast<int32_t>(tau),
                         static_cast<int32_t>(denseWidth),
                         static_cast<int32_t>(pooling == Pooling::MaxPool)};
    put(header, sizeof header);
    put(&dropout, sizeof dropout);
    put(&vocabHash, sizeof vocabHash);
    for (const Matrix* t : tensors()) put(t->data(), t->size() * sizeof(double));
    return out.str();
}

void BlstmModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model: " + path);
    std::string bytes = serialize();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

BlstmModel BlstmModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model: " + path);
    auto get = [&](void* p, size_t n) {
        in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!in) throw std::runtime_error(path + ": truncated model file");
    };
    char magic[4];
    get(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error(path + ": not a model file");
    uint32_t version = 0;
    get(&version, 4);
    if (version != kVersion)
        throw std::runtime_error(path + ": unsupported model version " +
                                 std::to_string(version));
    int32_t header[6];
    get(header, sizeof header);
    double dropout = 0.5;
    uint64_t vocabHash = 0;
    get(&dropout, sizeof dropout);
    get(&vocabHash, sizeof vocabHash);
    BlstmModel m = make(header[0], header[1], header[2], header[3], header[4],
                        header[5] ? Pooling::MaxPool : Pooling::FinalStates,
                        dropout);
    m.vocabHash = vocabHash;
    for (Matrix* t : m.tensors()) get(t->data(), t->size() * sizeof(double));
    return m;
}

}  // namespace vuldet::blstm
