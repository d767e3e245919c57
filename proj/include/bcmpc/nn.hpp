#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "bcmpc/cipg.hpp"
#include "bcmpc/common.hpp"
#include "bcmpc/schedule.hpp"
#include "bcmpc/version.hpp"

namespace bcmpc {

// ---------------------------------------------------------------------------
// Input tensors. `steps` is horizon x channels row-major in natural time
// order; the recurrent layer consumes it reversed (future first).
// ---------------------------------------------------------------------------

struct SampleTensors {
    std::vector<double> steps;
    std::vector<double> stat;
    std::vector<double> hist;
    int horizon = 0;
    int channels = 0;
};

inline SampleTensors tensors_from_features(const FeatureVector& fv) {
    SampleTensors t;
    t.horizon = fv.horizon;
    t.channels = kStepChannels;
    t.steps.resize(static_cast<std::size_t>(fv.horizon) * kStepChannels);
    for (int j = 0; j < fv.horizon; ++j)
        for (int c = 0; c < kStepChannels; ++c)
            t.steps[static_cast<std::size_t>(j) * kStepChannels + c] = fv.step_channel(j, c);
    t.stat.assign(fv.pi1.begin(), fv.pi1.end());
    t.hist.assign(fv.pi6.begin(), fv.pi6.end());
    return t;
}

// ---------------------------------------------------------------------------
// Frozen affine feature conditioning. CIPG features scale only pi1/pi2/pi3
// (the already-normalized groupings pass through); the raw representation
// standardizes every channel.
// ---------------------------------------------------------------------------

struct FeatureScaler {
    std::vector<double> step_mean, step_std;
    std::vector<double> stat_mean, stat_std;
    bool fitted = false;

    static FeatureScaler identity(int channels, int n_static) {
        FeatureScaler s;
        s.step_mean.assign(channels, 0.0);
        s.step_std.assign(channels, 1.0);
        s.stat_mean.assign(n_static, 0.0);
        s.stat_std.assign(n_static, 1.0);
        s.fitted = true;
        return s;
    }

    /// Fit mean/std per channel; `scaled_step_channels` selects which step
    /// channels get standardized (the rest keep the identity map).
    static FeatureScaler fit(const std::vector<SampleTensors>& rows,
                             const std::vector<int>& scaled_step_channels,
                             bool scale_static) {
        if (rows.empty()) throw std::invalid_argument("FeatureScaler: no data");
        const int C = rows.front().channels;
        const int S = static_cast<int>(rows.front().stat.size());
        FeatureScaler s = identity(C, S);
        for (int c : scaled_step_channels) {
            double sum = 0, sum2 = 0;
            long n = 0;
            for (const auto& r : rows)
                for (int j = 0; j < r.horizon; ++j) {
                    const double v = r.steps[static_cast<std::size_t>(j) * C + c];
                    sum += v;
                    sum2 += v * v;
                    ++n;
                }
            const double mean = sum / static_cast<double>(n);
            const double var = std::max(0.0, sum2 / static_cast<double>(n) - mean * mean);
            s.step_mean[c] = mean;
            s.step_std[c] = var > 1e-18 ? std::sqrt(var) : 1.0;
        }
        if (scale_static) {
            for (int k = 0; k < S; ++k) {
                double sum = 0, sum2 = 0;
                for (const auto& r : rows) {
                    sum += r.stat[k];
                    sum2 += r.stat[k] * r.stat[k];
                }
                const double n = static_cast<double>(rows.size());
                const double mean = sum / n;
                const double var = std::max(0.0, sum2 / n - mean * mean);
                s.stat_mean[k] = mean;
                s.stat_std[k] = var > 1e-18 ? std::sqrt(var) : 1.0;
            }
        }
        return s;
    }

    SampleTensors apply(const SampleTensors& in) const {
        SampleTensors out = in;
        const int C = in.channels;
        for (int j = 0; j < in.horizon; ++j)
            for (int c = 0; c < C; ++c) {
                auto& v = out.steps[static_cast<std::size_t>(j) * C + c];
                v = (v - step_mean[c]) / step_std[c];
            }
        for (std::size_t k = 0; k < out.stat.size(); ++k)
            out.stat[k] = (out.stat[k] - stat_mean[k]) / stat_std[k];
        return out;
    }
};

/// Step channels standardized for the CIPG representation: pi2 and pi3.
inline const std::vector<int>& cipg_scaled_channels() {
    static const std::vector<int> ch = {0, 1, 2, 3, 4};
    return ch;
}

// ---------------------------------------------------------------------------
// Numerics shared by both network types.
// ---------------------------------------------------------------------------

namespace nn_detail {

inline double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

inline double softplus(double s) {
    if (s > 30.0) return s;
    if (s < -30.0) return std::exp(s);
    return std::log1p(std::exp(s));
}

/// Binary cross entropy expressed against the logit (stable).
inline double bce_from_logit(double logit, int label) {
    return softplus(logit) - label * logit;
}

inline double clamp_prob(double p) { return std::min(1.0 - 1e-12, std::max(1e-12, p)); }

inline void glorot_fill(std::vector<double>& theta, std::size_t at, int rows, int cols,
                        std::mt19937_64& rng) {
    const double lim = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> dist(-lim, lim);
    for (int i = 0; i < rows * cols; ++i) theta[at + static_cast<std::size_t>(i)] = dist(rng);
}

}  // namespace nn_detail

// ---------------------------------------------------------------------------
// Reverse-time GRU policy network. The per-step groupings flow through one
// GRU layer from the end of the horizon back to the present; the final
// hidden state is concatenated with a 1-node compression of the control
// history and the static groupings, then passes through a dense ReLU layer
// and a sigmoid output.
// ---------------------------------------------------------------------------

struct GruSpec {
    int channels = kStepChannels;
    int hidden = 26;
    int dense = 25;
    int n_static = 4;
    int n_hist = 3;

    int concat() const { return hidden + 1 + n_static; }

    // flat parameter layout
    int wz() const { return 0; }
    int uz() const { return wz() + hidden * channels; }
    int bz() const { return uz() + hidden * hidden; }
    int wr() const { return bz() + hidden; }
    int ur() const { return wr() + hidden * channels; }
    int br() const { return ur() + hidden * hidden; }
    int wc() const { return br() + hidden; }
    int uc() const { return wc() + hidden * channels; }
    int bc() const { return uc() + hidden * hidden; }
    int wh() const { return bc() + hidden; }
    int bh() const { return wh() + n_hist; }
    int w1() const { return bh() + 1; }
    int b1() const { return w1() + dense * concat(); }
    int w2() const { return b1() + dense; }
    int b2() const { return w2() + dense; }
    int total() const { return b2() + 1; }
};

struct GruCache {
    // per consumed step (index tau: tau=0 is the last horizon step)
    std::vector<double> x, h_prev, z, r, c, hr;
    std::vector<double> h_final, hist_in, concat, a1;
    double hist_pre = 0, hist_out = 0, logit = 0;
    int n_steps = 0;
};

class GruAgent {
  public:
    GruSpec spec;
    FeatureScaler scaler;
    std::string feature_schema = kFeatureSchema;
    int trained_horizon = 0;
    std::vector<double> theta;

    GruAgent() = default;
    explicit GruAgent(const GruSpec& s) : spec(s) {
        theta.assign(static_cast<std::size_t>(spec.total()), 0.0);
        scaler = FeatureScaler::identity(spec.channels, spec.n_static);
    }

    void init_weights(std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        using nn_detail::glorot_fill;
        glorot_fill(theta, spec.wz(), spec.hidden, spec.channels, rng);
        glorot_fill(theta, spec.uz(), spec.hidden, spec.hidden, rng);
        glorot_fill(theta, spec.wr(), spec.hidden, spec.channels, rng);
        glorot_fill(theta, spec.ur(), spec.hidden, spec.hidden, rng);
        glorot_fill(theta, spec.wc(), spec.hidden, spec.channels, rng);
        glorot_fill(theta, spec.uc(), spec.hidden, spec.hidden, rng);
        glorot_fill(theta, spec.wh(), 1, spec.n_hist, rng);
        glorot_fill(theta, spec.w1(), spec.dense, spec.concat(), rng);
        glorot_fill(theta, spec.w2(), 1, spec.dense, rng);
        // biases stay zero
    }

    /// Probability that the heat pump should be on; input is unscaled.
    double forward(const SampleTensors& raw) const {
        check_shape(raw);
        SampleTensors t = scaler.apply(raw);
        return nn_detail::clamp_prob(nn_detail::sigmoid(forward_scaled(t, nullptr)));
    }

    double forward(const FeatureVector& fv) const { return forward(tensors_from_features(fv)); }

    /// Logit on pre-scaled tensors; fills the cache when given.
    double forward_scaled(const SampleTensors& t, GruCache* cache) const {
        const int H = spec.hidden, C = spec.channels, N = t.horizon;
        const double* th = theta.data();
        std::vector<double> h(H, 0.0), z(H), r(H), c(H), hr(H);
        if (cache) {
            cache->n_steps = N;
            cache->x.resize(static_cast<std::size_t>(N) * C);
            cache->h_prev.resize(static_cast<std::size_t>(N) * H);
            cache->z.resize(static_cast<std::size_t>(N) * H);
            cache->r.resize(static_cast<std::size_t>(N) * H);
            cache->c.resize(static_cast<std::size_t>(N) * H);
            cache->hr.resize(static_cast<std::size_t>(N) * H);
        }
        for (int tau = 0; tau < N; ++tau) {
            const int j = N - 1 - tau;  // reverse time
            const double* x = t.steps.data() + static_cast<std::size_t>(j) * C;
            if (cache) {
                std::copy(x, x + C, cache->x.begin() + static_cast<std::size_t>(tau) * C);
                std::copy(h.begin(), h.end(),
                          cache->h_prev.begin() + static_cast<std::size_t>(tau) * H);
            }
            gate(th + spec.wz(), th + spec.uz(), th + spec.bz(), x, h.data(), z.data(), true);
            gate(th + spec.wr(), th + spec.ur(), th + spec.br(), x, h.data(), r.data(), true);
            for (int i = 0; i < H; ++i) hr[i] = r[i] * h[i];
            gate(th + spec.wc(), th + spec.uc(), th + spec.bc(), x, hr.data(), c.data(), false);
            for (int i = 0; i < H; ++i) h[i] = (1.0 - z[i]) * h[i] + z[i] * c[i];
            if (cache) {
                const std::size_t off = static_cast<std::size_t>(tau) * H;
                std::copy(z.begin(), z.end(), cache->z.begin() + off);
                std::copy(r.begin(), r.end(), cache->r.begin() + off);
                std::copy(c.begin(), c.end(), cache->c.begin() + off);
                std::copy(hr.begin(), hr.end(), cache->hr.begin() + off);
            }
        }
        // history compression
        double hist_pre = th[spec.bh()];
        for (int k = 0; k < spec.n_hist; ++k) hist_pre += th[spec.wh() + k] * t.hist[k];
        const double hist_out = std::max(0.0, hist_pre);
        // concat -> dense ReLU -> sigmoid head
        const int V = spec.concat();
        std::vector<double> v(static_cast<std::size_t>(V));
        std::copy(h.begin(), h.end(), v.begin());
        v[static_cast<std::size_t>(H)] = hist_out;
        std::copy(t.stat.begin(), t.stat.end(), v.begin() + H + 1);
        std::vector<double> a1(static_cast<std::size_t>(spec.dense));
        for (int i = 0; i < spec.dense; ++i) {
            double s = th[spec.b1() + i];
            const double* w = th + spec.w1() + static_cast<std::size_t>(i) * V;
            for (int k = 0; k < V; ++k) s += w[k] * v[static_cast<std::size_t>(k)];
            a1[static_cast<std::size_t>(i)] = std::max(0.0, s);
        }
        double logit = th[spec.b2()];
        for (int i = 0; i < spec.dense; ++i) logit += th[spec.w2() + i] * a1[static_cast<std::size_t>(i)];
        if (cache) {
            cache->h_final = h;
            cache->hist_in = t.hist;
            cache->hist_pre = hist_pre;
            cache->hist_out = hist_out;
            cache->concat = v;
            cache->a1 = a1;
            cache->logit = logit;
        }
        return logit;
    }

    /// Accumulate d(weight * loss)/d(theta) into grad; returns the loss.
    double loss_grad(const SampleTensors& scaled, int label, double weight,
                     std::vector<double>& grad) const {
        GruCache cc;
        const double logit = forward_scaled(scaled, &cc);
        const double loss = nn_detail::bce_from_logit(logit, label);
        const double dlogit = (nn_detail::sigmoid(logit) - label) * weight;
        backward(cc, dlogit, grad);
        return loss;
    }

    void check_shape(const SampleTensors& t) const {
        if (t.channels != spec.channels || static_cast<int>(t.stat.size()) != spec.n_static ||
            static_cast<int>(t.hist.size()) != spec.n_hist)
            throw ModelError("GruAgent: feature tensor shape does not match the model");
    }

  private:
    void gate(const double* W, const double* U, const double* b, const double* x,
              const double* hvec, double* out, bool logistic) const {
        const int H = spec.hidden, C = spec.channels;
        for (int i = 0; i < H; ++i) {
            double s = b[i];
            const double* wr_ = W + static_cast<std::size_t>(i) * C;
            for (int k = 0; k < C; ++k) s += wr_[k] * x[k];
            const double* ur_ = U + static_cast<std::size_t>(i) * H;
            for (int k = 0; k < H; ++k) s += ur_[k] * hvec[k];
            out[i] = logistic ? nn_detail::sigmoid(s) : std::tanh(s);
        }
    }

    void backward(const GruCache& cc, double dlogit, std::vector<double>& grad) const {
        const int H = spec.hidden, C = spec.channels, D = spec.dense, V = spec.concat();
        const int N = cc.n_steps;
        const double* th = theta.data();
        double* g = grad.data();

        // output layer
        g[spec.b2()] += dlogit;
        std::vector<double> da1(static_cast<std::size_t>(D));
        for (int i = 0; i < D; ++i) {
            g[spec.w2() + i] += dlogit * cc.a1[static_cast<std::size_t>(i)];
            da1[static_cast<std::size_t>(i)] =
                cc.a1[static_cast<std::size_t>(i)] > 0 ? dlogit * th[spec.w2() + i] : 0.0;
        }
        // dense layer
        std::vector<double> dv(static_cast<std::size_t>(V), 0.0);
        for (int i = 0; i < D; ++i) {
            const double d = da1[static_cast<std::size_t>(i)];
            if (d == 0.0) continue;
            g[spec.b1() + i] += d;
            double* gw = g + spec.w1() + static_cast<std::size_t>(i) * V;
            const double* w = th + spec.w1() + static_cast<std::size_t>(i) * V;
            for (int k = 0; k < V; ++k) {
                gw[k] += d * cc.concat[static_cast<std::size_t>(k)];
                dv[static_cast<std::size_t>(k)] += d * w[k];
            }
        }
        // history compressor
        const double dhist = dv[static_cast<std::size_t>(H)];
        if (cc.hist_pre > 0 && dhist != 0.0) {
            g[spec.bh()] += dhist;
            for (int k = 0; k < spec.n_hist; ++k) g[spec.wh() + k] += dhist * cc.hist_in[static_cast<std::size_t>(k)];
        }
        // BPTT
        std::vector<double> dh(dv.begin(), dv.begin() + H);
        std::vector<double> dz(H), dc(H), dhr(H), dr(H), dpre(H), dh_prev(H);
        for (int tau = N - 1; tau >= 0; --tau) {
            const std::size_t off = static_cast<std::size_t>(tau) * H;
            const double* z = cc.z.data() + off;
            const double* r = cc.r.data() + off;
            const double* c = cc.c.data() + off;
            const double* hr = cc.hr.data() + off;
            const double* hp = cc.h_prev.data() + off;
            const double* x = cc.x.data() + static_cast<std::size_t>(tau) * C;

            for (int i = 0; i < H; ++i) {
                dz[i] = dh[i] * (c[i] - hp[i]);
                dc[i] = dh[i] * z[i];
                dh_prev[i] = dh[i] * (1.0 - z[i]);
            }
            // candidate gate (tanh)
            for (int i = 0; i < H; ++i) dpre[i] = dc[i] * (1.0 - c[i] * c[i]);
            accumulate_gate(g, spec.wc(), spec.uc(), spec.bc(), dpre, x, hr, dhr, th);
            for (int i = 0; i < H; ++i) {
                dr[i] = dhr[i] * hp[i];
                dh_prev[i] += dhr[i] * r[i];
            }
            // update gate (sigmoid)
            for (int i = 0; i < H; ++i) dpre[i] = dz[i] * z[i] * (1.0 - z[i]);
            accumulate_gate(g, spec.wz(), spec.uz(), spec.bz(), dpre, x, hp, dh_prev, th,
                            /*add_hidden=*/true);
            // reset gate (sigmoid)
            for (int i = 0; i < H; ++i) dpre[i] = dr[i] * r[i] * (1.0 - r[i]);
            accumulate_gate(g, spec.wr(), spec.ur(), spec.br(), dpre, x, hp, dh_prev, th,
                            /*add_hidden=*/true);
            dh = dh_prev;
        }
    }

    /// Accumulate gate gradients; d_hid_out receives U^T dpre (overwritten
    /// unless add_hidden).
    void accumulate_gate(double* g, int w_off, int u_off, int b_off,
                         const std::vector<double>& dpre, const double* x,
                         const double* h_in, std::vector<double>& d_hid_out,
                         const double* th, bool add_hidden = false) const {
        const int H = spec.hidden, C = spec.channels;
        if (!add_hidden) std::fill(d_hid_out.begin(), d_hid_out.end(), 0.0);
        for (int i = 0; i < H; ++i) {
            const double d = dpre[static_cast<std::size_t>(i)];
            g[b_off + i] += d;
            if (d == 0.0) continue;
            double* gw = g + w_off + static_cast<std::size_t>(i) * C;
            for (int k = 0; k < C; ++k) gw[k] += d * x[k];
            double* gu = g + u_off + static_cast<std::size_t>(i) * H;
            const double* u = th + u_off + static_cast<std::size_t>(i) * H;
            for (int k = 0; k < H; ++k) {
                gu[k] += d * h_in[k];
                d_hid_out[static_cast<std::size_t>(k)] += d * u[k];
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Feed-forward comparison baseline on the flattened features.
// ---------------------------------------------------------------------------

struct FfnnSpec {
    int channels = kStepChannels;
    int n_static = 4;
    int n_hist = 3;
    int horizon = 0;
    std::vector<int> hidden = {64, 64};

    int input() const { return n_static + channels * horizon + n_hist; }
};

class FfnnAgent {
  public:
    FfnnSpec spec;
    FeatureScaler scaler;
    std::string feature_schema = kFeatureSchema;
    int trained_horizon = 0;
    std::vector<double> theta;
    std::vector<int> dims;  ///< [input, hidden..., 1]

    FfnnAgent() = default;
    explicit FfnnAgent(const FfnnSpec& s) : spec(s) {
        dims.push_back(spec.input());
        for (int h : spec.hidden) dims.push_back(h);
        dims.push_back(1);
        std::size_t n = 0;
        for (std::size_t l = 0; l + 1 < dims.size(); ++l)
            n += static_cast<std::size_t>(dims[l]) * dims[l + 1] + dims[l + 1];
        theta.assign(n, 0.0);
        scaler = FeatureScaler::identity(spec.channels, spec.n_static);
    }

    void init_weights(std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::size_t at = 0;
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            nn_detail::glorot_fill(theta, at, dims[l + 1], dims[l], rng);
            at += static_cast<std::size_t>(dims[l]) * dims[l + 1] + dims[l + 1];
        }
    }

    std::vector<double> flatten_input(const SampleTensors& t) const {
        std::vector<double> x;
        x.reserve(static_cast<std::size_t>(spec.input()));
        x.insert(x.end(), t.stat.begin(), t.stat.end());
        x.insert(x.end(), t.steps.begin(), t.steps.end());
        x.insert(x.end(), t.hist.begin(), t.hist.end());
        if (static_cast<int>(x.size()) != spec.input())
            throw ModelError("FfnnAgent: input length mismatch");
        return x;
    }

    double forward(const SampleTensors& raw) const {
        SampleTensors t = scaler.apply(raw);
        return nn_detail::clamp_prob(
            nn_detail::sigmoid(forward_scaled(t, nullptr)));
    }

    double forward(const FeatureVector& fv) const { return forward(tensors_from_features(fv)); }

    double forward_scaled(const SampleTensors& t, std::vector<std::vector<double>>* acts) const {
        std::vector<double> x = flatten_input(t);
        if (acts) acts->push_back(x);
        std::size_t at = 0;
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            const int in = dims[l], out = dims[l + 1];
            std::vector<double> y(static_cast<std::size_t>(out));
            const double* W = theta.data() + at;
            const double* b = theta.data() + at + static_cast<std::size_t>(in) * out;
            const bool last = l + 2 == dims.size();
            for (int i = 0; i < out; ++i) {
                double s = b[i];
                const double* w = W + static_cast<std::size_t>(i) * in;
                for (int k = 0; k < in; ++k) s += w[k] * x[static_cast<std::size_t>(k)];
                y[static_cast<std::size_t>(i)] = last ? s : std::max(0.0, s);
            }
            x = std::move(y);
            if (acts) acts->push_back(x);
            at += static_cast<std::size_t>(in) * out + out;
        }
        return x[0];
    }

    double loss_grad(const SampleTensors& scaled, int label, double weight,
                     std::vector<double>& grad) const {
        std::vector<std::vector<double>> acts;
        const double logit = forward_scaled(scaled, &acts);
        const double loss = nn_detail::bce_from_logit(logit, label);
        double* g = grad.data();
        std::vector<double> d{(nn_detail::sigmoid(logit) - label) * weight};
        // walk layers backwards
        std::vector<std::size_t> offs;
        std::size_t at = 0;
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            offs.push_back(at);
            at += static_cast<std::size_t>(dims[l]) * dims[l + 1] + dims[l + 1];
        }
        for (int l = static_cast<int>(dims.size()) - 2; l >= 0; --l) {
            const int in = dims[static_cast<std::size_t>(l)];
            const int out = dims[static_cast<std::size_t>(l) + 1];
            const auto& x = acts[static_cast<std::size_t>(l)];
            const double* W = theta.data() + offs[static_cast<std::size_t>(l)];
            double* gW = g + offs[static_cast<std::size_t>(l)];
            double* gb = gW + static_cast<std::size_t>(in) * out;
            std::vector<double> dx(static_cast<std::size_t>(in), 0.0);
            for (int i = 0; i < out; ++i) {
                const double di = d[static_cast<std::size_t>(i)];
                gb[i] += di;
                if (di == 0.0) continue;
                double* gw = gW + static_cast<std::size_t>(i) * in;
                const double* w = W + static_cast<std::size_t>(i) * in;
                for (int k = 0; k < in; ++k) {
                    gw[k] += di * x[static_cast<std::size_t>(k)];
                    dx[static_cast<std::size_t>(k)] += di * w[k];
                }
            }
            if (l > 0) {
                const auto& act = acts[static_cast<std::size_t>(l)];
                for (int k = 0; k < in; ++k)
                    if (act[static_cast<std::size_t>(k)] <= 0.0) dx[static_cast<std::size_t>(k)] = 0.0;
            }
            d = std::move(dx);
        }
        return loss;
    }

    void check_shape(const SampleTensors& t) const {
        if (t.channels != spec.channels || static_cast<int>(t.stat.size()) != spec.n_static ||
            static_cast<int>(t.hist.size()) != spec.n_hist || t.horizon != spec.horizon)
            throw ModelError("FfnnAgent: feature tensor shape does not match the model");
    }
};

// ---------------------------------------------------------------------------
// Adam and the generic trainer.
// ---------------------------------------------------------------------------

struct TrainConfig {
    int batch_size = 512;
    int epochs = 24;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int patience = 24;  ///< epochs without validation-loss improvement
    std::uint64_t seed = 1;

    void validate() const {
        if (batch_size < 1 || epochs < 1 || patience < 1 || !(learning_rate > 0) ||
            !(adam_beta1 > 0 && adam_beta1 < 1) || !(adam_beta2 > 0 && adam_beta2 < 1) ||
            !(adam_eps > 0))
            throw std::invalid_argument("TrainConfig: all fields must be positive and valid");
    }
};

struct EpochStats {
    double train_loss = 0, train_acc = 0, val_loss = 0, val_acc = 0;
};

struct TrainMetrics {
    std::vector<EpochStats> epochs;
    int best_epoch = -1;          ///< epoch whose weights were kept
    double val_accuracy = 0.0;    ///< at threshold 0.5, best epoch
    double val_loss = kInf;
    double train_accuracy = 0.0;
    double label_on_fraction = 0.0;  ///< class balance of the training split
    double majority_accuracy = 0.0;  ///< accuracy of always predicting the majority class
};

class Adam {
  public:
    Adam(std::size_t n, const TrainConfig& cfg)
        : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

    void step(std::vector<double>& theta, const std::vector<double>& grad) {
        ++t_;
        const double b1 = cfg_.adam_beta1, b2 = cfg_.adam_beta2;
        const double corr1 = 1.0 - std::pow(b1, t_);
        const double corr2 = 1.0 - std::pow(b2, t_);
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
            v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
            theta[i] -= cfg_.learning_rate * (m_[i] / corr1) /
                        (std::sqrt(v_[i] / corr2) + cfg_.adam_eps);
        }
    }

  private:
    TrainConfig cfg_;
    std::vector<double> m_, v_;
    long t_ = 0;
};

namespace nn_detail {

template <class Net>
std::pair<double, double> evaluate_split(const Net& net,
                                         const std::vector<SampleTensors>& xs,
                                         const std::vector<int>& ys) {
    if (xs.empty()) return {0.0, 0.0};
    double loss = 0.0;
    long correct = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double logit = net.forward_scaled(xs[i], nullptr);
        loss += bce_from_logit(logit, ys[i]);
        const int pred = logit > 0.0 ? 1 : 0;  // p > 0.5
        correct += pred == ys[i];
    }
    return {loss / static_cast<double>(xs.size()),
            static_cast<double>(correct) / static_cast<double>(xs.size())};
}

}  // namespace nn_detail

/// Train on pre-scaled tensors. Deterministic for a fixed config seed.
template <class Net>
TrainMetrics train_net(Net& net, const std::vector<SampleTensors>& train_x,
                       const std::vector<int>& train_y,
                       const std::vector<SampleTensors>& val_x, const std::vector<int>& val_y,
                       const TrainConfig& cfg) {
    cfg.validate();
    if (train_x.empty()) throw std::invalid_argument("train: empty training split");
    long on = 0;
    for (int y : train_y) on += y;
    if (on == 0 || on == static_cast<long>(train_y.size()))
        throw std::invalid_argument("train: training split contains a single class");

    TrainMetrics metrics;
    metrics.label_on_fraction = static_cast<double>(on) / static_cast<double>(train_y.size());

    Adam adam(net.theta.size(), cfg);
    std::vector<double> grad(net.theta.size(), 0.0);
    std::vector<std::size_t> order(train_x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<double> best_theta = net.theta;
    double best_val = kInf;
    int best_epoch = -1;
    int stall = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            const double w = 1.0 / static_cast<double>(end - start);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t q = start; q < end; ++q) {
                const std::size_t i = order[q];
                net.loss_grad(train_x[i], train_y[i], w, grad);
            }
            adam.step(net.theta, grad);
        }
        // metrics measured after the epoch's updates
        auto [train_loss_eval, train_acc] = nn_detail::evaluate_split(net, train_x, train_y);
        auto [val_loss, val_acc] = nn_detail::evaluate_split(net, val_x, val_y);
        EpochStats es;
        es.train_loss = train_loss_eval;
        es.train_acc = train_acc;
        es.val_loss = val_loss;
        es.val_acc = val_acc;
        metrics.epochs.push_back(es);

        const bool has_val = !val_x.empty();
        const double crit = has_val ? val_loss : train_loss_eval;
        if (crit < best_val - 1e-12) {
            best_val = crit;
            best_theta = net.theta;
            best_epoch = epoch;
            stall = 0;
        } else if (++stall >= cfg.patience) {
            break;
        }
    }
    net.theta = best_theta;
    metrics.best_epoch = best_epoch;
    auto [tl, ta] = nn_detail::evaluate_split(net, train_x, train_y);
    auto [vl, va] = nn_detail::evaluate_split(net, val_x, val_y);
    (void)tl;
    metrics.train_accuracy = ta;
    metrics.val_loss = vl;
    metrics.val_accuracy = va;
    long von = 0;
    for (int y : val_y) von += y;
    if (!val_y.empty()) {
        const double frac = static_cast<double>(von) / static_cast<double>(val_y.size());
        metrics.majority_accuracy = std::max(frac, 1.0 - frac);
    }
    return metrics;
}

// ---------------------------------------------------------------------------
// Inference-time decision with the hard dwell-time overlay.
// ---------------------------------------------------------------------------

struct ControlDecision {
    double probability = 0.0;
    int raw = 0;      ///< thresholded network output
    int applied = 0;  ///< after the dwell-time overlay
    bool overridden = false;
};

template <class Net>
ControlDecision predict_control(const Net& net, const SampleTensors& features,
                                const CycleConstraint& cycle) {
    ControlDecision d;
    d.probability = net.forward(features);
    d.raw = d.probability > 0.5 ? 1 : 0;  // exactly 0.5 maps to off
    const int forced = cycle.forced_control();
    d.applied = forced >= 0 ? forced : d.raw;
    d.overridden = forced >= 0 && forced != d.raw;
    return d;
}

template <class Net>
ControlDecision predict_control(const Net& net, const FeatureVector& fv,
                                const CycleConstraint& cycle) {
    return predict_control(net, tensors_from_features(fv), cycle);
}

}  // namespace bcmpc
