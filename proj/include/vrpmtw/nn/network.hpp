#pragma once

// Attention encoder + feed-forward decoder networks with hand-written reverse
// mode, and an Adam optimizer over their parameters.
//
// Forward pass for n node rows X (n x F) and global features g (G):
//   H0 = X W_in + b_in
//   H1 = H0 + MHA(H0) Wo + bo          (h heads, softmax(Q K^T / sqrt(d/h)) V)
//   H2 = H1 + relu(H1 W1 + b1) W2 + b2
//   z  = [mean_rows(H2), g]
//   out = L3 relu(L2 relu(L1 z + c1) + c2) + c3

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "../rng.hpp"
#include "tensor.hpp"

namespace vrpmtw::nn {

struct ArchConfig {
    int node_features = 19;
    int global_features = 5;
    int d_model = 128;
    int heads = 8;
    int ff_hidden = 128;
    int decoder_hidden = 256;
    int outputs = 13;

    friend bool operator==(const ArchConfig&, const ArchConfig&) = default;
};

struct Param {
    std::string name;
    Matrix value;
    Matrix grad;
};

/// Encoder input: one row per node plus a global feature vector.
struct NetInput {
    Matrix nodes;
    std::vector<double> global;
};

class Network {
public:
    Network() = default;

    /// Parameters use He-uniform initialization; with `zero_output` the last
    /// decoder layer starts at zero.
    Network(const ArchConfig& arch, Rng& rng, bool zero_output = true) : arch_(arch) {
        if (arch.d_model % arch.heads != 0) throw std::invalid_argument("d_model must be divisible by heads");
        const int d = arch.d_model, F = arch.node_features, G = arch.global_features, H = arch.decoder_hidden;
        add("enc.w_in", F, d, rng);
        add("enc.b_in", 1, d);
        add("enc.wq", d, d, rng);
        add("enc.wk", d, d, rng);
        add("enc.wv", d, d, rng);
        add("enc.wo", d, d, rng);
        add("enc.bo", 1, d);
        add("enc.w1", d, arch.ff_hidden, rng);
        add("enc.b1", 1, arch.ff_hidden);
        add("enc.w2", arch.ff_hidden, d, rng);
        add("enc.b2", 1, d);
        add("dec.l1", d + G, H, rng);
        add("dec.c1", 1, H);
        add("dec.l2", H, H, rng);
        add("dec.c2", 1, H);
        if (zero_output)
            add("dec.l3", H, arch.outputs);
        else
            add("dec.l3", H, arch.outputs, rng);
        add("dec.c3", 1, arch.outputs);
    }

    const ArchConfig& arch() const noexcept { return arch_; }
    std::vector<Param>& params() noexcept { return params_; }
    const std::vector<Param>& params() const noexcept { return params_; }

    std::size_t parameter_count() const noexcept {
        std::size_t n = 0;
        for (const Param& p : params_) n += p.value.size();
        return n;
    }

    void zero_grad() {
        for (Param& p : params_) p.grad.zero();
    }

    bool finite() const {
        for (const Param& p : params_)
            if (!all_finite(p.value)) return false;
        return true;
    }

    bool grads_finite() const {
        for (const Param& p : params_)
            if (!all_finite(p.grad)) return false;
        return true;
    }

    struct Cache {
        Matrix x, h0, q, k, v, o, h1, z1, f1, h2;
        std::vector<Matrix> attn;  // per head, n x n
        Matrix dec_in, a1, r1, a2, r2;
        std::vector<double> out;
    };

    /// Raw outputs (logits or value).
    std::vector<double> forward(const NetInput& in, Cache* cache = nullptr) const {
        Cache local;
        Cache& c = cache != nullptr ? *cache : local;
        const int n = in.nodes.rows, d = arch_.d_model, heads = arch_.heads, dh = d / heads;
        if (in.nodes.cols != arch_.node_features || static_cast<int>(in.global.size()) != arch_.global_features)
            throw std::invalid_argument("network input does not match the architecture");
        if (n == 0) throw std::invalid_argument("network input has no node rows");

        c.x = in.nodes;
        c.h0 = matmul(c.x, P(kWIn));
        add_row_bias(c.h0, P(kBIn));
        c.q = matmul(c.h0, P(kWq));
        c.k = matmul(c.h0, P(kWk));
        c.v = matmul(c.h0, P(kWv));
        c.o = Matrix(n, d);
        c.attn.assign(static_cast<std::size_t>(heads), Matrix(n, n));
        const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
        for (int h = 0; h < heads; ++h) {
            Matrix& a = c.attn[static_cast<std::size_t>(h)];
            const int off = h * dh;
            for (int i = 0; i < n; ++i) {
                double mx = -INFINITY;
                for (int j = 0; j < n; ++j) {
                    double s = 0.0;
                    for (int t = 0; t < dh; ++t) s += c.q(i, off + t) * c.k(j, off + t);
                    a(i, j) = s * scale;
                    mx = std::max(mx, a(i, j));
                }
                double sum = 0.0;
                for (int j = 0; j < n; ++j) sum += a(i, j) = std::exp(a(i, j) - mx);
                for (int j = 0; j < n; ++j) a(i, j) /= sum;
                for (int j = 0; j < n; ++j) {
                    const double w = a(i, j);
                    for (int t = 0; t < dh; ++t) c.o(i, off + t) += w * c.v(j, off + t);
                }
            }
        }
        c.h1 = matmul(c.o, P(kWo));
        add_row_bias(c.h1, P(kBo));
        add_inplace(c.h1, c.h0);
        c.z1 = matmul(c.h1, P(kW1));
        add_row_bias(c.z1, P(kB1));
        c.f1 = relu(c.z1);
        c.h2 = matmul(c.f1, P(kW2));
        add_row_bias(c.h2, P(kB2));
        add_inplace(c.h2, c.h1);

        c.dec_in = Matrix(1, d + arch_.global_features);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j) c.dec_in(0, j) += c.h2(i, j);
        for (int j = 0; j < d; ++j) c.dec_in(0, j) /= n;
        for (int j = 0; j < arch_.global_features; ++j) c.dec_in(0, d + j) = in.global[static_cast<std::size_t>(j)];

        c.a1 = matmul(c.dec_in, P(kL1));
        add_row_bias(c.a1, P(kC1));
        c.r1 = relu(c.a1);
        c.a2 = matmul(c.r1, P(kL2));
        add_row_bias(c.a2, P(kC2));
        c.r2 = relu(c.a2);
        Matrix out = matmul(c.r2, P(kL3));
        add_row_bias(out, P(kC3));
        c.out = out.data;
        return c.out;
    }

    /// Accumulates parameter gradients given d(loss)/d(outputs).
    void backward(const Cache& c, std::span<const double> d_out) {
        const int n = c.x.rows, d = arch_.d_model, heads = arch_.heads, dh = d / heads;

        Matrix g_out(1, arch_.outputs);
        std::copy(d_out.begin(), d_out.end(), g_out.data.begin());
        matmul_at_b_acc(c.r2, g_out, G(kL3));
        col_sum_acc(g_out, G(kC3));
        Matrix g2 = matmul_a_bt(g_out, P(kL3));
        relu_backward(c.a2, g2);
        matmul_at_b_acc(c.r1, g2, G(kL2));
        col_sum_acc(g2, G(kC2));
        Matrix g1 = matmul_a_bt(g2, P(kL2));
        relu_backward(c.a1, g1);
        matmul_at_b_acc(c.dec_in, g1, G(kL1));
        col_sum_acc(g1, G(kC1));
        const Matrix g_in = matmul_a_bt(g1, P(kL1));

        // Mean pooling spreads the pooled gradient evenly over the rows.
        Matrix dh2(n, d);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j) dh2(i, j) = g_in(0, j) / n;

        matmul_at_b_acc(c.f1, dh2, G(kW2));
        col_sum_acc(dh2, G(kB2));
        Matrix dz1 = matmul_a_bt(dh2, P(kW2));
        relu_backward(c.z1, dz1);
        matmul_at_b_acc(c.h1, dz1, G(kW1));
        col_sum_acc(dz1, G(kB1));
        Matrix dh1 = matmul_a_bt(dz1, P(kW1));
        add_inplace(dh1, dh2);

        matmul_at_b_acc(c.o, dh1, G(kWo));
        col_sum_acc(dh1, G(kBo));
        const Matrix d_o = matmul_a_bt(dh1, P(kWo));

        Matrix dq(n, d), dk(n, d), dv(n, d);
        const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
        std::vector<double> dp(static_cast<std::size_t>(n));
        for (int h = 0; h < heads; ++h) {
            const Matrix& a = c.attn[static_cast<std::size_t>(h)];
            const int off = h * dh;
            for (int i = 0; i < n; ++i) {
                double dot = 0.0;
                for (int j = 0; j < n; ++j) {
                    double s = 0.0;
                    for (int t = 0; t < dh; ++t) s += d_o(i, off + t) * c.v(j, off + t);
                    dp[static_cast<std::size_t>(j)] = s;
                    dot += s * a(i, j);
                    for (int t = 0; t < dh; ++t) dv(j, off + t) += a(i, j) * d_o(i, off + t);
                }
                for (int j = 0; j < n; ++j) {
                    const double ds = a(i, j) * (dp[static_cast<std::size_t>(j)] - dot) * scale;
                    for (int t = 0; t < dh; ++t) {
                        dq(i, off + t) += ds * c.k(j, off + t);
                        dk(j, off + t) += ds * c.q(i, off + t);
                    }
                }
            }
        }
        matmul_at_b_acc(c.h0, dq, G(kWq));
        matmul_at_b_acc(c.h0, dk, G(kWk));
        matmul_at_b_acc(c.h0, dv, G(kWv));
        Matrix dh0 = dh1;
        add_inplace(dh0, matmul_a_bt(dq, P(kWq)));
        add_inplace(dh0, matmul_a_bt(dk, P(kWk)));
        add_inplace(dh0, matmul_a_bt(dv, P(kWv)));
        matmul_at_b_acc(c.x, dh0, G(kWIn));
        col_sum_acc(dh0, G(kBIn));
    }

private:
    enum Slot : std::size_t {
        kWIn, kBIn, kWq, kWk, kWv, kWo, kBo, kW1, kB1, kW2, kB2, kL1, kC1, kL2, kC2, kL3, kC3
    };

    const Matrix& P(Slot s) const noexcept { return params_[s].value; }
    Matrix& G(Slot s) noexcept { return params_[s].grad; }

    void add(std::string name, int rows, int cols) {
        params_.push_back({std::move(name), Matrix(rows, cols), Matrix(rows, cols)});
    }

    void add(std::string name, int rows, int cols, Rng& rng) {
        add(std::move(name), rows, cols);
        const double bound = std::sqrt(6.0 / rows);
        for (double& v : params_.back().value.data) v = rng.uniform(-bound, bound);
    }

    ArchConfig arch_;
    std::vector<Param> params_;
};

/// Adam with bias correction.
class Adam {
public:
    Adam() = default;
    explicit Adam(const Network& net, double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (const Param& p : net.params()) {
            m_.emplace_back(p.value.rows, p.value.cols);
            v_.emplace_back(p.value.rows, p.value.cols);
        }
    }

    void step(Network& net) {
        ++t_;
        const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        auto& ps = net.params();
        for (std::size_t i = 0; i < ps.size(); ++i) {
            auto& w = ps[i].value.data;
            const auto& g = ps[i].grad.data;
            auto& m = m_[i].data;
            auto& v = v_[i].data;
            for (std::size_t j = 0; j < w.size(); ++j) {
                m[j] = beta1_ * m[j] + (1 - beta1_) * g[j];
                v[j] = beta2_ * v[j] + (1 - beta2_) * g[j] * g[j];
                w[j] -= lr_ * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps_);
            }
        }
    }

    std::int64_t steps() const noexcept { return t_; }
    std::vector<Matrix>& first_moment() noexcept { return m_; }
    std::vector<Matrix>& second_moment() noexcept { return v_; }
    const std::vector<Matrix>& first_moment() const noexcept { return m_; }
    const std::vector<Matrix>& second_moment() const noexcept { return v_; }
    void set_steps(std::int64_t t) noexcept { t_ = t; }

private:
    double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    std::int64_t t_ = 0;
    std::vector<Matrix> m_, v_;
};

}  // namespace vrpmtw::nn
