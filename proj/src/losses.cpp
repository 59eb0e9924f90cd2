#include "bytesgan/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bytesgan/errors.hpp"

namespace bytesgan {

namespace {

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// log-sum-exp of one row plus the row's softmax.
template <typename T>
double row_lse(const T* l, std::size_t k, std::vector<double>& probs) {
    double m = -INFINITY;
    for (std::size_t j = 0; j < k; ++j) m = std::max(m, static_cast<double>(l[j]));
    double s = 0.0;
    probs.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        probs[j] = std::exp(static_cast<double>(l[j]) - m);
        s += probs[j];
    }
    for (auto& p : probs) p /= s;
    return m + std::log(s);
}

void check_labels(std::span<const int> labels, std::size_t k, const char* who) {
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= k) {
            throw ContractError(std::string(who) + ": label " + std::to_string(y) + " out of range");
        }
    }
}

} // namespace

double log_sum_exp(std::span<const double> v) {
    std::vector<double> scratch;
    return row_lse(v.data(), v.size(), scratch);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

template <typename T>
LossGrad<T> labeled_loss(std::span<const T> logits, std::size_t k, std::span<const int> labels) {
    const std::size_t batch = labels.size();
    require(batch > 0 && logits.size() == batch * k, "labeled_loss: shape mismatch");
    check_labels(labels, k, "labeled_loss");
    LossGrad<T> out;
    out.grad.resize(logits.size());
    std::vector<double> probs;
    double total = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
        const T* l = logits.data() + i * k;
        const double lse = row_lse(l, k, probs);
        total += lse - static_cast<double>(l[labels[i]]);
        for (std::size_t j = 0; j < k; ++j) {
            const double g = probs[j] - (static_cast<int>(j) == labels[i] ? 1.0 : 0.0);
            out.grad[i * k + j] = static_cast<T>(g / static_cast<double>(batch));
        }
    }
    out.value = {total / static_cast<double>(batch), batch};
    return out;
}

template <typename T>
UnlabeledLossResult<T> unlabeled_loss(std::span<const T> real_logits, std::span<const T> fake_logits,
                                      std::size_t k) {
    require(k > 0 && real_logits.size() % k == 0 && fake_logits.size() % k == 0, "unlabeled_loss: shape mismatch");
    const std::size_t nr = real_logits.size() / k, nf = fake_logits.size() / k;
    require(nr > 0 && nf > 0, "unlabeled_loss: empty batch");
    UnlabeledLossResult<T> out;
    out.real_grad.resize(real_logits.size());
    out.fake_grad.resize(fake_logits.size());
    std::vector<double> probs;
    double real = 0.0;
    for (std::size_t i = 0; i < nr; ++i) {
        const double lse = row_lse(real_logits.data() + i * k, k, probs);
        real += softplus(-lse);
        // d softplus(-lse)/dl_j = -sigmoid(-lse) * softmax_j
        const double s = -sigmoid(-lse) / static_cast<double>(nr);
        for (std::size_t j = 0; j < k; ++j) out.real_grad[i * k + j] = static_cast<T>(s * probs[j]);
    }
    double fake = 0.0;
    for (std::size_t i = 0; i < nf; ++i) {
        const double lse = row_lse(fake_logits.data() + i * k, k, probs);
        fake += softplus(lse);
        const double s = sigmoid(lse) / static_cast<double>(nf);
        for (std::size_t j = 0; j < k; ++j) out.fake_grad[i * k + j] = static_cast<T>(s * probs[j]);
    }
    out.real_term = real / static_cast<double>(nr);
    out.fake_term = fake / static_cast<double>(nf);
    out.value = {out.real_term + out.fake_term, nr + nf};
    return out;
}

template <typename T>
FeatureMatchingResult<T> feature_matching_loss(std::span<const T> real_features, std::span<const T> fake_features,
                                               std::size_t dim) {
    require(dim > 0 && real_features.size() % dim == 0 && fake_features.size() % dim == 0,
            "feature_matching_loss: feature dimension mismatch");
    const std::size_t nr = real_features.size() / dim, nf = fake_features.size() / dim;
    require(nr > 0 && nf > 0, "feature_matching_loss: empty batch");
    std::vector<double> diff(dim, 0.0);
    for (std::size_t i = 0; i < nr; ++i) {
        for (std::size_t j = 0; j < dim; ++j) diff[j] += static_cast<double>(real_features[i * dim + j]) / nr;
    }
    for (std::size_t i = 0; i < nf; ++i) {
        for (std::size_t j = 0; j < dim; ++j) diff[j] -= static_cast<double>(fake_features[i * dim + j]) / nf;
    }
    FeatureMatchingResult<T> out;
    double sq = 0.0;
    for (double d : diff) sq += d * d;
    out.value = {sq, nf};
    out.real_grad.resize(real_features.size());
    out.fake_grad.resize(fake_features.size());
    for (std::size_t i = 0; i < nr; ++i) {
        for (std::size_t j = 0; j < dim; ++j) out.real_grad[i * dim + j] = static_cast<T>(2.0 * diff[j] / nr);
    }
    for (std::size_t i = 0; i < nf; ++i) {
        for (std::size_t j = 0; j < dim; ++j) out.fake_grad[i * dim + j] = static_cast<T>(-2.0 * diff[j] / nf);
    }
    return out;
}

LossValue cnn_loss(std::span<const double> probs, std::size_t k, std::span<const int> labels) {
    const std::size_t batch = labels.size();
    require(batch > 0 && probs.size() == batch * k, "cnn_loss: shape mismatch");
    check_labels(labels, k, "cnn_loss");
    double total = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
        const double p = probs[i * k + labels[i]];
        // Clamped so an exactly-zero probability stays finite.
        total += -std::log(std::max(p, 1e-300));
    }
    return {total / static_cast<double>(batch), batch};
}

template <typename T>
LossGrad<T> cnn_loss_from_logits(std::span<const T> logits, std::size_t k, std::span<const int> labels) {
    return labeled_loss<T>(logits, k, labels);
}

LossValue labeled_loss(std::span<const DiscriminatorOutput> out, std::span<const int> labels) {
    require(!out.empty() && out.size() == labels.size(), "labeled_loss: batch mismatch");
    const std::size_t k = out.front().logits.size();
    std::vector<double> logits;
    for (const auto& o : out) logits.insert(logits.end(), o.logits.begin(), o.logits.end());
    return labeled_loss<double>(logits, k, labels).value;
}

LossValue unlabeled_loss(std::span<const DiscriminatorOutput> real, std::span<const DiscriminatorOutput> fake) {
    require(!real.empty() && !fake.empty(), "unlabeled_loss: empty batch");
    const std::size_t k = real.front().logits.size();
    std::vector<double> r, f;
    for (const auto& o : real) r.insert(r.end(), o.logits.begin(), o.logits.end());
    for (const auto& o : fake) f.insert(f.end(), o.logits.begin(), o.logits.end());
    return unlabeled_loss<double>(r, f, k).value;
}

std::vector<double> optimal_discriminator_check(std::span<const double> p_data, std::span<const double> p_g) {
    require(p_data.size() == p_g.size() && !p_data.empty(), "optimal_discriminator_check: support mismatch");
    double sd = 0.0, sg = 0.0;
    for (std::size_t i = 0; i < p_data.size(); ++i) {
        require(p_data[i] >= 0.0 && p_g[i] >= 0.0, "optimal_discriminator_check: negative mass");
        sd += p_data[i];
        sg += p_g[i];
    }
    require(std::abs(sd - 1.0) < 1e-9 && std::abs(sg - 1.0) < 1e-9,
            "optimal_discriminator_check: distributions must sum to 1");
    std::vector<double> d(p_data.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double s = p_data[i] + p_g[i];
        d[i] = s > 0.0 ? p_data[i] / s : 0.5;
    }
    return d;
}

#define BYTESGAN_INSTANTIATE(T)                                                                                 \
    template LossGrad<T> labeled_loss<T>(std::span<const T>, std::size_t, std::span<const int>);                \
    template UnlabeledLossResult<T> unlabeled_loss<T>(std::span<const T>, std::span<const T>, std::size_t);     \
    template FeatureMatchingResult<T> feature_matching_loss<T>(std::span<const T>, std::span<const T>,          \
                                                               std::size_t);                                    \
    template LossGrad<T> cnn_loss_from_logits<T>(std::span<const T>, std::size_t, std::span<const int>);

BYTESGAN_INSTANTIATE(float)
BYTESGAN_INSTANTIATE(double)

#undef BYTESGAN_INSTANTIATE

} // namespace bytesgan
