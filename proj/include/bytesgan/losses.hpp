#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bytesgan/models.hpp"

namespace bytesgan {

/// A batch-averaged loss.
struct LossValue {
    double scalar = 0.0;
    std::size_t batch_size = 0;
};

/// Loss value plus its gradient with respect to the loss input.
template <typename T>
struct LossGrad {
    LossValue value;
    std::vector<T> grad;
};

double log_sum_exp(std::span<const double> v);
/// log(1 + exp(x)) without overflow.
double softplus(double x);

/// mean_i -log softmax(logits_i)[label_i], from logits (batch x k).
template <typename T>
LossGrad<T> labeled_loss(std::span<const T> logits, std::size_t k, std::span<const int> labels);

template <typename T>
struct UnlabeledLossResult {
    LossValue value;   ///< real_term + fake_term
    double real_term = 0.0;  ///< mean softplus(-logZ(real))  = mean -log D(x)
    double fake_term = 0.0;  ///< mean softplus(logZ(fake))   = mean -log(1 - D(G(z)))
    std::vector<T> real_grad;
    std::vector<T> fake_grad;
};

template <typename T>
UnlabeledLossResult<T> unlabeled_loss(std::span<const T> real_logits, std::span<const T> fake_logits, std::size_t k);

template <typename T>
struct FeatureMatchingResult {
    LossValue value;
    std::vector<T> real_grad;
    std::vector<T> fake_grad;
};

/// ||mean(real_features) - mean(fake_features)||^2 over `dim`-wide rows.
template <typename T>
FeatureMatchingResult<T> feature_matching_loss(std::span<const T> real_features, std::span<const T> fake_features,
                                               std::size_t dim);

/// Mean categorical cross-entropy of probability rows.
LossValue cnn_loss(std::span<const double> probs, std::size_t k, std::span<const int> labels);

/// Same loss computed from logits in the log domain; gradient is w.r.t. logits.
template <typename T>
LossGrad<T> cnn_loss_from_logits(std::span<const T> logits, std::size_t k, std::span<const int> labels);

/// Overloads taking per-sample discriminator heads.
LossValue labeled_loss(std::span<const DiscriminatorOutput> out, std::span<const int> labels);
LossValue unlabeled_loss(std::span<const DiscriminatorOutput> real, std::span<const DiscriminatorOutput> fake);

/// Pointwise optimal discriminator p_data / (p_data + p_g). A point where
/// both masses are zero is indistinguishable and maps to 0.5.
std::vector<double> optimal_discriminator_check(std::span<const double> p_data, std::span<const double> p_g);

} // namespace bytesgan
