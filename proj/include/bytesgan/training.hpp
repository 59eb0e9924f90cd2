#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bytesgan/dataset.hpp"
#include "bytesgan/models.hpp"
#include "bytesgan/optim.hpp"

namespace bytesgan {

enum class NoisePrior { uniform, gaussian };

std::string to_string(NoisePrior p);
NoisePrior parse_noise_prior(std::string_view s);

struct SganTrainConfig {
    std::size_t batch_size = 256;
    AdamConfig adam{};  ///< lr 0.0002, beta1 0.5, beta2 0.999, eps 1e-8
    std::size_t disc_steps_per_gen_step = 1;
    std::size_t epochs = 1;
    /// 0 derives one epoch as a pass over the larger of the two pools.
    std::size_t steps_per_epoch = 0;
    NoisePrior noise_prior = NoisePrior::uniform;
    std::uint64_t seed = 0;
    std::size_t checkpoint_every = 0;  ///< epochs; 0 disables periodic checkpoints
    double labeled_weight = 1.0;
    double unlabeled_weight = 1.0;
    GeneratorConfig generator{};
    DiscriminatorConfig discriminator{};  ///< `classes` is overwritten by the schema size

    void validate() const;
};

struct CnnTrainConfig {
    std::size_t batch_size = 128;
    RmspropConfig rmsprop{};
    std::size_t epochs = 30;
    std::size_t steps_per_epoch = 0;  ///< 0: ceil(pool / batch)
    std::size_t micro_batch = 32;     ///< rows per forward/backward pass within a batch
    std::uint64_t seed = 0;
    std::size_t checkpoint_every = 0;
    CnnConfig cnn{};

    void validate() const;
};

/// One optimizer step. SGAN steps fill the branch fields; `gen_loss` is set
/// on steps followed by a generator update.
struct StepRecord {
    std::size_t step = 0;
    std::size_t epoch = 0;
    double loss = 0.0;  ///< total discriminator (or CNN) loss that was differentiated
    std::optional<double> labeled_loss;
    std::optional<double> unlabeled_real;
    std::optional<double> unlabeled_fake;
    std::optional<double> gen_loss;
    double wall_seconds = 0.0;
};

struct EpochRecord {
    std::size_t epoch = 0;
    std::size_t steps = 0;
    std::optional<double> heldout_accuracy;
};

struct TrainLog {
    std::vector<StepRecord> steps;
    std::vector<EpochRecord> epochs;

    /// One JSON object per line: step records then epoch records. Wall-clock
    /// is omitted unless requested, keeping the log reproducible.
    std::string to_jsonl(bool with_wall_clock = false) const;
    static TrainLog from_jsonl(std::string_view text);
};

/// What the optimizer saw on one SGAN step, delivered to an observer.
struct SganStepTrace {
    StepRecord record;
    DiscriminatorParams<float> disc_before;
    Batch labeled;
    std::optional<Batch> unlabeled;
    std::vector<float> fake;  ///< generator output used in the step
    std::uint64_t gen_digest_before_disc_update = 0;
    std::uint64_t gen_digest_after_disc_update = 0;
    bool gen_updated = false;
    std::uint64_t disc_digest_before_gen_update = 0;
    std::uint64_t disc_digest_after_gen_update = 0;
};

struct TrainHooks {
    const LabeledPool* eval_pool = nullptr;  ///< held-out accuracy per epoch when set
    std::filesystem::path checkpoint_dir;    ///< periodic and diagnostic checkpoints when set
    std::function<void(const SganStepTrace&)> sgan_observer;
    std::function<void(const StepRecord&)> on_step;
};

struct SganResult {
    DiscriminatorParams<float> discriminator;
    GeneratorParams<float> generator;
    TrainLog log;
};

struct CnnResult {
    CnnParams<float> params;
    TrainLog log;
};

/// Alternating ByteSGAN training. With an empty unlabeled pool this is
/// supervised-only training of the discriminator's class head.
SganResult train_sgan(const LabeledPool& labeled, const UnlabeledPool& unlabeled, const ClassSchema& schema,
                      const SganTrainConfig& cfg, const TrainHooks& hooks = {});

CnnResult train_cnn(const LabeledPool& labeled, const ClassSchema& schema, const CnnTrainConfig& cfg,
                    const TrainHooks& hooks = {});

/// Argmax class predictions over a pool, evaluated in chunks.
std::vector<int> predict(const DiscriminatorParams<float>& p, const SamplePool& pool);
std::vector<int> predict(const CnnParams<float>& p, const SamplePool& pool);

/// Per-row class probabilities (supervised head for the discriminator).
std::vector<double> class_probabilities(const DiscriminatorParams<float>& p, std::span<const float> rows,
                                        std::size_t n);
std::vector<double> class_probabilities(const CnnParams<float>& p, std::span<const float> rows, std::size_t n);

double accuracy(std::span<const int> predicted, const LabeledPool& pool);

/// Noise matrix (rows x dim) from the configured prior.
std::vector<float> draw_noise(Rng& rng, std::size_t rows, std::size_t dim, NoisePrior prior);

} // namespace bytesgan
