#include "bytesgan/training.hpp"

#include <chrono>
#include <cmath>
#include <json.hpp>
#include <sstream>

#include "bytesgan/checkpoint.hpp"
#include "bytesgan/errors.hpp"
#include "bytesgan/losses.hpp"

namespace bytesgan {

namespace {

constexpr std::uint64_t kTagDisc = 0xD15C;
constexpr std::uint64_t kTagGen = 0x6E4E;
constexpr std::uint64_t kTagNoise = 0x2015E;
constexpr std::uint64_t kTagLabeled = 0x1AB;
constexpr std::uint64_t kTagUnlabeled = 0x0B1AB;
constexpr std::uint64_t kTagCnn = 0xC22;
constexpr std::size_t kPredictChunk = 256;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Endless batch supply: consecutive shuffled epochs of one pool.
template <typename Pool>
class Cycler {
public:
    Cycler(const Pool& pool, std::size_t batch, std::uint64_t seed) : pool_(&pool), batch_(batch), seed_(seed) {}

    Batch next() {
        for (;;) {
            if (!stream_) stream_.emplace(*pool_, batch_, seed_, pass_++);
            if (auto b = stream_->next()) return std::move(*b);
            stream_.reset();
        }
    }

private:
    const Pool* pool_;
    std::size_t batch_;
    std::uint64_t seed_;
    std::uint64_t pass_ = 0;
    std::optional<BatchStream> stream_;
};

std::vector<float> normalized_rows(const SamplePool& pool, std::size_t first, std::size_t count) {
    std::vector<float> out(count * kPbvLength);
    for (std::size_t i = 0; i < count; ++i) {
        auto row = pool.octets(first + i);
        for (std::size_t j = 0; j < kPbvLength; ++j) out[i * kPbvLength + j] = normalize_octet(row[j]);
    }
    return out;
}

void scale(std::vector<float>& v, double s) {
    if (s == 1.0) return;
    for (auto& x : v) x = static_cast<float>(x * s);
}

std::string epoch_name(const char* stem, std::size_t epoch) {
    return std::string(stem) + "_epoch" + std::to_string(epoch) + ".bsgm";
}

void check_pool_labels(const LabeledPool& pool, const ClassSchema& schema) {
    for (auto y : pool.labels()) {
        if (y >= schema.size()) {
            throw ConfigError("labeled pool holds label " + std::to_string(y) + " but the schema has " +
                              std::to_string(schema.size()) + " classes");
        }
    }
}


void json_opt(nlohmann::ordered_json& j, const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
}

} // namespace

std::string to_string(NoisePrior p) { return p == NoisePrior::uniform ? "uniform" : "gaussian"; }

NoisePrior parse_noise_prior(std::string_view s) {
    if (s == "uniform") return NoisePrior::uniform;
    if (s == "gaussian") return NoisePrior::gaussian;
    throw ConfigError("unknown noise prior '" + std::string(s) + "' (expected uniform or gaussian)");
}

void SganTrainConfig::validate() const {
    if (batch_size < 2) throw ConfigError("sgan batch_size must be at least 2");
    if (!(adam.learning_rate > 0)) throw ConfigError("sgan learning_rate must be positive");
    if (!(adam.beta1 >= 0 && adam.beta1 < 1 && adam.beta2 >= 0 && adam.beta2 < 1)) {
        throw ConfigError("adam betas must lie in [0, 1)");
    }
    if (!(adam.epsilon > 0)) throw ConfigError("adam epsilon must be positive");
    if (disc_steps_per_gen_step < 1) throw ConfigError("disc_steps_per_gen_step must be at least 1");
    if (epochs < 1) throw ConfigError("sgan epochs must be at least 1");
    if (!(labeled_weight >= 0) || !(unlabeled_weight >= 0)) throw ConfigError("loss weights must be non-negative");
    if (generator.noise_dim != kNoiseDim) throw ConfigError("noise_dim is fixed at 100");
    if (generator.out_h() != discriminator.in_h || generator.out_w() != discriminator.in_w ||
        generator.out_c != discriminator.in_c) {
        throw ConfigError("generator output shape does not match the discriminator input shape");
    }
    if (discriminator.sample_size() != kPbvLength) throw ConfigError("discriminator input must hold 1480 values");
}

void CnnTrainConfig::validate() const {
    if (batch_size < 1) throw ConfigError("cnn batch_size must be positive");
    if (micro_batch < 1) throw ConfigError("cnn micro_batch must be positive");
    if (!(rmsprop.learning_rate > 0)) throw ConfigError("cnn learning_rate must be positive");
    if (!(rmsprop.rho >= 0 && rmsprop.rho < 1)) throw ConfigError("rmsprop rho must lie in [0, 1)");
    if (!(rmsprop.epsilon > 0)) throw ConfigError("rmsprop epsilon must be positive");
    if (epochs < 1) throw ConfigError("cnn epochs must be at least 1");
    if (cnn.length != static_cast<int>(kPbvLength)) throw ConfigError("cnn input length must be 1480");
}

// ---------------------------------------------------------------- log

std::string TrainLog::to_jsonl(bool with_wall_clock) const {
    std::ostringstream os;
    for (const auto& s : steps) {
        nlohmann::ordered_json j;
        j["type"] = "step";
        j["step"] = s.step;
        j["epoch"] = s.epoch;
        j["loss"] = s.loss;
        json_opt(j, "labeled_loss", s.labeled_loss);
        json_opt(j, "unlabeled_real", s.unlabeled_real);
        json_opt(j, "unlabeled_fake", s.unlabeled_fake);
        json_opt(j, "gen_loss", s.gen_loss);
        if (with_wall_clock) j["wall_seconds"] = s.wall_seconds;
        os << j.dump() << '\n';
    }
    for (const auto& e : epochs) {
        nlohmann::ordered_json j;
        j["type"] = "epoch";
        j["epoch"] = e.epoch;
        j["steps"] = e.steps;
        json_opt(j, "heldout_accuracy", e.heldout_accuracy);
        os << j.dump() << '\n';
    }
    return os.str();
}

TrainLog TrainLog::from_jsonl(std::string_view text) {
    TrainLog log;
    std::istringstream is{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    auto opt = [](const nlohmann::json& j, const char* key) -> std::optional<double> {
        if (j.contains(key)) return j.at(key).get<double>();
        return std::nullopt;
    };
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            const auto type = j.at("type").get<std::string>();
            if (type == "step") {
                StepRecord r;
                r.step = j.at("step").get<std::size_t>();
                r.epoch = j.at("epoch").get<std::size_t>();
                r.loss = j.at("loss").get<double>();
                r.labeled_loss = opt(j, "labeled_loss");
                r.unlabeled_real = opt(j, "unlabeled_real");
                r.unlabeled_fake = opt(j, "unlabeled_fake");
                r.gen_loss = opt(j, "gen_loss");
                r.wall_seconds = opt(j, "wall_seconds").value_or(0.0);
                log.steps.push_back(r);
            } else if (type == "epoch") {
                EpochRecord e;
                e.epoch = j.at("epoch").get<std::size_t>();
                e.steps = j.at("steps").get<std::size_t>();
                e.heldout_accuracy = opt(j, "heldout_accuracy");
                log.epochs.push_back(e);
            } else {
                throw FormatError("unknown record type '" + type + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("train log line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return log;
}

// ---------------------------------------------------------------- inference helpers

std::vector<float> draw_noise(Rng& rng, std::size_t rows, std::size_t dim, NoisePrior prior) {
    std::vector<float> z(rows * dim);
    for (auto& v : z) {
        v = prior == NoisePrior::uniform ? static_cast<float>(rng.uniform(-1.0, 1.0)) : static_cast<float>(rng.normal());
    }
    return z;
}

std::vector<double> class_probabilities(const DiscriminatorParams<float>& p, std::span<const float> rows,
                                        std::size_t n) {
    const std::size_t k = static_cast<std::size_t>(p.config.classes);
    const std::size_t d = p.config.sample_size();
    require(rows.size() == n * d, "class_probabilities: shape mismatch");
    std::vector<double> out;
    out.reserve(n * k);
    for (std::size_t first = 0; first < n; first += kPredictChunk) {
        const std::size_t m = std::min(kPredictChunk, n - first);
        auto tr = discriminator_forward<float>(p, rows.subspan(first * d, m * d), m);
        std::vector<double> logits(tr.logits.begin(), tr.logits.end());
        auto probs = softmax_rows(logits, k);
        out.insert(out.end(), probs.begin(), probs.end());
    }
    return out;
}

std::vector<double> class_probabilities(const CnnParams<float>& p, std::span<const float> rows, std::size_t n) {
    const std::size_t k = static_cast<std::size_t>(p.config.classes);
    const std::size_t d = static_cast<std::size_t>(p.config.length);
    require(rows.size() == n * d, "class_probabilities: shape mismatch");
    constexpr std::size_t chunk = 32;
    std::vector<double> out;
    out.reserve(n * k);
    for (std::size_t first = 0; first < n; first += chunk) {
        const std::size_t m = std::min(chunk, n - first);
        auto tr = cnn_forward_trace<float>(p, rows.subspan(first * d, m * d), m);
        std::vector<double> logits(tr.logits.begin(), tr.logits.end());
        auto probs = softmax_rows(logits, k);
        out.insert(out.end(), probs.begin(), probs.end());
    }
    return out;
}

namespace {

template <typename P>
std::vector<int> predict_pool(const P& p, const SamplePool& pool) {
    const std::size_t k = static_cast<std::size_t>(p.config.classes);
    std::vector<int> out;
    out.reserve(pool.size());
    for (std::size_t first = 0; first < pool.size(); first += kPredictChunk) {
        const std::size_t m = std::min(kPredictChunk, pool.size() - first);
        auto rows = normalized_rows(pool, first, m);
        auto probs = class_probabilities(p, rows, m);
        for (std::size_t i = 0; i < m; ++i) {
            const double* r = probs.data() + i * k;
            out.push_back(static_cast<int>(std::max_element(r, r + k) - r));
        }
    }
    return out;
}

} // namespace

std::vector<int> predict(const DiscriminatorParams<float>& p, const SamplePool& pool) { return predict_pool(p, pool); }
std::vector<int> predict(const CnnParams<float>& p, const SamplePool& pool) { return predict_pool(p, pool); }

double accuracy(std::span<const int> predicted, const LabeledPool& pool) {
    require(predicted.size() == pool.size(), "accuracy: size mismatch");
    if (pool.empty()) return 0.0;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) hit += predicted[i] == static_cast<int>(pool.label(i));
    return static_cast<double>(hit) / static_cast<double>(pool.size());
}

// ---------------------------------------------------------------- SGAN

SganResult train_sgan(const LabeledPool& labeled, const UnlabeledPool& unlabeled, const ClassSchema& schema,
                      const SganTrainConfig& cfg_in, const TrainHooks& hooks) {
    SganTrainConfig cfg = cfg_in;
    cfg.discriminator.classes = static_cast<int>(schema.size());
    cfg.validate();
    if (labeled.empty()) throw ConfigError("train_sgan: labeled pool is empty");
    check_pool_labels(labeled, schema);

    const std::size_t k = schema.size();
    const std::size_t d = cfg.discriminator.sample_size();
    const std::size_t hidden = static_cast<std::size_t>(cfg.discriminator.hidden);
    const std::size_t B = cfg.batch_size;
    const bool adversarial = !unlabeled.empty();
    const std::size_t larger = std::max(labeled.size(), unlabeled.size());
    const std::size_t steps_per_epoch = cfg.steps_per_epoch ? cfg.steps_per_epoch : (larger + B - 1) / B;

    SganResult res{init_discriminator<float>(cfg.discriminator, derive_seed(cfg.seed, kTagDisc)),
                   init_generator<float>(cfg.generator, derive_seed(cfg.seed, kTagGen)), {}};
    auto& D = res.discriminator;
    auto& G = res.generator;
    auto adam_d = AdamState<float>::zeros(D.values.size());
    auto adam_g = AdamState<float>::zeros(G.values.size());
    Rng noise_rng(derive_seed(cfg.seed, kTagNoise));
    Cycler<LabeledPool> lab_src(labeled, B, derive_seed(cfg.seed, kTagLabeled));
    Cycler<UnlabeledPool> unl_src(unlabeled, B, derive_seed(cfg.seed, kTagUnlabeled));

    auto save_pair = [&](const std::string& d_name, const std::string& g_name) {
        if (hooks.checkpoint_dir.empty()) return;
        ModelCheckpoint::of(D, schema).save(hooks.checkpoint_dir / d_name);
        ModelCheckpoint::of(G, schema.names()).save(hooks.checkpoint_dir / g_name);
    };
    auto diverged = [&](std::size_t step, const char* what, double v) {
        save_pair("diverged_discriminator.bsgm", "diverged_generator.bsgm");
        std::ostringstream os;
        os << "non-finite " << what << " (" << v << ") at step " << step;
        if (!hooks.checkpoint_dir.empty()) os << "; diagnostic checkpoint in " << hooks.checkpoint_dir.string();
        throw DivergenceError(os.str());
    };

    std::size_t step = 0;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (std::size_t s = 0; s < steps_per_epoch; ++s, ++step) {
            const auto t0 = Clock::now();
            StepRecord rec;
            rec.step = step;
            rec.epoch = epoch;

            std::optional<SganStepTrace> obs;
            if (hooks.sgan_observer) {
                obs.emplace();
                obs->disc_before = D;
                obs->gen_digest_before_disc_update = G.digest();
            }

            // (a) generator samples with G fixed; (b) real batches
            GeneratorTrace<float> gtrace;
            std::optional<Batch> ubatch;
            if (adversarial) {
                auto z = draw_noise(noise_rng, B, static_cast<std::size_t>(cfg.generator.noise_dim), cfg.noise_prior);
                gtrace = generator_forward<float>(G, z, B);
                ubatch = unl_src.next();
            }
            Batch lbatch = lab_src.next();

            // (c) discriminator update
            std::vector<float> grads(D.values.size(), 0.0f);
            auto tl = discriminator_forward<float>(D, lbatch.vectors, lbatch.rows);
            auto ll = labeled_loss<float>(tl.logits, k, lbatch.labels);
            rec.labeled_loss = ll.value.scalar;
            rec.loss = cfg.labeled_weight * ll.value.scalar;
            scale(ll.grad, cfg.labeled_weight);
            discriminator_backward<float>(D, tl, ll.grad, {}, grads);
            if (adversarial) {
                auto tr = discriminator_forward<float>(D, ubatch->vectors, ubatch->rows);
                auto tf = discriminator_forward<float>(D, gtrace.output, B);
                auto ul = unlabeled_loss<float>(tr.logits, tf.logits, k);
                rec.unlabeled_real = ul.real_term;
                rec.unlabeled_fake = ul.fake_term;
                rec.loss += cfg.unlabeled_weight * ul.value.scalar;
                scale(ul.real_grad, cfg.unlabeled_weight);
                scale(ul.fake_grad, cfg.unlabeled_weight);
                discriminator_backward<float>(D, tr, ul.real_grad, {}, grads);
                discriminator_backward<float>(D, tf, ul.fake_grad, {}, grads);
            }
            if (!std::isfinite(rec.loss)) diverged(step, "discriminator loss", rec.loss);
            {
                auto r = adam_step<float>(std::move(D.values), grads, std::move(adam_d), cfg.adam);
                D.values = std::move(r.params);
                adam_d = std::move(r.state);
            }

            // (d) generator update through the fixed discriminator, on the same noise
            const bool gen_turn = adversarial && (s + 1) % cfg.disc_steps_per_gen_step == 0;
            if (obs) {
                obs->gen_digest_after_disc_update = G.digest();
                obs->gen_updated = gen_turn;
                obs->disc_digest_before_gen_update = D.digest();
            }
            if (gen_turn) {
                auto tr = discriminator_forward<float>(D, ubatch->vectors, ubatch->rows);
                auto tf = discriminator_forward<float>(D, gtrace.output, B);
                auto fm = feature_matching_loss<float>(tr.features, tf.features, hidden);
                rec.gen_loss = fm.value.scalar;
                if (!std::isfinite(fm.value.scalar)) diverged(step, "generator loss", fm.value.scalar);
                std::vector<float> dx(B * d, 0.0f);
                discriminator_backward<float>(D, tf, {}, fm.fake_grad, {}, dx);
                std::vector<float> ggrads(G.values.size(), 0.0f);
                generator_backward<float>(G, gtrace, dx, ggrads);
                auto r = adam_step<float>(std::move(G.values), ggrads, std::move(adam_g), cfg.adam);
                G.values = std::move(r.params);
                adam_g = std::move(r.state);
            }
            rec.wall_seconds = seconds_since(t0);
            res.log.steps.push_back(rec);

            if (obs) {
                obs->disc_digest_after_gen_update = D.digest();
                obs->record = rec;
                obs->labeled = std::move(lbatch);
                obs->unlabeled = std::move(ubatch);
                obs->fake = std::move(gtrace.output);
                hooks.sgan_observer(*obs);
            }
            if (hooks.on_step) hooks.on_step(rec);
        }

        EpochRecord er{epoch, steps_per_epoch, std::nullopt};
        if (hooks.eval_pool && !hooks.eval_pool->empty()) {
            er.heldout_accuracy = accuracy(predict(D, *hooks.eval_pool), *hooks.eval_pool);
        }
        res.log.epochs.push_back(er);
        if (cfg.checkpoint_every && epoch % cfg.checkpoint_every == 0) {
            save_pair(epoch_name("discriminator", epoch), epoch_name("generator", epoch));
        }
    }
    return res;
}

// ---------------------------------------------------------------- CNN

CnnResult train_cnn(const LabeledPool& labeled, const ClassSchema& schema, const CnnTrainConfig& cfg_in,
                    const TrainHooks& hooks) {
    CnnTrainConfig cfg = cfg_in;
    cfg.cnn.classes = static_cast<int>(schema.size());
    cfg.validate();
    if (labeled.empty()) throw ConfigError("train_cnn: labeled pool is empty");
    check_pool_labels(labeled, schema);

    const std::size_t k = schema.size();
    const std::size_t d = static_cast<std::size_t>(cfg.cnn.length);
    const std::size_t B = cfg.batch_size;
    const std::size_t steps_per_epoch = cfg.steps_per_epoch ? cfg.steps_per_epoch : (labeled.size() + B - 1) / B;

    CnnResult res{init_cnn<float>(cfg.cnn, derive_seed(cfg.seed, kTagCnn)), {}};
    auto& P = res.params;
    auto state = RmspropState<float>::zeros(P.values.size());
    Cycler<LabeledPool> src(labeled, B, derive_seed(cfg.seed, kTagLabeled));

    std::size_t step = 0;
    std::vector<float> grads(P.values.size());
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (std::size_t s = 0; s < steps_per_epoch; ++s, ++step) {
            const auto t0 = Clock::now();
            Batch b = src.next();
            std::fill(grads.begin(), grads.end(), 0.0f);
            double loss = 0.0;
            for (std::size_t first = 0; first < b.rows; first += cfg.micro_batch) {
                const std::size_t m = std::min(cfg.micro_batch, b.rows - first);
                const double share = static_cast<double>(m) / static_cast<double>(b.rows);
                auto tr = cnn_forward_trace<float>(P, std::span<const float>(b.vectors).subspan(first * d, m * d), m);
                auto lg = cnn_loss_from_logits<float>(tr.logits, k, std::span<const int>(b.labels).subspan(first, m));
                loss += share * lg.value.scalar;
                scale(lg.grad, share);
                cnn_backward<float>(P, tr, lg.grad, grads);
            }
            if (!std::isfinite(loss)) {
                if (!hooks.checkpoint_dir.empty()) {
                    ModelCheckpoint::of(P, schema).save(hooks.checkpoint_dir / "diverged_cnn.bsgm");
                }
                throw DivergenceError("non-finite cnn loss at step " + std::to_string(step));
            }
            auto r = rmsprop_step<float>(std::move(P.values), grads, std::move(state), cfg.rmsprop);
            P.values = std::move(r.params);
            state = std::move(r.state);

            StepRecord rec;
            rec.step = step;
            rec.epoch = epoch;
            rec.loss = loss;
            rec.wall_seconds = seconds_since(t0);
            res.log.steps.push_back(rec);
            if (hooks.on_step) hooks.on_step(rec);
        }
        EpochRecord er{epoch, steps_per_epoch, std::nullopt};
        if (hooks.eval_pool && !hooks.eval_pool->empty()) {
            er.heldout_accuracy = accuracy(predict(P, *hooks.eval_pool), *hooks.eval_pool);
        }
        res.log.epochs.push_back(er);
        if (cfg.checkpoint_every && epoch % cfg.checkpoint_every == 0 && !hooks.checkpoint_dir.empty()) {
            ModelCheckpoint::of(P, schema).save(hooks.checkpoint_dir / epoch_name("cnn", epoch));
        }
    }
    return res;
}

} // namespace bytesgan
