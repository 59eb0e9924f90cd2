#include "bytesgan/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bytesgan/errors.hpp"
#include "bytesgan/util.hpp"

namespace bytesgan {

using nlohmann::json;

namespace {

/// Reads fields of one JSON object and rejects keys nobody asked for.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + " must be an object");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    template <typename T>
    void get(const std::string& key, T& out) {
        if (!has(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(where(key) + " has the wrong type");
        }
    }

    void get_count(const std::string& key, std::size_t& out) {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
            throw ConfigError(where(key) + " must be a non-negative integer");
        }
        out = v.get<std::size_t>();
    }

    void get_int(const std::string& key, int& out) {
        if (!has(key)) return;
        if (!j_.at(key).is_number_integer()) throw ConfigError(where(key) + " must be an integer");
        out = j_.at(key).get<int>();
    }

    void get_seed(const std::string& key, std::uint64_t& out) {
        if (!has(key)) return;
        if (!j_.at(key).is_number_unsigned()) throw ConfigError(where(key) + " must be a non-negative integer");
        out = j_.at(key).get<std::uint64_t>();
    }

    void get_real(const std::string& key, double& out) {
        if (!has(key)) return;
        if (!j_.at(key).is_number()) throw ConfigError(where(key) + " must be a number");
        out = j_.at(key).get<double>();
    }

    const json* child(const std::string& key) {
        if (!has(key)) return nullptr;
        return &j_.at(key);
    }

    std::string where(const std::string& key = "") const { return key.empty() ? path_ : path_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError("unknown key " + where(it.key()));
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_counts(Section& s, const std::string& key, std::vector<std::size_t>& out) {
    const json* v = s.child(key);
    if (!v) return;
    if (!v->is_array()) throw ConfigError(s.where(key) + " must be an array");
    out.clear();
    for (const auto& e : *v) {
        if (!e.is_number_unsigned()) throw ConfigError(s.where(key) + " entries must be non-negative integers");
        out.push_back(e.get<std::size_t>());
    }
}

void read_optional_count(Section& s, const std::string& key, std::optional<std::size_t>& out) {
    const json* v = s.child(key);
    if (!v) return;
    if (v->is_null()) {
        out.reset();
    } else if (v->is_number_unsigned()) {
        out = v->get<std::size_t>();
    } else {
        throw ConfigError(s.where(key) + " must be null or a non-negative integer");
    }
}

json optional_count(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

void read_filter(const json& j, FilterPolicy& f) {
    Section s(j, "filter");
    if (const json* v = s.child("dropped_protocols")) {
        if (!v->is_array()) throw ConfigError("filter.dropped_protocols must be an array");
        f.dropped_protocols.clear();
        for (const auto& e : *v) {
            auto p = e.is_string() ? parse_protocol(e.get<std::string>()) : std::nullopt;
            if (!p) throw ConfigError("filter.dropped_protocols: unknown protocol " + e.dump());
            f.dropped_protocols.push_back(*p);
        }
    }
    s.get("drop_non_ip", f.drop_non_ip);
    s.get("zero_ip_addresses", f.zero_ip_addresses);
    s.get("include_transport_header", f.include_transport_header);
    s.get("keep_zero_payload", f.keep_zero_payload);
    s.finish();
}

void read_split(const json& j, SplitSpec& sp) {
    Section s(j, "split");
    s.get_count("labeled_per_class", sp.labeled_per_class);
    read_optional_count(s, "unlabeled_per_class", sp.unlabeled_per_class);
    s.get_real("test_fraction", sp.test_fraction);
    s.get_seed("seed", sp.seed);
    s.finish();
}

void read_sgan(const json& j, SganTrainConfig& c) {
    Section s(j, "sgan");
    s.get_count("batch_size", c.batch_size);
    s.get_real("learning_rate", c.adam.learning_rate);
    s.get_real("adam_beta1", c.adam.beta1);
    s.get_real("adam_beta2", c.adam.beta2);
    s.get_real("adam_epsilon", c.adam.epsilon);
    s.get_count("disc_steps_per_gen_step", c.disc_steps_per_gen_step);
    s.get_count("epochs", c.epochs);
    s.get_count("steps_per_epoch", c.steps_per_epoch);
    if (s.has("noise_dim")) {
        int dim = 0;
        s.get_int("noise_dim", dim);
        if (dim != kNoiseDim) throw ConfigError("sgan.noise_dim is fixed at " + std::to_string(kNoiseDim));
    }
    if (s.has("noise_prior")) {
        std::string name;
        s.get("noise_prior", name);
        c.noise_prior = parse_noise_prior(name);
    }
    s.get_seed("seed", c.seed);
    s.get_count("checkpoint_every", c.checkpoint_every);
    s.get_real("labeled_weight", c.labeled_weight);
    s.get_real("unlabeled_weight", c.unlabeled_weight);
    s.finish();
}

void read_cnn(const json& j, CnnTrainConfig& c) {
    Section s(j, "cnn");
    s.get_count("batch_size", c.batch_size);
    s.get_real("learning_rate", c.rmsprop.learning_rate);
    s.get_real("rho", c.rmsprop.rho);
    s.get_real("epsilon", c.rmsprop.epsilon);
    s.get_count("epochs", c.epochs);
    s.get_count("steps_per_epoch", c.steps_per_epoch);
    s.get_count("micro_batch", c.micro_batch);
    s.get_seed("seed", c.seed);
    s.get_count("checkpoint_every", c.checkpoint_every);
    s.finish();
}

void read_grid(const json& j, ExperimentGrid& g) {
    Section s(j, "experiment");
    if (const json* v = s.child("seeds")) {
        if (!v->is_array()) throw ConfigError("experiment.seeds must be an array");
        g.seeds.clear();
        for (const auto& e : *v) {
            if (!e.is_number_unsigned()) throw ConfigError("experiment.seeds entries must be non-negative integers");
            g.seeds.push_back(e.get<std::uint64_t>());
        }
    }
    s.get_count("labeled_per_class", g.labeled_per_class);
    read_counts(s, "unlabeled_counts", g.unlabeled_counts);
    read_counts(s, "labeled_counts", g.labeled_counts);
    read_optional_count(s, "exp2_unlabeled_per_class", g.exp2_unlabeled_per_class);
    s.get("supervised_baseline", g.supervised_baseline);
    s.get_count("cnn_labeled_per_class", g.cnn_labeled_per_class);
    s.finish();
}

void read_synthetic(const json& j, SyntheticSpec& sp) {
    Section s(j, "synthetic");
    s.get_count("n_classes", sp.n_classes);
    s.get_count("per_class", sp.per_class);
    s.get_seed("seed", sp.seed);
    s.get_real("noise_sd", sp.noise_sd);
    s.get_real("signal", sp.signal);
    s.get_count("motif_length", sp.motif_length);
    s.get_count("min_length", sp.min_length);
    s.get("random_phase", sp.random_phase);
    s.get_real("baseline_spread", sp.baseline_spread);
    s.finish();
}

} // namespace

void RunConfig::validate() const {
    sgan.validate();
    cnn.validate();
    synthetic.validate();
    if (!(split.test_fraction > 0.0 && split.test_fraction < 1.0)) {
        throw ConfigError("split.test_fraction must lie in (0, 1)");
    }
    if (experiment.seeds.empty()) throw ConfigError("experiment.seeds must not be empty");
    if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

std::string RunConfig::to_json() const {
    json j;
    json protocols = json::array();
    for (Protocol p : filter.dropped_protocols) protocols.push_back(to_string(p));
    j["filter"] = {{"dropped_protocols", protocols},
                   {"drop_non_ip", filter.drop_non_ip},
                   {"zero_ip_addresses", filter.zero_ip_addresses},
                   {"include_transport_header", filter.include_transport_header},
                   {"keep_zero_payload", filter.keep_zero_payload}};
    j["split"] = {{"labeled_per_class", split.labeled_per_class},
                  {"unlabeled_per_class", optional_count(split.unlabeled_per_class)},
                  {"test_fraction", split.test_fraction},
                  {"seed", split.seed}};
    j["sgan"] = {{"batch_size", sgan.batch_size},
                 {"learning_rate", sgan.adam.learning_rate},
                 {"adam_beta1", sgan.adam.beta1},
                 {"adam_beta2", sgan.adam.beta2},
                 {"adam_epsilon", sgan.adam.epsilon},
                 {"disc_steps_per_gen_step", sgan.disc_steps_per_gen_step},
                 {"epochs", sgan.epochs},
                 {"steps_per_epoch", sgan.steps_per_epoch},
                 {"noise_dim", kNoiseDim},
                 {"noise_prior", to_string(sgan.noise_prior)},
                 {"seed", sgan.seed},
                 {"checkpoint_every", sgan.checkpoint_every},
                 {"labeled_weight", sgan.labeled_weight},
                 {"unlabeled_weight", sgan.unlabeled_weight}};
    j["cnn"] = {{"batch_size", cnn.batch_size},
                {"learning_rate", cnn.rmsprop.learning_rate},
                {"rho", cnn.rmsprop.rho},
                {"epsilon", cnn.rmsprop.epsilon},
                {"epochs", cnn.epochs},
                {"steps_per_epoch", cnn.steps_per_epoch},
                {"micro_batch", cnn.micro_batch},
                {"seed", cnn.seed},
                {"checkpoint_every", cnn.checkpoint_every}};
    j["experiment"] = {{"seeds", experiment.seeds},
                       {"labeled_per_class", experiment.labeled_per_class},
                       {"unlabeled_counts", experiment.unlabeled_counts},
                       {"labeled_counts", experiment.labeled_counts},
                       {"exp2_unlabeled_per_class", optional_count(experiment.exp2_unlabeled_per_class)},
                       {"supervised_baseline", experiment.supervised_baseline},
                       {"cnn_labeled_per_class", experiment.cnn_labeled_per_class}};
    j["synthetic"] = {{"n_classes", synthetic.n_classes},
                      {"per_class", synthetic.per_class},
                      {"seed", synthetic.seed},
                      {"noise_sd", synthetic.noise_sd},
                      {"signal", synthetic.signal},
                      {"motif_length", synthetic.motif_length},
                      {"min_length", synthetic.min_length},
                      {"random_phase", synthetic.random_phase},
                      {"baseline_spread", synthetic.baseline_spread}};
    j["output_dir"] = output_dir;
    return j.dump(2) + "\n";
}

RunConfig RunConfig::from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    Section s(j, "config");
    if (const json* v = s.child("filter")) read_filter(*v, c.filter);
    if (const json* v = s.child("split")) read_split(*v, c.split);
    if (const json* v = s.child("sgan")) read_sgan(*v, c.sgan);
    if (const json* v = s.child("cnn")) read_cnn(*v, c.cnn);
    if (const json* v = s.child("experiment")) read_grid(*v, c.experiment);
    if (const json* v = s.child("synthetic")) read_synthetic(*v, c.synthetic);
    s.get("output_dir", c.output_dir);
    s.finish();
    c.validate();
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

void RunConfig::save(const std::filesystem::path& path) const { write_text_file(path.string(), to_json()); }

} // namespace bytesgan
