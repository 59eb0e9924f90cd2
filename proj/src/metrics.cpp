#include "bytesgan/metrics.hpp"

#include <json.hpp>
#include <sstream>

#include "bytesgan/errors.hpp"
#include "bytesgan/training.hpp"
#include "bytesgan/util.hpp"

namespace bytesgan {

namespace {

/// Ratio with the 0/0 -> 0 convention.
double ratio(std::uint64_t num, std::uint64_t den, bool& undefined) {
    undefined = den == 0;
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

} // namespace

ConfusionMatrix ConfusionMatrix::from_predictions(std::size_t classes, std::span<const int> truth,
                                                  std::span<const int> predicted) {
    require(truth.size() == predicted.size(), "confusion: truth and predictions differ in length");
    ConfusionMatrix cm(classes);
    for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
    return cm;
}

void ConfusionMatrix::add(int truth, int predicted, std::uint64_t count) {
    require(truth >= 0 && static_cast<std::size_t>(truth) < n_ && predicted >= 0 &&
                static_cast<std::size_t>(predicted) < n_,
            "confusion: class index out of range");
    counts_[static_cast<std::size_t>(truth) * n_ + static_cast<std::size_t>(predicted)] += count;
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t s = 0;
    for (auto c : counts_) s += c;
    return s;
}

std::uint64_t ConfusionMatrix::trace() const {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < n_; ++i) s += at(i, i);
    return s;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
    std::uint64_t s = 0;
    for (std::size_t j = 0; j < n_; ++j) s += at(truth, j);
    return s;
}

std::uint64_t ConfusionMatrix::column_sum(std::size_t predicted) const {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < n_; ++i) s += at(i, predicted);
    return s;
}

Metrics compute_metrics(const ConfusionMatrix& cm) {
    Metrics m;
    bool unused = false;
    const auto total = cm.total();
    m.accuracy = ratio(cm.trace(), total, unused);
    std::uint64_t tp_sum = 0, support_sum = 0;
    for (std::size_t c = 0; c < cm.classes(); ++c) {
        ClassMetrics k;
        const auto tp = cm.at(c, c);
        k.support = cm.row_sum(c);
        k.predicted = cm.column_sum(c);
        k.precision = ratio(tp, k.predicted, k.precision_undefined);
        k.recall = ratio(tp, k.support, k.recall_undefined);
        const double pr = k.precision + k.recall;
        k.f1_undefined = pr == 0.0;
        k.f1 = k.f1_undefined ? 0.0 : 2 * k.precision * k.recall / pr;
        tp_sum += tp;
        support_sum += k.support;
        m.macro_precision += k.precision;
        m.macro_recall += k.recall;
        m.macro_f1 += k.f1;
        m.per_class.push_back(k);
    }
    if (cm.classes() > 0) {
        const double n = static_cast<double>(cm.classes());
        m.macro_precision /= n;
        m.macro_recall /= n;
        m.macro_f1 /= n;
    }
    m.micro_recall = ratio(tp_sum, support_sum, unused);
    return m;
}

std::string EvalReport::to_json() const {
    nlohmann::ordered_json j;
    j["model_kind"] = model_kind;
    j["accuracy"] = metrics.accuracy;
    j["accuracy_basis"] = "held-out test pool";
    j["samples"] = confusion.total();
    j["macro_precision"] = metrics.macro_precision;
    j["macro_recall"] = metrics.macro_recall;
    j["macro_f1"] = metrics.macro_f1;
    j["classes"] = class_names;
    auto per = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < metrics.per_class.size(); ++c) {
        const auto& k = metrics.per_class[c];
        nlohmann::ordered_json e;
        e["class"] = class_names[c];
        e["precision"] = k.precision;
        e["recall"] = k.recall;
        e["f1"] = k.f1;
        e["support"] = k.support;
        e["predicted"] = k.predicted;
        std::vector<std::string> flags;
        if (k.precision_undefined) flags.push_back("precision_0_over_0");
        if (k.recall_undefined) flags.push_back("recall_0_over_0");
        if (k.f1_undefined) flags.push_back("f1_0_over_0");
        e["undefined"] = flags;
        per.push_back(e);
    }
    j["per_class"] = per;
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < confusion.classes(); ++i) {
        std::vector<std::uint64_t> r;
        for (std::size_t k = 0; k < confusion.classes(); ++k) r.push_back(confusion.at(i, k));
        rows.push_back(r);
    }
    j["confusion"] = rows;
    j["metadata"] = metadata;
    return j.dump(2) + "\n";
}

EvalReport EvalReport::from_json(std::string_view text) {
    EvalReport r;
    try {
        const auto j = nlohmann::json::parse(text);
        r.model_kind = j.at("model_kind").get<std::string>();
        r.class_names = j.at("classes").get<std::vector<std::string>>();
        const auto& rows = j.at("confusion");
        r.confusion = ConfusionMatrix(r.class_names.size());
        if (rows.size() != r.class_names.size()) throw FormatError("report: confusion size does not match classes");
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto counts = rows[i].get<std::vector<std::uint64_t>>();
            if (counts.size() != r.class_names.size()) throw FormatError("report: ragged confusion row");
            for (std::size_t k = 0; k < counts.size(); ++k) {
                r.confusion.add(static_cast<int>(i), static_cast<int>(k), counts[k]);
            }
        }
        r.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("report: ") + e.what());
    }
    r.metrics = compute_metrics(r.confusion);
    return r;
}

std::string EvalReport::per_class_csv() const {
    std::ostringstream os;
    os << "class,precision,recall,f1,support,predicted,undefined\n";
    for (std::size_t c = 0; c < metrics.per_class.size(); ++c) {
        const auto& k = metrics.per_class[c];
        std::string flags;
        auto flag = [&](bool on, const char* f) {
            if (!on) return;
            if (!flags.empty()) flags += ';';
            flags += f;
        };
        flag(k.precision_undefined, "precision");
        flag(k.recall_undefined, "recall");
        flag(k.f1_undefined, "f1");
        os << csv_field(class_names[c]) << ',' << num(k.precision) << ',' << num(k.recall) << ',' << num(k.f1)
           << ',' << k.support << ',' << k.predicted << ',' << flags << '\n';
    }
    return os.str();
}

std::string EvalReport::confusion_csv() const {
    std::ostringstream os;
    os << "true\\predicted";
    for (const auto& n : class_names) os << ',' << csv_field(n);
    os << '\n';
    for (std::size_t i = 0; i < confusion.classes(); ++i) {
        os << csv_field(class_names[i]);
        for (std::size_t k = 0; k < confusion.classes(); ++k) os << ',' << confusion.at(i, k);
        os << '\n';
    }
    return os.str();
}

void EvalReport::save(const std::filesystem::path& json_path) const {
    write_text_file(json_path.string(), to_json());
    const auto stem = json_path.parent_path() / json_path.stem();
    write_text_file(stem.string() + "_per_class.csv", per_class_csv());
    write_text_file(stem.string() + "_confusion.csv", confusion_csv());
}

double accuracy_from_confusion_csv(std::string_view csv) {
    std::istringstream is{std::string(csv)};
    std::string line;
    std::getline(is, line);  // header
    std::uint64_t diag = 0, total = 0;
    std::size_t row = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        // class names may be quoted; counts are the last fields
        std::vector<std::uint64_t> counts;
        std::size_t end = line.size();
        while (true) {
            const auto comma = line.rfind(',', end - 1);
            if (comma == std::string::npos) break;
            const auto field = line.substr(comma + 1, end - comma - 1);
            if (field.empty() || field.find_first_not_of("0123456789") != std::string::npos) break;
            counts.insert(counts.begin(), std::stoull(field));
            end = comma;
            if (end == 0) break;
        }
        for (std::size_t k = 0; k < counts.size(); ++k) {
            total += counts[k];
            if (k == row) diag += counts[k];
        }
        ++row;
    }
    return total == 0 ? 0.0 : static_cast<double>(diag) / static_cast<double>(total);
}

std::vector<int> predict(const ModelCheckpoint& model, const SamplePool& pool) {
    switch (model.architecture) {
        case Architecture::discriminator: return predict(model.discriminator(), pool);
        case Architecture::cnn: return predict(model.cnn(), pool);
        case Architecture::generator: break;
    }
    throw ConfigError("a generator checkpoint cannot classify; use the discriminator or cnn checkpoint");
}

EvalReport evaluate(const ModelCheckpoint& model, const LabeledPool& test, const ClassSchema& schema) {
    if (model.class_names != schema.names()) {
        throw ConfigError("model classes do not match the dataset schema");
    }
    for (auto y : test.labels()) {
        if (y >= schema.size()) throw ConfigError("test pool label outside the schema");
    }
    const auto pred = predict(model, test);
    std::vector<int> truth(test.labels().begin(), test.labels().end());
    EvalReport r;
    r.model_kind = to_string(model.architecture);
    r.class_names = schema.names();
    r.confusion = ConfusionMatrix::from_predictions(schema.size(), truth, pred);
    r.metrics = compute_metrics(r.confusion);
    r.metadata["model_fingerprint"] = hex64(model.fingerprint);
    r.metadata["model_digest"] = hex64(digest_of<float>(model.values));
    return r;
}

} // namespace bytesgan
