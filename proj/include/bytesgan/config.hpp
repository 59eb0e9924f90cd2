#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bytesgan/dataset.hpp"
#include "bytesgan/pbv.hpp"
#include "bytesgan/synthetic.hpp"
#include "bytesgan/training.hpp"

namespace bytesgan {

/// Grids for the experiment commands.
struct ExperimentGrid {
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    /// exp1: fixed labeled count, swept unlabeled counts.
    std::size_t labeled_per_class = 1000;
    std::vector<std::size_t> unlabeled_counts{4000, 6000, 8000};
    /// exp2: swept labeled counts. SGAN arm uses `exp2_unlabeled_per_class`
    /// (nullopt: all remaining samples).
    std::vector<std::size_t> labeled_counts{1000, 2000, 3000, 4000};
    std::optional<std::size_t> exp2_unlabeled_per_class;
    /// Also train a supervised-only discriminator per exp1 seed.
    bool supervised_baseline = true;
    /// synthetic: labeled count of the CNN ample-label cell (0 disables it).
    std::size_t cnn_labeled_per_class = 4000;
};

/// Every knob of a run as one JSON document. Parsing rejects unknown keys
/// at every level; to_json writes every field, defaults included.
struct RunConfig {
    FilterPolicy filter;
    SplitSpec split{20, std::nullopt, 0.2, 1};
    SganTrainConfig sgan;
    CnnTrainConfig cnn;
    ExperimentGrid experiment;
    SyntheticSpec synthetic;
    std::string output_dir = "out";

    void validate() const;
    std::string to_json() const;
    static RunConfig from_json(std::string_view text);
    static RunConfig load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

} // namespace bytesgan
