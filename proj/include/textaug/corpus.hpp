#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "textaug/augmented_set.hpp"

namespace textaug {

enum class DatasetRole { base, novel, augmented_novel };

std::string role_name(DatasetRole role);

struct LabeledSample {
    std::string id;
    std::string text;
    std::string label;
};

// Immutable after load; label_space keeps first-appearance order so class
// indices stay stable across runs.
struct Dataset {
    std::vector<LabeledSample> samples;
    std::vector<std::string> label_space;
    DatasetRole role = DatasetRole::novel;

    std::optional<int> label_index(const std::string& label) const;
    const LabeledSample* find(const std::string& id) const;
    std::vector<std::size_t> indices_of_label(const std::string& label) const;

    // Recomputes label_space from samples and checks invariants.
    void finalize();
};

enum class DatasetFormat { jsonl, csv };

DatasetFormat dataset_format_of(const std::string& name);

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                     const std::string& text_field, const std::string& label_field);

void save_dataset_jsonl(const Dataset& dataset, const std::filesystem::path& path);

struct KShotDraw {
    int k = 0;
    std::uint64_t seed = 0;
    // class name -> selected ids, classes in label_space order.
    std::map<std::string, std::vector<std::string>> selected_ids;

    std::size_t total() const;
};

// Uniform without-replacement draw of k ids per class. Streams are keyed
// by (seed, "kshot", class name), so the draw depends only on the dataset
// content, k and seed.
KShotDraw k_shot_sample(const Dataset& dataset, int k, std::uint64_t seed);

// The few-shot subset selected by a draw, and its complement (used as the
// held-out test split).
Dataset select_draw(const Dataset& dataset, const KShotDraw& draw);
Dataset reject_draw(const Dataset& dataset, const KShotDraw& draw);

// Originals plus all variants, role = augmented_novel. Variant ids are
// "<source_id>/aug<k>". Labels are copied from the sources after an
// integrity check.
Dataset merge_augmented(const Dataset& novel_fewshot, const AugmentedSet& variants);

// Requires disjoint label spaces (used for a base/novel pair).
void require_disjoint_labels(const Dataset& base, const Dataset& novel);

}  // namespace textaug
