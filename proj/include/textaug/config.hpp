#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "textaug/fewshot_trainer.hpp"
#include "textaug/http_json.hpp"
#include "textaug/llm_augment.hpp"
#include "textaug/quality_metrics.hpp"
#include "textaug/resources.hpp"
#include "textaug/rule_augment.hpp"

namespace textaug {

struct DatasetConfig {
    std::string path;
    std::string format = "jsonl";
    std::string text_field = "text";
    std::string label_field = "label";

    Dataset load() const;
};

// Per-method overrides of the shared edit-strength defaults.
struct MethodSettings {
    std::optional<double> rate;
    std::optional<int> count;
    std::optional<int> n_variants;
    std::optional<int> n_neighbors;
};

// One declarative file drives every command; flags override single
// fields. See the README for the schema.
struct PipelineConfig {
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    int threads = 1;
    int k_shot = 2;

    DatasetConfig dataset;        // input of `augment` / reference of `evaluate`
    DatasetConfig base_dataset;   // phase-1 data for `train` / `compare`
    DatasetConfig novel_dataset;  // few-shot target data

    double default_rate = 0.3;
    int default_n_variants = 6;
    int default_n_neighbors = 10;
    std::map<std::string, MethodSettings> methods;

    std::string word_vectors;
    std::string sentence_vectors;
    std::string counter_fitted_vectors;
    std::string thesaurus_ppdb;
    std::string thesaurus_wordnet;
    std::string keyboard_file;
    std::string ocr_file;
    std::string misspell_file;

    ServiceConfig llm;
    ServiceConfig fill_mask;
    ServiceConfig translation;
    std::string translation_source = "en";
    std::string translation_pivot = "de";
    std::string prompt_mode = "single_turn";
    std::optional<PromptTemplate> prompt_override;
    int classify_examples = 2;

    TrainConfig train;
    std::string train_method = "raw";

    double epsilon = 1e-4;
    std::string faithfulness_aggregation = "max";

    bool offline = false;

    static PipelineConfig from_file(const std::filesystem::path& path);

    void validate_paths() const;

    AugmentSpec spec_for(const std::string& method) const;
    PromptTemplate rephrase_template() const;
    FaithfulnessAggregation aggregation() const;
};

// Known method names: the rule taxonomy plus the service-backed methods
// and the "raw" pseudo-method (no augmentation).
const std::vector<std::string>& all_method_names();
bool is_known_method(const std::string& name);

// Lazily loads the resources a method needs; built-in tables back
// keyboard/ocr/spelling when no file is configured.
class ResourceSet {
public:
    explicit ResourceSet(const PipelineConfig& config);

    RuleResources for_method(const std::string& method);
    const EmbeddingStore& word_store();

private:
    const PipelineConfig& config_;
    std::optional<KeyboardLayout> keyboard_;
    std::optional<ConfusionTable> ocr_;
    std::optional<MisspellTable> misspell_;
    std::optional<Thesaurus> ppdb_;
    std::optional<Thesaurus> wordnet_;
    std::optional<EmbeddingStore> words_;
    std::optional<EmbeddingStore> counter_fitted_;
};

}  // namespace textaug
