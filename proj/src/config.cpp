#include "textaug/config.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "textaug/errors.hpp"

namespace textaug {

using nlohmann::json;

Dataset DatasetConfig::load() const {
    if (path.empty()) throw ConfigError("dataset path is not set");
    return load_dataset(path, dataset_format_of(format), text_field, label_field);
}

namespace {

DatasetConfig dataset_config_from(const json& obj) {
    DatasetConfig d;
    d.path = obj.value("path", std::string{});
    d.format = obj.value("format", std::string{"jsonl"});
    d.text_field = obj.value("text_field", std::string{"text"});
    d.label_field = obj.value("label_field", std::string{"label"});
    return d;
}

ServiceConfig service_config_from(const json& obj, const ServiceConfig& defaults) {
    ServiceConfig s = defaults;
    s.endpoint_url = obj.value("endpoint_url", s.endpoint_url);
    s.api_key_env = obj.value("api_key_env", s.api_key_env);
    s.model = obj.value("model", s.model);
    s.temperature = obj.value("temperature", s.temperature);
    s.timeout_ms = obj.value("timeout_ms", s.timeout_ms);
    s.max_retries = obj.value("max_retries", s.max_retries);
    s.backoff_base_ms = obj.value("backoff_base_ms", s.backoff_base_ms);
    s.rate_limit_per_minute = obj.value("rate_limit_per_minute", s.rate_limit_per_minute);
    s.cache_dir = obj.value("cache_dir", s.cache_dir);
    return s;
}

const std::vector<std::string>& service_method_names() {
    static const std::vector<std::string> names = {
        "llm_rephrase", "fill_mask_insert", "fill_mask_substitute", "back_translation"};
    return names;
}

}  // namespace

PipelineConfig PipelineConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    json obj;
    try {
        in >> obj;
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }

    PipelineConfig cfg;
    cfg.seed = obj.value("seed", cfg.seed);
    cfg.output_dir = obj.value("output_dir", cfg.output_dir);
    cfg.threads = obj.value("threads", cfg.threads);
    cfg.k_shot = obj.value("k_shot", cfg.k_shot);
    if (obj.contains("dataset")) cfg.dataset = dataset_config_from(obj["dataset"]);
    if (obj.contains("base_dataset")) cfg.base_dataset = dataset_config_from(obj["base_dataset"]);
    if (obj.contains("novel_dataset")) cfg.novel_dataset = dataset_config_from(obj["novel_dataset"]);

    if (obj.contains("augment")) {
        const auto& aug = obj["augment"];
        cfg.default_rate = aug.value("rate", cfg.default_rate);
        cfg.default_n_variants = aug.value("n_variants", cfg.default_n_variants);
        cfg.default_n_neighbors = aug.value("n_neighbors", cfg.default_n_neighbors);
        const json method_overrides = aug.value("methods", json::object());
        for (const auto& [name, m] : method_overrides.items()) {
            MethodSettings settings;
            if (m.contains("rate")) settings.rate = m["rate"].get<double>();
            if (m.contains("count")) settings.count = m["count"].get<int>();
            if (m.contains("n_variants")) settings.n_variants = m["n_variants"].get<int>();
            if (m.contains("n_neighbors")) settings.n_neighbors = m["n_neighbors"].get<int>();
            cfg.methods[name] = settings;
        }
    }

    if (obj.contains("resources")) {
        const auto& res = obj["resources"];
        cfg.word_vectors = res.value("word_vectors", std::string{});
        cfg.sentence_vectors = res.value("sentence_vectors", std::string{});
        cfg.counter_fitted_vectors = res.value("counter_fitted_vectors", std::string{});
        cfg.thesaurus_ppdb = res.value("thesaurus_ppdb", std::string{});
        cfg.thesaurus_wordnet = res.value("thesaurus_wordnet", std::string{});
        cfg.keyboard_file = res.value("keyboard", std::string{});
        cfg.ocr_file = res.value("ocr", std::string{});
        cfg.misspell_file = res.value("misspell", std::string{});
    }

    if (obj.contains("llm")) cfg.llm = service_config_from(obj["llm"], cfg.llm);
    if (obj.contains("fill_mask")) cfg.fill_mask = service_config_from(obj["fill_mask"], cfg.fill_mask);
    if (obj.contains("translation")) {
        cfg.translation = service_config_from(obj["translation"], cfg.translation);
        cfg.translation_source = obj["translation"].value("source_lang", cfg.translation_source);
        cfg.translation_pivot = obj["translation"].value("pivot_lang", cfg.translation_pivot);
    }
    if (obj.contains("prompt")) {
        const auto& p = obj["prompt"];
        cfg.prompt_mode = p.value("mode", cfg.prompt_mode);
        if (p.contains("user_template") || p.contains("system_text")) {
            PromptTemplate t;
            t.mode = prompt_mode_of(cfg.prompt_mode);
            t.system_text = p.value("system_text", std::string{});
            t.user_template = p.value("user_template", std::string{});
            t.n_variants = p.value("n_variants", cfg.default_n_variants);
            cfg.prompt_override = t;
        }
        cfg.classify_examples = p.value("classify_examples", cfg.classify_examples);
    }

    if (obj.contains("train")) {
        const auto& t = obj["train"];
        cfg.train.epochs_base = t.value("epochs_base", cfg.train.epochs_base);
        cfg.train.epochs_fewshot = t.value("epochs_fewshot", cfg.train.epochs_fewshot);
        cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
        cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
        cfg.train.lambda = t.value("lambda", cfg.train.lambda);
        cfg.train_method = t.value("method", cfg.train_method);
    }

    if (obj.contains("metrics")) {
        const auto& m = obj["metrics"];
        cfg.epsilon = m.value("epsilon", cfg.epsilon);
        cfg.faithfulness_aggregation = m.value("aggregation", cfg.faithfulness_aggregation);
    }

    cfg.offline = obj.value("offline", cfg.offline);
    cfg.train.seed = cfg.seed;
    cfg.llm.jitter_seed = cfg.seed;
    cfg.fill_mask.jitter_seed = cfg.seed;
    cfg.translation.jitter_seed = cfg.seed;
    return cfg;
}

void PipelineConfig::validate_paths() const {
    auto check = [](const std::string& p, const std::string& what) {
        if (!p.empty() && !std::filesystem::exists(p)) {
            throw ConfigError(what + " path '" + p + "' does not exist");
        }
    };
    check(dataset.path, "dataset");
    check(base_dataset.path, "base dataset");
    check(novel_dataset.path, "novel dataset");
    check(word_vectors, "word vectors");
    check(sentence_vectors, "sentence vectors");
    check(counter_fitted_vectors, "counter-fitted vectors");
    check(thesaurus_ppdb, "ppdb thesaurus");
    check(thesaurus_wordnet, "wordnet thesaurus");
    check(keyboard_file, "keyboard table");
    check(ocr_file, "ocr table");
    check(misspell_file, "misspelling table");
}

AugmentSpec PipelineConfig::spec_for(const std::string& method) const {
    AugmentSpec spec;
    spec.method = method;
    spec.rate = default_rate;
    spec.count.reset();
    spec.seed = seed;
    spec.n_variants = default_n_variants;
    spec.n_neighbors = default_n_neighbors;
    if (auto it = methods.find(method); it != methods.end()) {
        const auto& s = it->second;
        if (s.count) {
            spec.count = s.count;
            spec.rate.reset();
        }
        if (s.rate) {
            spec.rate = s.rate;
            spec.count.reset();
        }
        if (s.n_variants) spec.n_variants = *s.n_variants;
        if (s.n_neighbors) spec.n_neighbors = *s.n_neighbors;
    }
    return spec;
}

PromptTemplate PipelineConfig::rephrase_template() const {
    if (prompt_override) {
        auto t = *prompt_override;
        t.validate();
        return t;
    }
    PromptTemplate t = prompt_mode_of(prompt_mode) == PromptMode::multi_turn
                           ? PromptTemplate::multi_turn_default()
                           : PromptTemplate::single_turn_default();
    t.n_variants = default_n_variants;
    return t;
}

FaithfulnessAggregation PipelineConfig::aggregation() const {
    if (faithfulness_aggregation == "max") return FaithfulnessAggregation::max_over_refs;
    if (faithfulness_aggregation == "mean") return FaithfulnessAggregation::mean_over_refs;
    throw ConfigError("unknown faithfulness aggregation '" + faithfulness_aggregation + "'");
}

const std::vector<std::string>& all_method_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out = rule_method_names();
        const auto& svc = service_method_names();
        out.insert(out.end(), svc.begin(), svc.end());
        out.push_back("raw");
        std::sort(out.begin(), out.end());
        return out;
    }();
    return names;
}

bool is_known_method(const std::string& name) {
    const auto& names = all_method_names();
    return std::binary_search(names.begin(), names.end(), name);
}

ResourceSet::ResourceSet(const PipelineConfig& config) : config_(config) {}

const EmbeddingStore& ResourceSet::word_store() {
    if (!words_) {
        if (config_.word_vectors.empty()) {
            throw ConfigError("no word-vector file configured (resources.word_vectors)");
        }
        words_ = EmbeddingStore::load_word2vec(config_.word_vectors);
        if (!config_.sentence_vectors.empty()) {
            words_->merge_sentence_jsonl(config_.sentence_vectors);
        }
    }
    return *words_;
}

RuleResources ResourceSet::for_method(const std::string& method) {
    RuleResources res;
    switch (rule_op_of(method)) {
        case RuleOp::keyboard:
            if (!keyboard_) {
                keyboard_ = config_.keyboard_file.empty()
                                ? KeyboardLayout::qwerty()
                                : KeyboardLayout::from_file(config_.keyboard_file);
            }
            res.keyboard = &*keyboard_;
            break;
        case RuleOp::ocr:
            if (!ocr_) {
                ocr_ = config_.ocr_file.empty() ? ConfusionTable::builtin()
                                                : ConfusionTable::from_file(config_.ocr_file);
            }
            res.ocr = &*ocr_;
            break;
        case RuleOp::spelling:
            if (!misspell_) {
                misspell_ = config_.misspell_file.empty()
                                ? MisspellTable::builtin()
                                : MisspellTable::from_file(config_.misspell_file);
            }
            res.misspell = &*misspell_;
            break;
        case RuleOp::synonym:
            if (method == "synonym_ppdb") {
                if (!ppdb_) {
                    if (config_.thesaurus_ppdb.empty()) {
                        throw ConfigError("method 'synonym_ppdb' needs resources.thesaurus_ppdb");
                    }
                    ppdb_ = Thesaurus::from_file(config_.thesaurus_ppdb, "ppdb-like");
                }
                res.thesaurus = &*ppdb_;
            } else {
                if (!wordnet_) {
                    if (config_.thesaurus_wordnet.empty()) {
                        throw ConfigError(
                            "method 'synonym_wordnet' needs resources.thesaurus_wordnet");
                    }
                    wordnet_ = Thesaurus::from_file(config_.thesaurus_wordnet, "wordnet-like");
                }
                res.thesaurus = &*wordnet_;
            }
            break;
        case RuleOp::embedding_substitute:
            if (method == "counter_fitted_substitute") {
                if (!counter_fitted_) {
                    if (config_.counter_fitted_vectors.empty()) {
                        throw ConfigError(
                            "method 'counter_fitted_substitute' needs "
                            "resources.counter_fitted_vectors");
                    }
                    counter_fitted_ = EmbeddingStore::load_word2vec(config_.counter_fitted_vectors);
                }
                res.store = &*counter_fitted_;
            } else {
                res.store = &word_store();
            }
            break;
        case RuleOp::embedding_insert:
            res.store = &word_store();
            break;
        default:
            break;
    }
    return res;
}

}  // namespace textaug
