#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "textaug/augmented_set.hpp"
#include "textaug/corpus.hpp"
#include "textaug/embed_store.hpp"
#include "textaug/resources.hpp"

namespace textaug {

// Edit strength is either a fraction of eligible units or an explicit
// edit count; exactly one must be set. With a rate, the count resolves to
// max(1, round(rate * eligible)) so short texts still receive one edit.
struct AugmentSpec {
    std::string method;
    std::optional<double> rate = 0.3;
    std::optional<int> count;
    std::uint64_t seed = 0;
    int n_variants = 6;
    int n_neighbors = 10;

    void validate() const;
};

enum class RuleOp {
    insert_char,
    substitute_char,
    swap_char,
    delete_char,
    ocr,
    spelling,
    keyboard,
    swap_word,
    delete_word,
    synonym,
    embedding_substitute,
    embedding_insert,
};

// Maps a taxonomy name ("synonym_ppdb", "counter_fitted_substitute", ...)
// onto the operation that implements it. Throws ConfigError for unknown
// names.
RuleOp rule_op_of(const std::string& method);
bool is_rule_method(const std::string& method);
const std::vector<std::string>& rule_method_names();

// Shared rate -> count resolution: 0 when nothing is eligible, the
// explicit count when one is set, else max(1, round(rate * eligible)).
std::size_t resolve_edit_count(const AugmentSpec& spec, std::size_t eligible);

struct RuleResources {
    const KeyboardLayout* keyboard = nullptr;
    const ConfusionTable* ocr = nullptr;
    const MisspellTable* misspell = nullptr;
    const Thesaurus* thesaurus = nullptr;
    const EmbeddingStore* store = nullptr;
};

// Generates spec.n_variants variants of one text. Deterministic under
// (text, spec, resources); never sees labels. Inapplicable inputs yield
// identity-flagged variants instead of aborting a batch.
std::vector<Variant> augment_text(const std::string& text, const AugmentSpec& spec,
                                  const RuleResources& res);

// Applies augment_text to every sample; each sample's stream is keyed by
// (spec.seed, sample id), so results do not depend on batch order.
// threads > 1 parallelizes across samples with deterministic assembly.
AugmentedSet augment_dataset(const Dataset& dataset, const AugmentSpec& spec,
                             const RuleResources& res, int threads = 1);

}  // namespace textaug
