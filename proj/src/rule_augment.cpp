#include "textaug/rule_augment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include "textaug/errors.hpp"
#include "textaug/rng.hpp"
#include "textaug/text_util.hpp"

namespace textaug {

namespace {

constexpr std::string_view kAlphabet = "abcdefghijklmnopqrstuvwxyz";

const std::map<std::string, RuleOp>& method_table() {
    static const std::map<std::string, RuleOp> table = {
        {"insert_char", RuleOp::insert_char},
        {"substitute_char", RuleOp::substitute_char},
        {"swap_char", RuleOp::swap_char},
        {"delete_char", RuleOp::delete_char},
        {"ocr", RuleOp::ocr},
        {"spelling", RuleOp::spelling},
        {"keyboard", RuleOp::keyboard},
        {"swap_word", RuleOp::swap_word},
        {"delete_word", RuleOp::delete_word},
        {"synonym_ppdb", RuleOp::synonym},
        {"synonym_wordnet", RuleOp::synonym},
        {"embedding_substitute", RuleOp::embedding_substitute},
        {"embedding_insert", RuleOp::embedding_insert},
        {"counter_fitted_substitute", RuleOp::embedding_substitute},
    };
    return table;
}

// Preserve the source token's initial capitalization on a replacement.
std::string apply_case(const std::string& source, std::string replacement) {
    if (source.empty() || replacement.empty()) return replacement;
    unsigned char s0 = static_cast<unsigned char>(source[0]);
    unsigned char r0 = static_cast<unsigned char>(replacement[0]);
    if (std::isupper(s0) && std::islower(r0)) {
        replacement[0] = static_cast<char>(std::toupper(r0));
    } else if (std::islower(s0) && std::isupper(r0)) {
        replacement[0] = static_cast<char>(std::tolower(r0));
    }
    return replacement;
}

struct EditOutcome {
    std::optional<std::string> text;  // nullopt => identity
    std::string note;
};

EditOutcome edit_insert_char(const std::string& text, const AugmentSpec& spec, Rng& rng) {
    auto cps = utf8_decode(text);
    std::size_t count = resolve_edit_count(spec, cps.size() + 1);
    for (std::size_t e = 0; e < count; ++e) {
        std::size_t gap = rng.below(cps.size() + 1);
        char32_t ch = static_cast<char32_t>(kAlphabet[rng.below(kAlphabet.size())]);
        cps.insert(cps.begin() + static_cast<long>(gap), ch);
    }
    return {utf8_encode(cps), std::to_string(count) + " inserts"};
}

EditOutcome edit_substitute_char(const std::string& text, const AugmentSpec& spec, Rng& rng) {
    auto cps = utf8_decode(text);
    if (cps.empty()) return {std::nullopt, "no characters"};
    std::size_t count = std::min(resolve_edit_count(spec, cps.size()), cps.size());
    auto positions = rng.choose(cps.size(), count);
    for (auto pos : positions) {
        char32_t old = cps[pos];
        char32_t repl;
        do {
            repl = static_cast<char32_t>(kAlphabet[rng.below(kAlphabet.size())]);
        } while (repl == old);
        cps[pos] = repl;
    }
    return {utf8_encode(cps), std::to_string(count) + " substitutions"};
}

EditOutcome edit_swap_char(const std::string& text, const AugmentSpec& spec, Rng& rng) {
    auto cps = utf8_decode(text);
    if (cps.size() < 2) return {std::nullopt, "fewer than 2 characters"};
    std::size_t count = resolve_edit_count(spec, cps.size());
    for (std::size_t e = 0; e < count; ++e) {
        std::size_t i = rng.below(cps.size());
        std::size_t j = rng.below(cps.size() - 1);
        if (j >= i) ++j;
        std::swap(cps[i], cps[j]);
    }
    return {utf8_encode(cps), std::to_string(count) + " swaps"};
}

EditOutcome edit_delete_char(const std::string& text, const AugmentSpec& spec, Rng& rng) {
    auto cps = utf8_decode(text);
    if (cps.size() < 2) return {std::nullopt, "fewer than 2 characters"};
    if (spec.count && static_cast<std::size_t>(*spec.count) >= cps.size()) {
        throw DomainError("delete count " + std::to_string(*spec.count) +
                          " must be smaller than the text length " + std::to_string(cps.size()));
    }
    std::size_t count = std::min(resolve_edit_count(spec, cps.size()), cps.size() - 1);
    auto positions = rng.choose(cps.size(), count);
    std::sort(positions.rbegin(), positions.rend());
    for (auto pos : positions) cps.erase(cps.begin() + static_cast<long>(pos));
    return {utf8_encode(cps), std::to_string(count) + " deletions"};
}

EditOutcome edit_table_substitution(const std::string& text, const AugmentSpec& spec, Rng& rng,
                                    const KeyboardLayout* keyboard, const ConfusionTable* ocr) {
    auto cps = utf8_decode(text);
    auto lookup = [&](char32_t cp) -> const std::string* {
        if (cp > 127) return nullptr;
        char c = static_cast<char>(cp);
        if (keyboard) {
            if (const auto* n = keyboard->neighbors(c)) return n;
            if (std::isupper(static_cast<unsigned char>(c))) {
                return keyboard->neighbors(static_cast<char>(std::tolower(c)));
            }
            return nullptr;
        }
        return ocr->misreads(c);
    };
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (lookup(cps[i])) eligible.push_back(i);
    }
    if (eligible.empty()) return {std::nullopt, "no character present in the table"};
    std::size_t count = std::min(resolve_edit_count(spec, eligible.size()), eligible.size());
    auto picks = rng.choose(eligible.size(), count);
    for (auto p : picks) {
        std::size_t pos = eligible[p];
        char original = static_cast<char>(cps[pos]);
        const std::string* alts = lookup(cps[pos]);
        char repl = (*alts)[rng.below(alts->size())];
        if (keyboard && std::isupper(static_cast<unsigned char>(original)) &&
            std::islower(static_cast<unsigned char>(repl))) {
            repl = static_cast<char>(std::toupper(static_cast<unsigned char>(repl)));
        }
        cps[pos] = static_cast<char32_t>(repl);
    }
    return {utf8_encode(cps), std::to_string(count) + " table substitutions"};
}

EditOutcome edit_spelling(const std::string& text, const AugmentSpec& spec, Rng& rng,
                          const MisspellTable& table) {
    auto tokens = tokenize(text);
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (table.misspellings(tokens[i])) eligible.push_back(i);
    }
    if (eligible.empty()) return {std::nullopt, "no word present in the misspelling table"};
    std::size_t count = std::min(resolve_edit_count(spec, eligible.size()), eligible.size());
    auto picks = rng.choose(eligible.size(), count);
    for (auto p : picks) {
        std::size_t pos = eligible[p];
        const auto& alts = *table.misspellings(tokens[pos]);
        tokens[pos] = apply_case(tokens[pos], alts[rng.below(alts.size())]);
    }
    return {join_tokens(tokens), std::to_string(count) + " misspellings"};
}

EditOutcome edit_swap_word(const std::string& text, const AugmentSpec& spec, Rng& rng) {
    auto tokens = tokenize(text);
    if (tokens.size() < 2) return {std::nullopt, "fewer than 2 tokens"};
    std::size_t count = resolve_edit_count(spec, tokens.size());
    for (std::size_t e = 0; e < count; ++e) {
        std::size_t i = rng.below(tokens.size());
        std::size_t j = rng.below(tokens.size() - 1);
        if (j >= i) ++j;
        std::swap(tokens[i], tokens[j]);
    }
    return {join_tokens(tokens), std::to_string(count) + " swaps"};
}

EditOutcome edit_delete_word(const std::string& text, const AugmentSpec& spec, Rng& rng) {
    auto tokens = tokenize(text);
    if (tokens.size() < 2) return {std::nullopt, "fewer than 2 tokens"};
    if (spec.count && static_cast<std::size_t>(*spec.count) >= tokens.size()) {
        throw DomainError("delete count " + std::to_string(*spec.count) +
                          " must be smaller than the token count " + std::to_string(tokens.size()));
    }
    std::size_t count = std::min(resolve_edit_count(spec, tokens.size()), tokens.size() - 1);
    auto positions = rng.choose(tokens.size(), count);
    std::sort(positions.rbegin(), positions.rend());
    for (auto pos : positions) tokens.erase(tokens.begin() + static_cast<long>(pos));
    return {join_tokens(tokens), std::to_string(count) + " deletions"};
}

EditOutcome edit_synonym(const std::string& text, const AugmentSpec& spec, Rng& rng,
                         const Thesaurus& thesaurus) {
    auto tokens = tokenize(text);
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (thesaurus.synonyms(tokens[i])) eligible.push_back(i);
    }
    if (eligible.empty()) return {std::nullopt, "no token has a synset"};
    std::size_t count = std::min(resolve_edit_count(spec, eligible.size()), eligible.size());
    auto picks = rng.choose(eligible.size(), count);
    std::string note;
    for (auto p : picks) {
        std::size_t pos = eligible[p];
        const auto& syns = *thesaurus.synonyms(tokens[pos]);
        std::string repl = syns[rng.below(syns.size())];
        if (!note.empty()) note += "; ";
        note += tokens[pos] + "->" + repl;
        tokens[pos] = apply_case(tokens[pos], repl);
    }
    return {join_tokens(tokens), note};
}

EditOutcome edit_embedding_substitute(const std::string& text, const AugmentSpec& spec, Rng& rng,
                                      const EmbeddingStore& store) {
    auto tokens = tokenize(text);
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (store.resolve(tokens[i]) && store.vocab_size() > 1) eligible.push_back(i);
    }
    if (eligible.empty()) return {std::nullopt, "no in-vocabulary token"};
    std::size_t count = std::min(resolve_edit_count(spec, eligible.size()), eligible.size());
    auto picks = rng.choose(eligible.size(), count);
    std::string note;
    for (auto p : picks) {
        std::size_t pos = eligible[p];
        auto neighbors = top_n_neighbors(store, tokens[pos], spec.n_neighbors);
        if (neighbors.empty()) continue;
        const std::string& repl = neighbors[rng.below(neighbors.size())].first;
        if (!note.empty()) note += "; ";
        note += tokens[pos] + "->" + repl;
        tokens[pos] = apply_case(tokens[pos], repl);
    }
    return {join_tokens(tokens), note};
}

EditOutcome edit_embedding_insert(const std::string& text, const AugmentSpec& spec, Rng& rng,
                                  const EmbeddingStore& store) {
    auto tokens = tokenize(text);
    std::size_t count = resolve_edit_count(spec, tokens.size() + 1);
    std::string note;
    for (std::size_t e = 0; e < count; ++e) {
        std::size_t gap = rng.below(tokens.size() + 1);
        const std::string& word = store.vocabulary()[rng.below(store.vocab_size())];
        tokens.insert(tokens.begin() + static_cast<long>(gap), word);
        if (!note.empty()) note += "; ";
        note += "+" + word;
    }
    return {join_tokens(tokens), note};
}

void require_resource(const void* ptr, const std::string& method, const std::string& what) {
    if (!ptr) throw ConfigError("method '" + method + "' requires a loaded " + what);
}

}  // namespace

void AugmentSpec::validate() const {
    if (rate.has_value() == count.has_value()) {
        throw ConfigError("exactly one of rate and count must be set for method '" + method + "'");
    }
    if (rate && (*rate <= 0.0 || *rate > 1.0)) {
        throw ConfigError("rate must lie in (0, 1], got " + format_double(*rate));
    }
    if (count && *count < 1) {
        throw ConfigError("count must be >= 1, got " + std::to_string(*count));
    }
    if (n_variants < 1) throw ConfigError("n_variants must be >= 1");
    if (n_neighbors < 1) throw ConfigError("n_neighbors must be >= 1");
}

RuleOp rule_op_of(const std::string& method) {
    auto it = method_table().find(method);
    if (it == method_table().end()) throw ConfigError("unknown rule method '" + method + "'");
    return it->second;
}

bool is_rule_method(const std::string& method) {
    return method_table().count(method) > 0;
}

std::size_t resolve_edit_count(const AugmentSpec& spec, std::size_t eligible) {
    if (eligible == 0) return 0;
    if (spec.count) return static_cast<std::size_t>(*spec.count);
    return static_cast<std::size_t>(
        std::max<long long>(1, std::llround(*spec.rate * static_cast<double>(eligible))));
}

const std::vector<std::string>& rule_method_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, op] : method_table()) out.push_back(name);
        return out;
    }();
    return names;
}

std::vector<Variant> augment_text(const std::string& text, const AugmentSpec& spec,
                                  const RuleResources& res) {
    spec.validate();
    if (trim(text).empty()) throw DomainError("augment_text: empty text");
    RuleOp op = rule_op_of(spec.method);
    switch (op) {
        case RuleOp::keyboard: require_resource(res.keyboard, spec.method, "keyboard layout"); break;
        case RuleOp::ocr: require_resource(res.ocr, spec.method, "confusion table"); break;
        case RuleOp::spelling: require_resource(res.misspell, spec.method, "misspelling table"); break;
        case RuleOp::synonym: require_resource(res.thesaurus, spec.method, "thesaurus"); break;
        case RuleOp::embedding_substitute:
        case RuleOp::embedding_insert:
            require_resource(res.store, spec.method, "embedding store");
            break;
        default: break;
    }

    std::vector<Variant> variants;
    variants.reserve(static_cast<std::size_t>(spec.n_variants));
    for (int v = 0; v < spec.n_variants; ++v) {
        Rng rng = Rng(spec.seed).derive(spec.method, std::to_string(v));
        EditOutcome out;
        switch (op) {
            case RuleOp::insert_char: out = edit_insert_char(text, spec, rng); break;
            case RuleOp::substitute_char: out = edit_substitute_char(text, spec, rng); break;
            case RuleOp::swap_char: out = edit_swap_char(text, spec, rng); break;
            case RuleOp::delete_char: out = edit_delete_char(text, spec, rng); break;
            case RuleOp::ocr:
                out = edit_table_substitution(text, spec, rng, nullptr, res.ocr);
                break;
            case RuleOp::keyboard:
                out = edit_table_substitution(text, spec, rng, res.keyboard, nullptr);
                break;
            case RuleOp::spelling: out = edit_spelling(text, spec, rng, *res.misspell); break;
            case RuleOp::swap_word: out = edit_swap_word(text, spec, rng); break;
            case RuleOp::delete_word: out = edit_delete_word(text, spec, rng); break;
            case RuleOp::synonym: out = edit_synonym(text, spec, rng, *res.thesaurus); break;
            case RuleOp::embedding_substitute:
                out = edit_embedding_substitute(text, spec, rng, *res.store);
                break;
            case RuleOp::embedding_insert:
                out = edit_embedding_insert(text, spec, rng, *res.store);
                break;
        }
        Variant var;
        var.method = spec.method;
        var.seed = rng.key();
        if (out.text) {
            var.text = *out.text;
            var.identity = (var.text == text);
            if (!out.note.empty()) var.trace["detail"] = out.note;
            if (var.identity) var.trace["reason"] = "edit produced the source text";
        } else {
            var.text = text;
            var.identity = true;
            var.trace["reason"] = out.note;
        }
        variants.push_back(std::move(var));
    }
    return variants;
}

AugmentedSet augment_dataset(const Dataset& dataset, const AugmentSpec& spec,
                             const RuleResources& res, int threads) {
    spec.validate();
    AugmentedSet set;
    set.entries.resize(dataset.samples.size());
    Rng root(spec.seed);

    auto work = [&](std::size_t i) {
        const auto& s = dataset.samples[i];
        AugmentSpec per_sample = spec;
        per_sample.seed = root.derive("sample", s.id).key();
        AugmentEntry entry;
        entry.source_id = s.id;
        entry.source_text = s.text;
        entry.label = s.label;
        entry.variants = augment_text(s.text, per_sample, res);
        set.entries[i] = std::move(entry);
    };

    if (threads <= 1 || dataset.samples.size() < 2) {
        for (std::size_t i = 0; i < dataset.samples.size(); ++i) work(i);
        return set;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    int n_threads = std::min<int>(threads, static_cast<int>(dataset.samples.size()));
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= dataset.samples.size()) return;
                try {
                    work(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
    return set;
}

}  // namespace textaug
