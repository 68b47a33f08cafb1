#pragma once

#include <string>
#include <utility>
#include <vector>

#include "textaug/augmented_set.hpp"
#include "textaug/corpus.hpp"
#include "textaug/http_json.hpp"
#include "textaug/rule_augment.hpp"

namespace textaug {

enum class PromptMode { single_turn, multi_turn, classify };

PromptMode prompt_mode_of(const std::string& name);

// Templates ship as editable config; rephrase modes require {TEXT} and
// {N} in the user template, classify requires {CLASSES}.
struct PromptTemplate {
    PromptMode mode = PromptMode::single_turn;
    std::string system_text;
    std::string user_template;
    int n_variants = 6;

    void validate() const;

    static PromptTemplate single_turn_default();
    static PromptTemplate multi_turn_default();
    static PromptTemplate classify_default();
};

struct ChatTurn {
    std::string role;  // system | user | assistant
    std::string content;
};

struct ChatExchange {
    std::vector<ChatTurn> messages;
    std::string model_name;
    double temperature = 1.0;
    std::string request_id;

    // Roles must alternate user/assistant after any leading system turn.
    void validate() const;
    nlohmann::json to_wire() const;
    std::string canonical() const;  // cache-key payload
};

// Prior (user, assistant) turns carried into multi-turn prompts.
using ChatHistory = std::vector<std::pair<std::string, std::string>>;

// Builds the rephrase request for one sample. Multi-turn mode replays the
// history as context turns. Labels never enter the prompt.
ChatExchange build_rephrase_prompt(const LabeledSample& sample, const PromptTemplate& tmpl,
                                   const ChatHistory& history = {});

// Extracts items from a numbered list ("1.", "2)", "3 -" all accepted),
// strips the index, surrounding whitespace and quotes, and returns items
// in index order. More than expected_n items: the first expected_n are
// kept. Fewer: ParseShortfall carrying what was parsed. None:
// ParseFailure.
std::vector<std::string> parse_rephrasings(const std::string& raw, int expected_n);

// Canonical "1. ...\n2. ..." form; parse_rephrasings inverts it.
std::string format_numbered(const std::vector<std::string>& items);

// Chat-completion client speaking {model, messages, temperature, n} ->
// {choices[{message{content}}]}.
class ChatBackend {
public:
    ChatBackend(ServiceConfig config, Clock& clock);

    struct Reply {
        std::string content;
        int attempts = 0;
        bool from_cache = false;
    };

    Reply complete(const ChatExchange& exchange);

    const ServiceConfig& config() const { return service_.config(); }

private:
    JsonService service_;
};

// Rephrases every sample into tmpl.n_variants variants. Transient
// failures back off and retry; a parse shortfall triggers one corrective
// re-ask; samples that still fail carry an error in their entry and the
// batch continues. Auth failures abort. Multi-turn templates process
// sequentially so each sample sees the prior exchanges.
AugmentedSet llm_rephrase_batch(const std::vector<LabeledSample>& samples,
                                const PromptTemplate& tmpl, const ServiceConfig& config,
                                Clock& clock, int threads = 1);

// Few-shot in-context classification. The reply is matched to a class
// name case-insensitively, then by longest contained class name; no match
// raises UnmatchedError with the raw reply preserved.
std::string llm_classify(const LabeledSample& sample, const std::vector<std::string>& classes,
                         const std::vector<LabeledSample>& fewshot_examples,
                         const ServiceConfig& config, Clock& clock,
                         const PromptTemplate& tmpl = PromptTemplate::classify_default());

enum class FillMaskMode { insert, substitute };

// Masks one position per edit ("<mask>") and lets the service's top
// prediction fill it; `count` edits apply sequentially.
std::vector<Variant> fill_mask_augment(const std::string& text, const AugmentSpec& spec,
                                       JsonService& service, FillMaskMode mode);

struct TranslationRoute {
    std::string source_lang = "en";
    std::string pivot_lang;
};

// text -> pivot -> source, both hops through the translation service;
// the intermediate string lands in the variant trace.
std::vector<Variant> back_translate(const std::string& text, JsonService& service,
                                    const TranslationRoute& route, int n_variants);

}  // namespace textaug
