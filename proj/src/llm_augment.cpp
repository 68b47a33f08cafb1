#include "textaug/llm_augment.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <regex>
#include <thread>

#include "textaug/errors.hpp"
#include "textaug/text_util.hpp"

namespace textaug {

using nlohmann::json;

namespace {

// Prior exchanges replayed as context in multi-turn mode.
constexpr std::size_t kMaxHistory = 2;

std::string substitute(std::string tmpl, std::string_view placeholder, const std::string& value) {
    std::string token = "{" + std::string(placeholder) + "}";
    std::size_t pos;
    while ((pos = tmpl.find(token)) != std::string::npos) {
        tmpl.replace(pos, token.size(), value);
    }
    return tmpl;
}

void require_placeholder(const std::string& tmpl, std::string_view placeholder) {
    if (tmpl.find("{" + std::string(placeholder) + "}") == std::string::npos) {
        throw ConfigError("prompt template lacks required placeholder {" +
                          std::string(placeholder) + "}");
    }
}

std::string strip_quotes(std::string s) {
    if (s.size() >= 2) {
        char a = s.front(), b = s.back();
        if ((a == '"' && b == '"') || (a == '\'' && b == '\'')) {
            s = s.substr(1, s.size() - 2);
        }
    }
    return s;
}

}  // namespace

PromptMode prompt_mode_of(const std::string& name) {
    if (name == "single_turn") return PromptMode::single_turn;
    if (name == "multi_turn") return PromptMode::multi_turn;
    if (name == "classify") return PromptMode::classify;
    throw ConfigError("unknown prompt mode '" + name + "'");
}

void PromptTemplate::validate() const {
    if (n_variants < 1) throw ConfigError("prompt template n_variants must be >= 1");
    if (mode == PromptMode::classify) {
        require_placeholder(user_template, "CLASSES");
    } else {
        require_placeholder(user_template, "TEXT");
        require_placeholder(user_template, "N");
    }
}

PromptTemplate PromptTemplate::single_turn_default() {
    PromptTemplate t;
    t.mode = PromptMode::single_turn;
    t.system_text = "You are a helpful assistant that rephrases text.";
    t.user_template =
        "Rephrase the following sentence into {N} semantically equivalent sentences. "
        "Keep the original meaning, answer with one sentence per line, numbered 1 to {N}.\n"
        "Sentence: {TEXT}";
    return t;
}

PromptTemplate PromptTemplate::multi_turn_default() {
    PromptTemplate t = single_turn_default();
    t.mode = PromptMode::multi_turn;
    t.system_text =
        "You are a helpful assistant that rephrases every sentence the user sends, "
        "keeping consistent style across the conversation.";
    return t;
}

PromptTemplate PromptTemplate::classify_default() {
    PromptTemplate t;
    t.mode = PromptMode::classify;
    t.system_text.clear();
    t.user_template =
        "Given a person's health description or symptom, predict the corresponding illness "
        "from the following categories: {CLASSES}.";
    return t;
}

void ChatExchange::validate() const {
    if (messages.empty()) throw ConfigError("chat exchange has no messages");
    std::size_t i = 0;
    if (messages[0].role == "system") i = 1;
    std::string expected = "user";
    for (; i < messages.size(); ++i) {
        if (messages[i].role != expected) {
            throw ConfigError("chat roles must alternate user/assistant; got '" +
                              messages[i].role + "' where '" + expected + "' was expected");
        }
        expected = expected == "user" ? "assistant" : "user";
    }
}

json ChatExchange::to_wire() const {
    json msgs = json::array();
    for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    return json{{"model", model_name},
                {"messages", msgs},
                {"temperature", temperature},
                {"n", 1}};
}

std::string ChatExchange::canonical() const {
    json msgs = json::array();
    for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    return json{{"messages", msgs}, {"temperature", temperature}}.dump();
}

ChatExchange build_rephrase_prompt(const LabeledSample& sample, const PromptTemplate& tmpl,
                                   const ChatHistory& history) {
    if (tmpl.mode == PromptMode::classify) {
        throw ConfigError("a classify-mode template cannot build a rephrase prompt");
    }
    tmpl.validate();
    std::string user = substitute(tmpl.user_template, "TEXT", sample.text);
    user = substitute(user, "N", std::to_string(tmpl.n_variants));

    ChatExchange exchange;
    exchange.request_id = sample.id;
    if (!tmpl.system_text.empty()) exchange.messages.push_back({"system", tmpl.system_text});
    if (tmpl.mode == PromptMode::multi_turn) {
        std::size_t start = history.size() > kMaxHistory ? history.size() - kMaxHistory : 0;
        for (std::size_t i = start; i < history.size(); ++i) {
            exchange.messages.push_back({"user", history[i].first});
            exchange.messages.push_back({"assistant", history[i].second});
        }
    }
    exchange.messages.push_back({"user", user});
    exchange.validate();
    return exchange;
}

std::vector<std::string> parse_rephrasings(const std::string& raw, int expected_n) {
    if (trim(raw).empty()) throw ParseFailure("empty response");
    static const std::regex item_pattern(R"(^\s*(\d{1,4})\s*[.):-]\s*(.*?)\s*$)");

    struct Item {
        long index;
        std::size_t order;
        std::string text;
    };
    std::vector<Item> items;
    std::size_t order = 0;
    for (const auto& line : split(raw, '\n')) {
        std::smatch m;
        if (!std::regex_match(line, m, item_pattern)) continue;
        std::string text = strip_quotes(trim(m[2].str()));
        if (text.empty()) continue;
        items.push_back({std::stol(m[1].str()), order++, std::move(text)});
    }
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        if (a.index != b.index) return a.index < b.index;
        return a.order < b.order;
    });

    std::vector<std::string> out;
    out.reserve(items.size());
    for (auto& item : items) out.push_back(std::move(item.text));
    if (out.empty()) throw ParseFailure("no numbered items in response");
    if (static_cast<int>(out.size()) < expected_n) {
        throw ParseShortfall("parsed " + std::to_string(out.size()) + " of " +
                                 std::to_string(expected_n) + " expected items",
                             out);
    }
    if (static_cast<int>(out.size()) > expected_n) out.resize(static_cast<std::size_t>(expected_n));
    return out;
}

std::string format_numbered(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        out += std::to_string(i + 1) + ". " + items[i];
        if (i + 1 < items.size()) out.push_back('\n');
    }
    return out;
}

ChatBackend::ChatBackend(ServiceConfig config, Clock& clock)
    : service_(std::move(config), clock) {}

ChatBackend::Reply ChatBackend::complete(const ChatExchange& exchange) {
    exchange.validate();
    std::string key = ResponseCache::key_for(exchange.model_name, exchange.canonical());
    auto outcome = service_.post(exchange.to_wire(), key);
    const auto& body = outcome.body;
    if (!body.contains("choices") || body["choices"].empty() ||
        !body["choices"][0].contains("message")) {
        throw ServiceError("chat response lacks choices[0].message: " + body.dump());
    }
    return {body["choices"][0]["message"].value("content", std::string{}), outcome.attempts,
            outcome.from_cache};
}

namespace {

struct RephraseResult {
    std::vector<std::string> variants;
    std::string raw;
    std::string user_content;
    int attempts = 0;
    bool from_cache = false;
    std::string error;
};

RephraseResult rephrase_one(ChatBackend& backend, const LabeledSample& sample,
                            const PromptTemplate& tmpl, const ChatHistory& history,
                            const std::string& model) {
    RephraseResult result;
    ChatExchange exchange = build_rephrase_prompt(sample, tmpl, history);
    exchange.model_name = model;
    exchange.temperature = backend.config().temperature;
    result.user_content = exchange.messages.back().content;
    try {
        auto reply = backend.complete(exchange);
        result.raw = reply.content;
        result.attempts = reply.attempts;
        result.from_cache = reply.from_cache;
        try {
            result.variants = parse_rephrasings(reply.content, tmpl.n_variants);
            return result;
        } catch (const ParseShortfall& shortfall) {
            result.variants = shortfall.parsed;
        } catch (const ParseFailure&) {
        }
        // one corrective re-ask
        ChatExchange retry = exchange;
        retry.messages.push_back({"assistant", reply.content});
        retry.messages.push_back(
            {"user", "That list was incomplete. Reply again with exactly " +
                         std::to_string(tmpl.n_variants) +
                         " rephrasings, one per line, numbered 1 to " +
                         std::to_string(tmpl.n_variants) + "."});
        auto second = backend.complete(retry);
        result.attempts += second.attempts;
        result.raw = second.content;
        try {
            result.variants = parse_rephrasings(second.content, tmpl.n_variants);
        } catch (const ParseShortfall& shortfall) {
            result.variants = shortfall.parsed;
            result.error = shortfall.what();
        } catch (const ParseFailure& failure) {
            result.error = failure.what();
        }
    } catch (const AuthError&) {
        throw;
    } catch (const ServiceError& e) {
        result.error = e.what();
    }
    return result;
}

AugmentEntry entry_from(const LabeledSample& sample, const RephraseResult& result) {
    AugmentEntry entry;
    entry.source_id = sample.id;
    entry.source_text = sample.text;
    entry.label = sample.label;
    entry.error = result.error;
    for (const auto& text : result.variants) {
        Variant v;
        v.text = text;
        v.method = "llm_rephrase";
        v.identity = text == sample.text;
        v.trace["attempts"] = std::to_string(result.attempts);
        v.trace["cached"] = result.from_cache ? "true" : "false";
        entry.variants.push_back(std::move(v));
    }
    return entry;
}

}  // namespace

AugmentedSet llm_rephrase_batch(const std::vector<LabeledSample>& samples,
                                const PromptTemplate& tmpl, const ServiceConfig& config,
                                Clock& clock, int threads) {
    tmpl.validate();
    ChatBackend backend(config, clock);
    AugmentedSet set;
    set.entries.resize(samples.size());

    if (tmpl.mode == PromptMode::multi_turn || threads <= 1 || samples.size() < 2) {
        ChatHistory history;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            auto result = rephrase_one(backend, samples[i], tmpl, history, config.model);
            if (tmpl.mode == PromptMode::multi_turn && result.error.empty()) {
                history.emplace_back(result.user_content, result.raw);
            }
            set.entries[i] = entry_from(samples[i], result);
        }
        return set;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    int n_threads = std::min<int>(threads, static_cast<int>(samples.size()));
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= samples.size()) return;
                try {
                    auto result = rephrase_one(backend, samples[i], tmpl, {}, config.model);
                    set.entries[i] = entry_from(samples[i], result);
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

std::string llm_classify(const LabeledSample& sample, const std::vector<std::string>& classes,
                         const std::vector<LabeledSample>& fewshot_examples,
                         const ServiceConfig& config, Clock& clock, const PromptTemplate& tmpl) {
    if (classes.empty()) throw ConfigError("llm_classify needs a non-empty class list");
    if (tmpl.mode != PromptMode::classify) {
        throw ConfigError("llm_classify needs a classify-mode template");
    }
    tmpl.validate();

    std::string class_list;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (i) class_list += ", ";
        class_list += classes[i];
    }
    std::string prompt = substitute(tmpl.user_template, "CLASSES", class_list);
    for (const auto& example : fewshot_examples) {
        prompt += "\nDescription: " + example.text + ". Typically, this symptom corresponds to " +
                  example.label;
    }
    prompt += "\nDescription: " + sample.text + ". Typically, this symptom corresponds to";

    ChatExchange exchange;
    exchange.model_name = config.model;
    exchange.temperature = 0.0;
    exchange.request_id = sample.id;
    if (!tmpl.system_text.empty()) exchange.messages.push_back({"system", tmpl.system_text});
    exchange.messages.push_back({"user", prompt});

    ChatBackend backend(config, clock);
    auto reply = backend.complete(exchange);
    std::string answer = trim(reply.content);

    for (const auto& cls : classes) {
        if (iequals_ascii(answer, cls)) return cls;
    }
    // no exact match: the longest class name contained in the reply wins
    std::string lowered = to_lower_ascii(answer);
    const std::string* best = nullptr;
    for (const auto& cls : classes) {
        if (lowered.find(to_lower_ascii(cls)) == std::string::npos) continue;
        if (!best || cls.size() > best->size()) best = &cls;
    }
    if (best) return *best;
    throw UnmatchedError("reply matched no class", reply.content);
}

std::vector<Variant> fill_mask_augment(const std::string& text, const AugmentSpec& spec,
                                       JsonService& service, FillMaskMode mode) {
    spec.validate();
    if (trim(text).empty()) throw DomainError("fill_mask_augment: empty text");
    const std::string method =
        mode == FillMaskMode::insert ? "fill_mask_insert" : "fill_mask_substitute";

    std::vector<Variant> variants;
    variants.reserve(static_cast<std::size_t>(spec.n_variants));
    for (int v = 0; v < spec.n_variants; ++v) {
        Rng rng = Rng(spec.seed).derive(method, std::to_string(v));
        Variant var;
        var.method = method;
        var.seed = rng.key();
        std::string current = text;
        try {
            auto tokens = tokenize(current);
            std::size_t eligible = mode == FillMaskMode::insert ? tokens.size() + 1 : tokens.size();
            std::size_t count = resolve_edit_count(spec, eligible);
            std::string masked_notes;
            for (std::size_t e = 0; e < count; ++e) {
                tokens = tokenize(current);
                std::size_t pos;
                if (mode == FillMaskMode::insert) {
                    pos = rng.below(tokens.size() + 1);
                    tokens.insert(tokens.begin() + static_cast<long>(pos), "<mask>");
                } else {
                    pos = rng.below(tokens.size());
                    tokens[pos] = "<mask>";
                }
                std::string masked = join_tokens(tokens);
                json payload{{"text_with_mask", masked}};
                std::string key = ResponseCache::key_for(service.config().model, payload.dump());
                auto outcome = service.post(payload, key);
                if (!outcome.body.contains("candidates") || outcome.body["candidates"].empty()) {
                    throw ServiceError("fill-mask response has no candidates: " +
                                       outcome.body.dump());
                }
                std::string token = outcome.body["candidates"][0].value("token", std::string{});
                tokens[pos] = token;
                current = join_tokens(tokens);
                if (!masked_notes.empty()) masked_notes += " | ";
                masked_notes += masked + " => " + token;
            }
            var.text = current;
            var.identity = current == text;
            if (!masked_notes.empty()) var.trace["masks"] = masked_notes;
            if (count == 0) {
                var.identity = true;
                var.trace["reason"] = "no eligible positions";
            }
        } catch (const AuthError&) {
            throw;
        } catch (const ServiceError& e) {
            var.text = text;
            var.identity = true;
            var.trace["error"] = e.what();
        }
        variants.push_back(std::move(var));
    }
    return variants;
}

std::vector<Variant> back_translate(const std::string& text, JsonService& service,
                                    const TranslationRoute& route, int n_variants) {
    if (route.pivot_lang.empty()) throw ConfigError("back-translation needs a pivot language");
    if (route.source_lang == route.pivot_lang) {
        throw ConfigError("back-translation pivot must differ from the source language");
    }

    auto translate = [&](const std::string& input, const std::string& from,
                         const std::string& to) {
        json payload{{"text", input}, {"source", from}, {"target", to}};
        std::string key = ResponseCache::key_for(service.config().model, payload.dump());
        auto outcome = service.post(payload, key);
        if (!outcome.body.contains("text")) {
            throw ServiceError("translation response lacks 'text': " + outcome.body.dump());
        }
        return outcome.body["text"].get<std::string>();
    };

    std::vector<Variant> variants;
    variants.reserve(static_cast<std::size_t>(n_variants));
    for (int v = 0; v < n_variants; ++v) {
        Variant var;
        var.method = "back_translation";
        try {
            std::string pivot_text = translate(text, route.source_lang, route.pivot_lang);
            std::string back = translate(pivot_text, route.pivot_lang, route.source_lang);
            var.text = back;
            var.identity = back == text;
            var.trace["pivot"] = pivot_text;
            var.trace["route"] = route.source_lang + "->" + route.pivot_lang + "->" +
                                 route.source_lang;
        } catch (const AuthError&) {
            throw;
        } catch (const ServiceError& e) {
            var.text = text;
            var.identity = true;
            var.trace["error"] = e.what();
        }
        variants.push_back(std::move(var));
    }
    return variants;
}

}  // namespace textaug
