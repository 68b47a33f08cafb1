#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "helpers.hpp"
#include "textaug/clock.hpp"
#include "textaug/corpus.hpp"
#include "textaug/errors.hpp"
#include "textaug/llm_augment.hpp"
#include "textaug/mock_service.hpp"
#include "textaug/rate_limiter.hpp"
#include "textaug/text_util.hpp"

using namespace textaug;
using nlohmann::json;
using test_helpers::TempDir;
using test_helpers::fixture;

namespace {

ServiceConfig quick_config(const std::string& url, const std::string& cache_dir = {}) {
    ServiceConfig cfg;
    cfg.endpoint_url = url;
    cfg.model = "mock-model";
    cfg.max_retries = 3;
    cfg.backoff_base_ms = 10;
    cfg.rate_limit_per_minute = 10'000;
    cfg.cache_dir = cache_dir;
    return cfg;
}

std::vector<LabeledSample> symptoms_samples() {
    auto d = load_dataset(fixture("symptoms_llm.jsonl"), DatasetFormat::jsonl, "text", "label");
    return d.samples;
}

}  // namespace

TEST_SUITE("llm_client") {

TEST_CASE("rate limiter caps any sliding 60-second window") {
    VirtualClock clock;
    RateLimiter limiter(5, clock);
    std::vector<std::chrono::milliseconds> stamps;
    for (int i = 0; i < 23; ++i) {
        limiter.acquire();
        stamps.push_back(clock.now());
    }
    for (std::size_t i = 0; i + 5 < stamps.size(); ++i) {
        CHECK((stamps[i + 5] - stamps[i]).count() >= 60'000);
    }
    CHECK(clock.total_slept().count() > 0);
}

TEST_CASE("transient failures back off and then succeed with attempts recorded") {
    MockService mock(json{
        {"chat",
         {{"rules", json::array({json{{"status_sequence", {429, 429, 200}},
                                      {"content", "1. recovered"}}})}}}});
    mock.start();
    VirtualClock clock;
    JsonService service(quick_config(mock.chat_url()), clock);
    auto outcome = service.post(json{{"messages", json::array()}}, "");
    CHECK(outcome.attempts == 3);
    CHECK(clock.total_slept().count() > 0);
    CHECK(mock.counters().chat == 3);
    mock.stop();
}

TEST_CASE("retries exhaust into a service error") {
    MockService mock(json{
        {"chat", {{"rules", json::array({json{{"status_sequence", {503}}}})}}}});
    mock.start();
    VirtualClock clock;
    auto cfg = quick_config(mock.chat_url());
    cfg.max_retries = 2;
    JsonService service(cfg, clock);
    CHECK_THROWS_AS(service.post(json{{"q", 1}}, ""), ServiceError);
    CHECK(mock.counters().chat == 3);  // 1 + 2 retries
    mock.stop();
}

TEST_CASE("authentication failures abort immediately") {
    MockService mock(json{
        {"chat", {{"rules", json::array({json{{"status_sequence", {401}}}})}}}});
    mock.start();
    VirtualClock clock;
    JsonService service(quick_config(mock.chat_url()), clock);
    CHECK_THROWS_AS(service.post(json{{"q", 1}}, ""), AuthError);
    CHECK(mock.counters().chat == 1);
    mock.stop();
}

TEST_CASE("rephrase batch pulls six variants per sample from the canned fixtures") {
    MockService mock = MockService::from_file(fixture("mock_services.json"));
    mock.start();
    VirtualClock clock;
    auto samples = symptoms_samples();
    auto tmpl = PromptTemplate::single_turn_default();
    auto set = llm_rephrase_batch(samples, tmpl, quick_config(mock.chat_url()), clock);
    REQUIRE(set.entries.size() == samples.size());
    CHECK(set.failure_count() == 0);
    for (const auto& e : set.entries) {
        CHECK(e.variants.size() == 6);
        CHECK(e.error.empty());
    }
    // first-variant equality against the canned block
    CHECK(set.entries[5].source_text == "I can't breathe");
    CHECK(set.entries[5].variants[0].text == "The speaker is experiencing difficulty breathing.");
    mock.stop();
}

TEST_CASE("a warm cache serves identical prompts with zero network calls") {
    TempDir cache_dir("chat-cache");
    MockService mock = MockService::from_file(fixture("mock_services.json"));
    mock.start();
    VirtualClock clock;
    auto cfg = quick_config(mock.chat_url(), cache_dir.path().string());
    auto samples = symptoms_samples();
    auto tmpl = PromptTemplate::single_turn_default();

    auto first = llm_rephrase_batch(samples, tmpl, cfg, clock);
    CHECK(mock.counters().chat == static_cast<int>(samples.size()));
    mock.reset();

    auto second = llm_rephrase_batch(samples, tmpl, cfg, clock);
    CHECK(mock.counters().chat == 0);
    REQUIRE(second.entries.size() == first.entries.size());
    for (std::size_t i = 0; i < first.entries.size(); ++i) {
        REQUIRE(second.entries[i].variants.size() == first.entries[i].variants.size());
        for (std::size_t v = 0; v < first.entries[i].variants.size(); ++v) {
            CHECK(second.entries[i].variants[v].text == first.entries[i].variants[v].text);
        }
    }

    // offline mode works off the same cache, still zero calls
    auto offline_cfg = cfg;
    offline_cfg.offline = true;
    auto third = llm_rephrase_batch(samples, tmpl, offline_cfg, clock);
    CHECK(mock.counters().chat == 0);
    CHECK(third.failure_count() == 0);
    mock.stop();

    // and a cold offline cache records per-sample failures without aborting
    TempDir empty_cache("chat-cache-cold");
    auto cold_cfg = offline_cfg;
    cold_cfg.cache_dir = empty_cache.path().string();
    auto cold = llm_rephrase_batch(samples, tmpl, cold_cfg, clock);
    CHECK(cold.failure_count() == samples.size());
    CHECK(cold.total_variants() == 0);
}

TEST_CASE("a parse shortfall triggers exactly one corrective re-ask") {
    MockService mock(json{
        {"chat",
         {{"rules", json::array({json{
              {"content", json::array({"1. only one line.",
                                       "1. one\n2. two\n3. three\n4. four\n5. five\n6. six"})}}})}}}});
    mock.start();
    VirtualClock clock;
    LabeledSample sample{"s", "some text", "x"};
    auto tmpl = PromptTemplate::single_turn_default();
    auto set = llm_rephrase_batch({sample}, tmpl, quick_config(mock.chat_url()), clock);
    REQUIRE(set.entries.size() == 1);
    CHECK(set.entries[0].error.empty());
    CHECK(set.entries[0].variants.size() == 6);
    CHECK(set.entries[0].variants[0].text == "one");
    CHECK(mock.counters().chat == 2);
    mock.stop();
}

TEST_CASE("a persistent shortfall records the failure and keeps what parsed") {
    MockService mock(json{
        {"chat", {{"rules", json::array({json{{"content", "1. first\n2. second"}}})}}}});
    mock.start();
    VirtualClock clock;
    LabeledSample sample{"s", "some text", "x"};
    auto tmpl = PromptTemplate::single_turn_default();
    auto set = llm_rephrase_batch({sample}, tmpl, quick_config(mock.chat_url()), clock);
    REQUIRE(set.entries.size() == 1);
    CHECK(!set.entries[0].error.empty());
    CHECK(set.entries[0].variants.size() == 2);
    CHECK(mock.counters().chat == 2);  // original ask + one re-ask, never more
    mock.stop();
}

TEST_CASE("multi-turn batches thread the dialogue through consecutive samples") {
    MockService mock = MockService::from_file(fixture("mock_services.json"));
    mock.start();
    VirtualClock clock;
    auto samples = symptoms_samples();
    samples.resize(3);
    auto tmpl = PromptTemplate::multi_turn_default();
    auto set = llm_rephrase_batch(samples, tmpl, quick_config(mock.chat_url()), clock, 4);
    CHECK(set.failure_count() == 0);
    for (const auto& e : set.entries) CHECK(e.variants.size() == 6);
    mock.stop();
}

TEST_CASE("classification maps replies onto class names") {
    MockService mock(json{
        {"chat",
         {{"rules",
           json::array(
               {json{{"if_contains", "my son"}, {"content", "acne"}},
                json{{"if_contains", "corresponds"},
                     {"content", "The symptom corresponds to Acne."}}})}}}});
    mock.start();
    VirtualClock clock;
    auto cfg = quick_config(mock.chat_url());
    std::vector<std::string> classes = {"Acne", "Cough"};
    std::vector<LabeledSample> examples = {{"e1", "I keep coughing", "Cough"}};

    // exact case-insensitive match
    CHECK(llm_classify({"q1", "my son has spots", "?"}, classes, examples, cfg, clock) == "Acne");
    // substring match on a sentence-shaped reply
    CHECK(llm_classify({"q2", "what corresponds here", "?"}, classes, examples, cfg, clock) ==
          "Acne");
    mock.stop();

    MockService prose(json{
        {"chat", {{"rules", json::array({json{{"content", "I cannot help with that."}}})}}}});
    prose.start();
    CHECK_THROWS_AS(
        llm_classify({"q3", "text", "?"}, classes, examples, quick_config(prose.chat_url()), clock),
        UnmatchedError);
    prose.stop();
}

TEST_CASE("fill-mask substitutes and inserts through the service") {
    MockService mock = MockService::from_file(fixture("mock_services.json"));
    mock.start();
    VirtualClock clock;
    JsonService service(quick_config(mock.fill_mask_url()), clock);

    AugmentSpec spec;
    spec.method = "fill_mask_substitute";
    spec.rate.reset();
    spec.count = 1;
    spec.n_variants = 1;

    // single-token text: the only position gets masked
    auto single = fill_mask_augment("word", spec, service, FillMaskMode::substitute);
    REQUIRE(single.size() == 1);
    CHECK(single[0].text == "really");  // the default mock token

    // the scripted rule answers "stiff" for "<mask> elbows"
    bool saw_scripted = false;
    for (std::uint64_t seed = 0; seed < 40 && !saw_scripted; ++seed) {
        spec.seed = seed;
        auto out = fill_mask_augment("my sore elbows", spec, service, FillMaskMode::substitute);
        saw_scripted = out[0].text == "my stiff elbows";
    }
    CHECK(saw_scripted);

    spec.method = "fill_mask_insert";
    spec.seed = 3;
    auto inserted = fill_mask_augment("my sore elbows", spec, service, FillMaskMode::insert);
    REQUIRE(inserted.size() == 1);
    CHECK(tokenize(inserted[0].text).size() == 4);
    mock.stop();
}

TEST_CASE("back-translation routes through the pivot and records it") {
    MockService mock = MockService::from_file(fixture("mock_services.json"));
    mock.start();
    VirtualClock clock;
    JsonService service(quick_config(mock.translate_url()), clock);

    TranslationRoute route{"en", "de"};
    auto variants = back_translate("I have pain in the elbow joint", service, route, 2);
    REQUIRE(variants.size() == 2);
    CHECK(variants[0].text == "My elbow joint is painful");
    CHECK(variants[0].trace.at("pivot") == "Ich habe Schmerzen im Ellbogengelenk");
    CHECK(!variants[0].identity);

    // identity default: unknown text comes back unchanged and flagged
    auto identity = back_translate("unscripted sentence", service, route, 1);
    REQUIRE(identity.size() == 1);
    CHECK(identity[0].identity);
    CHECK(identity[0].text == "unscripted sentence");

    TranslationRoute missing{"en", ""};
    CHECK_THROWS_AS(back_translate("text", service, missing, 1), ConfigError);
    mock.stop();
}

}  // TEST_SUITE
