#include "textaug/commands.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include "textaug/errors.hpp"
#include "textaug/mock_service.hpp"
#include "textaug/text_util.hpp"

namespace textaug {

namespace {

ServiceConfig with_offline(ServiceConfig cfg, bool offline) {
    cfg.offline = cfg.offline || offline;
    return cfg;
}

AugmentedSet augment_with_service(const Dataset& dataset, const PipelineConfig& config,
                                  const std::string& method,
                                  const std::shared_ptr<JsonService>& service) {
    AugmentSpec base_spec = config.spec_for(method);
    Rng root(config.seed);
    AugmentedSet set;
    for (const auto& s : dataset.samples) {
        AugmentEntry entry;
        entry.source_id = s.id;
        entry.source_text = s.text;
        entry.label = s.label;
        AugmentSpec spec = base_spec;
        spec.seed = root.derive("sample", s.id).key();
        try {
            if (method == "back_translation") {
                TranslationRoute route{config.translation_source, config.translation_pivot};
                entry.variants = back_translate(s.text, *service, route, spec.n_variants);
            } else {
                FillMaskMode mode = method == "fill_mask_insert" ? FillMaskMode::insert
                                                                 : FillMaskMode::substitute;
                entry.variants = fill_mask_augment(s.text, spec, *service, mode);
            }
        } catch (const AuthError&) {
            throw;
        } catch (const ServiceError& e) {
            entry.error = e.what();
        }
        set.entries.push_back(std::move(entry));
    }
    return set;
}

}  // namespace

Augmenter make_augmenter(const PipelineConfig& config, const std::string& method,
                         ResourceSet& resources, Clock& clock) {
    if (!is_known_method(method)) {
        throw ConfigError("unknown method '" + method + "'");
    }
    if (method == "raw") {
        return [](const Dataset&) { return AugmentedSet{}; };
    }
    if (is_rule_method(method)) {
        RuleResources res = resources.for_method(method);
        AugmentSpec spec = config.spec_for(method);
        int threads = config.threads;
        return [res, spec, threads](const Dataset& d) {
            return augment_dataset(d, spec, res, threads);
        };
    }
    if (method == "llm_rephrase") {
        ServiceConfig svc = with_offline(config.llm, config.offline);
        PromptTemplate tmpl = config.rephrase_template();
        int threads = config.threads;
        Clock* clk = &clock;
        return [svc, tmpl, threads, clk](const Dataset& d) {
            return llm_rephrase_batch(d.samples, tmpl, svc, *clk, threads);
        };
    }
    if (method == "fill_mask_insert" || method == "fill_mask_substitute") {
        auto service = std::make_shared<JsonService>(with_offline(config.fill_mask, config.offline),
                                                     clock);
        const PipelineConfig* cfg = &config;
        return [cfg, method, service](const Dataset& d) {
            return augment_with_service(d, *cfg, method, service);
        };
    }
    if (method == "back_translation") {
        auto service = std::make_shared<JsonService>(
            with_offline(config.translation, config.offline), clock);
        const PipelineConfig* cfg = &config;
        return [cfg, method, service](const Dataset& d) {
            return augment_with_service(d, *cfg, method, service);
        };
    }
    throw ConfigError("method '" + method + "' has no augmenter");
}

void cmd_augment(const PipelineConfig& config, const std::string& method,
                 const std::filesystem::path& out_file, Clock& clock) {
    Dataset dataset = config.dataset.load();
    ResourceSet resources(config);
    Augmenter augmenter = make_augmenter(config, method, resources, clock);
    AugmentedSet set = augmenter(dataset);
    if (auto parent = out_file.parent_path(); !parent.empty()) {
        std::filesystem::create_directories(parent);
    }
    write_augmented_jsonl(set, out_file);
}

namespace {

std::string method_of(const AugmentedSet& set) {
    for (const auto& e : set.entries) {
        if (!e.variants.empty()) return e.variants.front().method;
    }
    return "unknown";
}

}  // namespace

void cmd_evaluate(const PipelineConfig& config, const std::filesystem::path& augmented_file,
                  const std::filesystem::path& out_dir, Clock&) {
    AugmentedSet set = read_augmented_jsonl(augmented_file);
    Dataset reference = config.dataset.load();
    ResourceSet resources(config);
    const EmbeddingStore& store = resources.word_store();

    std::string method = method_of(set);
    QualityReport report =
        make_report(method, set, reference, store, config.epsilon, config.aggregation());

    std::filesystem::create_directories(out_dir);
    {
        std::ofstream json_out(out_dir / (method + ".report.json"));
        json_out << report.to_json() << '\n';
    }
    write_reports_csv({report}, out_dir / (method + ".report.csv"));
}

void cmd_train(const PipelineConfig& config, const std::filesystem::path& out_file, Clock& clock) {
    Dataset base = config.base_dataset.load();
    Dataset novel = config.novel_dataset.load();
    base.role = DatasetRole::base;
    novel.role = DatasetRole::novel;

    KShotDraw draw = k_shot_sample(novel, config.k_shot, config.seed);
    Dataset fewshot = select_draw(novel, draw);
    Dataset test = reject_draw(novel, draw);

    ResourceSet resources(config);
    const EmbeddingStore& store = resources.word_store();
    Augmenter augmenter = make_augmenter(config, config.train_method, resources, clock);

    TrainConfig train_config = config.train;
    train_config.seed = config.seed;
    TrainRun run = run_algorithm1(base, fewshot, test, augmenter, store, train_config);

    if (auto parent = out_file.parent_path(); !parent.empty()) {
        std::filesystem::create_directories(parent);
    }
    std::ofstream out(out_file);
    if (!out) throw IngestError("cannot write '" + out_file.string() + "'");
    out << run.to_json() << '\n';
}

namespace {

// Raw baseline quality: score the originals themselves (one identity
// variant per sample) so the row is comparable with the real methods.
AugmentedSet identity_set(const Dataset& dataset) {
    AugmentedSet set;
    for (const auto& s : dataset.samples) {
        AugmentEntry entry;
        entry.source_id = s.id;
        entry.source_text = s.text;
        entry.label = s.label;
        Variant v;
        v.text = s.text;
        v.method = "raw";
        v.identity = true;
        entry.variants.push_back(std::move(v));
        set.entries.push_back(std::move(entry));
    }
    return set;
}

struct CompareRow {
    std::string method;
    double faithfulness = 0.0;
    double transrate = 0.0;
    double accuracy_ce = 0.0;
    double accuracy_ce_cl = 0.0;
};

}  // namespace

void cmd_compare(const PipelineConfig& config, std::vector<std::string> methods,
                 const std::filesystem::path& out_dir, std::ostream& table_out, Clock& clock) {
    if (std::find(methods.begin(), methods.end(), "raw") == methods.end()) {
        methods.push_back("raw");
    }
    std::sort(methods.begin(), methods.end());
    methods.erase(std::unique(methods.begin(), methods.end()), methods.end());
    for (const auto& m : methods) {
        if (!is_known_method(m)) throw ConfigError("unknown method '" + m + "'");
    }

    Dataset base = config.base_dataset.load();
    Dataset novel = config.novel_dataset.load();
    base.role = DatasetRole::base;
    novel.role = DatasetRole::novel;

    KShotDraw draw = k_shot_sample(novel, config.k_shot, config.seed);
    Dataset fewshot = select_draw(novel, draw);
    Dataset test = reject_draw(novel, draw);

    ResourceSet resources(config);
    const EmbeddingStore& store = resources.word_store();

    std::vector<CompareRow> rows;
    for (const auto& method : methods) {
        Augmenter augmenter = make_augmenter(config, method, resources, clock);
        AugmentedSet augmented = augmenter(fewshot);
        std::filesystem::create_directories(out_dir);
        write_augmented_jsonl(augmented, out_dir / (method + ".augmented.jsonl"));

        const AugmentedSet& scored = augmented.total_variants() == 0 ? identity_set(fewshot)
                                                                     : augmented;
        QualityReport report =
            make_report(method, scored, test, store, config.epsilon, config.aggregation());

        Augmenter replay = [augmented](const Dataset&) { return augmented; };
        TrainConfig ce_config = config.train;
        ce_config.seed = config.seed;
        ce_config.lambda = 0.0;
        TrainRun ce_run = run_algorithm1(base, fewshot, test, replay, store, ce_config);

        TrainConfig cl_config = config.train;
        cl_config.seed = config.seed;
        TrainRun cl_run = run_algorithm1(base, fewshot, test, replay, store, cl_config);

        rows.push_back({method, report.faithfulness, report.transrate, ce_run.eval_accuracy,
                        cl_run.eval_accuracy});
    }

    std::filesystem::create_directories(out_dir);
    {
        std::ofstream csv(out_dir / "compare.csv");
        if (!csv) throw IngestError("cannot write compare.csv");
        csv << "method,faithfulness,transrate,accuracy_ce,accuracy_ce_cl\n";
        for (const auto& r : rows) {
            csv << r.method << ',' << format_double(r.faithfulness) << ','
                << format_double(r.transrate) << ',' << format_double(r.accuracy_ce) << ','
                << format_double(r.accuracy_ce_cl) << '\n';
        }
    }

    std::size_t name_width = 8;
    for (const auto& r : rows) name_width = std::max(name_width, r.method.size());
    table_out << std::left << std::setw(static_cast<int>(name_width + 2)) << "method"
              << std::right << std::setw(14) << "faithfulness" << std::setw(12) << "transrate"
              << std::setw(10) << "acc(CE)" << std::setw(12) << "acc(CE+CL)" << '\n';
    table_out << std::string(name_width + 2 + 14 + 12 + 10 + 12, '-') << '\n';
    table_out << std::fixed << std::setprecision(4);
    for (const auto& r : rows) {
        table_out << std::left << std::setw(static_cast<int>(name_width + 2)) << r.method
                  << std::right << std::setw(14) << r.faithfulness << std::setw(12) << r.transrate
                  << std::setw(10) << r.accuracy_ce << std::setw(12) << r.accuracy_ce_cl << '\n';
    }
    table_out.unsetf(std::ios::floatfield);
}

void cmd_mock_serve(const std::filesystem::path& fixture_file, int port, std::ostream& log) {
    MockService service = MockService::from_file(fixture_file);
    int bound = service.start(port);
    log << "mock server listening on 127.0.0.1:" << bound << std::endl;
    for (;;) {
        std::this_thread::sleep_for(std::chrono::seconds(3600));
    }
}

}  // namespace textaug
