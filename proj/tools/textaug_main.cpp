#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "textaug/commands.hpp"
#include "textaug/errors.hpp"

namespace {

struct GlobalFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> k_shot;
    std::optional<double> lambda;
    std::optional<double> epsilon;
    bool offline = false;
};

textaug::PipelineConfig load_config(const GlobalFlags& flags) {
    if (flags.config_path.empty()) {
        throw textaug::ConfigError("--config is required for this command");
    }
    auto cfg = textaug::PipelineConfig::from_file(flags.config_path);
    // flags win over the config file
    if (flags.seed) {
        cfg.seed = *flags.seed;
        cfg.train.seed = *flags.seed;
        cfg.llm.jitter_seed = *flags.seed;
        cfg.fill_mask.jitter_seed = *flags.seed;
        cfg.translation.jitter_seed = *flags.seed;
    }
    if (flags.k_shot) cfg.k_shot = *flags.k_shot;
    if (flags.lambda) cfg.train.lambda = *flags.lambda;
    if (flags.epsilon) cfg.epsilon = *flags.epsilon;
    if (flags.offline) cfg.offline = true;
    cfg.validate_paths();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Text data augmentation and few-shot evaluation toolkit"};
    app.require_subcommand(1);

    GlobalFlags flags;
    app.add_option("--config", flags.config_path, "Pipeline config file (JSON)");
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "Override the global seed");
    int k_shot_value = 0;
    auto* k_opt = app.add_option("--k-shot", k_shot_value, "Override shots per class");
    double lambda_value = 0.0;
    auto* lambda_opt = app.add_option("--lambda", lambda_value, "Override the contrastive weight");
    double epsilon_value = 0.0;
    auto* eps_opt = app.add_option("--epsilon", epsilon_value, "Override the TransRate epsilon");
    app.add_flag("--offline", flags.offline, "Serve LLM responses from cache only");

    auto* augment = app.add_subcommand("augment", "Generate variants for a dataset");
    augment->fallthrough();
    std::string method;
    std::string out_path = "augmented.jsonl";
    augment->add_option("--method", method, "Augmentation method")->required();
    augment->add_option("--out", out_path, "Output JSONL file");

    auto* evaluate = app.add_subcommand("evaluate", "Score an augmented set");
    evaluate->fallthrough();
    std::string augmented_path;
    std::string eval_out = "reports";
    evaluate->add_option("--augmented", augmented_path, "AugmentedSet JSONL file")->required();
    evaluate->add_option("--out", eval_out, "Report output directory");

    auto* train = app.add_subcommand("train", "Run the two-phase few-shot schedule");
    train->fallthrough();
    std::string train_out = "trainrun.json";
    train->add_option("--out", train_out, "TrainRun JSON output file");

    auto* compare = app.add_subcommand("compare", "Augment, score and train per method");
    compare->fallthrough();
    std::vector<std::string> methods;
    std::string compare_out = "compare";
    compare->add_option("--methods", methods, "Methods to compare")->delimiter(',');
    compare->add_option("--out", compare_out, "Output directory");

    auto* mock = app.add_subcommand("mock-serve", "Serve scripted service fixtures");
    mock->fallthrough();
    std::string fixture_path;
    int port = 0;
    mock->add_option("--fixtures", fixture_path, "Fixture JSON file")->required();
    mock->add_option("--port", port, "Port (0 picks one)");

    CLI11_PARSE(app, argc, argv);

    if (*seed_opt) flags.seed = seed_value;
    if (*k_opt) flags.k_shot = k_shot_value;
    if (*lambda_opt) flags.lambda = lambda_value;
    if (*eps_opt) flags.epsilon = epsilon_value;

    textaug::SystemClock clock;
    try {
        if (*augment) {
            auto cfg = load_config(flags);
            textaug::cmd_augment(cfg, method, out_path, clock);
        } else if (*evaluate) {
            auto cfg = load_config(flags);
            textaug::cmd_evaluate(cfg, augmented_path, eval_out, clock);
        } else if (*train) {
            auto cfg = load_config(flags);
            textaug::cmd_train(cfg, train_out, clock);
        } else if (*compare) {
            auto cfg = load_config(flags);
            textaug::cmd_compare(cfg, methods, compare_out, std::cout, clock);
        } else if (*mock) {
            textaug::cmd_mock_serve(fixture_path, port, std::cout);
        }
    } catch (const textaug::ConfigError& e) {
        std::cerr << "{\"error\":\"config\",\"message\":" << nlohmann::json(e.what()).dump() << "}"
                  << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "{\"error\":\"runtime\",\"message\":" << nlohmann::json(e.what()).dump() << "}"
                  << std::endl;
        return 1;
    }
    return 0;
}
