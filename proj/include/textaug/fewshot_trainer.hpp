#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "textaug/augmented_set.hpp"
#include "textaug/corpus.hpp"
#include "textaug/embed_store.hpp"

namespace textaug {

// Linear classifier head over frozen sentence embeddings. The column
// space covers the union of the base and novel label spaces.
struct ClassifierHead {
    Eigen::MatrixXd weights;  // d x C
    Eigen::VectorXd bias;     // C
    std::vector<std::string> classes;
    std::map<std::string, int> class_index;

    int dim() const { return static_cast<int>(weights.rows()); }
    int n_classes() const { return static_cast<int>(weights.cols()); }

    // Zero bias, uniform weights in [-1/sqrt(d), 1/sqrt(d)], seeded.
    static ClassifierHead init(int dim, const std::vector<std::string>& classes,
                               std::uint64_t seed);
};

Eigen::VectorXd logits(const ClassifierHead& head, const Eigen::VectorXd& embedding);

// n x C logits for an n x d embedding batch.
Eigen::MatrixXd logits_batch(const ClassifierHead& head, const Eigen::MatrixXd& embeddings);

// Mean over the batch of -log softmax(logits)[label].
double cross_entropy(const Eigen::MatrixXd& logits, const std::vector<int>& labels);

// Batch contrastive loss over exponentiated cosine similarities:
// -log(sum_pos e^cos / (sum_pos e^cos + sum_neg e^cos)) with positives =
// unordered same-label pairs and negatives = unordered cross-label pairs.
// A batch with no positive pair contributes 0 (counted via
// no_positive_pairs when given).
double contrastive_loss(const Eigen::MatrixXd& embeddings, const std::vector<int>& labels,
                        int* no_positive_pairs = nullptr);

struct CombinedLoss {
    double total = 0.0;
    double ce = 0.0;
    double cl = 0.0;
};

CombinedLoss combined_loss(const Eigen::MatrixXd& logits, const Eigen::MatrixXd& embeddings,
                           const std::vector<int>& labels, double lambda);

// Loss value plus analytic gradients of L = CE(W^T z + b, y) +
// lambda * CL(z, y) with respect to the head and the embeddings. The
// contrastive term is skipped entirely (reported as 0) when lambda is 0,
// so CE-only phases never evaluate it.
struct LossGradients {
    CombinedLoss loss;
    Eigen::MatrixXd d_weights;     // d x C
    Eigen::VectorXd d_bias;        // C
    Eigen::MatrixXd d_embeddings;  // n x d
};

LossGradients combined_loss_gradients(const ClassifierHead& head,
                                      const Eigen::MatrixXd& embeddings,
                                      const std::vector<int>& labels, double lambda);

struct TrainConfig {
    int epochs_base = 150;
    int epochs_fewshot = 150;
    int batch_size = 8;
    double learning_rate = 4e-5;
    double lambda = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct EpochLoss {
    int phase = 0;  // 1 = base, 2 = few-shot
    int epoch = 0;
    double ce = 0.0;
    double cl = 0.0;
    double total = 0.0;
};

struct TrainRun {
    std::vector<EpochLoss> trajectory;
    ClassifierHead head;
    double eval_accuracy = 0.0;
    std::uint64_t seed = 0;
    TrainConfig config;

    std::string to_json() const;
};

using Augmenter = std::function<AugmentedSet(const Dataset&)>;

// Two-phase schedule over a frozen embedding extractor: phase 1 trains
// the head on the base dataset with cross entropy only; phase 2 expands
// the few-shot set through the augmenter, merges originals and variants,
// and fine-tunes with CE + lambda * CL. Minibatch SGD, shuffling keyed by
// the config seed. Accuracy is measured on novel_test.
TrainRun run_algorithm1(const Dataset& base, const Dataset& novel_fewshot,
                        const Dataset& novel_test, const Augmenter& augmenter,
                        const EmbeddingStore& store, const TrainConfig& config);

// Fraction of argmax-correct predictions; ties resolve to the lowest
// class index.
double evaluate(const ClassifierHead& head, const Dataset& test, const EmbeddingStore& store);

void save_head_json(const ClassifierHead& head, const std::filesystem::path& path);

}  // namespace textaug
