#include "textaug/fewshot_trainer.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "textaug/errors.hpp"
#include "textaug/rng.hpp"
#include "textaug/text_util.hpp"

namespace textaug {

using nlohmann::json;

ClassifierHead ClassifierHead::init(int dim, const std::vector<std::string>& classes,
                                    std::uint64_t seed) {
    if (dim < 1) throw ConfigError("classifier head needs a positive dimension");
    if (classes.size() < 2) throw ConfigError("classifier head needs at least 2 classes");
    ClassifierHead head;
    head.classes = classes;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (!head.class_index.emplace(classes[i], static_cast<int>(i)).second) {
            throw ConfigError("duplicate class '" + classes[i] + "' in head label space");
        }
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
    Rng rng = Rng(seed).derive("head-init");
    head.weights.resize(dim, static_cast<Eigen::Index>(classes.size()));
    for (Eigen::Index i = 0; i < head.weights.rows(); ++i) {
        for (Eigen::Index j = 0; j < head.weights.cols(); ++j) {
            head.weights(i, j) = bound * (2.0 * rng.next_double() - 1.0);
        }
    }
    head.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(classes.size()));
    return head;
}

Eigen::VectorXd logits(const ClassifierHead& head, const Eigen::VectorXd& embedding) {
    if (embedding.size() != head.weights.rows()) {
        throw DomainError("logits: embedding dim " + std::to_string(embedding.size()) +
                          " does not match head dim " + std::to_string(head.weights.rows()));
    }
    return head.weights.transpose() * embedding + head.bias;
}

Eigen::MatrixXd logits_batch(const ClassifierHead& head, const Eigen::MatrixXd& embeddings) {
    if (embeddings.cols() != head.weights.rows()) {
        throw DomainError("logits: embedding dim " + std::to_string(embeddings.cols()) +
                          " does not match head dim " + std::to_string(head.weights.rows()));
    }
    return (embeddings * head.weights).rowwise() + head.bias.transpose();
}

namespace {

void check_labels(Eigen::Index n, const std::vector<int>& labels, Eigen::Index n_classes) {
    if (static_cast<std::size_t>(n) != labels.size()) {
        throw DomainError("batch size does not match label count");
    }
    for (int l : labels) {
        if (l < 0 || l >= n_classes) {
            throw DomainError("label index " + std::to_string(l) + " out of range");
        }
    }
}

// Row-wise softmax with max shift.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd shifted = logits.colwise() - logits.rowwise().maxCoeff();
    Eigen::MatrixXd ex = shifted.array().exp();
    Eigen::VectorXd sums = ex.rowwise().sum();
    return ex.array().colwise() / sums.array();
}

struct ClResult {
    double loss = 0.0;
    Eigen::MatrixXd grad;  // n x d, empty unless requested
    bool no_positive = false;
};

ClResult contrastive_core(const Eigen::MatrixXd& emb, const std::vector<int>& labels,
                          bool want_grad) {
    const Eigen::Index n = emb.rows();
    check_labels(n, labels, std::numeric_limits<int>::max());
    ClResult result;
    if (want_grad) result.grad = Eigen::MatrixXd::Zero(n, emb.cols());
    if (n < 2) {
        result.no_positive = true;
        return result;
    }

    Eigen::VectorXd norms(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        norms(i) = emb.row(i).norm();
        if (norms(i) == 0.0) throw DomainError("contrastive loss undefined for a zero embedding");
    }

    double pos_sum = 0.0;
    double neg_sum = 0.0;
    bool has_pos = false;
    Eigen::MatrixXd cos_cache(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double c = emb.row(i).dot(emb.row(j)) / (norms(i) * norms(j));
            cos_cache(i, j) = c;
            double e = std::exp(c);
            if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) {
                pos_sum += e;
                has_pos = true;
            } else {
                neg_sum += e;
            }
        }
    }
    if (!has_pos) {
        result.no_positive = true;
        return result;
    }
    result.loss = std::log(pos_sum + neg_sum) - std::log(pos_sum);

    if (want_grad) {
        const double inv_total = 1.0 / (pos_sum + neg_sum);
        const double inv_pos = 1.0 / pos_sum;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i + 1; j < n; ++j) {
                double c = cos_cache(i, j);
                bool positive =
                    labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)];
                double w = std::exp(c) * (positive ? inv_total - inv_pos : inv_total);
                if (w == 0.0) continue;
                // d cos(u, v) / du = v / (|u||v|) - cos * u / |u|^2
                Eigen::RowVectorXd du =
                    emb.row(j) / (norms(i) * norms(j)) - c * emb.row(i) / (norms(i) * norms(i));
                Eigen::RowVectorXd dv =
                    emb.row(i) / (norms(i) * norms(j)) - c * emb.row(j) / (norms(j) * norms(j));
                result.grad.row(i) += w * du;
                result.grad.row(j) += w * dv;
            }
        }
    }
    return result;
}

}  // namespace

double cross_entropy(const Eigen::MatrixXd& logits, const std::vector<int>& labels) {
    check_labels(logits.rows(), labels, logits.cols());
    if (!logits.allFinite()) throw DomainError("cross entropy over non-finite logits");
    Eigen::MatrixXd probs = softmax_rows(logits);
    double total = 0.0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        total -= std::log(probs(i, labels[static_cast<std::size_t>(i)]));
    }
    return total / static_cast<double>(logits.rows());
}

double contrastive_loss(const Eigen::MatrixXd& embeddings, const std::vector<int>& labels,
                        int* no_positive_pairs) {
    if (embeddings.rows() < 2) throw DomainError("contrastive loss needs a batch of at least 2");
    auto result = contrastive_core(embeddings, labels, false);
    if (result.no_positive && no_positive_pairs) ++(*no_positive_pairs);
    return result.loss;
}

CombinedLoss combined_loss(const Eigen::MatrixXd& logits, const Eigen::MatrixXd& embeddings,
                           const std::vector<int>& labels, double lambda) {
    CombinedLoss out;
    out.ce = cross_entropy(logits, labels);
    out.cl = contrastive_core(embeddings, labels, false).loss;
    out.total = out.ce + lambda * out.cl;
    return out;
}

LossGradients combined_loss_gradients(const ClassifierHead& head,
                                      const Eigen::MatrixXd& embeddings,
                                      const std::vector<int>& labels, double lambda) {
    const Eigen::Index n = embeddings.rows();
    Eigen::MatrixXd scores = logits_batch(head, embeddings);
    check_labels(n, labels, scores.cols());

    Eigen::MatrixXd probs = softmax_rows(scores);
    Eigen::MatrixXd delta = probs;  // p - onehot, scaled by 1/n
    double ce = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        int y = labels[static_cast<std::size_t>(i)];
        ce -= std::log(probs(i, y));
        delta(i, y) -= 1.0;
    }
    ce /= static_cast<double>(n);
    delta /= static_cast<double>(n);

    LossGradients out;
    out.d_weights = embeddings.transpose() * delta;          // d x C
    out.d_bias = delta.colwise().sum().transpose();          // C
    out.d_embeddings = delta * head.weights.transpose();     // n x d (CE path)

    out.loss.ce = ce;
    if (lambda != 0.0) {
        auto cl = contrastive_core(embeddings, labels, true);
        out.loss.cl = cl.loss;
        if (cl.grad.size() > 0) out.d_embeddings += lambda * cl.grad;
    }
    out.loss.total = ce + lambda * out.loss.cl;
    return out;
}

void TrainConfig::validate() const {
    if (epochs_base < 0 || epochs_fewshot < 0) throw ConfigError("epoch counts must be >= 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
    if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
    if (lambda > 0.0 && batch_size < 2) {
        throw ConfigError("batch_size must be >= 2 when lambda > 0 (contrastive loss needs pairs)");
    }
}

namespace {

struct EmbeddedSet {
    Eigen::MatrixXd rows;
    std::vector<int> labels;
};

EmbeddedSet embed_dataset(const Dataset& dataset, const EmbeddingStore& store,
                          const std::map<std::string, int>& class_index) {
    EmbeddedSet out;
    out.rows.resize(static_cast<Eigen::Index>(dataset.samples.size()), store.dim());
    out.labels.reserve(dataset.samples.size());
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        const auto& s = dataset.samples[i];
        auto it = class_index.find(s.label);
        if (it == class_index.end()) {
            throw ConfigError("label '" + s.label + "' not covered by the classifier head");
        }
        auto vec = sentence_embed(store, s.text, s.id);
        for (int j = 0; j < store.dim(); ++j) {
            out.rows(static_cast<Eigen::Index>(i), j) = vec[static_cast<std::size_t>(j)];
        }
        out.labels.push_back(it->second);
    }
    return out;
}

EpochLoss train_one_epoch(ClassifierHead& head, const EmbeddedSet& data, const TrainConfig& cfg,
                          double lambda, int phase, int epoch) {
    std::vector<std::size_t> order(data.labels.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng = Rng(cfg.seed).derive("shuffle-phase" + std::to_string(phase), std::to_string(epoch));
    rng.shuffle(order);

    double sum_ce = 0.0, sum_cl = 0.0, sum_total = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
        std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
        Eigen::MatrixXd batch(static_cast<Eigen::Index>(end - start), data.rows.cols());
        std::vector<int> labels;
        labels.reserve(end - start);
        for (std::size_t i = start; i < end; ++i) {
            batch.row(static_cast<Eigen::Index>(i - start)) =
                data.rows.row(static_cast<Eigen::Index>(order[i]));
            labels.push_back(data.labels[order[i]]);
        }
        auto grads = combined_loss_gradients(head, batch, labels, lambda);
        head.weights -= cfg.learning_rate * grads.d_weights;
        head.bias -= cfg.learning_rate * grads.d_bias;
        sum_ce += grads.loss.ce;
        sum_cl += grads.loss.cl;
        sum_total += grads.loss.total;
        ++batches;
    }
    EpochLoss loss;
    loss.phase = phase;
    loss.epoch = epoch;
    if (batches > 0) {
        loss.ce = sum_ce / batches;
        loss.cl = sum_cl / batches;
        loss.total = sum_total / batches;
    }
    return loss;
}

}  // namespace

TrainRun run_algorithm1(const Dataset& base, const Dataset& novel_fewshot,
                        const Dataset& novel_test, const Augmenter& augmenter,
                        const EmbeddingStore& store, const TrainConfig& config) {
    config.validate();
    require_disjoint_labels(base, novel_fewshot);
    if (base.label_space.size() < 2) throw ConfigError("base dataset needs at least 2 classes");
    if (novel_fewshot.label_space.size() < 2) {
        throw ConfigError("novel dataset needs at least 2 classes");
    }

    std::vector<std::string> classes = base.label_space;
    classes.insert(classes.end(), novel_fewshot.label_space.begin(),
                   novel_fewshot.label_space.end());

    TrainRun run;
    run.seed = config.seed;
    run.config = config;
    run.head = ClassifierHead::init(store.dim(), classes, config.seed);

    auto base_embedded = embed_dataset(base, store, run.head.class_index);
    for (int epoch = 0; epoch < config.epochs_base; ++epoch) {
        run.trajectory.push_back(
            train_one_epoch(run.head, base_embedded, config, /*lambda=*/0.0, 1, epoch));
    }

    AugmentedSet aug = augmenter(novel_fewshot);
    if (!aug.entries.empty() && aug.failure_count() == aug.entries.size() &&
        aug.total_variants() == 0) {
        std::string detail = aug.entries.front().error;
        throw ServiceError("augmentation failed for every sample: " + detail);
    }
    Dataset merged = merge_augmented(novel_fewshot, aug);

    auto novel_embedded = embed_dataset(merged, store, run.head.class_index);
    for (int epoch = 0; epoch < config.epochs_fewshot; ++epoch) {
        run.trajectory.push_back(
            train_one_epoch(run.head, novel_embedded, config, config.lambda, 2, epoch));
    }

    run.eval_accuracy = evaluate(run.head, novel_test, store);
    return run;
}

double evaluate(const ClassifierHead& head, const Dataset& test, const EmbeddingStore& store) {
    if (test.samples.empty()) throw MetricError("cannot evaluate on an empty test set");
    long correct = 0;
    for (const auto& s : test.samples) {
        auto it = head.class_index.find(s.label);
        if (it == head.class_index.end()) {
            throw MetricError("test label '" + s.label + "' not covered by the classifier head");
        }
        auto vec = sentence_embed(store, s.text, s.id);
        Eigen::VectorXd z(store.dim());
        for (int j = 0; j < store.dim(); ++j) z(j) = vec[static_cast<std::size_t>(j)];
        Eigen::VectorXd scores = logits(head, z);
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < scores.size(); ++c) {
            if (scores(c) > scores(best)) best = c;  // ties keep the lowest index
        }
        if (static_cast<int>(best) == it->second) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test.samples.size());
}

namespace {

json head_to_json(const ClassifierHead& head) {
    json weights = json::array();
    for (Eigen::Index i = 0; i < head.weights.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < head.weights.cols(); ++j) row.push_back(head.weights(i, j));
        weights.push_back(std::move(row));
    }
    json bias = json::array();
    for (Eigen::Index j = 0; j < head.bias.size(); ++j) bias.push_back(head.bias(j));
    return json{{"classes", head.classes}, {"weights", weights}, {"bias", bias}};
}

}  // namespace

std::string TrainRun::to_json() const {
    json trajectory_json = json::array();
    for (const auto& e : trajectory) {
        trajectory_json.push_back({{"phase", e.phase},
                                   {"epoch", e.epoch},
                                   {"l_ce", e.ce},
                                   {"l_cl", e.cl},
                                   {"l", e.total}});
    }
    json obj{{"accuracy", eval_accuracy},
             {"seed", seed},
             {"config",
              {{"epochs_base", config.epochs_base},
               {"epochs_fewshot", config.epochs_fewshot},
               {"batch_size", config.batch_size},
               {"learning_rate", config.learning_rate},
               {"lambda", config.lambda},
               {"seed", config.seed}}},
             {"trajectory", trajectory_json},
             {"head", head_to_json(head)}};
    return obj.dump(2);
}

void save_head_json(const ClassifierHead& head, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write '" + path.string() + "'");
    out << head_to_json(head).dump(2) << '\n';
}

}  // namespace textaug
