#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "textaug/augmented_set.hpp"
#include "textaug/corpus.hpp"
#include "textaug/embed_store.hpp"

namespace textaug {

struct FeatureMatrix {
    Eigen::MatrixXd rows;     // n x d
    std::vector<int> labels;  // n class indices in [0, n_classes)
    int n_classes = 0;
    bool centered = false;

    void validate() const;
};

// Transferability score H(Z) - H(Z|Y) with both entropies estimated by
// the log-determinant coding rate R(Z, eps) = 1/2 logdet(I_d +
// d/(n eps^2) Z^T Z). The conditional term is the class-prior-weighted
// sum of per-class rates; each class block is centered on its own mean.
// Zero when all class covariances coincide, and never meaningfully
// negative.
double transrate(const FeatureMatrix& features, double epsilon);

enum class FaithfulnessAggregation { max_over_refs, mean_over_refs };

enum class FaithfulnessReference { test_split, originals };

// Mean, over generated variants, of the aggregated cosine similarity
// between the variant embedding and the reference embeddings that share
// its label. n_pairs_out counts the (variant, reference) pairs compared.
double faithfulness(const AugmentedSet& augmented, const Dataset& reference,
                    const EmbeddingStore& store,
                    FaithfulnessAggregation aggregation = FaithfulnessAggregation::max_over_refs,
                    std::size_t* n_pairs_out = nullptr);

// Embeds originals plus variants; labels indexed by the reference
// dataset's label space.
FeatureMatrix features_of(const AugmentedSet& augmented, const Dataset& reference,
                          const EmbeddingStore& store);

struct QualityReport {
    std::string method;
    double faithfulness = 0.0;
    double transrate = 0.0;
    long n_samples = 0;
    long n_pairs = 0;
    double epsilon = 0.0;

    std::string to_json() const;
    static std::string csv_header();
    std::string csv_row() const;
};

QualityReport make_report(const std::string& method_name, const AugmentedSet& augmented,
                          const Dataset& reference, const EmbeddingStore& store, double epsilon,
                          FaithfulnessAggregation aggregation = FaithfulnessAggregation::max_over_refs);

void write_reports_csv(const std::vector<QualityReport>& reports,
                       const std::filesystem::path& path);

}  // namespace textaug
