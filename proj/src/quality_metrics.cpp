#include "textaug/quality_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "textaug/errors.hpp"
#include "textaug/text_util.hpp"

namespace textaug {

using nlohmann::json;

void FeatureMatrix::validate() const {
    if (rows.rows() < 1) throw MetricError("feature matrix has no rows");
    if (static_cast<std::size_t>(rows.rows()) != labels.size()) {
        throw MetricError("feature row count does not match label count");
    }
    if (n_classes < 1) throw MetricError("feature matrix declares no classes");
    if (!rows.allFinite()) throw MetricError("feature matrix contains non-finite values");
    std::vector<long> counts(static_cast<std::size_t>(n_classes), 0);
    for (int label : labels) {
        if (label < 0 || label >= n_classes) {
            throw MetricError("label index " + std::to_string(label) + " out of range");
        }
        ++counts[static_cast<std::size_t>(label)];
    }
    for (int c = 0; c < n_classes; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) {
            throw MetricError("class index " + std::to_string(c) + " has no samples");
        }
    }
}

namespace {

Eigen::MatrixXd center_columns(const Eigen::MatrixXd& m) {
    return m.rowwise() - m.colwise().mean();
}

// 1/2 logdet(I + d/(n eps^2) Z^T Z) via Cholesky; the argument is
// I + PSD, hence symmetric positive definite.
double coding_rate(const Eigen::MatrixXd& centered, double epsilon) {
    const auto n = static_cast<double>(centered.rows());
    const auto d = static_cast<double>(centered.cols());
    Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(centered.cols(), centered.cols());
    gram.noalias() += (d / (n * epsilon * epsilon)) * (centered.transpose() * centered);
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) {
        throw MetricError("coding-rate matrix is not positive definite");
    }
    double logdet = 0.0;
    const auto& L = llt.matrixLLT();
    for (Eigen::Index i = 0; i < L.rows(); ++i) logdet += std::log(L(i, i));
    return logdet;  // 2 * sum(log diag L) / 2
}

}  // namespace

double transrate(const FeatureMatrix& features, double epsilon) {
    if (!(epsilon > 0.0)) throw MetricError("epsilon must be positive");
    features.validate();

    const auto n = features.rows.rows();
    double whole = coding_rate(center_columns(features.rows), epsilon);

    double conditional = 0.0;
    for (int c = 0; c < features.n_classes; ++c) {
        std::vector<Eigen::Index> idx;
        for (std::size_t i = 0; i < features.labels.size(); ++i) {
            if (features.labels[i] == c) idx.push_back(static_cast<Eigen::Index>(i));
        }
        Eigen::MatrixXd block(static_cast<Eigen::Index>(idx.size()), features.rows.cols());
        for (std::size_t i = 0; i < idx.size(); ++i) block.row(static_cast<Eigen::Index>(i)) = features.rows.row(idx[i]);
        double weight = static_cast<double>(idx.size()) / static_cast<double>(n);
        conditional += weight * coding_rate(center_columns(block), epsilon);
    }
    return whole - conditional;
}

double faithfulness(const AugmentedSet& augmented, const Dataset& reference,
                    const EmbeddingStore& store, FaithfulnessAggregation aggregation,
                    std::size_t* n_pairs_out) {
    // reference embeddings grouped by label
    std::map<std::string, std::vector<std::vector<double>>> refs;
    for (const auto& s : reference.samples) {
        refs[s.label].push_back(sentence_embed(store, s.text, s.id));
    }

    double sum = 0.0;
    std::size_t n_variants = 0;
    std::size_t n_pairs = 0;
    for (const auto& entry : augmented.entries) {
        auto it = refs.find(entry.label);
        if (it == refs.end() || it->second.empty()) {
            throw MetricError("reference has no samples for class '" + entry.label + "'");
        }
        for (const auto& v : entry.variants) {
            auto vec = sentence_embed(store, v.text);
            double best = -1.0;
            double acc = 0.0;
            for (const auto& ref : it->second) {
                double c = cosine(vec, ref);
                best = std::max(best, c);
                acc += c;
                ++n_pairs;
            }
            sum += aggregation == FaithfulnessAggregation::max_over_refs
                       ? best
                       : acc / static_cast<double>(it->second.size());
            ++n_variants;
        }
    }
    if (n_variants == 0) throw MetricError("augmented set has no variants to score");
    if (n_pairs_out) *n_pairs_out = n_pairs;
    return sum / static_cast<double>(n_variants);
}

FeatureMatrix features_of(const AugmentedSet& augmented, const Dataset& reference,
                          const EmbeddingStore& store) {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    auto label_of = [&](const std::string& name) {
        auto idx = reference.label_index(name);
        if (!idx) throw MetricError("label '" + name + "' not in the reference label space");
        return *idx;
    };
    for (const auto& entry : augmented.entries) {
        int label = label_of(entry.label);
        rows.push_back(sentence_embed(store, entry.source_text, entry.source_id));
        labels.push_back(label);
        for (const auto& v : entry.variants) {
            rows.push_back(sentence_embed(store, v.text));
            labels.push_back(label);
        }
    }
    FeatureMatrix fm;
    fm.rows.resize(static_cast<Eigen::Index>(rows.size()), store.dim());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int j = 0; j < store.dim(); ++j) {
            fm.rows(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
        }
    }
    fm.labels = std::move(labels);
    fm.n_classes = static_cast<int>(reference.label_space.size());
    // drop label-space classes absent from the augmented set by compacting
    std::vector<int> remap(static_cast<std::size_t>(fm.n_classes), -1);
    int next = 0;
    for (int& l : fm.labels) {
        if (remap[static_cast<std::size_t>(l)] < 0) remap[static_cast<std::size_t>(l)] = next++;
        l = remap[static_cast<std::size_t>(l)];
    }
    fm.n_classes = next;
    return fm;
}

std::string QualityReport::to_json() const {
    json obj{{"method", method},         {"faithfulness", faithfulness},
             {"transrate", transrate},   {"n_samples", n_samples},
             {"n_pairs", n_pairs},       {"epsilon", epsilon}};
    return obj.dump(2);
}

std::string QualityReport::csv_header() {
    return "method,faithfulness,transrate,n_samples,n_pairs,epsilon";
}

std::string QualityReport::csv_row() const {
    return method + "," + format_double(faithfulness) + "," + format_double(transrate) + "," +
           std::to_string(n_samples) + "," + std::to_string(n_pairs) + "," +
           format_double(epsilon);
}

QualityReport make_report(const std::string& method_name, const AugmentedSet& augmented,
                          const Dataset& reference, const EmbeddingStore& store, double epsilon,
                          FaithfulnessAggregation aggregation) {
    QualityReport report;
    report.method = method_name;
    report.epsilon = epsilon;
    std::size_t pairs = 0;
    report.faithfulness = faithfulness(augmented, reference, store, aggregation, &pairs);
    report.n_pairs = static_cast<long>(pairs);
    FeatureMatrix fm = features_of(augmented, reference, store);
    report.transrate = transrate(fm, epsilon);
    report.n_samples = static_cast<long>(fm.rows.rows());
    return report;
}

void write_reports_csv(const std::vector<QualityReport>& reports,
                       const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write '" + path.string() + "'");
    out << QualityReport::csv_header() << '\n';
    for (const auto& r : reports) out << r.csv_row() << '\n';
}

}  // namespace textaug
