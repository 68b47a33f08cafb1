#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace textaug {

// Word vectors plus optional precomputed sentence vectors, immutable
// after load. The vocabulary is kept sorted so every "uniform over the
// vocabulary" draw and every tie-break is platform independent.
class EmbeddingStore {
public:
    EmbeddingStore() = default;

    int dim() const { return dim_; }
    std::size_t vocab_size() const { return words_.size(); }
    const std::vector<std::string>& vocabulary() const { return words_; }
    const std::string& source_tag() const { return source_tag_; }
    int duplicate_count() const { return duplicates_; }

    bool contains(const std::string& word) const;

    // Exact-case lookup first, ASCII-lowercased second. Returns the
    // vocabulary entry that resolved, or nullopt when out of vocabulary.
    std::optional<std::string> resolve(const std::string& word) const;

    const std::vector<double>& vector_of(const std::string& word) const;

    bool has_sentence_vector(const std::string& sample_id) const;
    const std::vector<double>& sentence_vector(const std::string& sample_id) const;

    void insert_word(const std::string& word, std::vector<double> vec);
    void insert_sentence(const std::string& sample_id, std::vector<double> vec);
    void set_source_tag(std::string tag) { source_tag_ = std::move(tag); }

    // word2vec text format: optional "count dim" header line, then
    // "word v1 v2 ... vdim" rows. Duplicate word: last write wins,
    // counted in duplicate_count().
    static EmbeddingStore load_word2vec(const std::filesystem::path& path);

    // One {"id": ..., "vector": [...]} object per line.
    static EmbeddingStore load_sentence_jsonl(const std::filesystem::path& path);

    void merge_sentence_jsonl(const std::filesystem::path& path);

private:
    void check_dim(std::size_t n, const std::string& where);

    int dim_ = 0;
    std::vector<std::string> words_;                       // sorted
    std::map<std::string, std::vector<double>> vectors_;   // word -> vector
    std::map<std::string, std::vector<double>> sentences_; // id -> vector
    std::string source_tag_;
    int duplicates_ = 0;
};

enum class VectorFormat { word2vec_text, jsonl_id_vector };

EmbeddingStore load_vectors(const std::filesystem::path& path, VectorFormat format);

double cosine(const std::vector<double>& a, const std::vector<double>& b);

// Exact full-scan nearest neighbors, descending cosine, query excluded,
// ties broken by lexicographic word order.
std::vector<std::pair<std::string, double>> top_n_neighbors(const EmbeddingStore& store,
                                                            const std::string& word, int n);

// Precomputed sentence vector when sample_id is known, otherwise the mean
// of in-vocabulary token vectors. Tokens are summed in sorted vocabulary
// order, which makes the pooled vector exactly permutation invariant.
std::vector<double> sentence_embed(const EmbeddingStore& store, const std::string& text,
                                   const std::string& sample_id = {});

}  // namespace textaug
