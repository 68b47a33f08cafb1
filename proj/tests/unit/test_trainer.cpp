#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "textaug/errors.hpp"
#include "textaug/fewshot_trainer.hpp"
#include "textaug/rng.hpp"

using namespace textaug;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols, double scale = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
    }
    return m;
}

// Brute-force pair enumeration evaluating the batch loss from its
// definition; independent of the production path.
double cl_oracle_from_pairs(const std::vector<double>& pos, const std::vector<double>& neg) {
    if (pos.empty()) return 0.0;
    double p = 0.0, n = 0.0;
    for (double c : pos) p += std::exp(c);
    for (double c : neg) n += std::exp(c);
    return -std::log(p / (p + n));
}

double cl_oracle(const Eigen::MatrixXd& emb, const std::vector<int>& labels) {
    std::vector<double> pos, neg;
    for (Eigen::Index i = 0; i < emb.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < emb.rows(); ++j) {
            double c = emb.row(i).dot(emb.row(j)) / (emb.row(i).norm() * emb.row(j).norm());
            (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? pos
                                                                                        : neg)
                .push_back(c);
        }
    }
    return cl_oracle_from_pairs(pos, neg);
}

struct ToyWorld {
    EmbeddingStore store;
    Dataset base;
    Dataset novel_fewshot;
    Dataset novel_test;
};

// Class-clustered vocabulary; texts are word pairs from the class pool.
ToyWorld make_toy_world(std::uint64_t seed) {
    ToyWorld world;
    Rng rng(seed);
    const int dim = 8;
    const std::vector<std::string> base_classes = {"b0", "b1"};
    const std::vector<std::string> novel_classes = {"n0", "n1", "n2"};
    std::map<std::string, std::vector<std::string>> class_words;

    for (const auto& cls : {base_classes, novel_classes}) {
        for (const auto& name : cls) {
            std::vector<double> mean(dim);
            for (auto& x : mean) x = 2.5 * rng.normal();
            for (int w = 0; w < 8; ++w) {
                std::vector<double> vec(dim);
                for (int j = 0; j < dim; ++j) vec[j] = mean[j] + 0.3 * rng.normal();
                std::string word = name + "w" + std::to_string(w);
                world.store.insert_word(word, vec);
                class_words[name].push_back(word);
            }
        }
    }

    auto make_samples = [&](const std::vector<std::string>& classes, int per_class,
                            const std::string& prefix) {
        Dataset d;
        int idx = 0;
        for (const auto& cls : classes) {
            const auto& words = class_words[cls];
            for (int i = 0; i < per_class; ++i) {
                std::string text = words[rng.below(words.size())] + " " +
                                   words[rng.below(words.size())];
                d.samples.push_back({prefix + std::to_string(idx++), text, cls});
            }
        }
        d.finalize();
        return d;
    };

    world.base = make_samples(base_classes, 12, "b");
    world.base.role = DatasetRole::base;
    Dataset novel = make_samples(novel_classes, 12, "n");
    auto draw = k_shot_sample(novel, 2, seed);
    world.novel_fewshot = select_draw(novel, draw);
    world.novel_test = reject_draw(novel, draw);
    return world;
}

Augmenter identityish_augmenter(int n_variants) {
    return [n_variants](const Dataset& d) {
        AugmentedSet set;
        for (const auto& s : d.samples) {
            AugmentEntry e;
            e.source_id = s.id;
            e.source_text = s.text;
            e.label = s.label;
            for (int v = 0; v < n_variants; ++v) {
                e.variants.push_back({s.text, "identity", 0, true, {}});
            }
            set.entries.push_back(e);
        }
        return set;
    };
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("logits match hand cases and an independent multiply") {
    ClassifierHead head;
    head.classes = {"a", "b"};
    head.class_index = {{"a", 0}, {"b", 1}};
    head.weights = Eigen::MatrixXd::Zero(3, 2);
    head.bias = Eigen::VectorXd(2);
    head.bias << 1.0, 2.0;
    Eigen::VectorXd z(3);
    z << 5.0, -1.0, 2.0;
    Eigen::VectorXd out = logits(head, z);
    CHECK(out(0) == 1.0);
    CHECK(out(1) == 2.0);

    head.weights = Eigen::MatrixXd::Identity(2, 2);
    head.bias = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd z2(2);
    z2 << 3.0, 5.0;
    Eigen::VectorXd out2 = logits(head, z2);
    CHECK(out2(0) == 3.0);
    CHECK(out2(1) == 5.0);

    Rng rng(8);
    head.weights = random_matrix(rng, 4, 3);
    head.bias = random_matrix(rng, 3, 1).col(0);
    head.classes = {"a", "b", "c"};
    Eigen::VectorXd z3 = random_matrix(rng, 4, 1).col(0);
    Eigen::VectorXd got = logits(head, z3);
    for (int c = 0; c < 3; ++c) {
        double expected = head.bias(c);
        for (int j = 0; j < 4; ++j) expected += head.weights(j, c) * z3(j);
        CHECK(std::abs(got(c) - expected) < 1e-12);
    }

    Eigen::VectorXd wrong(5);
    wrong.setZero();
    CHECK_THROWS_AS(logits(head, wrong), DomainError);
}

TEST_CASE("uniform logits cost ln C") {
    for (int C : {2, 3, 7}) {
        Eigen::MatrixXd l = Eigen::MatrixXd::Constant(4, C, 0.37);
        std::vector<int> labels = {0, C - 1, 0, 1};
        CHECK(std::abs(cross_entropy(l, labels) - std::log(double(C))) < 1e-9);
    }
}

TEST_CASE("dominant correct logits drive the loss to zero") {
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(2, 3);
    l(0, 1) = 60.0;
    l(1, 2) = 60.0;
    CHECK(cross_entropy(l, {1, 2}) < 1e-9);
    CHECK(cross_entropy(l, {1, 2}) >= 0.0);
}

TEST_CASE("cross entropy matches a direct two-sample evaluation") {
    Eigen::MatrixXd l(2, 3);
    l << 0.2, -1.3, 0.8,
         2.0, 0.1, -0.4;
    std::vector<int> labels = {2, 0};
    double expected = 0.0;
    for (int i = 0; i < 2; ++i) {
        double denom = 0.0;
        for (int c = 0; c < 3; ++c) denom += std::exp(l(i, c));
        expected -= std::log(std::exp(l(i, labels[static_cast<std::size_t>(i)])) / denom);
    }
    expected /= 2.0;
    CHECK(std::abs(cross_entropy(l, labels) - expected) < 1e-9);

    Eigen::MatrixXd bad = l;
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(cross_entropy(bad, labels), DomainError);
}

TEST_CASE("the derived Eq-level constant validates the pair oracle") {
    // one positive pair at cos 1 and one negative pair at cos -1
    double value = cl_oracle_from_pairs({1.0}, {-1.0});
    CHECK(std::abs(value - std::log(1.0 + std::exp(-2.0))) < 1e-12);
    CHECK(value == doctest::Approx(0.1269280).epsilon(1e-6));
}

TEST_CASE("contrastive loss equals brute-force pair enumeration") {
    Rng rng(21);
    for (int trial = 0; trial < 40; ++trial) {
        int n = 2 + static_cast<int>(rng.below(6));
        int dim = 2 + static_cast<int>(rng.below(4));
        Eigen::MatrixXd emb = random_matrix(rng, n, dim);
        std::vector<int> labels;
        for (int i = 0; i < n; ++i) labels.push_back(static_cast<int>(rng.below(3)));
        double got = contrastive_loss(emb, labels);
        CHECK(std::abs(got - cl_oracle(emb, labels)) < 1e-12);
        CHECK(got >= 0.0);
    }
}

TEST_CASE("a batch without negatives costs exactly zero") {
    Eigen::MatrixXd emb(3, 2);
    emb << 1, 0, 0.6, 0.4, -0.2, 0.9;
    CHECK(contrastive_loss(emb, {0, 0, 0}) == 0.0);
}

TEST_CASE("a batch without positives is defined as zero and counted") {
    Eigen::MatrixXd emb(2, 2);
    emb << 1, 0, 0, 1;
    int warnings = 0;
    CHECK(contrastive_loss(emb, {0, 1}, &warnings) == 0.0);
    CHECK(warnings == 1);
    CHECK_THROWS_AS(contrastive_loss(emb.topRows(1), {0}), DomainError);
}

TEST_CASE("contrastive loss is exactly invariant to doubling all embeddings") {
    Rng rng(33);
    Eigen::MatrixXd emb = random_matrix(rng, 5, 3);
    std::vector<int> labels = {0, 0, 1, 1, 2};
    CHECK(contrastive_loss(emb, labels) == contrastive_loss((2.0 * emb).eval(), labels));
}

TEST_CASE("combined loss composes its parts") {
    Rng rng(55);
    Eigen::MatrixXd emb = random_matrix(rng, 6, 4);
    Eigen::MatrixXd l = random_matrix(rng, 6, 3);
    std::vector<int> labels = {0, 1, 2, 0, 1, 2};

    auto at0 = combined_loss(l, emb, labels, 0.0);
    CHECK(at0.total == at0.ce);
    auto at1 = combined_loss(l, emb, labels, 1.0);
    CHECK(std::abs(at1.total - (at1.ce + at1.cl)) < 1e-12);
    auto at2 = combined_loss(l, emb, labels, 2.0);
    CHECK(std::abs((at2.total - at0.total) - 2.0 * at2.cl) < 1e-12);
    CHECK(at1.ce == at0.ce);
    CHECK(at1.cl == at2.cl);
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(77);
    const double h = 1e-5;
    for (int trial = 0; trial < 12; ++trial) {
        int n = 2 + static_cast<int>(rng.below(4));
        int dim = 2 + static_cast<int>(rng.below(3));
        int C = 2 + static_cast<int>(rng.below(3));
        double lambda = static_cast<double>(rng.below(3));

        ClassifierHead head;
        head.weights = random_matrix(rng, dim, C, 0.7);
        head.bias = random_matrix(rng, C, 1, 0.3).col(0);
        Eigen::MatrixXd emb = random_matrix(rng, n, dim);
        std::vector<int> labels;
        for (int i = 0; i < n; ++i) labels.push_back(static_cast<int>(rng.below(C)));

        auto grads = combined_loss_gradients(head, emb, labels, lambda);
        auto loss_at = [&](const ClassifierHead& h2, const Eigen::MatrixXd& e2) {
            return combined_loss(logits_batch(h2, e2), e2, labels, lambda).total;
        };

        double num = 0.0, den = 0.0;
        for (int i = 0; i < dim; ++i) {
            for (int c = 0; c < C; ++c) {
                ClassifierHead hp = head, hm = head;
                hp.weights(i, c) += h;
                hm.weights(i, c) -= h;
                double fd = (loss_at(hp, emb) - loss_at(hm, emb)) / (2 * h);
                num += std::pow(grads.d_weights(i, c) - fd, 2);
                den += std::pow(grads.d_weights(i, c) + fd, 2);
            }
        }
        for (int c = 0; c < C; ++c) {
            ClassifierHead hp = head, hm = head;
            hp.bias(c) += h;
            hm.bias(c) -= h;
            double fd = (loss_at(hp, emb) - loss_at(hm, emb)) / (2 * h);
            num += std::pow(grads.d_bias(c) - fd, 2);
            den += std::pow(grads.d_bias(c) + fd, 2);
        }
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < dim; ++j) {
                Eigen::MatrixXd ep = emb, em = emb;
                ep(i, j) += h;
                em(i, j) -= h;
                double fd = (loss_at(head, ep) - loss_at(head, em)) / (2 * h);
                num += std::pow(grads.d_embeddings(i, j) - fd, 2);
                den += std::pow(grads.d_embeddings(i, j) + fd, 2);
            }
        }
        double rel = std::sqrt(num) / std::max(1e-12, std::sqrt(den));
        CHECK(rel < 1e-4);
    }
}

TEST_CASE("head init is seeded and bounded") {
    auto a = ClassifierHead::init(16, {"x", "y", "z"}, 5);
    auto b = ClassifierHead::init(16, {"x", "y", "z"}, 5);
    auto c = ClassifierHead::init(16, {"x", "y", "z"}, 6);
    CHECK(a.weights == b.weights);
    CHECK(a.weights != c.weights);
    CHECK(a.bias.isZero());
    double bound = 1.0 / 4.0;
    CHECK(a.weights.maxCoeff() <= bound);
    CHECK(a.weights.minCoeff() >= -bound);
    CHECK(a.class_index.at("y") == 1);
}

TEST_CASE("evaluate counts argmax hits, ties to the lowest index") {
    ClassifierHead head;
    head.classes = {"x", "y"};
    head.class_index = {{"x", 0}, {"y", 1}};
    head.weights = Eigen::MatrixXd::Identity(2, 2);
    head.bias = Eigen::VectorXd::Zero(2);

    EmbeddingStore store;
    store.insert_word("ex", {1.0, 0.0});
    store.insert_word("ey", {0.0, 1.0});
    store.insert_word("tie", {0.5, 0.5});

    Dataset test;
    test.samples = {{"1", "ex", "x"}, {"2", "ey", "y"}, {"3", "ex", "x"}, {"4", "ey", "x"}};
    test.finalize();
    CHECK(evaluate(head, test, store) == doctest::Approx(0.75));

    Dataset all_correct;
    all_correct.samples = {{"1", "ex", "x"}, {"2", "ey", "y"}};
    all_correct.finalize();
    CHECK(evaluate(head, all_correct, store) == doctest::Approx(1.0));

    // tie goes to the lowest class index
    Dataset tie;
    tie.samples = {{"1", "tie", "x"}};
    tie.finalize();
    CHECK(evaluate(head, tie, store) == doctest::Approx(1.0));

    Dataset empty;
    CHECK_THROWS_AS(evaluate(head, empty, store), MetricError);
}

TEST_CASE("argmax decisions are invariant to a constant bias shift") {
    Rng rng(88);
    ClassifierHead head;
    head.classes = {"x", "y", "z"};
    head.class_index = {{"x", 0}, {"y", 1}, {"z", 2}};
    head.weights = random_matrix(rng, 4, 3);
    head.bias = random_matrix(rng, 3, 1).col(0);

    ClassifierHead shifted = head;
    shifted.bias.array() += 3.7;
    for (int trial = 0; trial < 30; ++trial) {
        Eigen::VectorXd z = random_matrix(rng, 4, 1).col(0);
        Eigen::VectorXd a = logits(head, z);
        Eigen::VectorXd b = logits(shifted, z);
        Eigen::Index ia, ib;
        a.maxCoeff(&ia);
        b.maxCoeff(&ib);
        CHECK(ia == ib);
    }
}

TEST_CASE("config validation") {
    TrainConfig cfg;
    cfg.batch_size = 1;
    cfg.lambda = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.lambda = 0.0;
    CHECK_NOTHROW(cfg.validate());
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("phase-1 loss decreases on a separable base set") {
    auto world = make_toy_world(101);
    TrainConfig cfg;
    cfg.epochs_base = 30;
    cfg.epochs_fewshot = 0;
    cfg.batch_size = 8;
    cfg.learning_rate = 0.05;
    cfg.lambda = 1.0;
    cfg.seed = 3;
    auto run = run_algorithm1(world.base, world.novel_fewshot, world.novel_test,
                              identityish_augmenter(2), world.store, cfg);
    REQUIRE(run.trajectory.size() == 30);
    CHECK(run.trajectory.back().ce < run.trajectory.front().ce);
    for (const auto& e : run.trajectory) {
        CHECK(e.phase == 1);
        CHECK(e.cl == 0.0);  // base phase trains with cross entropy only
        CHECK(e.ce >= 0.0);
    }
}

TEST_CASE("zero few-shot epochs leave the phase-1 head untouched") {
    auto world = make_toy_world(102);
    TrainConfig cfg;
    cfg.epochs_base = 10;
    cfg.epochs_fewshot = 0;
    cfg.batch_size = 4;
    cfg.learning_rate = 0.05;
    cfg.seed = 4;
    auto with_empty = run_algorithm1(world.base, world.novel_fewshot, world.novel_test,
                                     [](const Dataset&) { return AugmentedSet{}; }, world.store,
                                     cfg);
    auto with_variants = run_algorithm1(world.base, world.novel_fewshot, world.novel_test,
                                        identityish_augmenter(6), world.store, cfg);
    CHECK(with_empty.head.weights == with_variants.head.weights);
    CHECK(with_empty.head.bias == with_variants.head.bias);
}

TEST_CASE("the full schedule is deterministic under its seed") {
    auto world = make_toy_world(103);
    TrainConfig cfg;
    cfg.epochs_base = 8;
    cfg.epochs_fewshot = 12;
    cfg.batch_size = 4;
    cfg.learning_rate = 0.05;
    cfg.lambda = 1.0;
    cfg.seed = 9;
    auto a = run_algorithm1(world.base, world.novel_fewshot, world.novel_test,
                            identityish_augmenter(6), world.store, cfg);
    auto b = run_algorithm1(world.base, world.novel_fewshot, world.novel_test,
                            identityish_augmenter(6), world.store, cfg);
    REQUIRE(a.trajectory.size() == b.trajectory.size());
    for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
        CHECK(a.trajectory[i].ce == b.trajectory[i].ce);
        CHECK(a.trajectory[i].cl == b.trajectory[i].cl);
        CHECK(a.trajectory[i].total == b.trajectory[i].total);
    }
    CHECK(a.eval_accuracy == b.eval_accuracy);
    CHECK(a.to_json() == b.to_json());
    CHECK(a.trajectory.size() == 20);
    // phase-2 epochs carry the contrastive component
    CHECK(a.trajectory.back().phase == 2);
}

TEST_CASE("disjointness and degenerate augmenters are enforced") {
    auto world = make_toy_world(104);
    TrainConfig cfg;
    cfg.epochs_base = 1;
    cfg.epochs_fewshot = 1;
    cfg.batch_size = 4;
    cfg.learning_rate = 0.01;
    cfg.seed = 1;
    CHECK_THROWS_AS(run_algorithm1(world.novel_fewshot, world.novel_fewshot, world.novel_test,
                                   identityish_augmenter(1), world.store, cfg),
                    ConfigError);

    Augmenter failing = [](const Dataset& d) {
        AugmentedSet set;
        for (const auto& s : d.samples) {
            AugmentEntry e;
            e.source_id = s.id;
            e.source_text = s.text;
            e.label = s.label;
            e.error = "scripted total failure";
            set.entries.push_back(e);
        }
        return set;
    };
    CHECK_THROWS_AS(run_algorithm1(world.base, world.novel_fewshot, world.novel_test, failing,
                                   world.store, cfg),
                    ServiceError);
}

}  // TEST_SUITE
