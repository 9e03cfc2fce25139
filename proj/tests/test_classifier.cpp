#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lss/classifier.hpp"
#include "lss/errors.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <cstring>

using namespace lss;
using namespace lss::test;

namespace {

CnnArchitecture small_arch(int size, std::vector<int> channels)
{
    CnnArchitecture a;
    a.input_size = size;
    a.channels = std::move(channels);
    return a;
}

/// One stage, two channels, 4x4 input; see the hand computation below.
CnnModel tiny_model()
{
    CnnModel m = zero_model(small_arch(4, {2}));
    m.stages[0].weights(0, 4) = 1.0;   // centre tap
    m.stages[0].bias[0] = -0.5;
    m.stages[0].weights(1, 5) = 2.0;   // right neighbour
    m.stages[0].weights(1, 1) = -1.0;  // upper neighbour
    m.fc_weights << 1.0, -1.0,
                    0.5, 2.0;
    m.fc_bias << 0.1, -0.2;
    return m;
}

Matrix tiny_input()
{
    Matrix in = Matrix::Zero(16, 1);
    in(0 * 4 + 0, 0) = 1.0;
    in(1 * 4 + 1, 0) = 2.0;
    in(2 * 4 + 3, 0) = 1.0;
    in(3 * 4 + 2, 0) = 3.0;
    return in;
}

LssImage random_image(std::mt19937_64& rng, int r, double density)
{
    std::bernoulli_distribution on(density);
    LssImage img;
    img.grid = BinaryGrid::Zero(r, r);
    for (auto& v : img.grid.reshaped()) v = on(rng) ? 1 : 0;
    img.grid(0, 0) = 1;
    return img;
}

/// Images of a horizontal or a vertical bar at a random offset.
std::vector<LabeledImage> bar_dataset(std::mt19937_64& rng, int r, int per_class)
{
    std::vector<LabeledImage> out;
    for (int i = 0; i < 2 * per_class; ++i) {
        LabeledImage it;
        it.id = "bar" + std::to_string(i);
        it.label = i % 2 ? Label::NonStochastic : Label::Stochastic;
        it.image.grid = BinaryGrid::Zero(r, r);
        const int at = static_cast<int>(rng() % static_cast<unsigned>(r));
        for (int k = 0; k < r; ++k) {
            if (i % 2)
                it.image.grid(k, at) = 1;
            else
                it.image.grid(at, k) = 1;
        }
        out.push_back(std::move(it));
    }
    return out;
}

}  // namespace

TEST_CASE("forward: zero model and empty image give zero logits")
{
    const CnnModel m = zero_model(CnnArchitecture{});
    LssImage img;
    img.grid = BinaryGrid::Zero(224, 224);
    CHECK(forward(m, img) == Eigen::Vector2d::Zero());
}

TEST_CASE("forward: hand-computed tiny model")
{
    // channel 0: x - 0.5 -> relu -> pool = [[1.5, 0], [0, 2.5]], mean 1.0
    // channel 1: 2 x(y, x+1) - x(y-1, x) -> relu -> pool = [[3, 0], [6, 2]], mean 2.75
    const Eigen::Vector2d z = forward_input(tiny_model(), tiny_input());
    CHECK(z[0] == doctest::Approx(1.0 - 2.75 + 0.1).epsilon(1e-12));
    CHECK(z[1] == doctest::Approx(0.5 + 2.0 * 2.75 - 0.2).epsilon(1e-12));

    const Matrix f = final_features(tiny_model(), tiny_input());
    REQUIRE(f.rows() == 4);
    REQUIRE(f.cols() == 2);
    CHECK(f(0, 0) == 1.5);
    CHECK(f(3, 0) == 2.5);
    CHECK(f(2, 1) == 6.0);
    CHECK(f(3, 1) == 2.0);
}

TEST_CASE("forward: agrees with the loop oracle")
{
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 40; ++trial) {
        const CnnInstance inst = random_cnn_instance(rng);
        const Eigen::Vector2d ref = cnn_logits_ref(inst.model, inst.inputs[0]);
        const Eigen::Vector2d z = forward_input(inst.model, inst.inputs[0]);
        CHECK((z - ref).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("forward: deterministic and resolution checked")
{
    std::mt19937_64 rng(2);
    const CnnModel m = random_cnn(rng, small_arch(16, {3, 4}));
    const LssImage img = random_image(rng, 16, 0.1);
    CHECK(forward(m, img) == forward(m, img));
    const LssImage big = random_image(rng, 32, 0.1);
    CHECK_THROWS_AS(forward(m, big, ForwardOptions{false}), ValidationError);
    CHECK(forward(m, big).allFinite());
}

TEST_CASE("input: standardized binary grid")
{
    std::mt19937_64 rng(3);
    const LssImage img = random_image(rng, 32, 0.05);
    const Matrix in = image_input(img, 32);
    CHECK(std::abs(in.mean()) < 1e-12);
    CHECK((in.array() - in.mean()).square().mean() == doctest::Approx(1.0).epsilon(1e-12));
    // set cells are the larger of the two values
    const double hi = in.maxCoeff();
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) CHECK((in(y * 32 + x, 0) == hi) == (img.grid(y, x) == 1));

    LssImage empty;
    empty.grid = BinaryGrid::Zero(8, 8);
    CHECK(image_input(empty, 8).isZero(0.0));
}

TEST_CASE("input: nearest-neighbour resize")
{
    LssImage img;
    img.grid = BinaryGrid::Zero(4, 4);
    img.grid(1, 2) = 1;
    const Matrix in = image_input(img, 8);
    const double hi = in.maxCoeff();
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) CHECK((in(y * 8 + x, 0) == hi) == (y / 2 == 1 && x / 2 == 2));
}

TEST_CASE("predict: softmax arithmetic and tie rule")
{
    const Prediction tie = from_logits({0.0, 0.0});
    CHECK(tie.c_s == 0.5);
    CHECK(tie.c_ns == 0.5);
    CHECK(tie.label == Label::Stochastic);
    const Prediction nine = from_logits({std::log(9.0), 0.0});
    CHECK(nine.c_s == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(nine.label == Label::Stochastic);
    CHECK(from_logits({0.0, 1e-9}).label == Label::NonStochastic);
    CHECK(from_logits({-800.0, 800.0}).c_ns == 1.0);

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> z(-50.0, 50.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const Prediction p = from_logits({z(rng), z(rng)});
        CHECK(std::abs(p.c_s + p.c_ns - 1.0) <= 1e-9);
        CHECK(p.c_s >= 0.0);
        CHECK(p.c_ns >= 0.0);
    }
}

TEST_CASE("predict: unchanged by an image file round trip")
{
    TempDir dir("clfio");
    std::mt19937_64 rng(5);
    const CnnModel m = random_cnn(rng, small_arch(32, {4, 4}));
    const LssImage img = random_image(rng, 32, 0.03);
    write_image(img, dir / "x.pgm");
    const Prediction a = predict(m, img), b = predict(m, read_image(dir / "x.pgm"));
    CHECK(a.c_s == b.c_s);
    CHECK(a.label == b.label);
}

TEST_CASE("cross-entropy: value matches the oracle logits")
{
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const CnnInstance inst = random_cnn_instance(rng);
        std::vector<const Matrix*> ptrs;
        double expected = 0.0;
        for (std::size_t i = 0; i < inst.inputs.size(); ++i) {
            ptrs.push_back(&inst.inputs[i]);
            const Eigen::Vector2d z = cnn_logits_ref(inst.model, inst.inputs[i]);
            const double lse = std::log(std::exp(z[0]) + std::exp(z[1]));
            expected += lse - z[inst.classes[i]];
        }
        expected /= static_cast<double>(inst.inputs.size());
        CHECK(cross_entropy(inst.model, ptrs, inst.classes, nullptr) == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("gradient: one stage on 8x8 inputs")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        CnnInstance inst;
        inst.model = random_cnn(rng, small_arch(8, {3}));
        for (int i = 0; i < 3; ++i) {
            inst.inputs.push_back(random_input(rng, 8));
            inst.classes.push_back(i % 2);
        }
        CHECK(cnn_gradient_error(inst) <= 1e-3);
    }
}

TEST_CASE("gradient: random ladders")
{
    std::mt19937_64 rng(8);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) worst = std::max(worst, cnn_gradient_error(random_cnn_instance(rng)));
    INFO("worst relative error " << worst);
    CHECK(worst <= 1e-3);
}

TEST_CASE("cam: hand-computed tiny model")
{
    const CamMap c = cam_input(tiny_model(), tiny_input(), Label::Stochastic);
    REQUIRE(c.heat.rows() == 2);
    REQUIRE(c.heat.cols() == 2);
    CHECK(c.heat(0, 0) == doctest::Approx(1.5 - 3.0));
    CHECK(c.heat(1, 0) == doctest::Approx(-6.0));
    CHECK(c.heat(1, 1) == doctest::Approx(2.5 - 2.0));
    CHECK(c.upsampled.rows() == 4);
    CHECK_FALSE(c.degenerate);
}

TEST_CASE("cam: zero head weights")
{
    std::mt19937_64 rng(9);
    CnnModel m = random_cnn(rng, small_arch(16, {2, 2}));
    m.fc_weights.setZero();
    const CamMap c = cam_input(m, random_input(rng, 16), Label::NonStochastic);
    CHECK(c.heat.isZero(0.0));
    CHECK(c.degenerate);
}

TEST_CASE("cam: default architecture shape and GAP identity")
{
    std::mt19937_64 rng(10);
    const CnnModel m = random_cnn(rng, CnnArchitecture{});
    const LssImage img = random_image(rng, 224, 0.01);
    for (Label label : {Label::Stochastic, Label::NonStochastic}) {
        const CamMap c = cam(m, img, label);
        CHECK(c.heat.rows() == 14);
        CHECK(c.heat.cols() == 14);
        CHECK(c.upsampled.rows() == 224);
        CHECK(c.upsampled.cols() == 224);
        CHECK(c.label == label);
        const int k = class_index(label);
        CHECK(std::abs(c.heat.mean() - (forward(m, img)[k] - m.fc_bias[k])) <= 1e-6);
    }
}

TEST_CASE("cam: GAP identity on random small models")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const CnnInstance inst = random_cnn_instance(rng);
        const Eigen::Vector2d z = forward_input(inst.model, inst.inputs[0]);
        for (int k = 0; k < 2; ++k) {
            const CamMap c = cam_input(inst.model, inst.inputs[0], class_label(k));
            CHECK(std::abs(c.heat.mean() - (z[k] - inst.model.fc_bias[k])) <= 1e-6);
        }
    }
}

TEST_CASE("upsample: align-corners bilinear")
{
    Matrix h(2, 2);
    h << 0.0, 1.0,
         2.0, 3.0;
    const Matrix u = upsample_bilinear(h, 3, 3);
    CHECK(u(0, 0) == 0.0);
    CHECK(u(2, 2) == 3.0);
    CHECK(u(0, 1) == doctest::Approx(0.5));
    CHECK(u(1, 1) == doctest::Approx(1.5));
}

TEST_CASE("split: stratified, disjoint and seeded")
{
    std::vector<LabeledImage> items(30);
    for (std::size_t i = 0; i < items.size(); ++i) {
        items[i].id = std::to_string(i);
        items[i].label = i < 20 ? Label::Stochastic : Label::NonStochastic;
    }
    std::vector<std::size_t> tr, ho, tr2, ho2;
    stratified_split(items, 0.2, 4, tr, ho);
    CHECK(ho.size() == 6);
    CHECK(tr.size() == 24);
    CHECK(std::count_if(ho.begin(), ho.end(), [](std::size_t i) { return i < 20; }) == 4);
    std::vector<std::size_t> all = tr;
    all.insert(all.end(), ho.begin(), ho.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
    stratified_split(items, 0.2, 4, tr2, ho2);
    CHECK(ho == ho2);
    CHECK_THROWS_AS(stratified_split(items, 1.0, 4, tr, ho), ValidationError);
}

TEST_CASE("train: zero learning rate keeps the initial model")
{
    std::mt19937_64 rng(12);
    ClassifierConfig cc;
    cc.arch = small_arch(16, {2, 2});
    cc.learning_rate = 0.0;
    cc.epochs = 2;
    cc.seed = 3;
    const TrainedClassifier t = train_classifier(bar_dataset(rng, 16, 6), cc);
    CHECK(t.model == init_model(cc.arch, 3));
}

TEST_CASE("train: deterministic per seed and learns bars")
{
    std::mt19937_64 rng(13);
    const auto data = bar_dataset(rng, 16, 20);
    ClassifierConfig cc;
    cc.arch = small_arch(16, {4, 8});
    cc.epochs = 30;
    cc.batch = 8;
    cc.seed = 5;
    const TrainedClassifier a = train_classifier(data, cc), b = train_classifier(data, cc);
    CHECK(a.model == b.model);
    CHECK(a.metrics.epoch_loss == b.metrics.epoch_loss);
    CHECK(a.metrics.heldout_ids.size() == 8);
    CHECK(a.metrics.train_accuracy == 1.0);
    CHECK(a.metrics.heldout_accuracy == 1.0);
}

TEST_CASE("train: plain SGD is reachable with zero momentum")
{
    std::mt19937_64 rng(14);
    const auto data = bar_dataset(rng, 8, 4);
    ClassifierConfig cc;
    cc.arch = small_arch(8, {2});
    cc.epochs = 1;
    cc.batch = 100;
    cc.val_fraction = 0.0;
    cc.momentum = 0.0;
    cc.seed = 1;
    // one full-batch step equals a manual gradient step
    const TrainedClassifier t = train_classifier(data, cc);
    CnnModel expected = init_model(cc.arch, 1);
    std::vector<Matrix> inputs;
    for (const auto& it : data) inputs.push_back(image_input(it.image, 8));
    std::vector<const Matrix*> ptrs;
    std::vector<int> classes;
    std::vector<std::size_t> tr, ho;
    stratified_split(data, 0.0, cc.seed, tr, ho);
    std::mt19937_64 shuffle(mix_seed(cc.seed, 1));
    std::shuffle(tr.begin(), tr.end(), shuffle);
    for (std::size_t i : tr) {
        ptrs.push_back(&inputs[i]);
        classes.push_back(class_index(data[i].label));
    }
    CnnModel g;
    cross_entropy(expected, ptrs, classes, &g);
    expected.descend(g, cc.learning_rate);
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(t.model.at(i) == doctest::Approx(expected.at(i)).epsilon(1e-12));
}

TEST_CASE("train: invalid datasets and configurations")
{
    std::mt19937_64 rng(15);
    auto data = bar_dataset(rng, 8, 3);
    ClassifierConfig cc;
    cc.arch = small_arch(8, {2});
    cc.epochs = 1;
    std::vector<LabeledImage> one_class;
    for (const auto& it : data)
        if (it.label == Label::Stochastic) one_class.push_back(it);
    CHECK_THROWS_AS(train_classifier(one_class, cc), ValidationError);
    auto unlabeled = data;
    unlabeled[0].label = Label::Unknown;
    CHECK_THROWS_AS(train_classifier(unlabeled, cc), ValidationError);
    cc.momentum = 1.0;
    CHECK_THROWS_AS(train_classifier(data, cc), ValidationError);
    cc.momentum = 0.9;
    cc.arch = small_arch(12, {2, 2, 2});
    CHECK_THROWS_AS(train_classifier(data, cc), ValidationError);
}

TEST_CASE("evaluate: rows, accuracy and CSV layout")
{
    TempDir dir("eval");
    CnnModel m = zero_model(small_arch(8, {2}));
    m.fc_bias << 0.0, std::log(3.0);  // always NS with c_ns = 0.75
    std::vector<LabeledImage> items(3);
    for (std::size_t i = 0; i < 3; ++i) {
        items[i].id = "s" + std::to_string(i);
        items[i].image.grid = BinaryGrid::Zero(8, 8);
    }
    items[0].label = Label::NonStochastic;
    items[1].label = Label::Stochastic;
    items[2].label = Label::Unknown;
    const EvaluationReport rep = evaluate(m, items);
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.rows[0].agree);
    CHECK_FALSE(rep.rows[1].agree);
    CHECK(rep.accuracy == 0.5);
    write_report_csv(rep, dir / "r.csv");
    CHECK(read_bytes(dir / "r.csv") ==
          "id,c_s,c_ns,lss_label,reference_label,agree\n"
          "s0,0.250000,0.750000,NS,NS,yes\n"
          "s1,0.250000,0.750000,NS,S,no\n"
          "s2,0.250000,0.750000,NS," + short_name(Label::Unknown) + ",no\n");

    const EvaluationReport single = evaluate(m, {items[0]});
    CHECK(single.accuracy == 1.0);
    CHECK_THROWS_AS(evaluate(m, {}), ValidationError);
}

TEST_CASE("persistence: bit-exact round trip")
{
    TempDir dir("cnn");
    std::mt19937_64 rng(16);
    for (const auto& arch : {CnnArchitecture{}, small_arch(12, {3, 5})}) {
        const CnnModel m = random_cnn(rng, arch);
        save_model(m, dir / "m.cnn");
        const CnnModel back = load_model(dir / "m.cnn");
        CHECK(back == m);
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double a = m.at(i), b = back.at(i);
            REQUIRE(std::memcmp(&a, &b, sizeof a) == 0);
        }
    }
}

TEST_CASE("persistence: damaged files")
{
    TempDir dir("cnnbad");
    std::mt19937_64 rng(17);
    save_model(random_cnn(rng, small_arch(8, {2, 3})), dir / "m.cnn");
    const std::string good = read_bytes(dir / "m.cnn");
    CHECK(good.substr(0, 6) == "LSSCNN");

    write_text(dir / "trunc.cnn", good.substr(0, good.size() - 8));
    CHECK_THROWS_AS(load_model(dir / "trunc.cnn"), CorruptFileError);
    write_text(dir / "long.cnn", good + "xx");
    CHECK_THROWS_AS(load_model(dir / "long.cnn"), CorruptFileError);

    std::string version = good;
    const std::uint32_t v2 = 2;
    std::memcpy(version.data() + 6, &v2, 4);
    write_text(dir / "v2.cnn", version);
    CHECK_THROWS_AS(load_model(dir / "v2.cnn"), VersionError);

    write_text(dir / "junk.cnn", "LSSAE1 not a network");
    CHECK_THROWS_AS(load_model(dir / "junk.cnn"), CorruptFileError);
    CHECK_THROWS_AS(load_model(dir / "missing.cnn"), IoError);
}
