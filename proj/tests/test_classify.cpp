#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "healthyplate/classify.hpp"
#include "healthyplate/error.hpp"
#include "healthyplate/svm.hpp"
#include "healthyplate/synth.hpp"
#include "support.hpp"

using namespace hplate;

namespace {

double training_accuracy(const SvmModel& m, const LabeledDataset& d) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < d.size(); ++i) ok += svm_predict(m, d.samples[i]).label == d.labels[i];
    return static_cast<double>(ok) / static_cast<double>(d.size());
}

LabeledDataset xor_data() {
    LabeledDataset d;
    d.add({0, 0}, "pos");
    d.add({1, 1}, "pos");
    d.add({0, 1}, "neg");
    d.add({1, 0}, "neg");
    return d;
}

// Random 2-D points split by a random line with a margin of at least `margin`.
LabeledDataset separable(std::mt19937_64& rng, int n, double margin) {
    const double angle = gen::uniform_real(rng, 0, 2 * M_PI);
    const double nx = std::cos(angle), ny = std::sin(angle), off = gen::uniform_real(rng, -1, 1);
    LabeledDataset d;
    while (static_cast<int>(d.size()) < n) {
        const double x = gen::uniform_real(rng, -5, 5), y = gen::uniform_real(rng, -5, 5);
        const double s = nx * x + ny * y + off;
        if (std::abs(s) < margin / 2) continue;
        d.add({x, y}, s > 0 ? "up" : "down");
    }
    if (d.label_set().size() < 2) return separable(rng, n, margin);
    return d;
}

ImageBuffer patch_image(Rgb8 color, int w = 64, int h = 64) {
    ImageBuffer img(w, h, ColorSpace::RGB);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        auto p = img.pixel(i);
        for (int c = 0; c < 3; ++c) p[static_cast<std::size_t>(c)] = color[static_cast<std::size_t>(c)];
    }
    return img;
}

Mask rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
    Mask m(w, h);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) m.set(x, y);
    return m;
}

} // namespace

TEST_CASE("two-point max-margin problem") {
    const std::vector<Features> x{{0, 0}, {2, 0}};
    const std::vector<int> y{-1, 1};
    const auto m = train_binary(x, y, Kernel::linear(), 1e4, 1e-3, 50);
    REQUIRE(m.weights);
    CHECK((*m.weights)[0] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::abs((*m.weights)[1]) < 1e-3);
    CHECK(m.bias == doctest::Approx(-1.0).epsilon(1e-3));
    CHECK(m.converged);
    const std::vector<double> far{10, 0};
    CHECK(m.decision(Kernel::linear(), far) == doctest::Approx(9.0).epsilon(1e-3));

    LabeledDataset d;
    d.add({0, 0}, "minus");
    d.add({2, 0}, "plus");
    SvmParams p;
    p.kernel = Kernel::linear();
    p.C = 1e4;
    const auto model = svm_train(d, p);
    CHECK(svm_predict(model, d.samples[0]).label == "minus");
    CHECK(svm_predict(model, d.samples[1]).label == "plus");
    const auto pred = svm_predict(model, far);
    CHECK(pred.label == "plus");
    const auto plus = std::find_if(pred.decision_values.begin(), pred.decision_values.end(),
                                   [](const auto& dv) { return dv.first == "plus"; });
    REQUIRE(plus != pred.decision_values.end());
    CHECK(plus->second == doctest::Approx(9.0).epsilon(1e-3));
}

TEST_CASE("prediction ties go to the smallest label") {
    SvmModel m;
    m.kernel = Kernel::linear();
    m.dimension = 1;
    m.labels = {"apple", "orange"};
    for (const auto& l : m.labels) {
        BinaryMachine b;
        b.label = l;
        b.weights = Features{0.0};
        b.support_vectors = {{1.0}};
        b.coefficients = {0.0};
        m.machines.push_back(b);
    }
    const std::vector<double> x{3.0};
    CHECK(svm_predict(m, x).label == "apple");
    const std::vector<double> wrong{1.0, 2.0};
    CHECK_THROWS_AS(svm_predict(m, wrong), Error);
}

TEST_CASE("XOR") {
    const auto d = xor_data();
    SvmParams lin;
    lin.kernel = Kernel::linear();
    CHECK(training_accuracy(svm_train(d, lin), d) <= 0.75);

    SvmParams rbf;
    rbf.kernel = Kernel::rbf(1.0);
    rbf.C = 10;
    const auto model = svm_train(d, rbf);
    CHECK(training_accuracy(model, d) == 1.0);

    // Compare the "pos" machine with the exact dual optimum.
    std::vector<std::vector<double>> K(4, std::vector<double>(4));
    const Kernel k = Kernel::rbf(1.0);
    std::vector<int> y;
    for (std::size_t i = 0; i < 4; ++i) {
        y.push_back(d.labels[i] == "pos" ? 1 : -1);
        for (std::size_t j = 0; j < 4; ++j) K[i][j] = k(d.samples[i], d.samples[j]);
    }
    const auto exact = oracle::brute_force_dual(K, y, 10.0);
    REQUIRE(exact.alpha.size() == 4);
    REQUIRE(std::isfinite(exact.bias));
    const auto& pos = model.machines[1];
    REQUIRE(pos.label == "pos");
    for (std::size_t i = 0; i < 4; ++i) {
        double f = exact.bias;
        for (std::size_t j = 0; j < 4; ++j) f += exact.alpha[j] * y[j] * K[i][j];
        CHECK(pos.decision(model.kernel, d.samples[i]) == doctest::Approx(f).epsilon(1e-2));
    }
    double alpha_sum = 0;
    for (double c : pos.coefficients) alpha_sum += std::abs(c);
    double exact_sum = 0;
    for (double a : exact.alpha) exact_sum += a;
    CHECK(alpha_sum == doctest::Approx(exact_sum).epsilon(1e-2));
}

TEST_CASE("dual oracle agrees with SMO on random small problems") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 20; ++t) {
        const int n = gen::uniform_int(rng, 2, 6);
        std::vector<Features> x;
        std::vector<int> y;
        for (int i = 0; i < n; ++i) {
            x.push_back({gen::uniform_real(rng, -2, 2), gen::uniform_real(rng, -2, 2)});
            y.push_back(i % 2 == 0 ? 1 : -1);
        }
        const double C = gen::uniform_real(rng, 0.5, 20);
        const Kernel k = gen::uniform_int(rng, 0, 1) ? Kernel::rbf(0.7) : Kernel::linear();
        const auto m = train_binary(x, y, k, C, 1e-6, 500);
        std::vector<std::vector<double>> K(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) K[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = k(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)]);
        const auto exact = oracle::brute_force_dual(K, y, C);
        double obj = 0;
        std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
        for (std::size_t s = 0; s < m.support_vectors.size(); ++s)
            for (int i = 0; i < n; ++i)
                if (m.support_vectors[s] == x[static_cast<std::size_t>(i)])
                    alpha[static_cast<std::size_t>(i)] = m.coefficients[s] * y[static_cast<std::size_t>(i)];
        for (int i = 0; i < n; ++i) {
            obj += alpha[static_cast<std::size_t>(i)];
            for (int j = 0; j < n; ++j)
                obj -= 0.5 * alpha[static_cast<std::size_t>(i)] * alpha[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(i)] *
                       y[static_cast<std::size_t>(j)] * K[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
        CHECK(obj == doctest::Approx(exact.objective).epsilon(1e-4));
    }
}

TEST_CASE("separable data with large C is fitted exactly") {
    std::mt19937_64 rng(32);
    for (int t = 0; t < 20; ++t) {
        const auto d = separable(rng, 20, 0.5);
        SvmParams p;
        p.kernel = Kernel::linear();
        p.C = 1e4;
        CHECK(training_accuracy(svm_train(d, p), d) == 1.0);
    }
}

TEST_CASE("linear decision via weights equals the dual form") {
    std::mt19937_64 rng(33);
    LabeledDataset d;
    for (int i = 0; i < 60; ++i) {
        Features f;
        for (int k = 0; k < 5; ++k) f.push_back(gen::uniform_real(rng, -1, 1));
        d.add(f, std::string(1, static_cast<char>('a' + i % 3)));
    }
    SvmParams p;
    p.kernel = Kernel::linear();
    const auto m = svm_train(d, p);
    for (int t = 0; t < 100; ++t) {
        Features x;
        for (int k = 0; k < 5; ++k) x.push_back(gen::uniform_real(rng, -3, 3));
        for (const auto& mach : m.machines)
            CHECK(mach.decision(m.kernel, x) == doctest::Approx(mach.decision_dual(m.kernel, x)).epsilon(1e-9).scale(1e-6));
    }
}

TEST_CASE("training is invariant to sample order") {
    std::mt19937_64 rng(34);
    LabeledDataset d;
    for (int i = 0; i < 40; ++i) d.add({gen::uniform_real(rng, 0, 1), gen::uniform_real(rng, 0, 1)}, i % 2 ? "x" : "y");
    const auto base = svm_train(d);
    for (int t = 0; t < 3; ++t) {
        std::vector<std::size_t> order(d.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        LabeledDataset s;
        for (auto i : order) s.add(d.samples[i], d.labels[i]);
        const auto other = svm_train(s);
        for (int q = 0; q < 20; ++q) {
            const std::vector<double> x{gen::uniform_real(rng, 0, 1), gen::uniform_real(rng, 0, 1)};
            const auto a = svm_predict(base, x), b = svm_predict(other, x);
            CHECK(a.label == b.label);
            for (std::size_t k = 0; k < a.decision_values.size(); ++k)
                CHECK(std::abs(a.decision_values[k].second - b.decision_values[k].second) <= 1e-6);
        }
    }
}

TEST_CASE("training errors") {
    LabeledDataset one;
    one.add({1.0}, "a");
    one.add({2.0}, "a");
    CHECK_THROWS_AS(svm_train(one), Error);
    LabeledDataset bad;
    bad.add({1.0}, "a");
    bad.add({std::nan("")}, "b");
    CHECK_THROWS_AS(svm_train(bad), Error);
    LabeledDataset ragged;
    ragged.add({1.0}, "a");
    ragged.add({1.0, 2.0}, "b");
    CHECK_THROWS_AS(svm_train(ragged), Error);
    SvmParams p;
    p.C = 0;
    CHECK_THROWS_AS(svm_train(xor_data(), p), Error);
}

TEST_CASE("model serialization") {
    const auto d = xor_data();
    for (auto kernel : {Kernel::linear(), Kernel::rbf(1.0), Kernel::rbf()}) {
        SvmParams p;
        p.kernel = kernel;
        const auto m = svm_train(d, p);
        const auto back = SvmModel::from_json(nlohmann::json::parse(m.to_json().dump()));
        for (const auto& x : d.samples) {
            const auto a = svm_predict(m, x), b = svm_predict(back, x);
            CHECK(a.label == b.label);
            for (std::size_t k = 0; k < a.decision_values.size(); ++k)
                CHECK(a.decision_values[k].second == b.decision_values[k].second);
        }
    }
    auto doc = svm_train(d).to_json();
    doc["kernel"] = "poly";
    CHECK_THROWS_AS(SvmModel::from_json(doc), Error);
    try {
        SvmModel::from_json(nlohmann::json{{"labels", 3}});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::BadModel);
    }
}

TEST_CASE("metrics") {
    SUBCASE("apple/orange confusion") {
        std::vector<std::string> truth, pred;
        for (int i = 0; i < 5; ++i) {
            truth.push_back("apple");
            pred.push_back("apple");
        }
        for (int i = 0; i < 7; ++i) {
            truth.push_back("orange");
            pred.push_back(i == 0 ? "apple" : "orange");
        }
        const auto m = metrics_from_predictions(truth, pred);
        CHECK(m.per_class.at("apple").precision == doctest::Approx(5.0 / 6));
        CHECK(m.per_class.at("apple").recall == 1.0);
        CHECK(m.per_class.at("apple").accuracy == doctest::Approx(5.0 / 6));
        CHECK(m.per_class.at("orange").precision == 1.0);
        CHECK(m.per_class.at("orange").recall == doctest::Approx(6.0 / 7));
        CHECK(m.per_class.at("orange").accuracy == doctest::Approx(6.0 / 7));
        CHECK(m.confusion == std::vector<std::vector<std::size_t>>{{5, 0}, {1, 6}});
        CHECK(m.per_class.at("orange").support == 7);
        CHECK(m.overall_accuracy == doctest::Approx(11.0 / 12));
        const auto doc = m.to_json();
        CHECK(doc["per_class"]["apple"]["recall"] == 1.0);
    }
    SUBCASE("perfect") {
        const auto m = metrics_from_predictions({"a", "b", "b"}, {"a", "b", "b"});
        for (const auto& [l, c] : m.per_class) {
            CHECK(c.precision == 1.0);
            CHECK(c.recall == 1.0);
            CHECK(c.accuracy == 1.0);
        }
    }
    SUBCASE("all wrong") {
        const auto m = metrics_from_predictions({"a", "b"}, {"b", "a"});
        for (const auto& [l, c] : m.per_class) {
            CHECK(c.precision == 0.0);
            CHECK(c.recall == 0.0);
        }
    }
    SUBCASE("identities on random predictions") {
        std::mt19937_64 rng(35);
        std::vector<std::string> truth, pred;
        for (int i = 0; i < 200; ++i) {
            truth.push_back(std::string(1, static_cast<char>('a' + gen::uniform_int(rng, 0, 3))));
            pred.push_back(std::string(1, static_cast<char>('a' + gen::uniform_int(rng, 0, 4))));
        }
        const auto m = metrics_from_predictions(truth, pred);
        for (std::size_t k = 0; k < m.labels.size(); ++k) {
            std::size_t row = 0, col = 0;
            for (std::size_t j = 0; j < m.labels.size(); ++j) {
                row += m.confusion[k][j];
                col += m.confusion[j][k];
            }
            const auto truth_count = static_cast<std::size_t>(std::count(truth.begin(), truth.end(), m.labels[k]));
            CHECK(row == truth_count);
            const auto& c = m.per_class.at(m.labels[k]);
            const double tp = static_cast<double>(m.confusion[k][k]);
            CHECK(c.precision == (col ? tp / static_cast<double>(col) : 0.0));
            CHECK(c.recall == (row ? tp / static_cast<double>(row) : 0.0));
        }
    }
    SUBCASE("disjoint labels give an all-zero diagonal") {
        const auto m = metrics_from_predictions({"a", "a"}, {"b", "c"});
        for (std::size_t k = 0; k < m.labels.size(); ++k) CHECK(m.confusion[k][k] == 0);
    }
    CHECK_THROWS_AS(metrics_from_predictions({"a"}, {}), Error);
    CHECK_THROWS_AS(evaluate(svm_train(xor_data()), LabeledDataset{}), Error);
}

TEST_CASE("region descriptor") {
    const auto red = patch_image({255, 0, 0});
    const auto mask = rect_mask(64, 64, 10, 10, 29, 29);
    const auto f = extract_features(red, mask);
    REQUIRE(f.size() == kFeatureDim);
    for (std::size_t s = 0; s < 3; ++s) {
        CHECK(f[s * 3 + 0] == 0.0);
        CHECK(f[s * 3 + 1] == 1.0);
        CHECK(f[s * 3 + 2] == 1.0);
    }
    for (std::size_t c = 12; c < 15; ++c) CHECK(f[c] == 0.0);
    CHECK(f[15] == 1.0);
    CHECK(extract_features(red, mask) == f);

    const auto orange_color = *catalog_color("orange");
    const auto apple_color = *catalog_color("apple");
    const auto fo = extract_features(patch_image(orange_color), mask);
    const auto fa = extract_features(patch_image(apple_color), mask);
    const double hue_gap = rgb_to_hsv({double(orange_color[0]), double(orange_color[1]), double(orange_color[2])})[0] -
                           rgb_to_hsv({double(apple_color[0]), double(apple_color[1]), double(apple_color[2])})[0];
    CHECK(fo[9] - fa[9] == doctest::Approx(hue_gap / 360.0));
    CHECK(hue_gap == doctest::Approx(25.0).epsilon(0.1));

    for (const auto& v : f) CHECK(std::isfinite(v));
    CHECK_THROWS_AS(extract_features(red, Mask(64, 64)), Error);
    CHECK_THROWS_AS(extract_features(red, Mask(10, 10)), Error);
}

TEST_CASE("region descriptor of a two-color disc") {
    std::mt19937_64 rng(36);
    for (int t = 0; t < 5; ++t) {
        const auto s = generate_sample("broccoli", rng);
        const auto f = extract_features(s.image, s.mask);
        for (double v : f) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("classify_regions fractions") {
    LabeledDataset d;
    const auto full = rect_mask(64, 64, 0, 0, 63, 63);
    for (const char* l : {"apple", "broccoli", "plate"})
        d.add(extract_features(patch_image(*catalog_color(l)), full), l);
    const auto model = svm_train(d);

    ImageBuffer img(40, 20, ColorSpace::RGB);
    auto paint = [&](int x0, int x1, Rgb8 c) {
        for (int y = 0; y < 20; ++y)
            for (int x = x0; x <= x1; ++x)
                for (int k = 0; k < 3; ++k) img.pixel(x, y)[static_cast<std::size_t>(k)] = c[static_cast<std::size_t>(k)];
    };
    paint(0, 4, *catalog_color("apple"));     // 100 px
    paint(5, 19, *catalog_color("broccoli")); // 300 px
    paint(20, 39, *catalog_color("plate"));   // 400 px
    const std::vector<std::pair<int, Mask>> masks{
        {1, rect_mask(40, 20, 0, 0, 4, 19)}, {2, rect_mask(40, 20, 5, 0, 19, 19)}, {3, rect_mask(40, 20, 20, 0, 39, 19)}};
    const auto items = classify_regions(img, masks, model);
    REQUIRE(items.size() == 2);
    CHECK(items[0].label == "apple");
    CHECK(items[0].category == Category::Fruit);
    CHECK(items[0].fraction == doctest::Approx(0.25));
    CHECK(items[1].label == "broccoli");
    CHECK(items[1].fraction == doctest::Approx(0.75));
    CHECK(items[0].fraction + items[1].fraction == doctest::Approx(1.0).epsilon(1e-9));

    const auto single = classify_regions(img, {{7, rect_mask(40, 20, 0, 0, 4, 19)}}, model);
    REQUIRE(single.size() == 1);
    CHECK(single[0].fraction == 1.0);
    CHECK(single[0].pixel_count == 100);
    CHECK(classify_regions(img, {{3, rect_mask(40, 20, 20, 0, 39, 19)}}, model).empty());
}
