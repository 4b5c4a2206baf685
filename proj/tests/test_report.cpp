#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nnkit/report.hpp>

#include "helpers.hpp"

using namespace nnkit;

namespace {

std::string slurp(const std::string &path) {
    std::ifstream f(path);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("fmt_double") {
    CHECK(fmt_double(0.0) == "0");
    CHECK(fmt_double(1.5) == "1.5");
    // round-trips through parsing exactly
    for (double v : {0.1, 1.0 / 3.0, 1e-17, 12345.6789}) {
        CHECK(std::stod(fmt_double(v)) == v);
    }
}

TEST_CASE("accuracy") {
    SECTION("scalar band: 0.6 counts as 1, 0.4 does not") {
        Tensor pred({4, 1}, {0.6, 0.4, 0.9, 0.1});
        Tensor target({4, 1}, {1, 1, 1, 0});
        CHECK(accuracy(pred, target) == 0.75); // 0.4 vs 1 misses
    }

    SECTION("exactly 0.5 away is a miss") {
        Tensor pred({1, 1}, {0.5});
        Tensor target({1, 1}, {1.0});
        CHECK(accuracy(pred, target) == 0.0);
    }

    SECTION("vector predictions use argmax, index targets") {
        Tensor pred({2, 3}, {0.1, 0.8, 0.1, 0.7, 0.2, 0.1});
        Tensor target({2}, {1.0, 2.0});
        CHECK(accuracy(pred, target) == 0.5);
    }

    SECTION("vector predictions against one-hot targets") {
        Tensor pred({2, 3}, {0.1, 0.8, 0.1, 0.7, 0.2, 0.1});
        Tensor onehot({2, 3}, {0, 1, 0, 1, 0, 0});
        CHECK(accuracy(pred, onehot) == 1.0);
    }

    SECTION("length mismatch throws") {
        CHECK_THROWS_AS(accuracy(Tensor({2, 1}), Tensor({3, 1})), TensorError);
    }
}

TEST_CASE("confusion matrix") {
    std::vector<std::size_t> pred{0, 1, 1, 2, 2, 2};
    std::vector<std::size_t> truth{0, 1, 2, 2, 2, 0};
    auto cm = confusion_matrix(pred, truth, 3);

    SECTION("cell semantics: counts(i,j) = predicted i, true j") {
        CHECK(cm.counts(0, 0) == 1.0);
        CHECK(cm.counts(1, 2) == 1.0);
        CHECK(cm.counts(2, 0) == 1.0);
        CHECK(cm.counts(2, 2) == 2.0);
    }

    SECTION("total and trace accuracy") {
        CHECK(cm.total() == 6);
        CHECK(cm.accuracy() == Catch::Approx(4.0 / 6.0));
    }

    SECTION("column sums are the per-class truth counts") {
        double col0 = cm.counts(0, 0) + cm.counts(1, 0) + cm.counts(2, 0);
        CHECK(col0 == 2.0);
    }

    SECTION("perfect predictions give a diagonal matrix") {
        auto diag = confusion_matrix(truth, truth, 3);
        CHECK(diag.accuracy() == 1.0);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                if (i != j) CHECK(diag.counts(i, j) == 0.0);
    }

    SECTION("length mismatch throws") {
        CHECK_THROWS_AS(confusion_matrix({0}, {0, 1}, 2), TensorError);
    }
}

TEST_CASE("separation surface sampling") {
    SECTION("keeps only points whose output falls inside the band") {
        // model: f(x, y) = x; band (0.4, 0.6) keeps the vertical strip
        auto model = [](const Tensor &batch) {
            Tensor out({batch.extent(0), 1});
            for (std::size_t i = 0; i < batch.extent(0); ++i) out(i, 0) = batch(i, 0);
            return out;
        };
        Rng rng(5);
        auto s = sample_separation_surface(model, {0, 1, 0, 1}, 5000, 0.4, 0.6, rng);
        CHECK(s.points.size() > 0);
        for (auto [x, y] : s.points) {
            CHECK(x > 0.4);
            CHECK(x < 0.6);
        }
        // roughly 20% of the area
        CHECK(double(s.points.size()) / 5000.0 == Catch::Approx(0.2).margin(0.03));
    }

    SECTION("same seed is deterministic across batch sizes") {
        auto model = [](const Tensor &batch) {
            Tensor out({batch.extent(0), 1});
            for (std::size_t i = 0; i < batch.extent(0); ++i)
                out(i, 0) = batch(i, 0) + batch(i, 1);
            return out;
        };
        Rng a(9), b(9);
        auto s1 = sample_separation_surface(model, {-1, 1, -1, 1}, 3000, 0.0, 0.5, a, 500);
        auto s2 = sample_separation_surface(model, {-1, 1, -1, 1}, 3000, 0.0, 0.5, b, 3000);
        CHECK(s1.points == s2.points);
    }
}

TEST_CASE("csv export") {
    SECTION("loss trend columns and blanks") {
        TrainReport r;
        r.train_loss = {1.0, 0.5, 0.25};
        r.val_loss = {1.1, 0.6}; // stopped early: one fewer entry
        r.epochs_run = 3;
        export_loss_trend_csv(r, "loss_test.csv");
        auto text = slurp("loss_test.csv");
        CHECK(text == "epoch,train,val,test\n"
                      "1,1,1.1000000000000001,\n"
                      "2,0.5,0.59999999999999998,\n"
                      "3,0.25,,\n");
        std::remove("loss_test.csv");
    }

    SECTION("rewriting the same report is byte-identical") {
        TrainReport r;
        r.train_loss = {1.0 / 3.0, 0.1234567890123456789};
        r.epochs_run = 2;
        export_loss_trend_csv(r, "loss_a.csv");
        export_loss_trend_csv(r, "loss_b.csv");
        CHECK(slurp("loss_a.csv") == slurp("loss_b.csv"));
        std::remove("loss_a.csv");
        std::remove("loss_b.csv");
    }

    SECTION("confusion csv has a header and integer cells") {
        auto cm = confusion_matrix({0, 1, 1}, {0, 1, 0}, 2);
        export_confusion_csv(cm, "cm_test.csv");
        auto text = slurp("cm_test.csv");
        CHECK(text == "predicted,true_0,true_1\n"
                      "0,1,0\n"
                      "1,1,1\n");
        std::remove("cm_test.csv");
    }
}

TEST_CASE("svg export") {
    SECTION("loss trend svg is well-formed and mentions every series") {
        TrainReport r;
        r.train_loss = {1.0, 0.5};
        r.val_loss = {1.2, 0.7};
        r.test_loss = {1.3, 0.8};
        r.epochs_run = 2;
        export_loss_trend_svg(r, "trend_test.svg");
        auto text = slurp("trend_test.svg");
        CHECK(text.find("<svg") != std::string::npos);
        CHECK(text.rfind("</svg>\n") == text.size() - 7);
        CHECK(text.find("train") != std::string::npos);
        CHECK(text.find("validation") != std::string::npos);
        CHECK(text.find("test") != std::string::npos);
        CHECK(text.find("<polyline") != std::string::npos);
        std::remove("trend_test.svg");
    }

    SECTION("surface svg renders scatter circles") {
        SurfaceSample s{{0, 1, 0, 1}, 0.4, 0.6, {{0.5, 0.5}, {0.45, 0.2}}};
        export_surface_svg(s, {{0.0, 0.0}}, {{1.0, 1.0}}, "surface_test.svg");
        auto text = slurp("surface_test.svg");
        CHECK(text.find("<circle") != std::string::npos);
        CHECK(text.find("separation surface") != std::string::npos);
        std::remove("surface_test.svg");
    }

    SECTION("filter grid draws one tile per output channel") {
        Rng rng(3);
        Tensor W = rand_uniform({12, 1, 5, 5}, -1.0, 1.0, rng);
        export_filter_grid_svg(W, "filters_test.svg");
        auto text = slurp("filters_test.svg");
        // 12 tiles x 25 cells each
        std::size_t rects = 0, pos = 0;
        while ((pos = text.find("<rect", pos)) != std::string::npos) {
            ++rects;
            pos += 5;
        }
        CHECK(rects == 12 * 25);
        CHECK_THROWS_AS(export_filter_grid_svg(Tensor({3, 3}), "x.svg"), TensorError);
        std::remove("filters_test.svg");
    }

    SECTION("svg rerun is byte-identical") {
        TrainReport r;
        r.train_loss = {0.9, 0.3, 0.1};
        r.epochs_run = 3;
        export_loss_trend_svg(r, "trend_a.svg", true);
        export_loss_trend_svg(r, "trend_b.svg", true);
        CHECK(slurp("trend_a.svg") == slurp("trend_b.svg"));
        std::remove("trend_a.svg");
        std::remove("trend_b.svg");
    }
}
