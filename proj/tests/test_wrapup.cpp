#include "doctest.h"

#include <algorithm>
#include <random>

#include "meetpat/corpus.hpp"
#include "meetpat/error.hpp"
#include "meetpat/wrapup.hpp"

using namespace meetpat;

namespace {

std::vector<WrapupPoint> make_points(const std::vector<double>& xs, auto&& f) {
    std::vector<WrapupPoint> out;
    for (double x : xs) {
        out.push_back({x, f(x), false, ""});
    }
    return out;
}

} // namespace

TEST_CASE("extract points") {
    Corpus c;
    c.alphabet = Alphabet({"inf"});
    Meeting m;
    m.id = "a";
    m.acts = {{0.0, "A", 0, std::nullopt}, {1500.0, "B", 0, std::nullopt}};
    m.decision_windows = {{600.0, 840.0}};
    c.meetings.push_back(m);
    m.id = "b";
    m.decision_windows = {{100.0, 1500.0}};
    c.meetings.push_back(m);
    m.id = "c";
    m.decision_windows.clear();
    c.meetings.push_back(m);

    const auto r = extract_points(c);
    REQUIRE(r.points.size() == 2);
    CHECK(r.points[0].x == doctest::Approx(14.0));
    CHECK(r.points[0].y == doctest::Approx(11.0));
    CHECK(r.points[1].y == 0.0);
    CHECK(r.warnings.size() == 1);
}

TEST_CASE("synthetic times are recovered") {
    std::vector<WrapupSpec> specs;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(5.0, 40.0);
    for (int i = 0; i < 20; ++i) {
        specs.push_back({std::round(u(rng) * 4) / 4, std::round(u(rng) * 2) / 4});
    }
    const auto points = extract_points(synth_wrapup_corpus(specs, 1)).points;
    REQUIRE(points.size() == specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        CHECK(points[i].x == doctest::Approx(specs[i].decision_minutes).epsilon(1e-12));
        CHECK(points[i].y == doctest::Approx(specs[i].wrapup_minutes).epsilon(1e-12));
    }
}

TEST_CASE("two segments are recovered") {
    const auto pts = make_points({1, 2, 3, 4, 5, 6, 7, 8, 9, 11, 12, 15, 20, 25},
                                 [](double x) { return x < 10 ? 2 * x + 1 : -x + 31; });
    const auto m = fit_piecewise(pts);
    CHECK(m.left_slope == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(m.left_intercept == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(m.right_slope == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(m.right_intercept == doctest::Approx(31.0).epsilon(1e-6));
    CHECK(m.breakpoint > 9.0);
    CHECK(m.breakpoint < 11.0);
    CHECK(m.sse < 1e-12);
}

TEST_CASE("collinear data picks the smallest breakpoint") {
    const auto pts = make_points({1, 2, 3, 4, 5, 6}, [](double x) { return 3 * x - 2; });
    const auto m = fit_piecewise(pts);
    CHECK(m.breakpoint == 2.5);
    CHECK(m.left_slope == doctest::Approx(m.right_slope).epsilon(1e-9));
    CHECK(m.left_intercept == doctest::Approx(m.right_intercept).epsilon(1e-9));
}

TEST_CASE("prediction") {
    PiecewiseModel m;
    m.breakpoint = 10;
    m.left_slope = 2;
    m.left_intercept = 1;
    m.right_slope = -1;
    m.right_intercept = 31;
    CHECK(predict_wrapup(m, 4).minutes == 9.0);
    CHECK(predict_wrapup(m, 10).minutes == 21.0);
    const auto p = predict_wrapup(m, 40);
    CHECK(p.minutes == 0.0);
    CHECK(p.floored);
}

TEST_CASE("fit errors") {
    const auto three = make_points({1, 2, 3}, [](double x) { return x; });
    CHECK_THROWS_AS(fit_piecewise(three), FitError);
    const auto same_x = make_points({2, 2, 2, 2, 2}, [](double) { return 1.0; });
    CHECK_THROWS_AS(fit_piecewise(same_x), FitError);
}

TEST_CASE("piecewise properties on random data") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ux(1.0, 50.0), noise(-3.0, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<WrapupPoint> pts;
        const int n = 5 + trial % 20;
        for (int i = 0; i < n; ++i) {
            const double x = ux(rng);
            pts.push_back({x, std::max(0.0, 20 - 0.3 * x + noise(rng)), false, ""});
        }
        const auto m = fit_piecewise(pts);
        std::vector<double> xs, ys;
        for (const auto& p : pts) {
            xs.push_back(p.x);
            ys.push_back(p.y);
        }
        CHECK(m.sse <= fit_line(xs, ys).sse + 1e-9);
        CHECK(m.sse == doctest::Approx(piecewise_sse(m, pts)));
        CHECK(m.breakpoint >= *std::min_element(xs.begin(), xs.end()));
        CHECK(m.breakpoint <= *std::max_element(xs.begin(), xs.end()));

        auto shifted = pts;
        for (auto& p : shifted) {
            p.y += 2.5;
        }
        const auto s = fit_piecewise(shifted);
        CHECK(s.breakpoint == m.breakpoint);
        CHECK(s.left_intercept == doctest::Approx(m.left_intercept + 2.5).epsilon(1e-9));
        CHECK(s.right_intercept == doctest::Approx(m.right_intercept + 2.5).epsilon(1e-9));

        auto perm = pts;
        std::shuffle(perm.begin(), perm.end(), rng);
        const auto q = fit_piecewise(perm);
        CHECK(q.breakpoint == m.breakpoint);
        CHECK(q.left_slope == m.left_slope);
        CHECK(q.right_slope == m.right_slope);
    }
}

TEST_CASE("outputs") {
    const auto pts = make_points({1, 2, 3, 4}, [](double x) { return x; });
    const auto m = fit_piecewise(pts);
    CHECK(points_csv(pts, m).rfind("meeting,x,y,y_hat,clamped\n", 0) == 0);
    CHECK(model_json(m, fit_line(std::vector<double>{1, 2}, std::vector<double>{1, 2})).find("breakpoint") !=
          std::string::npos);
}
