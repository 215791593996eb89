#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "loopwatch/detect.hpp"
#include "loopwatch/errors.hpp"
#include "loopwatch/graph.hpp"

using namespace loopwatch;

namespace {

const std::string kData = LOOPWATCH_TEST_DATA_DIR;

WeightedDigraph bad_triangle() {
    WeightedDigraph g;
    g.add_arc("1", "2", 1.0);
    g.add_arc("2", "3", 2.0);
    g.add_arc("1", "3", 4.0);
    return g;
}

std::vector<double> vec(std::initializer_list<double> values) { return values; }

} // namespace

TEST_CASE("detect classifies the demo fixtures") {
    WeightedDigraph clean = load_network_file(kData + "/demo_clean.csv", Coordinate::X);
    DiagnosticsReport ok = detect(clean);
    CHECK(ok.verdict == Verdict::Clean);
    CHECK_FALSE(ok.first_failing_r.has_value());
    CHECK(ok.vertex_ranking.empty());
    CHECK(ok.spectrum_deviation <= 1e-6);
    for (const auto& entry : ok.series.entries) CHECK(entry.norm <= 1e-9);

    WeightedDigraph err = load_network_file(kData + "/demo_error.csv", Coordinate::X);
    DiagnosticsReport bad = detect(err);
    CHECK(bad.verdict == Verdict::Gross);
    REQUIRE(bad.first_failing_r.has_value());
    CHECK(*bad.first_failing_r == 4);
    CHECK(bad.spectrum_deviation > 0.1);

    // worst offenders first, ties broken by vertex order
    REQUIRE(bad.vertex_ranking.size() == 6);
    CHECK(bad.vertex_ranking[0].first == "2");
    CHECK(bad.vertex_ranking[0].second == doctest::Approx(1.5));
    CHECK(bad.vertex_ranking[1].first == "6");
    CHECK(bad.vertex_ranking[1].second == doctest::Approx(1.5));
    CHECK(bad.vertex_ranking[2].first == "1");
    CHECK(bad.vertex_ranking[3].first == "5");
    CHECK(bad.vertex_ranking[4].first == "3");
    CHECK(bad.vertex_ranking[5].first == "4");
}

TEST_CASE("detect separates survey noise from blunders") {
    WeightedDigraph clean = load_network_file(kData + "/field_clean.csv", Coordinate::X);
    DiagnosticsReport minor = detect(clean);
    CHECK(minor.verdict == Verdict::Minor);
    REQUIRE(minor.first_failing_r.has_value());
    CHECK(*minor.first_failing_r == 3);

    WeightedDigraph gross = load_network_file(kData + "/field_gross.csv", Coordinate::X);
    DiagnosticsReport bad = detect(gross);
    CHECK(bad.verdict == Verdict::Gross);
    REQUIRE(bad.first_failing_r.has_value());
    CHECK(*bad.first_failing_r == 3);
    CHECK(bad.vertex_ranking[0].first == "4");

    // the verdict boundary moves with tau
    CHECK(detect(clean, 2.0, -1, 1e-4).verdict == Verdict::Gross);
    CHECK(detect(gross, 2.0, -1, 0.5).verdict == Verdict::Minor);
}

TEST_CASE("detect respects r_max and handles degenerate networks") {
    WeightedDigraph err = load_network_file(kData + "/demo_error.csv", Coordinate::X);
    DiagnosticsReport shallow = detect(err, 2.0, 3);
    CHECK(shallow.verdict == Verdict::Clean); // the error only shows from r = 4
    CHECK(shallow.series.entries.size() == 3);

    WeightedDigraph empty;
    CHECK(detect(empty).verdict == Verdict::Clean);

    WeightedDigraph lone;
    lone.add_vertex("a");
    CHECK(detect(lone).verdict == Verdict::Clean);
}

TEST_CASE("suspect ranking points at the planted error") {
    WeightedDigraph err = load_network_file(kData + "/demo_error.csv", Coordinate::X);
    DiagnosticsReport report = detect(err);
    std::vector<int> top = rank_suspect_arcs(err, report, 2);
    REQUIRE(top.size() == 2);
    // the doctored baseline 2-6 scores highest; 1-2 is the runner-up tie-break
    CHECK(err.arc(top[0]).tail == err.find_vertex("2"));
    CHECK(err.arc(top[0]).head == err.find_vertex("6"));
    CHECK(top[1] == 0);

    std::vector<int> all = rank_suspect_arcs(err, report, 99);
    CHECK(all.size() == 9);

    WeightedDigraph clean = load_network_file(kData + "/demo_clean.csv", Coordinate::X);
    CHECK_THROWS_AS(rank_suspect_arcs(clean, detect(clean), 2), UsageError);
}

TEST_CASE("suspect ranking on the survey fixture stays near point 4") {
    WeightedDigraph gross = load_network_file(kData + "/field_gross.csv", Coordinate::X);
    DiagnosticsReport report = detect(gross);
    std::vector<int> top = rank_suspect_arcs(gross, report, 2);
    REQUIRE(top.size() == 2);
    int p4 = gross.find_vertex("4");
    for (int arc : top) {
        CHECK((gross.arc(arc).tail == p4 || gross.arc(arc).head == p4));
    }
}

TEST_CASE("removing the bad arc restores consistency, removing a bridge fails") {
    WeightedDigraph err = load_network_file(kData + "/demo_error.csv", Coordinate::X);
    int bad = err.find_arc_between(err.find_vertex("2"), err.find_vertex("6"));
    std::vector<int> drop = {bad};
    WeightedDigraph pruned = remove_suspects(err, drop);
    CHECK(pruned.size() == 8);
    CHECK(detect(pruned).verdict == Verdict::Clean);

    WeightedDigraph path;
    path.add_arc("a", "b", 1.0);
    path.add_arc("b", "c", 1.0);
    std::vector<int> middle = {1};
    try {
        remove_suspects(path, middle);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("disconnect") != std::string::npos);
        CHECK(std::string(e.what()).find("c") != std::string::npos);
    }
    std::vector<int> bogus = {5};
    CHECK_THROWS_AS(remove_suspects(path, bogus), UsageError);
}

TEST_CASE("corrections apply to the named arcs only") {
    WeightedDigraph g = bad_triangle();
    std::vector<int> suspects = {2};
    WeightedDigraph fixed = apply_corrections(g, suspects, vec({-1.0}));
    CHECK(fixed.arc(2).weight == 3.0);
    CHECK(fixed.arc(0).weight == 1.0);
    CHECK(detect(fixed).verdict == Verdict::Clean);
    CHECK_THROWS_AS(apply_corrections(g, suspects, vec({1.0, 2.0})), UsageError);
}

TEST_CASE("error function of the inflated triangle") {
    WeightedDigraph g = bad_triangle();
    std::vector<int> suspects = {2};
    ErrorFunction f = build_error_function(g, suspects, 2.0, 3);
    CHECK(f.r() == 3);
    CHECK(f.z() == 2.0);
    CHECK(f.constant_ref() == doctest::Approx(6.0)); // closed 3-walks of K3

    // e(x) = 3*2^(1+x) + 3*2^(-1-x) - 6, zero exactly at x = -1
    CHECK(f(vec({-1.0})) == doctest::Approx(0.0).scale(1.0));
    CHECK(f(vec({0.0})) == doctest::Approx(3.0 * 2.0 + 3.0 * 0.5 - 6.0));

    auto groups = f.collect();
    REQUIRE(groups.size() == 3);
    for (const auto& [pattern, coeff] : groups) {
        REQUIRE(pattern.size() == 1);
        if (pattern[0] == 1) CHECK(coeff == doctest::Approx(6.0));
        if (pattern[0] == 0) CHECK(coeff == doctest::Approx(-6.0));
        if (pattern[0] == -1) CHECK(coeff == doctest::Approx(1.5));
    }
    // patterns come out in descending lexicographic order
    CHECK(groups[0].first == std::vector<int>{1});
    CHECK(groups[2].first == std::vector<int>{-1});

    CorrectionResult result = minimize_error(f);
    CHECK(result.x_star(0) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(result.e_min <= 1e-10);
    CHECK(result.corrected.arc(2).weight == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(result.post_report.verdict == Verdict::Clean);
}

TEST_CASE("error function arguments are validated") {
    WeightedDigraph g = bad_triangle();
    std::vector<int> suspects = {2};
    CHECK_THROWS_AS(build_error_function(g, suspects, 1.0, 3), UsageError);
    CHECK_THROWS_AS(build_error_function(g, suspects, -2.0, 3), UsageError);
    CHECK_THROWS_AS(build_error_function(g, suspects, 2.0, 0), UsageError);
}

TEST_CASE("the demo correction recovers the planted single-arc error") {
    WeightedDigraph err = load_network_file(kData + "/demo_error.csv", Coordinate::X);
    int bad = err.find_arc_between(err.find_vertex("2"), err.find_vertex("6"));
    std::vector<int> suspects = {bad};
    ErrorFunction f = build_error_function(err, suspects, 2.0, 4);

    auto groups = f.collect();
    REQUIRE(groups.size() == 3);
    CHECK(groups[0].first == std::vector<int>{1});
    CHECK(groups[0].second == doctest::Approx(24.0));
    CHECK(groups[1].first == std::vector<int>{0});
    CHECK(groups[1].second == doctest::Approx(-24.0));
    CHECK(groups[2].first == std::vector<int>{-1});
    CHECK(groups[2].second == doctest::Approx(6.0));

    CorrectionResult result = minimize_error(f);
    CHECK(result.x_star(0) == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(result.e_min <= 1e-10);
    CHECK(result.corrected.arc(bad).weight == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(result.post_report.verdict == Verdict::Clean);
}

TEST_CASE("the error function is gauge invariant") {
    WeightedDigraph err = load_network_file(kData + "/demo_error.csv", Coordinate::X);
    int bad = err.find_arc_between(err.find_vertex("2"), err.find_vertex("6"));
    std::vector<int> suspects = {bad};
    ErrorFunction raw = build_error_function(err, suspects, 2.0, 4);
    ErrorFunction gauged = build_error_function(gauge_fix(err).first, suspects, 2.0, 4);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> xdist(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x = {xdist(rng)};
        CHECK(raw(x) == doctest::Approx(gauged(x)).epsilon(1e-9));
    }
}

TEST_CASE("field-scale exponents demand gauge fixing") {
    WeightedDigraph gross = load_network_file(kData + "/field_gross.csv", Coordinate::X);
    // raw kilometer weights overflow z = 2 entrywise: z^1718 has no double
    CHECK_THROWS_AS(numeric_eval(build_poly_matrix(gross), 2.0), OverflowError);
    CHECK_THROWS_AS(power_diagonals(gross, 2.0, 3), OverflowError);
    // the trace only ever sees closed-walk exponents, which telescope down
    // to closure residuals, so the error function survives ungauged and
    // agrees with its gauge-fixed twin
    std::vector<int> suspects = {1};
    ErrorFunction raw = build_error_function(gross, suspects, 2.0, 3);
    ErrorFunction gauged = build_error_function(gauge_fix(gross).first, suspects, 2.0, 3);
    double at_zero = gauged(vec({0.0}));
    CHECK(at_zero > 0.0);
    CHECK(raw(vec({0.0})) == doctest::Approx(at_zero).epsilon(1e-6));
}

TEST_CASE("minimize_error rejects variables the trace never sees") {
    WeightedDigraph pair;
    pair.add_arc("a", "b", 1.0);
    std::vector<int> suspects = {0};
    // every closed 2-walk crosses the arc once each way, so x cancels
    ErrorFunction f = build_error_function(pair, suspects, 2.0, 2);
    try {
        minimize_error(f);
        FAIL("expected UsageError");
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("no closed walk") != std::string::npos);
        CHECK(std::string(e.what()).find("increase r") != std::string::npos);
    }
}

TEST_CASE("synthetic errors are recovered exactly") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> delta(-1.5, 1.5);
    WeightedDigraph base = load_network_file(kData + "/demo_clean.csv", Coordinate::X);
    for (int arc : {0, 4, 8}) { // baselines 1-2, 2-6, 6-5: all on 4-cycles
        double d = delta(rng);
        std::vector<int> suspects = {arc};
        WeightedDigraph corrupted = apply_corrections(base, suspects, vec({d}));
        ErrorFunction f = build_error_function(corrupted, suspects, 2.0, 4);
        CorrectionResult result = minimize_error(f);
        CHECK(result.x_star(0) == doctest::Approx(-d).epsilon(1e-6).scale(1.0));
        CHECK(result.e_min <= 1e-9);
        CHECK(result.post_report.verdict == Verdict::Clean);
    }
}

TEST_CASE("two planted errors are recovered jointly") {
    WeightedDigraph base = load_network_file(kData + "/demo_clean.csv", Coordinate::X);
    std::vector<int> suspects = {0, 8};
    WeightedDigraph corrupted = apply_corrections(base, suspects, vec({0.4, -0.3}));
    CHECK(detect(corrupted).verdict == Verdict::Gross);
    ErrorFunction f = build_error_function(corrupted, suspects, 2.0, 4);
    CorrectionResult result = minimize_error(f);
    CHECK(result.x_star(0) == doctest::Approx(-0.4).epsilon(1e-6));
    CHECK(result.x_star(1) == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(result.e_min <= 1e-9);
    CHECK(result.post_report.verdict == Verdict::Clean);
}

TEST_CASE("the error function is convex along segments") {
    WeightedDigraph err = load_network_file(kData + "/demo_error.csv", Coordinate::X);
    std::vector<int> suspects = {4, 0};
    ErrorFunction f = build_error_function(err, suspects, 2.0, 4);
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> xdist(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a = {xdist(rng), xdist(rng)};
        std::vector<double> b = {xdist(rng), xdist(rng)};
        std::vector<double> mid = {(a[0] + b[0]) / 2, (a[1] + b[1]) / 2};
        CHECK(f(mid) <= 0.5 * f(a) + 0.5 * f(b) + 1e-9);
    }
    // and descent never loses to the starting point
    CorrectionResult result = minimize_error(f);
    CHECK(result.e_min <= f(vec({0.0, 0.0})));
}

TEST_CASE("minimization accepts a starting point and checks its size") {
    WeightedDigraph g = bad_triangle();
    std::vector<int> suspects = {2};
    ErrorFunction f = build_error_function(g, suspects, 2.0, 3);
    CorrectionResult result = minimize_error(f, vec({5.0}));
    CHECK(result.x_star(0) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK_THROWS_AS(minimize_error(f, vec({1.0, 2.0})), UsageError);
}

TEST_CASE("surface sampling walks the grid in row-major order") {
    WeightedDigraph g = bad_triangle();
    std::vector<int> one = {2};
    ErrorFunction f1 = build_error_function(g, one, 2.0, 3);
    std::vector<GridSpec> grid1 = {{-2.0, 0.0, 5}};
    auto samples = sample_error_surface(f1, grid1);
    REQUIRE(samples.size() == 5);
    CHECK(samples[0].x(0) == doctest::Approx(-2.0));
    CHECK(samples[4].x(0) == doctest::Approx(0.0));
    // the interior minimum at x = -1 is the smallest sampled value
    for (const auto& s : samples) CHECK(samples[2].e <= s.e + 1e-12);
    CHECK(samples[2].e == doctest::Approx(0.0).scale(1.0));

    std::vector<int> two = {2, 0};
    ErrorFunction f2 = build_error_function(g, two, 2.0, 3);
    std::vector<GridSpec> grid2 = {{-1.0, 1.0, 3}, {-1.0, 1.0, 2}};
    auto table = sample_error_surface(f2, grid2);
    REQUIRE(table.size() == 6);
    CHECK(table[0].x(0) == doctest::Approx(-1.0));
    CHECK(table[0].x(1) == doctest::Approx(-1.0));
    CHECK(table[1].x(0) == doctest::Approx(-1.0)); // last variable moves fastest
    CHECK(table[1].x(1) == doctest::Approx(1.0));
    CHECK(table[2].x(0) == doctest::Approx(0.0));

    std::vector<GridSpec> wrong = {{-1.0, 1.0, 3}};
    CHECK_THROWS_AS(sample_error_surface(f2, wrong), UsageError);
    std::vector<GridSpec> bad_steps = {{-1.0, 1.0, 0}, {-1.0, 1.0, 2}};
    CHECK_THROWS_AS(sample_error_surface(f2, bad_steps), UsageError);
}

TEST_CASE("surface sampling refuses more than two variables") {
    WeightedDigraph err = load_network_file(kData + "/demo_error.csv", Coordinate::X);
    std::vector<int> three = {0, 3, 8};
    ErrorFunction f = build_error_function(err, three, 2.0, 4);
    std::vector<GridSpec> grid = {{-1, 1, 2}, {-1, 1, 2}, {-1, 1, 2}};
    try {
        sample_error_surface(f, grid);
        FAIL("expected UsageError");
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("slice") != std::string::npos);
    }
}
