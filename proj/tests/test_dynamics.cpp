#include "doctest.h"

#include <cmath>
#include <random>

#include "orbitset/dynamics.hpp"
#include "test_util.hpp"

using namespace orbitset;

TEST_CASE("the example41 branch formulas evaluate exactly") {
    Family fam = make_preset("example41");
    const SpaceSpec& I = fam.space();
    const Map& f1 = fam.maps()[0];
    const Map& f2 = fam.maps()[1];

    CHECK(apply(f1, I, Point{1.0 / 3.0}).coords[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(apply(f1, I, Point{4.0 / 9.0}).coords[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(apply(f2, I, Point{5.0 / 9.0}).coords[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(apply(f1, I, Point{0.0}).coords[0] == 0.0);
    CHECK(apply(f2, I, Point{0.0}).coords[0] == 0.0);
    CHECK(apply(f1, I, Point{1.0}).coords[0] == 1.0);
    CHECK(apply(f2, I, Point{1.0}).coords[0] == 1.0);

    // mid-branch sample: 3x - 2/3 at x = 0.4
    CHECK(apply(f1, I, Point{0.4}).coords[0] == doctest::Approx(3.0 * 0.4 - 2.0 / 3.0));
    // branch junctions are continuous by construction
    CHECK(apply(f1, I, Point{4.0 / 9.0 - 1e-12}).coords[0] == doctest::Approx(2.0 / 3.0));
    CHECK(apply(f1, I, Point{4.0 / 9.0 + 1e-12}).coords[0] == doctest::Approx(2.0 / 3.0));

    CHECK(f1.lipschitz() == doctest::Approx(3.0));
    CHECK(f2.lipschitz() == doctest::Approx(3.0));
    CHECK(detail::pwl_full_range_increasing(f1));
    CHECK(detail::pwl_full_range_increasing(f2));
}

TEST_CASE("identity, rotation and affine maps") {
    SpaceSpec C = SpaceSpec::circle();
    Point x{0.3};
    CHECK(apply(Map::identity(), C, x).coords[0] == 0.3);
    CHECK(apply(Map::rotation(0.9), C, x).coords[0] == doctest::Approx(0.2));
    CHECK(apply(Map::affine_mod1(2, 0.0), C, Point{0.75}).coords[0] == doctest::Approx(0.5));
    CHECK(Map::rotation(0.9).lipschitz() == 1.0);
    CHECK(Map::affine_mod1(2, 0.0).lipschitz() == 2.0);

    CHECK_THROWS_AS(Map::pwl({0.0, 0.5}, {0.0, 1.0}), contract_violation);     // must end at 1
    CHECK_THROWS_AS(Map::pwl({0.0, 0.5, 0.4, 1.0}, {0.0, 0.1, 0.2, 1.0}), contract_violation);
    CHECK_THROWS_AS(Family(SpaceSpec::circle(), {make_preset("example41").maps()[0]}),
                    contract_violation);
}

TEST_CASE("image_of_set unions member images") {
    Family idf = make_preset("identity");
    std::mt19937_64 rng(41);
    FiniteSet A = testutil::random_set(idf.space(), 10, rng);
    CHECK(hausdorff(image_of_set(idf, A), A) == 0.0);

    Family ex = make_preset("example41");
    FiniteSet zero(ex.space(), std::vector<double>{0.0});
    FiniteSet img = image_of_set(ex, zero);
    REQUIRE(img.size() == 1);
    CHECK(img.row(0)[0] == 0.0);

    Family rid = make_preset("rotation_id");
    double alpha = golden_rotation_angle();
    FiniteSet one(rid.space(), std::vector<double>{0.25});
    FiniteSet img2 = image_of_set(rid, one);
    REQUIRE(img2.size() == 2);
    CHECK(img2.row(0)[0] == doctest::Approx(0.25));
    CHECK(img2.row(1)[0] == doctest::Approx(wrap_unit(0.25 + alpha)));
}

TEST_CASE("orbit sets match direct word enumeration") {
    Family rid = make_preset("rotation_id");
    Point x{0.1};
    OrbitTable table = orbit_set(rid, x, 2);
    REQUIRE(table.sets.size() == 3);
    CHECK(table.sets[0].size() == 1);
    CHECK(table.sets[0].row(0)[0] == doctest::Approx(0.1));

    // oracle: enumerate the 4 words of length 2 and deduplicate
    std::vector<Point> images;
    for (const Word& w : enumerate_words(rid.arity(), 2))
        images.push_back(word_apply(rid, w, x));
    FiniteSet expected(rid.space(), images);
    CHECK(expected.size() == 3);
    CHECK(hausdorff(table.sets[2], expected) <= 1e-12);

    // monotone nesting when the identity belongs to the family
    OrbitTable longer = orbit_set(rid, x, 12);
    for (int k = 0; k <= 12; ++k)
        for (int n = k; n <= 12; ++n)
            CHECK(directed_dist(longer.sets[static_cast<std::size_t>(k)],
                                longer.sets[static_cast<std::size_t>(n)]) <= 1e-12);
}

TEST_CASE("orbit sets respect the word-count bound and the cap") {
    Family ex = make_preset("example41");
    std::mt19937_64 rng(42);
    Point x = testutil::random_point(ex.space(), rng);
    OrbitTable table = orbit_set(ex, x, 10);
    double bound = 1.0;
    for (std::size_t i = 0; i < table.sets.size(); ++i) {
        CHECK(static_cast<double>(table.sets[i].size()) <= bound);
        bound *= static_cast<double>(ex.arity());
    }
    CHECK(table.coalesce_error == 0.0);
    // rotation_id orbit sets have exactly n+1 points, so a cap of 3 trips at depth 3
    Family rid = make_preset("rotation_id");
    CHECK_THROWS_AS(orbit_set(rid, Point{0.2}, 5, 0.0, /*cap=*/3), size_limit_error);
}

TEST_CASE("coalesced orbits report the Lipschitz-propagated error bound") {
    Family ex = make_preset("example41");
    Point x{0.37};
    const double delta = 1e-6;
    OrbitTable table = orbit_set(ex, x, 5, delta);
    double expected = 0.0;
    for (int i = 0; i < 5; ++i)
        expected = 3.0 * expected + delta;
    CHECK(table.coalesce_error == doctest::Approx(expected));
}

TEST_CASE("one-step images contract Hausdorff distance by at most the Lipschitz bound") {
    Family ex = make_preset("example41");
    std::mt19937_64 rng(43);
    const double L = ex.max_lipschitz();
    for (int trial = 0; trial < 200; ++trial) {
        FiniteSet A = testutil::random_set(ex.space(), 1 + trial % 8, rng);
        FiniteSet B = testutil::random_set(ex.space(), 1 + (trial * 3) % 8, rng);
        double before = hausdorff(A, B);
        double after = hausdorff(image_of_set(ex, A), image_of_set(ex, B));
        CHECK(after <= L * before + 2e-12);
    }
}

TEST_CASE("power families enumerate compositions in word order") {
    Family ex = make_preset("example41");
    CHECK(power_family(ex, 1).arity() == 2);
    CHECK(power_family(ex, 2).arity() == 4);

    Family doubling = make_preset("doubling");
    Family sq = power_family(doubling, 2);
    REQUIRE(sq.arity() == 1);
    CHECK(apply(sq.maps()[0], sq.space(), Point{0.1}).coords[0] == doctest::Approx(0.4));

    // composed members agree with word application
    Family p2 = power_family(ex, 2);
    auto words = enumerate_words(2, 2);
    std::mt19937_64 rng(44);
    for (int trial = 0; trial < 50; ++trial) {
        Point x = testutil::random_point(ex.space(), rng);
        for (std::size_t q = 0; q < words.size(); ++q) {
            double via_word = word_apply(ex, words[q], x).coords[0];
            double via_map = apply(p2.maps()[q], ex.space(), x).coords[0];
            CHECK(std::fabs(via_word - via_map) <= 1e-15);
        }
    }
    CHECK_THROWS_AS(power_family(ex, 8, /*word_cap=*/100), size_limit_error);
}

TEST_CASE("conjugation by the identity returns the same dynamics") {
    Family ex = make_preset("example41");
    Family conj = conjugate_family(ex, Map::identity(), Map::identity());
    std::mt19937_64 rng(45);
    for (int trial = 0; trial < 100; ++trial) {
        Point x = testutil::random_point(ex.space(), rng);
        for (std::size_t j = 0; j < ex.arity(); ++j)
            CHECK(std::fabs(apply(ex.maps()[j], ex.space(), x).coords[0] -
                            apply(conj.maps()[j], ex.space(), x).coords[0]) <= 1e-12);
    }
}

TEST_CASE("conjugating a rotation by the circle flip reverses the angle") {
    double alpha = golden_rotation_angle();
    Family rot(SpaceSpec::circle(), {Map::rotation(alpha)}, "rot");
    Map flip = Map::affine_mod1(-1, 1.0);
    Family conj = conjugate_family(rot, flip, flip);
    Map expected = Map::rotation(1.0 - alpha);
    for (int k = 0; k < 1000; ++k) {
        Point x{static_cast<double>(k) / 1000.0};
        double got = apply(conj.maps()[0], rot.space(), x).coords[0];
        double want = apply(expected, rot.space(), x).coords[0];
        CHECK(circle_dist(got, want) <= 1e-12);
    }
}

TEST_CASE("conjugating example41 by a squaring homeomorphism keeps the intertwining") {
    Family ex = make_preset("example41");
    Map T = pwl_approx([](double x) { return x * x; }, 512);
    Map Tinv = Map::pwl(T.pwl_y(), T.pwl_x());
    Family conj = conjugate_family(ex, T, Tinv);
    REQUIRE(conj.arity() == 2);
    // flattened to explicit pwl members so the witness machinery still works
    CHECK(conj.maps()[0].kind() == Map::Kind::pwl);

    std::mt19937_64 rng(46);
    for (int trial = 0; trial < 200; ++trial) {
        Point x = testutil::random_point(ex.space(), rng);
        Point tx = apply(T, ex.space(), x);
        std::vector<Point> lhs, rhs;
        for (std::size_t j = 0; j < 2; ++j) {
            lhs.push_back(apply(T, ex.space(), apply(ex.maps()[j], ex.space(), x)));
            rhs.push_back(apply(conj.maps()[j], ex.space(), tx));
        }
        CHECK(hausdorff(FiniteSet(ex.space(), lhs), FiniteSet(ex.space(), rhs)) <= 1e-9);
    }

    CHECK_THROWS_AS(conjugate_family(ex, T, Map::identity()), contract_violation);
}

TEST_CASE("family inversion") {
    double alpha = 0.3;
    Family rot(SpaceSpec::circle(), {Map::rotation(alpha)}, "rot");
    Family rinv = invert_family(rot);
    CHECK(rinv.maps()[0].rotation_angle() == doctest::Approx(0.7));

    Family ex = make_preset("example41");
    Family einv = invert_family(ex);
    const auto& xs = einv.maps()[0].pwl_x();
    REQUIRE(xs.size() == 4);
    CHECK(xs[0] == 0.0);
    CHECK(xs[1] == doctest::Approx(1.0 / 3.0));
    CHECK(xs[2] == doctest::Approx(2.0 / 3.0));
    CHECK(xs[3] == 1.0);

    // f o f^-1 = id sampled on a grid
    for (int k = 0; k <= 1000; ++k) {
        double x = static_cast<double>(k) / 1000.0;
        for (std::size_t j = 0; j < 2; ++j) {
            double y = apply(ex.maps()[j], ex.space(),
                             apply(einv.maps()[j], ex.space(), Point{x}))
                           .coords[0];
            CHECK(std::fabs(y - x) <= 1e-12);
        }
    }

    CHECK_THROWS_WITH_AS(static_cast<void>(invert_family(make_preset("doubling"))),
                         doctest::Contains("map #1"), contract_violation);
    CHECK_THROWS_AS(invert_family(make_preset("tent")), contract_violation);
}

TEST_CASE("inverses of composed, product and unit-slope affine maps") {
    double alpha = 0.3;
    SpaceSpec C = SpaceSpec::circle();

    Family rot2 = power_family(Family(C, {Map::rotation(alpha)}, "rot"), 2);
    Family rot2_inv = invert_family(rot2);
    Family two = product_family(Family(C, {Map::rotation(alpha)}, "a"),
                                Family(C, {Map::rotation(0.11)}, "b"));
    Family two_inv = invert_family(two);
    Family neg(C, {Map::affine_mod1(-1, 0.4)}, "neg");
    Family neg_inv = invert_family(neg);
    Family shift(C, {Map::affine_mod1(1, 0.25)}, "shift");
    Family shift_inv = invert_family(shift);

    Family ex = make_preset("example41");
    Map square = pwl_approx([](double x) { return x * x; }, 64);
    Map root = Map::pwl(square.pwl_y(), square.pwl_x());
    Family conj(ex.space(), {Map::conjugated(square, ex.maps()[0], root)}, "conj");
    Family conj_inv = invert_family(conj);

    auto check_identity = [](const Family& fam, const Family& inv) {
        for (int k = 0; k <= 500; ++k) {
            std::vector<double> c(fam.space().dim(), static_cast<double>(k) / 500.0);
            if (c[0] == 1.0 && fam.space().factors()[0] == Factor::circle)
                c.assign(fam.space().dim(), 0.999);
            Point x = make_point(fam.space(), c);
            for (std::size_t j = 0; j < fam.arity(); ++j) {
                Point y = apply(inv.maps()[j], fam.space(), apply(fam.maps()[j], fam.space(), x));
                CHECK(distance(fam.space(), x, y) <= 1e-9);
            }
        }
    };
    check_identity(rot2, rot2_inv);
    check_identity(two, two_inv);
    check_identity(neg, neg_inv);
    check_identity(shift, shift_inv);
    check_identity(conj, conj_inv);
}

TEST_CASE("preimages through composed members match letterwise pullbacks") {
    Family ex = make_preset("example41");
    Family p2 = power_family(ex, 2);
    Interval Y = example41_target();
    // word (1,2) on the base family is member index 1 of the squared family
    auto base = preimage_intervals(Word{{0, 1}}, ex, Y);
    auto powered = preimage_intervals(Word{{1}}, p2, Y);
    REQUIRE(base.size() == 1);
    REQUIRE(powered.size() == 1);
    CHECK(base[0].lo == doctest::Approx(powered[0].lo).epsilon(1e-14));
    CHECK(base[0].hi == doctest::Approx(powered[0].hi).epsilon(1e-14));
}

TEST_CASE("coalesced orbits stay within the reported error of the exact orbit") {
    for (const char* name : {"rotation_id", "example41"}) {
        CAPTURE(name);
        Family fam = make_preset(name);
        Point x{0.37};
        const double delta = 1e-4;
        const int depth = name == std::string("rotation_id") ? 40 : 6;
        OrbitTable exact = orbit_set(fam, x, depth, 0.0);
        OrbitTable thinned = orbit_set(fam, x, depth, delta);
        const double L = fam.max_lipschitz();
        double bound = 0.0;
        for (int i = 0; i <= depth; ++i) {
            CHECK(hausdorff(exact.sets[static_cast<std::size_t>(i)],
                            thinned.sets[static_cast<std::size_t>(i)]) <= bound + 1e-9);
            bound = L * bound + delta;
        }
    }
}

TEST_CASE("preimage intervals pull back one letter at a time") {
    Family ex = make_preset("example41");
    Interval Y = example41_target();

    auto pre1 = preimage_intervals(Word{{0}}, ex, Y);
    REQUIRE(pre1.size() == 1);
    CHECK(pre1[0].lo == doctest::Approx(1.0 / 3.0));
    CHECK(pre1[0].hi == doctest::Approx(4.0 / 9.0));

    auto pre2 = preimage_intervals(Word{{1}}, ex, Y);
    REQUIRE(pre2.size() == 1);
    CHECK(pre2[0].lo == doctest::Approx(5.0 / 9.0));
    CHECK(pre2[0].hi == doctest::Approx(2.0 / 3.0));

    auto pre0 = preimage_intervals(Word{{}}, ex, Y);
    REQUIRE(pre0.size() == 1);
    CHECK(pre0[0].lo == doctest::Approx(Y.lo));
    CHECK(pre0[0].hi == doctest::Approx(Y.hi));

    // the two first-letter preimages are 1/9 apart
    CHECK(pre2[0].lo - pre1[0].hi == doctest::Approx(1.0 / 9.0));

    CHECK_THROWS_AS(preimage_intervals(Word{{0}}, make_preset("tent"), Y), contract_violation);
}

TEST_CASE("witness points sit inside their word preimages") {
    Family ex = make_preset("example41");
    Interval Y = example41_target();

    auto w1 = witness_points(ex, 1, Y);
    REQUIRE(w1.size() == 2);
    CHECK(w1[0].second.coords[0] == doctest::Approx(7.0 / 18.0));
    CHECK(w1[1].second.coords[0] == doctest::Approx(11.0 / 18.0));

    auto w3 = witness_points(ex, 3, Y);
    CHECK(w3.size() == 8);
    for (const auto& [word, z] : w3) {
        // g(z_g) lands in the target by construction
        double img = word_apply(ex, word, z).coords[0];
        CHECK(img >= Y.lo - 1e-12);
        CHECK(img <= Y.hi + 1e-12);
    }
    CHECK(w3[0].first.label() == "111");
    CHECK(w3[7].first.label() == "222");
}

TEST_CASE("pwl composition is exact") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Family ex = make_preset("example41");
    Map g = detail::pwl_compose(ex.maps()[1], ex.maps()[0]); // f2 o f1
    for (int trial = 0; trial < 1000; ++trial) {
        double x = u(rng);
        double direct = ex.maps()[1].eval_pwl(ex.maps()[0].eval_pwl(x));
        CHECK(std::fabs(g.eval_pwl(x) - direct) <= 1e-14);
    }
}

TEST_CASE("presets are registered and valid") {
    for (const auto& entry : preset_catalog()) {
        CAPTURE(entry.first);
        Family fam = make_preset(entry.first);
        CHECK(fam.name() == entry.first);
        CHECK(!entry.second.empty());
    }
    CHECK_THROWS_AS(make_preset("nope"), contract_violation);
}
