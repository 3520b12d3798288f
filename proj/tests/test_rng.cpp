#include <gtest/gtest.h>

#include "pint/csv.hpp"
#include "pint/grid.hpp"
#include "pint/rng.hpp"

using namespace pint;

TEST(Rng, SameSeedSameStream) {
    Rng a(42), b(42);
    for (int k = 0; k < 100; ++k) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, DerivedSeedsDiffer) {
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, "synth"), derive_seed(1, "kmeans"));
    EXPECT_EQ(derive_seed(7, "synth"), derive_seed(7, "synth"));
}

TEST(Rng, UniformInUnitInterval) {
    Rng r(3);
    double sum = 0.0;
    for (int k = 0; k < 100000; ++k) {
        const double u = r.uniform01();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000, 0.5, 3 * std::sqrt(1.0 / 12 / 100000));
}

TEST(Rng, NormalMoments) {
    Rng r(4);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int k = 0; k < n; ++k) {
        const double z = r.normal();
        s += z;
        s2 += z * z;
    }
    EXPECT_NEAR(s / n, 0.0, 4.0 / std::sqrt(n));
    EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(Rng, IndexUnbiasedAndInRange) {
    Rng r(5);
    std::vector<int> counts(7, 0);
    for (int k = 0; k < 70000; ++k) {
        const auto i = r.index(7);
        ASSERT_LT(i, 7u);
        ++counts[i];
    }
    for (int c : counts) EXPECT_NEAR(c, 10000, 4 * std::sqrt(10000 * 6.0 / 7.0));
}

TEST(Rng, PoissonAndGammaMeans) {
    Rng r(6);
    const int n = 50000;
    double sp = 0, sg = 0;
    for (int k = 0; k < n; ++k) {
        sp += static_cast<double>(r.poisson(4.0));
        sg += r.gamma_int(3, 0.25);
    }
    EXPECT_NEAR(sp / n, 4.0, 4 * std::sqrt(4.0 / n));
    EXPECT_NEAR(sg / n, 0.75, 4 * std::sqrt(3 * 0.0625 / n));
}

TEST(Csv, FormatRoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
        double back = 0;
        ASSERT_TRUE(csv::try_parse(csv::format(v), back));
        EXPECT_EQ(back, v);
    }
}

TEST(Grid, QuadratureIntegratesConstantsExactly) {
    GridSpec s{-1.0, 2.0, 0.5, 1.5, 17, 9};
    std::vector<double> ones(s.size(), 1.0);
    EXPECT_NEAR(integrate(s, ones), s.area(), 1e-12);
    EXPECT_THROW((GridSpec{1.0, 0.0, 0.0, 1.0, 4, 4}.validate()), InvalidParameter);
    EXPECT_THROW((GridSpec{0.0, 1.0, 0.0, 1.0, 1, 4}.validate()), InvalidParameter);
}
