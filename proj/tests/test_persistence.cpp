#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "homology_oracle.hpp"
#include "pint/persistence.hpp"
#include "pint/rng.hpp"

using namespace pint;

namespace {

std::vector<double> distinct_values(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = static_cast<double>(k) + 0.5 * rng.uniform01();
    rng.shuffle(v);
    return v;
}

GridField field_of(std::vector<double> values, std::size_t rows, std::size_t cols) {
    GridField f;
    f.spec = GridSpec{0.0, 1.0, 0.0, 1.0, rows, cols};
    f.values = std::move(values);
    return f;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("pint_test_" + name)).string();
}

}  // namespace

TEST(Persistence, LineSuperlevelSinglePair) {
    const std::vector<double> v{1, 3, 2, 4, 1};
    const auto pairs = persistence_pairs(v, 1, 5, Direction::superlevel, 0);
    ASSERT_EQ(pairs.size(), 1u);
    EXPECT_EQ(pairs[0].dim, 0);
    EXPECT_EQ(pairs[0].birth, 2.0);
    EXPECT_EQ(pairs[0].death, 3.0);
}

TEST(Persistence, RingWithLowCenterGivesOneLoop) {
    std::vector<double> v(9, 5.0);
    v[4] = 1.0;
    const auto pairs = persistence_pairs(v, 3, 3, Direction::superlevel, 1);
    std::vector<PersistencePair> loops;
    for (const auto& p : pairs)
        if (p.dim == 1) loops.push_back(p);
    ASSERT_EQ(loops.size(), 1u);
    EXPECT_EQ(loops[0].birth, 1.0);
    EXPECT_EQ(loops[0].death, 5.0);
}

TEST(Persistence, ConstantFieldIsEmpty) {
    const auto d = compute_persistence(field_of(std::vector<double>(16, 2.5), 4, 4), Direction::superlevel, 1);
    EXPECT_TRUE(d.pairs.empty());
    const auto s = compute_persistence(field_of(std::vector<double>(16, 2.5), 4, 4), Direction::sublevel, 1);
    EXPECT_TRUE(s.pairs.empty());
}

TEST(Persistence, NonFiniteRejected) {
    std::vector<double> v(9, 1.0);
    v[3] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(persistence_pairs(v, 3, 3, Direction::sublevel, 1), InvalidInput);
    v[3] = std::numeric_limits<double>::infinity();
    EXPECT_THROW(persistence_pairs(v, 3, 3, Direction::superlevel, 1), InvalidInput);
}

TEST(Persistence, MatchesOracleOnRandomGrids) {
    Rng rng(derive_seed(11, "oracle-unit"));
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t rows = 1 + rng.index(5), cols = 1 + rng.index(5);
        const auto v = distinct_values(rows * cols, rng);
        for (auto dir : {Direction::superlevel, Direction::sublevel}) {
            auto got = persistence_pairs(v, rows, cols, dir, 1);
            std::sort(got.begin(), got.end());
            const auto want = oracle::persistence(v, rows, cols, dir, 1);
            ASSERT_EQ(got, want) << "trial " << trial << " " << rows << "x" << cols;
        }
    }
}

TEST(Persistence, MatchesOracleWithTiedValues) {
    // ties resolved by linear index in both implementations
    Rng rng(derive_seed(12, "oracle-ties"));
    for (int trial = 0; trial < 150; ++trial) {
        const std::size_t rows = 2 + rng.index(4), cols = 2 + rng.index(4);
        std::vector<double> v(rows * cols);
        for (auto& x : v) x = static_cast<double>(rng.index(4));
        for (auto dir : {Direction::superlevel, Direction::sublevel}) {
            auto got = persistence_pairs(v, rows, cols, dir, 1);
            std::sort(got.begin(), got.end());
            ASSERT_EQ(got, oracle::persistence(v, rows, cols, dir, 1)) << "trial " << trial;
        }
    }
}

TEST(Persistence, MaxDimZeroOmitsLoops) {
    Rng rng(5);
    const auto v = distinct_values(25, rng);
    for (const auto& p : persistence_pairs(v, 5, 5, Direction::superlevel, 0)) EXPECT_EQ(p.dim, 0);
}

TEST(Persistence, EulerCharacteristicAtEveryThreshold) {
    Rng rng(derive_seed(13, "euler"));
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t rows = 2 + rng.index(5), cols = 2 + rng.index(5);
        const auto v = distinct_values(rows * cols, rng);
        const auto pairs = persistence_pairs(v, rows, cols, Direction::sublevel, 1);
        for (double t : v) {
            long verts = 0, edges = 0, squares = 0;
            auto in = [&](std::size_t i, std::size_t j) { return v[i * cols + j] <= t; };
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < cols; ++j) {
                    verts += in(i, j);
                    if (j + 1 < cols) edges += in(i, j) && in(i, j + 1);
                    if (i + 1 < rows) edges += in(i, j) && in(i + 1, j);
                    if (i + 1 < rows && j + 1 < cols) squares += in(i, j) && in(i, j + 1) && in(i + 1, j) && in(i + 1, j + 1);
                }
            long alive0 = verts > 0 ? 1 : 0, alive1 = 0;
            for (const auto& p : pairs)
                if (p.birth <= t && t < p.death) (p.dim == 0 ? alive0 : alive1) += 1;
            EXPECT_EQ(alive0 - alive1, verts - edges + squares) << "trial " << trial << " t=" << t;
        }
    }
}

TEST(Persistence, ShiftEquivariance) {
    Rng rng(derive_seed(14, "shift"));
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t rows = 2 + rng.index(6), cols = 2 + rng.index(6);
        auto v = distinct_values(rows * cols, rng);
        for (auto& x : v) x = std::round(x * 64.0) / 64.0;  // dyadic, so the shift is exact
        const double c = 3.25;
        auto shifted = v;
        for (auto& x : shifted) x += c;
        for (auto dir : {Direction::superlevel, Direction::sublevel}) {
            auto a = persistence_pairs(v, rows, cols, dir, 1);
            auto b = persistence_pairs(shifted, rows, cols, dir, 1);
            for (auto& p : a) {
                p.birth += c;
                p.death += c;
            }
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            EXPECT_EQ(a, b);
        }
    }
}

TEST(Persistence, DirectionDuality) {
    Rng rng(derive_seed(15, "duality"));
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t rows = 2 + rng.index(6), cols = 2 + rng.index(6);
        const auto v = distinct_values(rows * cols, rng);
        auto neg = v;
        for (auto& x : neg) x = -x;
        auto sup = persistence_pairs(v, rows, cols, Direction::superlevel, 1);
        auto sub = persistence_pairs(neg, rows, cols, Direction::sublevel, 1);
        for (auto& p : sub) p = PersistencePair{p.dim, -p.death, -p.birth};
        std::sort(sup.begin(), sup.end());
        std::sort(sub.begin(), sub.end());
        EXPECT_EQ(sup, sub);
    }
}

TEST(Persistence, StoredPairsAboveDiagonal) {
    Rng rng(16);
    for (int trial = 0; trial < 30; ++trial) {
        const auto v = distinct_values(64, rng);
        for (auto dir : {Direction::superlevel, Direction::sublevel})
            for (const auto& p : persistence_pairs(v, 8, 8, dir, 1)) {
                EXPECT_GT(p.death, p.birth);
                EXPECT_TRUE(std::isfinite(p.lifetime()));
            }
    }
}

TEST(DiagramIO, EmptyDiagramIsHeaderOnly) {
    const auto path = temp_path("empty_diagram.csv");
    write_diagram(path, PersistenceDiagram{});
    std::ifstream in(path);
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_EQ(all, "dim,birth,death\n");
    EXPECT_TRUE(read_diagram(path).pairs.empty());
}

TEST(DiagramIO, RoundTrip) {
    PersistenceDiagram d;
    d.pairs = persistence_pairs(std::vector<double>{1, 3, 2, 4, 1}, 1, 5, Direction::superlevel, 0);
    d.pairs.push_back({1, 0.1 + 0.2, 1.0 / 3.0});
    const auto path = temp_path("roundtrip_diagram.csv");
    write_diagram(path, d);
    EXPECT_EQ(read_diagram(path).sorted_pairs(), d.sorted_pairs());
}

TEST(DiagramIO, BelowDiagonalRowNamesLine) {
    const auto path = temp_path("bad_diagram.csv");
    std::ofstream(path) << "dim,birth,death\n0,0.1,0.2\n0,0.3,0.1\n";
    try {
        read_diagram(path);
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
}

TEST(DiagramIO, MalformedRowsRejected) {
    const auto path = temp_path("malformed_diagram.csv");
    std::ofstream(path) << "dim,birth,death\n0,abc,0.2\n";
    EXPECT_THROW(read_diagram(path), ParseError);
    std::ofstream(path, std::ios::trunc) << "dim,birth,death\n2,0.1,0.2\n";
    EXPECT_THROW(read_diagram(path), ParseError);
    std::ofstream(path, std::ios::trunc) << "dim,birth,death\n0,0.1\n";
    EXPECT_THROW(read_diagram(path), ParseError);
}
