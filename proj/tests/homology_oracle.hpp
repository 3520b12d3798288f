#pragma once

// Brute-force persistence for small grids. For every pair of filtration steps
// it builds the level-set cubical complexes explicitly and reads pairs off the
// persistent Betti numbers (ranks over GF(2)):
//   mult(i, j) = b(i, j-1) - b(i, j) - b(i-1, j-1) + b(i-1, j)
// Shares nothing with the library beyond the PersistencePair type.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <numeric>
#include <vector>

#include "pint/persistence.hpp"

namespace oracle {

using Mask = std::uint64_t;  // up to 64 cells of one kind (6x6 grid: 36 vertices, 60 edges)

struct Complex {
    std::size_t rows, cols;
    std::vector<std::array<std::size_t, 2>> edges;   // vertex ids
    std::vector<std::array<std::size_t, 4>> squares; // edge ids
    std::vector<std::array<std::size_t, 4>> square_vertices;

    Complex(std::size_t r, std::size_t c) : rows(r), cols(c) {
        auto v = [&](std::size_t i, std::size_t j) { return i * cols + j; };
        std::vector<std::vector<std::size_t>> h(r, std::vector<std::size_t>(c, 0)), w(r, std::vector<std::size_t>(c, 0));
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j + 1 < c; ++j) {
                h[i][j] = edges.size();
                edges.push_back({v(i, j), v(i, j + 1)});
            }
        for (std::size_t i = 0; i + 1 < r; ++i)
            for (std::size_t j = 0; j < c; ++j) {
                w[i][j] = edges.size();
                edges.push_back({v(i, j), v(i + 1, j)});
            }
        for (std::size_t i = 0; i + 1 < r; ++i)
            for (std::size_t j = 0; j + 1 < c; ++j) {
                squares.push_back({h[i][j], h[i + 1][j], w[i][j], w[i][j + 1]});
                square_vertices.push_back({v(i, j), v(i, j + 1), v(i + 1, j), v(i + 1, j + 1)});
            }
    }
};

inline std::size_t gf2_rank(std::vector<Mask> rows) {
    std::size_t rank = 0;
    for (int bit = 63; bit >= 0; --bit) {
        const Mask m = Mask{1} << bit;
        auto it = std::find_if(rows.begin() + static_cast<long>(rank), rows.end(), [&](Mask x) { return x & m; });
        if (it == rows.end()) continue;
        std::swap(*it, rows[rank]);
        for (std::size_t k = 0; k < rows.size(); ++k)
            if (k != rank && (rows[k] & m)) rows[k] ^= rows[rank];
        ++rank;
    }
    return rank;
}

// Union-find free component count restricted to present vertices/edges.
inline std::vector<std::size_t> component_labels(std::size_t nv, Mask verts, const Complex& cx, Mask edges) {
    std::vector<std::size_t> label(nv);
    std::iota(label.begin(), label.end(), 0);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t e = 0; e < cx.edges.size(); ++e) {
            if (!(edges >> e & 1)) continue;
            auto [a, b] = cx.edges[e];
            const auto m = std::min(label[a], label[b]);
            if (label[a] != m || label[b] != m) {
                label[a] = label[b] = m;
                changed = true;
            }
        }
    }
    for (std::size_t v = 0; v < nv; ++v)
        if (!(verts >> v & 1)) label[v] = nv;
    return label;
}

// Cycle-space basis of the graph (verts, edges) as edge masks.
inline std::vector<Mask> cycle_basis(const Complex& cx, Mask edges) {
    std::vector<std::pair<Mask, Mask>> pivots;  // (reduced boundary as vertex mask, edge combination)
    std::vector<Mask> cycles;
    for (std::size_t e = 0; e < cx.edges.size(); ++e) {
        if (!(edges >> e & 1)) continue;
        Mask boundary = (Mask{1} << cx.edges[e][0]) | (Mask{1} << cx.edges[e][1]);
        Mask combo = Mask{1} << e;
        bool reduced = true;
        while (boundary && reduced) {
            reduced = false;
            const int top = 63 - std::countl_zero(boundary);
            for (const auto& [pb, pc] : pivots)
                if (63 - std::countl_zero(pb) == top) {
                    boundary ^= pb;
                    combo ^= pc;
                    reduced = true;
                    break;
                }
        }
        if (boundary == 0) cycles.push_back(combo);
        else pivots.emplace_back(boundary, combo);
    }
    return cycles;
}

struct Level {
    Mask verts = 0, edges = 0, squares = 0;
};

/// Pairs for the given direction using vertex order (value, linear index)
/// ascending for sublevel and (value descending, linear index ascending) for
/// superlevel. Stored with the above-diagonal convention; zero lifetimes dropped.
inline std::vector<pint::PersistencePair> persistence(const std::vector<double>& values, std::size_t rows,
                                                       std::size_t cols, pint::Direction dir, int max_dim) {
    const std::size_t nv = rows * cols;
    const Complex cx(rows, cols);
    std::vector<std::size_t> order(nv);
    std::iota(order.begin(), order.end(), 0);
    const bool super = dir == pint::Direction::superlevel;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return super ? values[a] > values[b] : values[a] < values[b];
    });
    std::vector<std::size_t> step(nv);
    for (std::size_t k = 0; k < nv; ++k) step[order[k]] = k + 1;  // vertex enters at step k+1

    // K[k] for k = 0..nv; K[0] empty
    std::vector<Level> K(nv + 1);
    for (std::size_t k = 1; k <= nv; ++k) {
        Level& L = K[k];
        for (std::size_t v = 0; v < nv; ++v)
            if (step[v] <= k) L.verts |= Mask{1} << v;
        for (std::size_t e = 0; e < cx.edges.size(); ++e)
            if (step[cx.edges[e][0]] <= k && step[cx.edges[e][1]] <= k) L.edges |= Mask{1} << e;
        for (std::size_t s = 0; s < cx.squares.size(); ++s) {
            bool in = true;
            for (auto v : cx.square_vertices[s]) in = in && step[v] <= k;
            if (in) L.squares |= Mask{1} << s;
        }
    }

    auto betti0 = [&](std::size_t i, std::size_t j) -> long {
        if (i == 0) return 0;
        const auto lab = component_labels(nv, K[j].verts, cx, K[j].edges);
        std::vector<std::size_t> seen;
        for (std::size_t v = 0; v < nv; ++v)
            if (K[i].verts >> v & 1) seen.push_back(lab[v]);
        std::sort(seen.begin(), seen.end());
        return static_cast<long>(std::unique(seen.begin(), seen.end()) - seen.begin());
    };
    std::vector<std::vector<Mask>> Z(nv + 1), B(nv + 1);
    for (std::size_t k = 0; k <= nv; ++k) {
        Z[k] = cycle_basis(cx, K[k].edges);
        for (std::size_t s = 0; s < cx.squares.size(); ++s)
            if (K[k].squares >> s & 1) {
                Mask m = 0;
                for (auto e : cx.squares[s]) m |= Mask{1} << e;
                B[k].push_back(m);
            }
    }
    auto betti1 = [&](std::size_t i, std::size_t j) -> long {
        if (i == 0) return 0;
        auto both = Z[i];
        both.insert(both.end(), B[j].begin(), B[j].end());
        return static_cast<long>(gf2_rank(both)) - static_cast<long>(gf2_rank(B[j]));
    };

    std::vector<pint::PersistencePair> out;
    for (int dim = 0; dim <= max_dim; ++dim) {
        std::vector<std::vector<long>> beta(nv + 1, std::vector<long>(nv + 1, 0));
        for (std::size_t i = 0; i <= nv; ++i)
            for (std::size_t j = i; j <= nv; ++j) beta[i][j] = dim == 0 ? betti0(i, j) : betti1(i, j);
        for (std::size_t i = 1; i <= nv; ++i)
            for (std::size_t j = i + 1; j <= nv; ++j) {
                const long mult = beta[i][j - 1] - beta[i][j] - beta[i - 1][j - 1] + beta[i - 1][j];
                const double born = values[order[i - 1]], dies = values[order[j - 1]];
                for (long m = 0; m < mult; ++m) {
                    pint::PersistencePair p{dim, super ? dies : born, super ? born : dies};
                    if (p.death > p.birth) out.push_back(p);
                }
            }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace oracle
