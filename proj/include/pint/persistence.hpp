#pragma once

// Cubical persistent homology (dimensions 0 and 1) of functions sampled on a
// rectangular grid.
//
// The complex is vertex-based: grid nodes are vertices, 4-neighbours are joined
// by edges and every 2x2 block of nodes bounds a square. Each cell enters the
// filtration with its last vertex (lower-star), where vertices are totally
// ordered by (value, linear index). Dimension 0 is computed by union-find with
// the elder rule, dimension 1 by reducing the square-to-edge boundary matrix
// over Z/2.
//
// Superlevel persistence runs the sublevel engine on the negated values. Raw
// superlevel pairs have birth >= death; they are stored swapped so every stored
// point lies on or above the diagonal. The essential component and every
// zero-lifetime pair are dropped.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "pint/csv.hpp"
#include "pint/error.hpp"
#include "pint/field.hpp"
#include "pint/grid.hpp"

namespace pint {

enum class Direction { superlevel, sublevel };

inline std::string_view to_string(Direction d) { return d == Direction::superlevel ? "super" : "sub"; }

inline Direction parse_direction(std::string_view s) {
    if (s == "super" || s == "superlevel") return Direction::superlevel;
    if (s == "sub" || s == "sublevel") return Direction::sublevel;
    throw InvalidParameter("unknown direction '" + std::string(s) + "'");
}

struct PersistencePair {
    int dim = 0;
    double birth = 0.0;
    double death = 0.0;

    double lifetime() const noexcept { return death - birth; }
    friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
    friend auto operator<=>(const PersistencePair&, const PersistencePair&) = default;
};

struct PersistenceDiagram {
    std::vector<PersistencePair> pairs;
    Direction direction = Direction::superlevel;
    GridSpec source_spec{};
    FieldKind source_kind = FieldKind::density;

    std::size_t size() const noexcept { return pairs.size(); }
    bool empty() const noexcept { return pairs.empty(); }

    /// Pairs sorted into a canonical order, for multiset comparison.
    std::vector<PersistencePair> sorted_pairs() const {
        auto p = pairs;
        std::sort(p.begin(), p.end());
        return p;
    }
};

namespace detail {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::uint32_t{0}); }

    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void attach(std::uint32_t child_root, std::uint32_t parent_root) { parent_[child_root] = parent_root; }

private:
    std::vector<std::uint32_t> parent_;
};

struct Cell {
    std::uint32_t key_hi;  // rank of the last vertex
    std::uint32_t key_lo;  // secondary key
    std::uint32_t id;
};

/// Sublevel pairs of `values` laid out as rows x cols (index r*cols + c).
/// Births and deaths are raw values; zero-lifetime pairs are kept.
inline std::vector<PersistencePair> sublevel_pairs(std::span<const double> values, std::size_t rows,
                                                   std::size_t cols, int max_dim) {
    const std::size_t nv = rows * cols;
    std::vector<std::uint32_t> order(nv);
    std::iota(order.begin(), order.end(), std::uint32_t{0});
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return values[a] < values[b] || (values[a] == values[b] && a < b);
    });
    std::vector<std::uint32_t> rank(nv);
    for (std::uint32_t k = 0; k < nv; ++k) rank[order[k]] = k;

    // Edges: horizontal ids first, then vertical.
    const std::size_t n_h = rows * (cols - 1);
    const std::size_t n_e = n_h + (rows - 1) * cols;
    std::vector<std::uint32_t> ea(n_e), eb(n_e);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c + 1 < cols; ++c) {
            const auto id = r * (cols - 1) + c;
            ea[id] = static_cast<std::uint32_t>(r * cols + c);
            eb[id] = static_cast<std::uint32_t>(r * cols + c + 1);
        }
    for (std::size_t r = 0; r + 1 < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const auto id = n_h + r * cols + c;
            ea[id] = static_cast<std::uint32_t>(r * cols + c);
            eb[id] = static_cast<std::uint32_t>((r + 1) * cols + c);
        }

    std::vector<Cell> edges(n_e);
    for (std::uint32_t e = 0; e < n_e; ++e) {
        const auto ra = rank[ea[e]], rb = rank[eb[e]];
        edges[e] = {std::max(ra, rb), std::min(ra, rb), e};
    }
    std::sort(edges.begin(), edges.end(), [](const Cell& a, const Cell& b) {
        return a.key_hi < b.key_hi || (a.key_hi == b.key_hi && a.key_lo < b.key_lo);
    });

    std::vector<PersistencePair> pairs;

    // Dimension 0. Each root remembers the oldest vertex of its component.
    UnionFind uf(nv);
    std::vector<std::uint32_t> oldest(nv);
    std::iota(oldest.begin(), oldest.end(), std::uint32_t{0});
    for (const auto& e : edges) {
        const auto ra = uf.find(ea[e.id]);
        const auto rb = uf.find(eb[e.id]);
        if (ra == rb) continue;
        const double death = values[order[e.key_hi]];
        auto elder = ra, younger = rb;
        if (rank[oldest[rb]] < rank[oldest[ra]]) std::swap(elder, younger);
        pairs.push_back({0, values[oldest[younger]], death});
        uf.attach(younger, elder);
    }

    if (max_dim < 1 || rows < 2 || cols < 2) return pairs;

    // Dimension 1: columns are squares, rows are edges in filtration position.
    std::vector<std::uint32_t> edge_pos(n_e);
    for (std::uint32_t k = 0; k < n_e; ++k) edge_pos[edges[k].id] = k;

    const std::size_t n_s = (rows - 1) * (cols - 1);
    std::vector<Cell> squares(n_s);
    for (std::size_t r = 0; r + 1 < rows; ++r)
        for (std::size_t c = 0; c + 1 < cols; ++c) {
            const auto v = r * cols + c;
            const auto hi = std::max({rank[v], rank[v + 1], rank[v + cols], rank[v + cols + 1]});
            const auto id = static_cast<std::uint32_t>(r * (cols - 1) + c);
            squares[id] = {hi, id, id};
        }
    std::sort(squares.begin(), squares.end(), [](const Cell& a, const Cell& b) {
        return a.key_hi < b.key_hi || (a.key_hi == b.key_hi && a.key_lo < b.key_lo);
    });

    constexpr std::uint32_t none = UINT32_MAX;
    std::vector<std::uint32_t> pivot_owner(n_e, none);
    std::vector<std::vector<std::uint32_t>> reduced(n_s);
    std::vector<std::uint32_t> scratch;
    for (std::uint32_t k = 0; k < n_s; ++k) {
        const auto sq = squares[k].id;
        const std::size_t r = sq / (cols - 1), c = sq % (cols - 1);
        auto& col = reduced[k];
        col = {edge_pos[r * (cols - 1) + c], edge_pos[(r + 1) * (cols - 1) + c], edge_pos[n_h + r * cols + c],
               edge_pos[n_h + r * cols + c + 1]};
        std::sort(col.begin(), col.end());
        while (!col.empty() && pivot_owner[col.back()] != none) {
            const auto& other = reduced[pivot_owner[col.back()]];
            scratch.clear();
            std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(),
                                          std::back_inserter(scratch));
            col.swap(scratch);
        }
        if (col.empty()) continue;  // cannot happen on a rectangle, H2 = 0
        pivot_owner[col.back()] = k;
        const double birth = values[order[edges[col.back()].key_hi]];
        const double death = values[order[squares[k].key_hi]];
        pairs.push_back({1, birth, death});
    }
    return pairs;
}

}  // namespace detail

/// Persistence pairs of a rows x cols array (row-major, index r*cols + c).
/// Any rows, cols >= 1 is accepted, so 1-D signals work too.
inline std::vector<PersistencePair> persistence_pairs(std::span<const double> values, std::size_t rows,
                                                      std::size_t cols, Direction direction, int max_dim) {
    if (max_dim != 0 && max_dim != 1) throw InvalidParameter("max_dim must be 0 or 1");
    if (rows == 0 || cols == 0 || values.size() != rows * cols)
        throw InvalidInput("persistence: value count does not match grid shape");
    for (double v : values)
        if (!std::isfinite(v)) throw InvalidInput("persistence: non-finite field value");

    std::vector<PersistencePair> raw;
    if (direction == Direction::sublevel) {
        raw = detail::sublevel_pairs(values, rows, cols, max_dim);
    } else {
        std::vector<double> neg(values.size());
        std::transform(values.begin(), values.end(), neg.begin(), [](double v) { return -v; });
        raw = detail::sublevel_pairs(neg, rows, cols, max_dim);
        // negated (b', d') is raw superlevel (-b', -d'); stored swapped as (-d', -b')
        for (auto& p : raw) p = {p.dim, -p.death, -p.birth};
    }
    std::erase_if(raw, [](const PersistencePair& p) { return !(p.death > p.birth); });
    return raw;
}

inline PersistenceDiagram compute_persistence(const GridField& field, Direction direction, int max_dim) {
    if (field.values.size() != field.spec.size()) throw InvalidInput("persistence: field size does not match spec");
    PersistenceDiagram d;
    d.pairs = persistence_pairs(field.values, field.spec.nx, field.spec.ny, direction, max_dim);
    d.direction = direction;
    d.source_spec = field.spec;
    d.source_kind = field.kind;
    return d;
}

// Diagram CSV: header `dim,birth,death`, one pair per row.

inline void write_diagram(const std::string& path, const PersistenceDiagram& diagram) {
    auto out = csv::open_for_write(path);
    out << "dim,birth,death\n";
    for (const auto& p : diagram.pairs)
        out << p.dim << ',' << csv::format(p.birth) << ',' << csv::format(p.death) << '\n';
    if (!out) throw InvalidInput("failed writing '" + path + "'");
}

inline PersistenceDiagram read_diagram(const std::string& path) {
    const auto lines = csv::read_lines(path);
    if (lines.empty() || csv::trim(lines[0]) != "dim,birth,death")
        throw ParseError("expected header 'dim,birth,death'", 1);
    PersistenceDiagram d;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const auto line_no = k + 1;
        if (csv::trim(lines[k]).empty()) continue;
        const auto cells = csv::split(lines[k]);
        if (cells.size() != 3) throw ParseError("expected 3 columns", line_no);
        const auto dim = csv::parse_int(cells[0], line_no);
        if (dim != 0 && dim != 1) throw ParseError("dimension must be 0 or 1", line_no);
        const double b = csv::parse_double(cells[1], line_no);
        const double e = csv::parse_double(cells[2], line_no);
        if (!std::isfinite(b) || !std::isfinite(e)) throw ParseError("non-finite birth or death", line_no);
        if (e < b) throw ParseError("death < birth (point below the diagonal)", line_no);
        d.pairs.push_back({static_cast<int>(dim), b, e});
    }
    return d;
}

}  // namespace pint
