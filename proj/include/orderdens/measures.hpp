#pragma once

/**
 * @file measures.hpp
 * @brief Haar measures of the fixed-point classes M_{a,b} at finite level,
 *        truncation bounds, and exact geometric tail models on admissible sets.
 */

#include "orderdens/matgroups.hpp"

#include <map>
#include <utility>
#include <vector>

namespace orderdens {

using Cell = std::pair<int, int>; // (a, b)

/// Exact class measures of a group at one level.  Entries with a+b < level are
/// exact l-adic measures; everything unresolved at this level sits in
/// `undetermined`.  Entries sum to 1 - undetermined.
struct MeasureTable {
    int64_t ell = 0;
    int level = 0;
    std::map<Cell, Rational> mu;
    Rational undetermined;
    uint64_t total_count = 0;
    std::string group_tag;

    Rational at(int a, int b) const; // 0 for absent cells
    Rational grid_mass() const;
};

/// A rectangular subset of N: either a finite point set or a tail {x >= from}.
struct RangeSpec {
    bool is_tail = false;
    int from = 0;
    std::vector<int> points;

    static RangeSpec tail(int from) { return {true, from, {}}; }
    static RangeSpec single(int x) { return {false, 0, {x}}; }
    bool contains(int x) const;
};

/// On its range the measure is c * ell^(-alpha*a - beta*b).
struct AdmissiblePiece {
    RangeSpec a_range;
    RangeSpec b_range;
    Rational c;
    int alpha = 0;
    int beta = 0;
};

/// Exact grid cells plus disjoint admissible pieces covering the rest of N^2.
struct TailModel {
    int64_t ell = 0;
    std::map<Cell, Rational> grid;
    std::vector<AdmissiblePiece> pieces;

    Rational value_at(int a, int b) const;
    /// grid + all pieces, summed exactly via geometric series.
    Rational total_mass() const;
};

struct FitRejection : std::runtime_error {
    explicit FitRejection(const std::string& what) : std::runtime_error(what) {}
};

/// Classify every element of a stored group by kernel_class.
MeasureTable measure_table(const MatrixGroupLevel& g, int threads = 1);

/// Classify the lifts of `base` at `level` without materializing them.
/// dims = 4: all matrix lifts (preimage_group semantics); dims = 2: lifts along
/// the base's Cartan frame (cartan_preimage semantics).
MeasureTable lifted_measure_table(const MatrixGroupLevel& base, int level, int dims,
                                  int threads = 1);

/// Measure of {M in G : det(M - I) == 0 mod ell^k}; bounds the unclassified
/// mass below level k.
Rational singular_mass(const MatrixGroupLevel& g, int k);

/// Per-coset conditional tables (Cartan coset, then nontrivial coset) of a
/// normalizer-structured group, each normalized to mass 1 on its coset.
std::pair<MeasureTable, MeasureTable> split_coset_tables(const MatrixGroupLevel& g,
                                                         int threads = 1);

/// Streamed per-coset tables of the Cartan-directions lifts of `base`.
std::pair<MeasureTable, MeasureTable> lifted_coset_tables(const MatrixGroupLevel& base,
                                                          int level, int threads = 1);

/// Fit geometric tails onto a verified grid, from tables at two consecutive
/// levels.  Pieces are accepted only on exact agreement with held-out grid
/// values (plus exact total mass 1); otherwise FitRejection is thrown and the
/// caller must raise the level.
TailModel fit_tail(const MeasureTable& lo, const MeasureTable& hi);

} // namespace orderdens
