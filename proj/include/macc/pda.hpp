#pragma once

// Placement delivery arrays: an F x K grid whose cells are either a star
// (packet f cached by user k) or a positive integer code s (packet f delivered
// to user k by multicast s).

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "combinatorics.hpp"

namespace macc {

class Cell {
public:
    static constexpr Cell star() { return Cell(0); }
    static Cell code(int s) {
        if (s <= 0) throw std::invalid_argument("Cell::code: code must be positive");
        return Cell(s);
    }

    constexpr bool is_star() const { return value_ == 0; }
    /// The code index, or 0 for a star.
    constexpr int code() const { return value_; }

    friend constexpr bool operator==(Cell, Cell) = default;

private:
    constexpr explicit Cell(int v) : value_(v) {}
    int value_;
};

class PdaArray {
public:
    /// rows x cols grid of stars.
    PdaArray(int rows, int cols) : rows_(rows), cols_(cols) {
        if (rows <= 0 || cols <= 0) throw std::invalid_argument("PdaArray: dimensions must be positive");
        cells_.assign(static_cast<std::size_t>(rows) * cols, Cell::star());
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    Cell at(int f, int k) const { return cells_[index(f, k)]; }
    void set(int f, int k, Cell c) { cells_[index(f, k)] = c; }

    /// Largest code value present; 0 if the array is all stars.
    int max_code() const {
        int s = 0;
        for (Cell c : cells_) s = std::max(s, c.code());
        return s;
    }

    int star_count(int k) const {
        int n = 0;
        for (int f = 0; f < rows_; ++f) n += at(f, k).is_star();
        return n;
    }

    friend bool operator==(const PdaArray&, const PdaArray&) = default;

private:
    std::size_t index(int f, int k) const {
        if (f < 0 || f >= rows_ || k < 0 || k >= cols_) throw std::out_of_range("PdaArray: cell out of range");
        return static_cast<std::size_t>(f) * cols_ + k;
    }

    int rows_;
    int cols_;
    std::vector<Cell> cells_;
};

struct PdaParams {
    int users = 0;             // K
    std::uint64_t rows = 0;    // F
    int stars_per_column = 0;  // Z
    int codes = 0;             // S
    std::optional<int> regularity;

    friend bool operator==(const PdaParams&, const PdaParams&) = default;
};

// ---------------------------------------------------------------------------
// Validation

enum class ValidationMode { full, delivery_only };

enum class Condition { C1, C2, C3a, C3b };

inline const char* to_string(Condition c) {
    switch (c) {
        case Condition::C1: return "C1";
        case Condition::C2: return "C2";
        case Condition::C3a: return "C3a";
        case Condition::C3b: return "C3b";
    }
    return "?";
}

struct CellRef {
    int f = 0;
    int k = 0;
    friend bool operator==(const CellRef&, const CellRef&) = default;
};

struct Violation {
    Condition condition;
    int code = 0;                // offending code value (C2, C3)
    std::vector<CellRef> cells;  // offending cells; column index only for C1 uses k
    std::string message;
};

struct ValidationReport {
    bool ok = true;
    std::vector<Violation> violations;

    bool has(Condition c) const {
        return std::any_of(violations.begin(), violations.end(),
                           [c](const Violation& v) { return v.condition == c; });
    }
};

/// Checks C1-C3 (full) or C2-C3 (delivery_only). Reports every violation.
inline ValidationReport validate_pda(const PdaArray& arr, ValidationMode mode = ValidationMode::full) {
    ValidationReport report;
    auto add = [&report](Violation v) {
        report.ok = false;
        report.violations.push_back(std::move(v));
    };

    if (mode == ValidationMode::full) {
        const int z = arr.star_count(0);
        for (int k = 1; k < arr.cols(); ++k) {
            const int zk = arr.star_count(k);
            if (zk != z) {
                add({Condition::C1, 0, {{0, k}},
                     "column " + std::to_string(k + 1) + " has " + std::to_string(zk) +
                         " stars, column 1 has " + std::to_string(z)});
            }
        }
    }

    std::map<int, std::vector<CellRef>> groups;
    for (int f = 0; f < arr.rows(); ++f)
        for (int k = 0; k < arr.cols(); ++k)
            if (!arr.at(f, k).is_star()) groups[arr.at(f, k).code()].push_back({f, k});

    const int s_max = arr.max_code();
    for (int s = 1; s <= s_max; ++s)
        if (!groups.contains(s)) add({Condition::C2, s, {}, "code " + std::to_string(s) + " never appears"});

    for (const auto& [s, cells] : groups) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            for (std::size_t j = i + 1; j < cells.size(); ++j) {
                const CellRef a = cells[i];
                const CellRef b = cells[j];
                if (a.f == b.f || a.k == b.k) {
                    add({Condition::C3a, s, {a, b},
                         "code " + std::to_string(s) + " repeated in the same " + (a.f == b.f ? "row" : "column")});
                } else if (!arr.at(a.f, b.k).is_star() || !arr.at(b.f, a.k).is_star()) {
                    add({Condition::C3b, s, {a, b},
                         "code " + std::to_string(s) + " cells lack stars at their crossing cells"});
                }
            }
        }
    }
    return report;
}

/// g if every code value occurs equally often, otherwise nullopt (also when no codes exist).
inline std::optional<int> regularity(const PdaArray& arr) {
    std::map<int, int> occurrences;
    for (int f = 0; f < arr.rows(); ++f)
        for (int k = 0; k < arr.cols(); ++k)
            if (!arr.at(f, k).is_star()) ++occurrences[arr.at(f, k).code()];
    if (occurrences.empty()) return std::nullopt;
    const int g = occurrences.begin()->second;
    for (const auto& [s, n] : occurrences)
        if (n != g) return std::nullopt;
    return g;
}

/// (K, F, Z, S, g) of an array that passes full validation.
inline PdaParams pda_params(const PdaArray& arr) {
    if (!validate_pda(arr, ValidationMode::full).ok) throw std::invalid_argument("pda_params: array is not a PDA");
    return {arr.cols(), static_cast<std::uint64_t>(arr.rows()), arr.star_count(0), arr.max_code(), regularity(arr)};
}

// ---------------------------------------------------------------------------
// MN construction

/// Rows are the t-subsets of [K] in lexicographic order; cell (T, k) is a star
/// iff k in T, otherwise the 1-based lexicographic rank of T + {k} among the
/// (t+1)-subsets.
inline PdaArray build_mn_pda(int users, int t) {
    if (users <= 0) throw std::invalid_argument("build_mn_pda: user count must be positive");
    if (t < 0 || t >= users) throw std::invalid_argument("build_mn_pda: require 0 <= t < K");
    const auto rows = lex_subsets(users, t);
    PdaArray arr(static_cast<int>(rows.size()), users);
    for (int f = 0; f < arr.rows(); ++f) {
        const Subset& row = rows[f];
        for (int k = 0; k < users; ++k) {
            if (std::binary_search(row.begin(), row.end(), k)) continue;
            Subset grown = row;
            grown.insert(std::upper_bound(grown.begin(), grown.end(), k), k);
            arr.set(f, k, Cell::code(static_cast<int>(lex_rank(grown, users)) + 1));
        }
    }
    return arr;
}

// ---------------------------------------------------------------------------
// Text form: F lines of K space-separated tokens, '*' or a decimal code.

inline void write_pda(std::ostream& os, const PdaArray& arr) {
    for (int f = 0; f < arr.rows(); ++f) {
        for (int k = 0; k < arr.cols(); ++k) {
            if (k) os << ' ';
            const Cell c = arr.at(f, k);
            if (c.is_star()) os << '*';
            else os << c.code();
        }
        os << '\n';
    }
}

inline std::string to_text(const PdaArray& arr) {
    std::ostringstream os;
    write_pda(os, arr);
    return os.str();
}

inline PdaArray read_pda(std::istream& is) {
    std::vector<std::vector<Cell>> rows;
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::vector<Cell> row;
        std::string tok;
        while (ls >> tok) {
            if (tok == "*") {
                row.push_back(Cell::star());
            } else {
                std::size_t used = 0;
                int s = 0;
                try {
                    s = std::stoi(tok, &used);
                } catch (const std::exception&) {
                    throw std::invalid_argument("read_pda: bad token '" + tok + "'");
                }
                if (used != tok.size() || s <= 0) throw std::invalid_argument("read_pda: bad token '" + tok + "'");
                row.push_back(Cell::code(s));
            }
        }
        if (row.empty()) continue;
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::invalid_argument("read_pda: ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument("read_pda: empty input");
    PdaArray arr(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (int f = 0; f < arr.rows(); ++f)
        for (int k = 0; k < arr.cols(); ++k) arr.set(f, k, rows[f][k]);
    return arr;
}

inline PdaArray pda_from_text(const std::string& text) {
    std::istringstream is(text);
    return read_pda(is);
}

}  // namespace macc
