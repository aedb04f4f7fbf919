#pragma once

#include <initializer_list>
#include <vector>

#include "multires/errors.hpp"

namespace multires {

/// Dense payoff matrix of a two-player zero-sum game. Entries are payoffs to
/// the row player (the maximizer); the column player receives the negation.
class PayoffMatrix {
public:
    PayoffMatrix(int rows, int cols, double fill = 0.0);
    PayoffMatrix(std::initializer_list<std::initializer_list<double>> rows);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& at(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    double at(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

struct MatrixGameSolution {
    double value = 0.0;
    std::vector<double> row_mix;  // maximin mixed strategy of the row player
    std::vector<double> col_mix;  // minimax mixed strategy of the column player
};

/// Solves the matrix game by the reciprocal-form linear program: shift the
/// matrix positive, solve max sum(w) s.t. M'w <= 1 with a dense simplex
/// (Bland's rule, hence deterministic), read the row mix off the duals,
/// unshift. The returned triple satisfies the saddle inequalities within tol.
MatrixGameSolution solve_matrix_game(const PayoffMatrix& m, double tol = 1e-9);

/// Independent oracle for matrices up to 4x4: enumerates all square support
/// pairs, solves the equalization systems and returns the first verified
/// saddle value. Kept free of the simplex code path on purpose.
double support_enumeration_oracle(const PayoffMatrix& m);

}  // namespace multires
