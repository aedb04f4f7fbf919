#include "multires/matrix_game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace multires {

namespace {

constexpr double kPivotEps = 1e-11;

// Dense tableau simplex for: maximize sum(z) s.t. A z <= b, z >= 0 with
// b > 0, so the slack basis is feasible and no phase-1 is needed. Bland's
// smallest-index rule for both the entering and the leaving variable keeps
// the pivot sequence deterministic and cycle-free.
class Simplex {
public:
    Simplex(const PayoffMatrix& a, const std::vector<double>& b)
        : m_(a.rows()), n_(a.cols()), tab_(static_cast<size_t>(m_ + 1) * (n_ + m_ + 1), 0.0),
          basis_(m_) {
        const int w = width();
        for (int i = 0; i < m_; ++i) {
            for (int j = 0; j < n_; ++j) row(i)[j] = a.at(i, j);
            row(i)[n_ + i] = 1.0;
            row(i)[w - 1] = b[i];
            basis_[i] = n_ + i;
        }
        for (int j = 0; j < n_; ++j) row(m_)[j] = -1.0;  // objective: max sum(z)
    }

    void run() {
        for (;;) {
            const int s = entering();
            if (s < 0) return;
            const int r = leaving(s);
            if (r < 0) throw ConvergenceError("matrix game LP unbounded", 0.0);
            pivot(r, s);
        }
    }

    double objective() const { return row(m_)[width() - 1]; }

    std::vector<double> primal() const {
        std::vector<double> z(n_, 0.0);
        for (int i = 0; i < m_; ++i)
            if (basis_[i] < n_) z[basis_[i]] = row(i)[width() - 1];
        return z;
    }

    // Reduced costs on the slack columns are the optimal duals.
    std::vector<double> dual() const {
        std::vector<double> u(m_, 0.0);
        for (int i = 0; i < m_; ++i) u[i] = row(m_)[n_ + i];
        return u;
    }

private:
    int width() const { return n_ + m_ + 1; }
    double* row(int i) { return tab_.data() + static_cast<size_t>(i) * width(); }
    const double* row(int i) const { return tab_.data() + static_cast<size_t>(i) * width(); }

    int entering() const {
        for (int j = 0; j < n_ + m_; ++j)
            if (row(m_)[j] < -kPivotEps) return j;
        return -1;
    }

    int leaving(int s) const {
        int r = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m_; ++i) {
            const double a = row(i)[s];
            if (a <= kPivotEps) continue;
            const double ratio = row(i)[width() - 1] / a;
            if (r < 0 || ratio < best - kPivotEps) {
                best = ratio;
                r = i;
            } else if (ratio <= best + kPivotEps && basis_[i] < basis_[r]) {
                best = std::min(best, ratio);
                r = i;
            }
        }
        return r;
    }

    void pivot(int r, int s) {
        const int w = width();
        const double inv = 1.0 / row(r)[s];
        for (int j = 0; j < w; ++j) row(r)[j] *= inv;
        row(r)[s] = 1.0;
        for (int i = 0; i <= m_; ++i) {
            if (i == r) continue;
            const double f = row(i)[s];
            if (f == 0.0) continue;
            for (int j = 0; j < w; ++j) row(i)[j] -= f * row(r)[j];
            row(i)[s] = 0.0;
        }
        basis_[r] = s;
    }

    int m_, n_;
    std::vector<double> tab_;
    std::vector<int> basis_;
};

void check_matrix(const PayoffMatrix& m) {
    if (m.rows() < 1 || m.cols() < 1)
        throw ValidationError("malformed stage game: payoff matrix is empty");
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            if (!std::isfinite(m.at(i, j)))
                throw ValidationError("malformed stage game: non-finite payoff entry");
}

double clamp_mix(std::vector<double>& mix) {
    double sum = 0.0;
    for (double& p : mix) {
        if (p < 0.0) p = 0.0;
        sum += p;
    }
    return sum;
}

// Solve the (k+1)x(k+1) equalization system by Gaussian elimination with
// partial pivoting. Returns false when the system is singular.
bool solve_linear(std::vector<std::vector<double>>& a, std::vector<double>& x) {
    const int n = static_cast<int>(a.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int i = col + 1; i < n; ++i)
            if (std::fabs(a[i][col]) > std::fabs(a[piv][col])) piv = i;
        if (std::fabs(a[piv][col]) < 1e-12) return false;
        std::swap(a[piv], a[col]);
        for (int i = 0; i < n; ++i) {
            if (i == col) continue;
            const double f = a[i][col] / a[col][col];
            if (f == 0.0) continue;
            for (int j = col; j <= n; ++j) a[i][j] -= f * a[col][j];
        }
    }
    x.resize(n);
    for (int i = 0; i < n; ++i) x[i] = a[i][n] / a[i][i];
    return true;
}

std::vector<std::vector<int>> subsets_of_size(int n, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    // lexicographic enumeration keeps the oracle deterministic
    auto rec = [&](auto&& self, int start) -> void {
        if (static_cast<int>(cur.size()) == k) {
            out.push_back(cur);
            return;
        }
        for (int i = start; i < n; ++i) {
            cur.push_back(i);
            self(self, i + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

}  // namespace

PayoffMatrix::PayoffMatrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<size_t>(std::max(rows, 0)) * std::max(cols, 0), fill) {}

PayoffMatrix::PayoffMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = static_cast<int>(rows.size());
    cols_ = rows_ > 0 ? static_cast<int>(rows.begin()->size()) : 0;
    data_.reserve(static_cast<size_t>(rows_) * cols_);
    for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != cols_)
            throw ValidationError("malformed stage game: ragged payoff matrix");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

MatrixGameSolution solve_matrix_game(const PayoffMatrix& m, double tol) {
    check_matrix(m);
    if (tol <= 0.0) throw ValidationError("matrix game tolerance must be positive");

    double lo = m.at(0, 0);
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) lo = std::min(lo, m.at(i, j));
    const double shift = 1.0 - lo;  // shifted entries are >= 1

    PayoffMatrix shifted(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) shifted.at(i, j) = m.at(i, j) + shift;

    // Column player: maximize sum(w) s.t. M'w <= 1. The optimum is 1/v' and
    // the duals are the row player's unnormalized maximin weights.
    Simplex lp(shifted, std::vector<double>(m.rows(), 1.0));
    lp.run();
    const double inv_value = lp.objective();
    const double shifted_value = 1.0 / inv_value;

    MatrixGameSolution sol;
    sol.value = shifted_value - shift;
    sol.col_mix = lp.primal();
    sol.row_mix = lp.dual();
    for (double& p : sol.col_mix) p *= shifted_value;
    for (double& p : sol.row_mix) p *= shifted_value;
    clamp_mix(sol.row_mix);
    clamp_mix(sol.col_mix);

    // Saddle sanity check against the original matrix.
    double row_guarantee = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m.cols(); ++j) {
        double col_val = 0.0;
        for (int i = 0; i < m.rows(); ++i) col_val += sol.row_mix[i] * m.at(i, j);
        row_guarantee = std::min(row_guarantee, col_val);
    }
    double col_guarantee = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < m.rows(); ++i) {
        double row_val = 0.0;
        for (int j = 0; j < m.cols(); ++j) row_val += m.at(i, j) * sol.col_mix[j];
        col_guarantee = std::max(col_guarantee, row_val);
    }
    const double scale = std::max(1.0, std::fabs(sol.value));
    if (row_guarantee < sol.value - tol * scale || col_guarantee > sol.value + tol * scale)
        throw ConvergenceError("matrix game saddle check failed",
                               std::max(sol.value - row_guarantee, col_guarantee - sol.value));
    return sol;
}

double support_enumeration_oracle(const PayoffMatrix& m) {
    check_matrix(m);
    if (m.rows() > 4 || m.cols() > 4)
        throw OracleBudgetError("support enumeration oracle budget exceeded (matrix larger than 4x4)");

    double scale = 1.0;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) scale = std::max(scale, std::fabs(m.at(i, j)));
    const double eps = 1e-8 * scale;

    for (int k = 1; k <= std::min(m.rows(), m.cols()); ++k) {
        for (const auto& rows : subsets_of_size(m.rows(), k)) {
            for (const auto& cols : subsets_of_size(m.cols(), k)) {
                // Row weights x on `rows` equalizing the columns in `cols`:
                //   sum_i x_i M[i][j] - v = 0 for j in cols, sum_i x_i = 1.
                std::vector<std::vector<double>> sys(k + 1, std::vector<double>(k + 2, 0.0));
                for (int j = 0; j < k; ++j) {
                    for (int i = 0; i < k; ++i) sys[j][i] = m.at(rows[i], cols[j]);
                    sys[j][k] = -1.0;
                }
                for (int i = 0; i < k; ++i) sys[k][i] = 1.0;
                sys[k][k + 1] = 1.0;
                std::vector<double> xv;
                if (!solve_linear(sys, xv)) continue;

                // Column weights y on `cols` equalizing the rows in `rows`.
                std::vector<std::vector<double>> sys2(k + 1, std::vector<double>(k + 2, 0.0));
                for (int i = 0; i < k; ++i) {
                    for (int j = 0; j < k; ++j) sys2[i][j] = m.at(rows[i], cols[j]);
                    sys2[i][k] = -1.0;
                }
                for (int j = 0; j < k; ++j) sys2[k][j] = 1.0;
                sys2[k][k + 1] = 1.0;
                std::vector<double> yv;
                if (!solve_linear(sys2, yv)) continue;

                const double v = xv[k];
                if (std::fabs(yv[k] - v) > eps) continue;

                bool nonneg = true;
                for (int i = 0; i < k && nonneg; ++i) nonneg = xv[i] >= -eps && yv[i] >= -eps;
                if (!nonneg) continue;

                // Verify the saddle against every row and column of the game.
                std::vector<double> x(m.rows(), 0.0), y(m.cols(), 0.0);
                for (int i = 0; i < k; ++i) x[rows[i]] = std::max(0.0, xv[i]);
                for (int j = 0; j < k; ++j) y[cols[j]] = std::max(0.0, yv[j]);
                bool ok = true;
                for (int j = 0; j < m.cols() && ok; ++j) {
                    double t = 0.0;
                    for (int i = 0; i < m.rows(); ++i) t += x[i] * m.at(i, j);
                    ok = t >= v - eps;
                }
                for (int i = 0; i < m.rows() && ok; ++i) {
                    double t = 0.0;
                    for (int j = 0; j < m.cols(); ++j) t += m.at(i, j) * y[j];
                    ok = t <= v + eps;
                }
                if (ok) return v;
            }
        }
    }
    throw Error("support enumeration found no verified saddle (numerically degenerate game)");
}

}  // namespace multires
