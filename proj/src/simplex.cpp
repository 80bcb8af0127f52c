#include "counterpoint/simplex.hpp"

#include "counterpoint/error.hpp"

namespace counterpoint::lp {

void Problem::add_row(RationalVector row, Rational value) {
  if (row.size() != cols) {
    throw Error(ErrorKind::DimensionMismatch,
                "row has " + std::to_string(row.size()) + " entries, expected " + std::to_string(cols));
  }
  rows.push_back(std::move(row));
  rhs.push_back(std::move(value));
}

namespace {

// Integer tableau: true value of entry (i, j) is t(i, j) / denom. Column
// `cols` holds the right-hand side. Row `m` is the phase-one objective.
class Tableau {
 public:
  // Columns are scaled to integers individually and the right-hand side by
  // one common factor (x_j = col_scale_j · x''_j / rhs_scale), which keeps
  // small structural entries small; rows are then divided by their gcd.
  Tableau(const Problem& p)
      : m_(p.rows.size()), n_(p.cols), width_(n_ + 1), cells_((m_ + 1) * width_), col_scale_(n_, Integer(1)) {
    basic_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        const auto& a = p.rows[i][j];
        if (a != 0) mpz_lcm(col_scale_[j].get_mpz_t(), col_scale_[j].get_mpz_t(), a.get_den_mpz_t());
      }
      if (p.rhs[i] != 0) mpz_lcm(rhs_scale_.get_mpz_t(), rhs_scale_.get_mpz_t(), p.rhs[i].get_den_mpz_t());
    }
    for (std::size_t i = 0; i < m_; ++i) {
      const bool flip = p.rhs[i] < 0;
      Integer g = 0;
      for (std::size_t j = 0; j < n_; ++j) {
        const auto& a = p.rows[i][j];
        if (a == 0) continue;
        at(i, j) = a.get_num() * (col_scale_[j] / a.get_den());
        if (flip) at(i, j) = -at(i, j);
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), at(i, j).get_mpz_t());
      }
      at(i, n_) = abs(p.rhs[i].get_num()) * (rhs_scale_ / p.rhs[i].get_den());
      mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), at(i, n_).get_mpz_t());
      if (g > 1) {
        for (std::size_t j = 0; j <= n_; ++j) mpz_divexact(at(i, j).get_mpz_t(), at(i, j).get_mpz_t(), g.get_mpz_t());
      }
      basic_[i] = artificial(i);
    }
    for (std::size_t j = 0; j <= n_; ++j) {
      Integer s = 0;
      for (std::size_t i = 0; i < m_; ++i) s += at(i, j);
      at(m_, j) = j < n_ ? Integer(-s) : s;
    }
  }

  Integer& at(std::size_t i, std::size_t j) { return cells_[i * width_ + j]; }
  const Integer& at(std::size_t i, std::size_t j) const { return cells_[i * width_ + j]; }

  // Variables are ordered artificials first (0..m-1), then structural
  // columns (m..m+n-1); Bland's rule uses this order throughout.
  std::size_t artificial(std::size_t row) const { return row; }
  std::size_t structural(std::size_t col) const { return m_ + col; }
  bool is_artificial(std::size_t var) const { return var < m_; }

  void pivot(std::size_t r, std::size_t q) {
    const Integer p = at(r, q);
    mpz_t tmp;
    mpz_init(tmp);
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const Integer f = at(i, q);
      for (std::size_t j = 0; j < width_; ++j) {
        mpz_ptr c = at(i, j).get_mpz_t();
        mpz_mul(tmp, c, p.get_mpz_t());
        if (f != 0) mpz_submul(tmp, f.get_mpz_t(), at(r, j).get_mpz_t());
        if (denom_ != 1) {
          mpz_divexact(c, tmp, denom_.get_mpz_t());
        } else {
          mpz_swap(c, tmp);
        }
      }
    }
    mpz_clear(tmp);
    denom_ = p;
    basic_[r] = structural(q);
    ++pivots_;
  }

  // Columns holding a single positive entry become basic without a search:
  // pivoting on them keeps every right-hand side non-negative.
  void absorb_singletons() {
    for (std::size_t j = 0; j < n_; ++j) {
      std::size_t row = m_;
      bool singleton = true;
      for (std::size_t i = 0; i < m_ && singleton; ++i) {
        if (at(i, j) != 0) {
          if (row != m_) singleton = false;
          row = i;
        }
      }
      if (!singleton || row == m_ || at(row, j) <= 0 || !is_artificial(basic_[row])) continue;
      pivot(row, j);
    }
  }

  bool run() {
    while (true) {
      std::size_t q = n_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (at(m_, j) < 0) {
          q = j;
          break;
        }
      }
      if (q == n_) break;
      std::size_t r = m_;
      for (std::size_t i = 0; i < m_; ++i) {
        if (at(i, q) <= 0) continue;
        if (r == m_) {
          r = i;
          continue;
        }
        // rhs_i / a_iq  vs  rhs_r / a_rq, denominators positive.
        const Integer lhs = at(i, n_) * at(r, q);
        const Integer rhs = at(r, n_) * at(i, q);
        if (lhs < rhs || (lhs == rhs && basic_[i] < basic_[r])) r = i;
      }
      if (r == m_) {
        // Unbounded direction in a phase-one problem cannot occur: the
        // objective is bounded below by zero.
        throw Error(ErrorKind::DegenerateHull, "phase-one simplex reported an unbounded ray");
      }
      pivot(r, q);
    }
    for (std::size_t i = 0; i < m_; ++i) {
      if (is_artificial(basic_[i]) && at(i, n_) != 0) return false;
    }
    return true;
  }

  RationalVector solution() const {
    RationalVector x(n_, Rational(0));
    for (std::size_t i = 0; i < m_; ++i) {
      if (is_artificial(basic_[i])) continue;
      const std::size_t j = basic_[i] - m_;
      Rational v(at(i, n_) * col_scale_[j], denom_ * rhs_scale_);
      v.canonicalize();
      x[j] = v;
    }
    return x;
  }

  std::size_t pivots() const { return pivots_; }

 private:
  std::size_t m_;
  std::size_t n_;
  std::size_t width_;
  std::vector<Integer> cells_;
  std::vector<std::size_t> basic_;
  std::vector<Integer> col_scale_;
  Integer rhs_scale_ = 1;
  Integer denom_ = 1;
  std::size_t pivots_ = 0;
};

}  // namespace

Solution solve(const Problem& problem) {
  if (problem.rhs.size() != problem.rows.size()) {
    throw Error(ErrorKind::DimensionMismatch, "right-hand side length differs from row count");
  }
  for (const auto& row : problem.rows) {
    if (row.size() != problem.cols) throw Error(ErrorKind::DimensionMismatch, "ragged constraint matrix");
  }
  Tableau t(problem);
  t.absorb_singletons();
  Solution s;
  s.feasible = t.run();
  s.pivots = t.pivots();
  if (s.feasible) s.x = t.solution();
  return s;
}

}  // namespace counterpoint::lp
