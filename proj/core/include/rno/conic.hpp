// Copyright 2026 The RNO Workbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RNO_CONIC_HPP_
#define RNO_CONIC_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rno/errors.hpp"
#include "rno/qmath.hpp"

// A small conic solver for problems of the form
//
//     minimize    c' x
//     subject to  A x = b,   x in K,
//
// where K is a product of Hermitian-PSD cones (in a real "svec" embedding),
// the nonnegative orthant, and free coordinates.  The algorithm is a
// boundary-point / dual-ADMM scheme: each sweep solves the normal equations
// once (via a cached eigendecomposition of A A'), projects onto the dual
// cone blockwise, and recovers an exactly-complementary primal iterate.
//
// The svec embedding of a Hermitian d x d matrix M uses d*d real
// coordinates: the d diagonal entries first, then for every pair i < j (in
// column-major upper-triangular order) the two values sqrt(2)*Re(M_ij) and
// sqrt(2)*Im(M_ij).  This makes <A, X> a real dot product of coordinates.

namespace rno::conic {

using Matrix = rno::Matrix;
using Complex = rno::Complex;

Eigen::VectorXd svec(const Matrix& hermitian);
Matrix smat(const Eigen::VectorXd& coords, int dim);

enum class BlockType { Psd, Nonneg, Free };

struct Block {
  BlockType type = BlockType::Free;
  int dim = 0;     // Psd: matrix side; Nonneg/Free: coordinate count
  int offset = 0;  // first coordinate within x
  int size() const { return type == BlockType::Psd ? dim * dim : dim; }
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIter };

const char* status_name(SolveStatus status);

struct SolverOptions {
  double tol = 1e-7;
  int max_iter = 200000;
  double sigma = 1.0;          // initial penalty
  double relaxation = 1.6;     // over-relaxation factor
  int check_every = 25;        // residual check cadence
  int adapt_every = 100;       // penalty adaptation cadence
  int certificate_every = 500; // infeasibility-ray check cadence
  bool verbose = false;
};

struct SolveResult {
  SolveStatus status = SolveStatus::MaxIter;
  double objective = 0.0;  // in the caller's sense (respects maximize)
  Eigen::VectorXd x;       // primal coordinates
  Eigen::VectorXd y;       // equality multipliers (unscaled)
  Eigen::VectorXd z;       // dual slack, z in K*
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
};

class SdpProblem {
 public:
  // --- variable blocks -----------------------------------------------------
  int add_psd_block(int dim);
  int add_nonneg_block(int count);
  int add_free_block(int count);

  // --- equality rows -------------------------------------------------------
  // Each row constrains a real-valued expression to equal `rhs`.
  int new_row(double rhs);

  // Adds Re(coeff * X_{r,c}) to a row, where X is the Hermitian matrix of a
  // PSD block.  The imaginary part of an entry equation is obtained by
  // multiplying `coeff` by -i.  Diagonal requests use only Re(coeff).
  void add_entry(int row, int block, int r, int c, Complex coeff);

  // Adds coeff * x_k for a scalar coordinate of a Nonneg or Free block.
  void add_scalar_entry(int row, int block, int k, double coeff);

  // Adds <H, X> (real for Hermitian H) to a row.
  void add_hermitian(int row, int block, const Matrix& h);

  // Convenience: rows expressing "sum_t X_{(r,t),(c,t)} = target_{r,c}" for
  // all r <= c, i.e. the trace over the second tensor factor equals target.
  void add_trace_second_rows(int block, int d_first, int d_second,
                             const Matrix& target);

  // Convenience: entrywise equality sum_k coeffs[k] * X^{(blocks[k])} = T for
  // Hermitian matrix blocks of a common side d (two real rows per offdiag).
  void add_matrix_eq_rows(const std::vector<int>& blocks,
                          const std::vector<double>& coeffs, int d,
                          const Matrix& target);

  // --- objective -----------------------------------------------------------
  void add_objective(int block, const Matrix& c);  // adds <C, X>
  void add_scalar_objective(int block, int k, double coeff);
  void set_maximize(bool maximize) { maximize_ = maximize; }

  // --- inspection ----------------------------------------------------------
  int num_rows() const { return static_cast<int>(rhs_.size()); }
  int num_cols() const { return num_cols_; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const Block& block(int id) const { return blocks_.at(id); }
  bool maximize() const { return maximize_; }

  // Dense assembly of (A, b, c) with c in *minimization* sense.
  void assemble(Eigen::MatrixXd& a, Eigen::VectorXd& b,
                Eigen::VectorXd& c) const;

  // Extracting solutions.
  Matrix block_matrix(int id, const Eigen::VectorXd& x) const;
  Eigen::VectorXd block_vector(int id, const Eigen::VectorXd& x) const;

 private:
  struct Entry {
    int row;
    int col;
    double val;
  };
  void check_block_entry(int block, int r, int c) const;
  int svec_index(int block, int r, int c) const;  // r <= c only

  std::vector<Block> blocks_;
  std::vector<Entry> entries_;
  std::vector<double> rhs_;
  std::vector<std::pair<int, double>> objective_;  // (col, coeff)
  int num_cols_ = 0;
  bool maximize_ = false;
};

SolveResult solve(const SdpProblem& problem, const SolverOptions& options = {});

struct KktReport {
  SolveStatus status = SolveStatus::MaxIter;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  double min_primal_eig = 0.0;  // most negative eigenvalue across cone blocks
  double min_dual_eig = 0.0;
  double complementarity = 0.0;
  bool within(double tol) const;
};

// Recomputes optimality residuals from the raw problem data and a result.
KktReport check_kkt(const SdpProblem& problem, const SolveResult& result);

// Observer invoked after every solve() call; used by validation harnesses to
// audit all solves performed during a run.  Not thread-safe.
using SolveObserver =
    std::function<void(const SdpProblem&, const SolveResult&)>;
void set_solve_observer(SolveObserver observer);
void clear_solve_observer();

}  // namespace rno::conic

#endif  // RNO_CONIC_HPP_
