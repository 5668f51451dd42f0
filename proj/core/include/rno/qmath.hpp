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

#ifndef RNO_QMATH_HPP_
#define RNO_QMATH_HPP_

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rno/errors.hpp"

namespace rno {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Largest Choi side we will materialize as a dense matrix.
inline constexpr int kMaxChoiSide = 4096;

namespace qmath {

// ---------------------------------------------------------------------------
// Basic matrix helpers
// ---------------------------------------------------------------------------

int product_dim(const std::vector<int>& dims);
bool is_hermitian(const Matrix& m, double tol = 1e-9);
bool is_psd(const Matrix& m, double tol = 1e-9);
Matrix kron(const Matrix& a, const Matrix& b);

// Reorders subsystems of a square operator: entry `perm[k]` names the old
// position that ends up at new position k.
Matrix permute_subsystems(const Matrix& m, const std::vector<int>& dims,
                          const std::vector<int>& perm);

// Trace out every subsystem not listed in `keep` (keep is sorted, 0-based).
Matrix partial_trace(const Matrix& m, const std::vector<int>& dims,
                     const std::vector<int>& keep);

// Transpose the listed subsystems in place.
Matrix partial_transpose(const Matrix& m, const std::vector<int>& dims,
                         const std::vector<int>& transpose);

double trace_norm(const Matrix& m);

// Root fidelity F(rho, sigma) = || sqrt(rho) sqrt(sigma) ||_1.
double sqrt_fidelity(const Matrix& rho, const Matrix& sigma);

// Max-relative entropy log2 min{ lambda : rho <= lambda sigma } on the
// support of sigma; +infinity when supp(rho) is not contained in supp(sigma).
double dmax(const Matrix& rho, const Matrix& sigma);

Eigen::VectorXd hermitian_eigenvalues(const Matrix& m);
double min_eigenvalue(const Matrix& m);

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

// A density matrix together with its tensor factorization.  Construction
// validates Hermiticity, unit trace and positivity (eigenvalues >= -1e-9).
struct DensityMatrix {
  Matrix mat;
  std::vector<int> dims;

  DensityMatrix(Matrix m, std::vector<int> d);
  int dim() const { return static_cast<int>(mat.rows()); }

  static DensityMatrix from_pure(const Vector& amplitudes,
                                 std::vector<int> dims);
};

Vector basis_vector(int dim, int index);
// (|0..0> + |1..1> + ...)/sqrt(d) on a d x d bipartite space.
Vector max_entangled_vector(int d);
DensityMatrix max_entangled_state(int d);
DensityMatrix maximally_mixed(std::vector<int> dims);
// w * phi+ + (1-w) * I/4 on two qubits.
DensityMatrix werner_state(double w);

// ---------------------------------------------------------------------------
// Channels
// ---------------------------------------------------------------------------

enum class ChoiNorm { TraceDIn, TraceOne };

// A CPTP map with dual representation.  The Choi matrix is kept in the
// trace-d_in normalization, indexed (input (x) output) with
// J = sum_ij |i><j| (x) E(|i><j|), so tr_out J = I_in.
struct Channel {
  std::vector<int> in_dims;
  std::vector<int> out_dims;
  std::vector<Matrix> kraus;  // may be empty when constructed from a Choi
  Matrix choi;                // always materialized, trace-d_in normalization

  int in_dim() const { return product_dim(in_dims); }
  int out_dim() const { return product_dim(out_dims); }

  Matrix choi_matrix(ChoiNorm norm) const;

  static Channel from_kraus(std::vector<int> in_dims,
                            std::vector<int> out_dims,
                            std::vector<Matrix> kraus);
  static Channel from_choi(std::vector<int> in_dims,
                           std::vector<int> out_dims, const Matrix& choi,
                           ChoiNorm norm = ChoiNorm::TraceDIn);
};

Matrix kraus_to_choi(const std::vector<Matrix>& kraus, int in_dim,
                     int out_dim);
std::vector<Matrix> choi_to_kraus(const Matrix& choi, int in_dim, int out_dim,
                                  double tol = 1e-12);

// Applies `ch` to the listed subsystems of `rho` (identity elsewhere).
DensityMatrix apply_channel(const Channel& ch, const DensityMatrix& rho,
                            const std::vector<int>& subsystems);
Matrix apply_channel_matrix(const Channel& ch, const Matrix& m);
// Heisenberg picture: tr[E(rho) X] = tr[rho adjoint_apply(E, X)].
Matrix adjoint_apply(const Channel& ch, const Matrix& x);

Channel identity_channel(std::vector<int> dims);
Channel unitary_channel(const Matrix& u);
Channel dephasing_channel(int d);
// lambda * rho + (1-lambda) * I/d
Channel depolarizing_channel(int d, double lambda = 0.0);
Channel replacement_channel(const DensityMatrix& sigma,
                            std::vector<int> in_dims);
// sum_a prob[a] P_a rho P_a over the 4 qubit Paulis I,X,Y,Z.
Channel pauli_channel(const std::vector<double>& probs);

Channel tensor_channels(const Channel& a, const Channel& b);
// b after a (i.e. x -> b(a(x))).
Channel compose_channels(const Channel& b, const Channel& a);
Channel mix_channels(const std::vector<Channel>& channels,
                     const std::vector<double>& weights);

// Alternating projection clean-up for solver-produced Choi matrices: PSD,
// trace-preserving, and (optionally) zero entries on the coordinates listed
// in `zero_mask` (pairs of flat indices).  Returns a Choi with violations at
// the 1e-12 scale.
Matrix polish_choi(const Matrix& choi, int in_dim, int out_dim,
                   const std::vector<std::pair<int, int>>& zero_mask = {},
                   int sweeps = 60);

// ---------------------------------------------------------------------------
// Sampling (deterministic given the generator state)
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  std::mt19937_64& gen() { return gen_; }
  double uniform(double lo = 0.0, double hi = 1.0);
  double gaussian();
  int uniform_int(int lo, int hi);  // inclusive bounds

 private:
  std::mt19937_64 gen_;
};

Matrix sample_ginibre(int rows, int cols, Rng& rng);
Vector sample_pure_vector(int dim, Rng& rng);
DensityMatrix sample_pure_state(std::vector<int> dims, Rng& rng);
DensityMatrix sample_state(std::vector<int> dims, Rng& rng);
Matrix sample_unitary(int dim, Rng& rng);
// Stinespring dilation of a random isometry with `kraus_count` Kraus terms.
Channel sample_channel(std::vector<int> in_dims, std::vector<int> out_dims,
                       int kraus_count, Rng& rng);
std::vector<double> sample_simplex(int n, Rng& rng);

// Dynamic-kind sampler used by problem files; kinds: "state", "pure_state",
// "unitary", "channel".  Unsupported kinds raise InvalidRequest.
struct SampledObject {
  std::optional<DensityMatrix> state;
  std::optional<Matrix> unitary;
  std::optional<Channel> channel;
};
SampledObject sample_object(const std::string& kind, std::vector<int> dims,
                            std::uint64_t seed);

}  // namespace qmath
}  // namespace rno

#endif  // RNO_QMATH_HPP_
