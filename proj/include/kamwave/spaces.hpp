// spaces.hpp
// Weighted sequence spaces Y_α / L_β / L_{β+}, 2x2-block matrices with the
// M_β / M_{β+} norms, the projector Π onto span{I, σ2}, and the block
// algebra obeying the norm inequalities (products, matrix-vector, outer).
//
// Storage is dense: a sequence is a 2L-vector (two components per site), a
// block matrix is the full 2L x 2L matrix; the (s,s') block is the 2x2
// submatrix at (2i, 2j). Types are templated on the scalar so the same code
// serves the real (p,q) and complex (ξ,η) conventions.
#pragma once

#include <cmath>

#include "kamwave/core.hpp"
#include "kamwave/lattice.hpp"

namespace kamwave {

template <typename Scalar>
struct WeightedSeq {
  LatticePtr lattice;
  Eigen::Vector<Scalar, Eigen::Dynamic> v;  // size 2L, (site-major)

  WeightedSeq() = default;
  explicit WeightedSeq(LatticePtr lat)
      : lattice(std::move(lat)),
        v(Eigen::Vector<Scalar, Eigen::Dynamic>::Zero(lattice->dim())) {}

  Eigen::Vector<Scalar, 2> pair(int i) const { return v.template segment<2>(2 * i); }
  void set_pair(int i, Scalar a, Scalar b) { v[2 * i] = a; v[2 * i + 1] = b; }
  Real pair_abs(int i) const {
    return std::sqrt(std::norm(Cplx(v[2 * i])) + std::norm(Cplx(v[2 * i + 1])));
  }
};

using SeqR = WeightedSeq<Real>;
using SeqC = WeightedSeq<Cplx>;

// ||ζ||_α = sqrt(Σ |ζ_s|² <s>^{2α})
template <typename Scalar>
Real norm_alpha(const WeightedSeq<Scalar>& z, Real alpha) {
  Real acc = 0;
  for (int i = 0; i < z.lattice->n_sites(); ++i)
    acc += sqr(z.pair_abs(i)) * std::pow(bracket_weight(z.lattice->site(i)), 2 * alpha);
  return std::sqrt(acc);
}

// |ζ|_β = sup |ζ_s| <s>^β ; with plus the exponent is β+1 (L_{β+}).
template <typename Scalar>
Real norm_beta(const WeightedSeq<Scalar>& z, Real beta, bool plus = false) {
  const Real e = plus ? beta + 1.0 : beta;
  Real m = 0;
  for (int i = 0; i < z.lattice->n_sites(); ++i)
    m = std::max(m, z.pair_abs(i) * std::pow(bracket_weight(z.lattice->site(i)), e));
  return m;
}

// Same norms on raw 2L vectors (used by jets, which store plain vectors).
template <typename Derived>
Real vec_norm_alpha(const SiteLattice& lat, const Eigen::MatrixBase<Derived>& v,
                    Real alpha) {
  Real acc = 0;
  for (int i = 0; i < lat.n_sites(); ++i) {
    const Real a2 = std::norm(Cplx(v[2 * i])) + std::norm(Cplx(v[2 * i + 1]));
    acc += a2 * std::pow(bracket_weight(lat.site(i)), 2 * alpha);
  }
  return std::sqrt(acc);
}

template <typename Derived>
Real vec_norm_beta(const SiteLattice& lat, const Eigen::MatrixBase<Derived>& v,
                   Real beta, bool plus = false) {
  const Real e = plus ? beta + 1.0 : beta;
  Real m = 0;
  for (int i = 0; i < lat.n_sites(); ++i) {
    const Real a = std::sqrt(std::norm(Cplx(v[2 * i])) + std::norm(Cplx(v[2 * i + 1])));
    m = std::max(m, a * std::pow(bracket_weight(lat.site(i)), e));
  }
  return m;
}

// Π: orthogonal projector of a 2x2 matrix onto span{I, σ2}.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> pi_project(const Eigen::Matrix<Scalar, 2, 2>& m) {
  const Scalar a = (m(0, 0) + m(1, 1)) / Scalar(2);
  const Scalar b = (m(1, 0) - m(0, 1)) / Scalar(2);
  Eigen::Matrix<Scalar, 2, 2> out;
  out << a, -b, b, a;
  return out;
}

template <typename Scalar>
struct BlockMatrix {
  LatticePtr lattice;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m;  // 2L x 2L
  bool nf_flag = false;  // block-diagonal over the lattice's blocks

  BlockMatrix() = default;
  explicit BlockMatrix(LatticePtr lat)
      : lattice(std::move(lat)),
        m(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(
            lattice->dim(), lattice->dim())) {}

  Eigen::Block<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>, 2, 2>
  block(int i, int j) const { return m.template block<2, 2>(2 * i, 2 * j); }
  Eigen::Block<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>, 2, 2>
  block(int i, int j) { return m.template block<2, 2>(2 * i, 2 * j); }

  // enforce A_s^{s'} = t(A_{s'}^s) and ΠA = A blockwise
  void symmetrize_project() {
    const int L = lattice->n_sites();
    for (int i = 0; i < L; ++i)
      for (int j = i; j < L; ++j) {
        Eigen::Matrix<Scalar, 2, 2> b =
            (block(i, j) + block(j, i).transpose()) / Scalar(2);
        b = pi_project<Scalar>(b);
        block(i, j) = b;
        block(j, i) = b.transpose();
      }
  }
};

using BlockMatR = BlockMatrix<Real>;
using BlockMatC = BlockMatrix<Cplx>;

// max-entry norm of a 2x2 block
template <typename Derived>
Real block_sup(const Eigen::MatrixBase<Derived>& b) {
  return b.cwiseAbs().maxCoeff();
}

// |A|_β = sup <s>^β <s'>^β ||A_s^{s'}||_∞ ;
// plus: extra factor (1 + ||s|-|s'||)  (M_{β+}).
template <typename Scalar>
Real mat_norm(const BlockMatrix<Scalar>& A, Real beta, bool plus = false) {
  const auto& lat = *A.lattice;
  Real mx = 0;
  for (int i = 0; i < lat.n_sites(); ++i)
    for (int j = 0; j < lat.n_sites(); ++j) {
      const Real sup = block_sup(A.block(i, j));
      if (sup == 0) continue;
      Real w = std::pow(bracket_weight(lat.site(i)), beta) *
               std::pow(bracket_weight(lat.site(j)), beta);
      if (plus)
        w *= 1.0 + std::abs(std::abs(lat.site(i)) - std::abs(lat.site(j)));
      mx = std::max(mx, w * sup);
    }
  return mx;
}

// Same norm on a raw 2L x 2L matrix (jets store plain matrices).
template <typename Derived>
Real dense_mat_norm(const SiteLattice& lat, const Eigen::MatrixBase<Derived>& M,
                    Real beta, bool plus = false) {
  Real mx = 0;
  for (int i = 0; i < lat.n_sites(); ++i)
    for (int j = 0; j < lat.n_sites(); ++j) {
      const Real sup = M.template block<2, 2>(2 * i, 2 * j).cwiseAbs().maxCoeff();
      if (sup == 0) continue;
      Real w = std::pow(bracket_weight(lat.site(i)), beta) *
               std::pow(bracket_weight(lat.site(j)), beta);
      if (plus)
        w *= 1.0 + std::abs(std::abs(lat.site(i)) - std::abs(lat.site(j)));
      mx = std::max(mx, w * sup);
    }
  return mx;
}

template <typename Scalar>
BlockMatrix<Scalar> mat_mul(const BlockMatrix<Scalar>& A,
                            const BlockMatrix<Scalar>& B) {
  if (A.lattice->n_sites() != B.lattice->n_sites())
    throw DimensionError("mat_mul: truncation mismatch");
  BlockMatrix<Scalar> C(A.lattice);
  C.m = A.m * B.m;
  return C;
}

template <typename Scalar>
WeightedSeq<Scalar> mat_vec(const BlockMatrix<Scalar>& A,
                            const WeightedSeq<Scalar>& z) {
  if (A.lattice->n_sites() != z.lattice->n_sites())
    throw DimensionError("mat_vec: truncation mismatch");
  WeightedSeq<Scalar> out(z.lattice);
  out.v = A.m * z.v;
  return out;
}

// Symmetrized, Π-projected outer product: (X⊗Y)_s^{s'} = Π(X_s Y_{s'}^T + Y_s X_{s'}^T).
// Lands in the matrix class M and satisfies |X⊗Y|_β ≤ 2 |X|_β |Y|_β.
template <typename Scalar>
BlockMatrix<Scalar> outer(const WeightedSeq<Scalar>& X,
                          const WeightedSeq<Scalar>& Y) {
  if (X.lattice->n_sites() != Y.lattice->n_sites())
    throw DimensionError("outer: truncation mismatch");
  BlockMatrix<Scalar> A(X.lattice);
  const int L = X.lattice->n_sites();
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      Eigen::Matrix<Scalar, 2, 2> b =
          X.pair(i) * Y.pair(j).transpose() + Y.pair(i) * X.pair(j).transpose();
      A.block(i, j) = pi_project<Scalar>(b);
    }
  return A;
}

// Truncated evaluation of the appendix series
//   sup_s Σ_k 1/(<k>^{2γ} (1 + ||k|-|s||))
// over the lattice. The norm-Lemma test constant is 2x this value (the 2
// absorbs the max-entry-norm submultiplicativity factor).
inline Real series_constant(const SiteLattice& lat, Real gamma) {
  Real best = 0;
  for (int i = 0; i < lat.n_sites(); ++i) {
    const int s = std::abs(lat.site(i));
    Real acc = 0;
    for (int j = 0; j < lat.n_sites(); ++j) {
      const int k = lat.site(j);
      acc += 1.0 / (std::pow(bracket_weight(k), 2 * gamma) *
                    (1.0 + std::abs(std::abs(k) - s)));
    }
    best = std::max(best, acc);
  }
  return best;
}

}  // namespace kamwave
