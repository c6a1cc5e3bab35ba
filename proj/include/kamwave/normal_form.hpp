// normal_form.hpp
// Hamiltonian normal forms h = ω(ρ)·r + ½⟨ζ, A(ρ)ζ⟩ with A = D + N,
// D = diag{λ_s I_2} and N block-diagonal in the lattice blocks. Provides the
// complex quadratic form H_z (so that ½⟨Aζ,ζ⟩ = ½⟨H_z z, z⟩ with z = Cζ),
// the generator G = H_z J_z used by the homological solver, and the
// per-block unitary diagonalization of G (closed-form, block size ≤ 2).
#pragma once

#include "kamwave/jet.hpp"
#include "kamwave/spaces.hpp"

namespace kamwave {

// Hypothesis constants in effect (A1/A2/A3/B).
struct HypoParams {
  Real c0 = 0, c1 = 0;      // separation constants (measured on truncation)
  Real delta = 0.2;         // A2 transversality constant
  Real delta0 = 0.1;        // allowed C¹ drift of ω
  Real beta = 0.5;
};

inline MatC jz_matrix(const SiteLattice& lat, Convention conv) {
  MatC J = MatC::Zero(lat.dim(), lat.dim());
  for (int i = 0; i < lat.n_sites(); ++i) {
    if (conv == Convention::Real) {
      J(2 * i, 2 * i + 1) = -1.0;
      J(2 * i + 1, 2 * i) = 1.0;
    } else {
      J(2 * i, 2 * i + 1) = kI;
      J(2 * i + 1, 2 * i) = -kI;
    }
  }
  return J;
}

struct NormalFormHam {
  LatticePtr lattice;
  int n = 0;
  VecR omega;        // internal frequencies
  MatR domega;       // ∂ω_a/∂ρ_b (exact where available)
  VecR lambda;       // per site index
  BlockMatR N;       // normal-form part (block diagonal, Π-projected)
  Real offset = 0;   // accumulated constant from the KAM steps
  HypoParams hypo;

  NormalFormHam() = default;
  NormalFormHam(LatticePtr lat, int n_, VecR om, MatR dom, VecR lam,
                HypoParams hp)
      : lattice(lat), n(n_), omega(std::move(om)), domega(std::move(dom)),
        lambda(std::move(lam)), N(lat), hypo(hp) {
    check_d_matrix();
  }

  void check_d_matrix() const {
    for (int i = 0; i < lattice->n_sites(); ++i)
      if (lambda[i] < hypo.c0 * bracket_weight(lattice->site(i)) - 1e-12)
        throw std::runtime_error("normal form: lambda_s < c0 <s> at site " +
                                 std::to_string(lattice->site(i)));
  }

  // Hypothesis B: |N|_β ≤ δ/8
  void check_hypothesis_b() const {
    const Real nb = mat_norm(N, hypo.beta);
    if (nb > hypo.delta / 8.0 + 1e-15)
      throw std::runtime_error("hypothesis B violated: |N|_beta = " +
                               std::to_string(nb) + " > delta/8 = " +
                               std::to_string(hypo.delta / 8.0));
  }

  // A = D + N (real 2L x 2L)
  MatR a_matrix() const {
    MatR A = N.m;
    for (int i = 0; i < lattice->n_sites(); ++i) {
      A(2 * i, 2 * i) += lambda[i];
      A(2 * i + 1, 2 * i + 1) += lambda[i];
    }
    return A;
  }

  // ½⟨Aζ,ζ⟩ = ½⟨H_z z, z⟩ under z = Cζ:  H_z = C^{-T} A C^{-1}
  MatC hz_matrix() const {
    const Mat2c Ci = cmat().inverse();
    const Mat2c Cit = Ci.transpose();
    return apply_per_site(Cit, MatC(a_matrix().cast<Cplx>()), Ci);
  }

  // Hermitian matrix Q of the complex form ⟨ξ, Qη⟩: Q_ij = H_z[2i, 2j+1]
  MatC q_matrix() const {
    const MatC H = hz_matrix();
    const int L = lattice->n_sites();
    MatC Q(L, L);
    for (int i = 0; i < L; ++i)
      for (int j = 0; j < L; ++j) Q(i, j) = H(2 * i, 2 * j + 1);
    return Q;
  }

  // value / gradient in the real convention
  Real eval(const VecR& theta, const VecR& r, const VecR& zeta) const {
    (void)theta;
    return offset + omega.dot(r) + 0.5 * zeta.dot(a_matrix() * zeta);
  }
  Cplx eval_c(const VecC& r, const VecC& z, Convention conv) const {
    const MatC A = conv == Convention::Real ? MatC(a_matrix().cast<Cplx>())
                                            : hz_matrix();
    return offset + (omega.cast<Cplx>().transpose() * r).value() +
           Cplx(0.5) * (z.transpose() * A * z).value();
  }
};

// Per-block unitary diagonalization of G = H_z J_z.
// In the (ξ | η) split, G = diag(-iQ_b, +i conj(Q_b)) per block, so the
// spectrum is ±i α with α the (real) eigenvalues of the Hermitian Q_b.
struct BlockSpectral {
  // per z-index (interleaved layout), after assembling V blockwise:
  //   G = V diag(i * lam_tilde) V†  with lam_tilde real
  MatC V;           // unitary, 2L x 2L, block-diagonal in z-blocks
  VecR lam_tilde;   // λ̃_a: -α on ξ-type columns, +α on η-type columns
  std::vector<int> site_of;   // representative site index per column
  std::vector<int> block_of;  // lattice block per column
  std::vector<int> eta_side;  // 0 = ξ-type column, 1 = η-type
};

// closed-form Hermitian eigendecomposition for blocks of size ≤ 2
inline void hermitian_eig_small(const MatC& Q, VecR& evals, MatC& evecs) {
  const int d = static_cast<int>(Q.rows());
  evals.resize(d);
  evecs.resize(d, d);
  if (d == 1) {
    evals[0] = Q(0, 0).real();
    evecs(0, 0) = 1.0;
    return;
  }
  const Real a = Q(0, 0).real(), b = Q(1, 1).real();
  const Cplx c = Q(0, 1);
  const Real rad = std::sqrt(sqr((a - b) / 2) + std::norm(c));
  evals[0] = (a + b) / 2 - rad;
  evals[1] = (a + b) / 2 + rad;
  if (std::abs(c) < 1e-300) {
    evals[0] = std::min(a, b);
    evals[1] = std::max(a, b);
    evecs.setZero();
    if (a <= b) {
      evecs.setIdentity();
    } else {
      evecs(1, 0) = 1.0;
      evecs(0, 1) = 1.0;
    }
    return;
  }
  // eigenvector for evals[k]: (c, λ−a)ᵀ normalized
  for (int k = 0; k < 2; ++k) {
    VecC v(2);
    v[0] = c;
    v[1] = evals[k] - a;
    const Real nv = v.norm();
    evecs.col(k) = v / nv;
  }
}

inline BlockSpectral block_spectral(const NormalFormHam& h) {
  const auto& lat = *h.lattice;
  const int dim = lat.dim();
  BlockSpectral bs;
  bs.V = MatC::Zero(dim, dim);
  bs.lam_tilde = VecR::Zero(dim);
  bs.site_of.assign(dim, 0);
  bs.block_of.assign(dim, 0);
  bs.eta_side.assign(dim, 0);
  const MatC Q = h.q_matrix();
  for (int b = 0; b < lat.n_blocks(); ++b) {
    const auto& blk = lat.block(b);
    const int d = static_cast<int>(blk.size());
    if (d > 2) throw std::runtime_error("block size > 2 unsupported (d <= 2)");
    MatC Qb(d, d);
    for (int r = 0; r < d; ++r)
      for (int cc = 0; cc < d; ++cc) Qb(r, cc) = Q(blk[r], blk[cc]);
    VecR alpha;
    MatC P;
    hermitian_eig_small(Qb, alpha, P);
    // ξ-side columns: G|_ξ = -iQ_b = P (-i alpha) P†
    // η-side columns: G|_η = +i conj(Q_b) = conj(P) (+i alpha) conj(P)†
    for (int k = 0; k < d; ++k) {
      const int col_xi = 2 * blk[k];      // reuse the z-index slots
      const int col_eta = 2 * blk[k] + 1;
      for (int r = 0; r < d; ++r) {
        bs.V(2 * blk[r], col_xi) = P(r, k);
        bs.V(2 * blk[r] + 1, col_eta) = std::conj(P(r, k));
      }
      bs.lam_tilde[col_xi] = -alpha[k];
      bs.lam_tilde[col_eta] = alpha[k];
      bs.site_of[col_xi] = blk[k];
      bs.site_of[col_eta] = blk[k];
      bs.block_of[col_xi] = b;
      bs.block_of[col_eta] = b;
      bs.eta_side[col_xi] = 0;
      bs.eta_side[col_eta] = 1;
    }
  }
  return bs;
}

}  // namespace kamwave
