// jet.hpp
// Jet functions: the Taylor data (f_θ, f_r, f_ζ, f_ζζ) of a Hamiltonian at
// r=0, ζ=0, each a θ-Fourier series. Both coordinate conventions are
// carried by the same container:
//   real     ζ_s=(p_s,q_s),   slot layout (2i, 2i+1)
//   complex  z_s=(ξ_s,η_s),   same layout after z = C ζ, C = (1/√2)[[1,i],[1,-i]]
// Also here: the deterministic sample plan behind the surrogate ⟦·⟧ norm.
#pragma once

#include <functional>

#include "kamwave/fourier.hpp"
#include "kamwave/lattice.hpp"
#include "kamwave/spaces.hpp"

namespace kamwave {

enum class Convention { Real, Complex };

struct Jet {
  ModesPtr modes;
  LatticePtr lattice;
  int n = 0;  // tangential dimension
  Convention conv = Convention::Complex;

  ScalarSeries f0;   // f_θ
  VecSeries fr;      // n-vector
  VecSeries fz;      // 2L-vector
  MatSeries fzz;     // 2L x 2L, symmetric

  Jet() = default;
  Jet(ModesPtr m, LatticePtr lat, int n_, Convention cv)
      : modes(m), lattice(lat), n(n_), conv(cv),
        f0(m, Cplx(0)),
        fr(m, VecC::Zero(n_)),
        fz(m, VecC::Zero(lat->dim())),
        fzz(m, MatC::Zero(lat->dim(), lat->dim())) {}

  Jet& operator+=(const Jet& o) {
    f0 += o.f0; fr += o.fr; fz += o.fz; fzz += o.fzz;
    return *this;
  }
  Jet& operator*=(Cplx a) {
    f0 *= a; fr *= a; fz *= a; fzz *= a;
    return *this;
  }

  bool is_zero(Real tol = 0.0) const {
    for (int m = 0; m < modes->count(); ++m) {
      if (std::abs(f0.c[m]) > tol) return false;
      if (fr.c[m].cwiseAbs().maxCoeff() > tol) return false;
      if (fz.c[m].cwiseAbs().maxCoeff() > tol) return false;
      if (fzz.c[m].cwiseAbs().maxCoeff() > tol) return false;
    }
    return true;
  }

  // value at a phase point (complex θ allowed)
  Cplx eval(const VecC& theta, const VecC& r, const VecC& z) const {
    const Cplx v0 = f0.eval(theta);
    const VecC vr = fr.eval(theta);
    const VecC vz = fz.eval(theta);
    const MatC vzz = fzz.eval(theta);
    return v0 + (vr.transpose() * r).value() + (vz.transpose() * z).value() +
           Cplx(0.5) * (z.transpose() * vzz * z).value();
  }
};

// per-site component swap (ξ <-> η), used by reality symmetrization in the
// complex convention: realified S(θ) = ½(S(θ) + swap(conj(S(conj θ)))).
inline VecC swap_components(const VecC& v) {
  VecC out(v.size());
  for (int i = 0; i + 1 < v.size(); i += 2) {
    out[i] = v[i + 1];
    out[i + 1] = v[i];
  }
  return out;
}
inline MatC swap_components(const MatC& m) {
  MatC out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); i += 2)
    for (int j = 0; j < m.cols(); j += 2) {
      out(i, j) = m(i + 1, j + 1);
      out(i + 1, j + 1) = m(i, j);
      out(i, j + 1) = m(i + 1, j);
      out(i + 1, j) = m(i, j + 1);
    }
  return out;
}

// Reality symmetrization of a jet. In the real convention a real function
// has conj(c(-k)) = c(k) componentwise; in the complex convention the
// conjugation also swaps ξ and η.
inline Jet realify(const Jet& f) {
  Jet out = f;
  const auto& md = *f.modes;
  for (int m = 0; m < md.count(); ++m) {
    const int mn = md.neg(m);
    out.f0.c[m] = 0.5 * (f.f0.c[m] + std::conj(f.f0.c[mn]));
    out.fr.c[m] = 0.5 * (f.fr.c[m] + f.fr.c[mn].conjugate());
    if (f.conv == Convention::Real) {
      out.fz.c[m] = 0.5 * (f.fz.c[m] + f.fz.c[mn].conjugate());
      out.fzz.c[m] = 0.5 * (f.fzz.c[m] + f.fzz.c[mn].conjugate());
    } else {
      out.fz.c[m] = 0.5 * (f.fz.c[m] + swap_components(VecC(f.fz.c[mn].conjugate())));
      out.fzz.c[m] = 0.5 * (f.fzz.c[m] + swap_components(MatC(f.fzz.c[mn].conjugate())));
    }
  }
  return out;
}

// z = C ζ with C = (1/√2)[[1, i],[1, -i]] per site. Gradients are covectors:
// f_z = C^{-T} f_ζ, f_zz = C^{-T} f_ζζ C^{-1}.
inline Mat2c cmat() {
  Mat2c C;
  C << 1.0, kI, 1.0, -kI;
  return C / std::sqrt(2.0);
}

inline VecC apply_per_site(const Mat2c& M, const VecC& v) {
  VecC out(v.size());
  for (int i = 0; i + 1 < v.size(); i += 2)
    out.segment<2>(i) = M * v.segment<2>(i);
  return out;
}
inline MatC apply_per_site(const Mat2c& L, const MatC& m, const Mat2c& R) {
  MatC out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); i += 2)
    for (int j = 0; j < m.cols(); j += 2)
      out.block<2, 2>(i, j) = L * m.block<2, 2>(i, j) * R;
  return out;
}

inline Jet to_complex(const Jet& f) {
  if (f.conv == Convention::Complex) return f;
  Jet out = f;
  out.conv = Convention::Complex;
  const Mat2c C = cmat();
  const Mat2c Cit = C.inverse().transpose();
  const Mat2c Ci = C.inverse();
  for (int m = 0; m < f.modes->count(); ++m) {
    out.fz.c[m] = apply_per_site(Cit, f.fz.c[m]);
    out.fzz.c[m] = apply_per_site(Cit, MatC(f.fzz.c[m]), Ci);
  }
  return out;
}

inline Jet to_real(const Jet& f) {
  if (f.conv == Convention::Real) return f;
  Jet out = f;
  out.conv = Convention::Real;
  const Mat2c C = cmat();
  const Mat2c Ct = C.transpose();
  for (int m = 0; m < f.modes->count(); ++m) {
    out.fz.c[m] = apply_per_site(Ct, f.fz.c[m]);
    out.fzz.c[m] = apply_per_site(Ct, MatC(f.fzz.c[m]), C);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampled surrogate of the ⟦·⟧ norm: a fixed seeded plan of points in
// O^α(σ,μ) — real θ-grid plus imaginary shifts with |Im θ|_1 ≤ 0.9σ, r on
// |r| = μ², ζ with ||ζ||_α = μ — and the max of the four scaled quantities
//   |f|, μ||∂f/∂ζ||_α, μ|∂f/∂ζ|_β, μ²|∂²f/∂ζ²|_β.
// ---------------------------------------------------------------------------
struct NormSamples {
  struct Point {
    VecC theta;
    VecC r;
    VecC z;
  };
  std::vector<Point> pts;
  Real sigma = 0, mu = 0, alpha = 0, beta = 0;

  // 64 points = 16 θ draws x 4 imaginary shifts (first one zero).
  static NormSamples make(const SiteLattice& lat, int n, Real sigma, Real mu,
                          Real alpha, Real beta, std::uint64_t seed,
                          int theta_draws = 16, int n_shifts = 4) {
    NormSamples plan;
    plan.sigma = sigma; plan.mu = mu; plan.alpha = alpha; plan.beta = beta;
    Rng rng(seed);
    std::vector<VecR> shifts;
    for (int s = 0; s < n_shifts; ++s) {
      VecR y = VecR::Zero(n);
      if (s > 0) {
        Real budget = 0.9 * sigma;
        for (int a = 0; a < n; ++a) {
          const Real frac = (a + 1 == n) ? 1.0 : rng.uniform(0.0, 1.0);
          const Real ya = budget * frac * (rng.uniform() < 0.5 ? -1.0 : 1.0);
          y[a] = ya;
          budget -= std::abs(ya);
        }
      }
      shifts.push_back(y);
    }
    for (int t = 0; t < theta_draws; ++t) {
      VecR th(n);
      for (int a = 0; a < n; ++a) th[a] = rng.uniform(0.0, 2.0 * kPi);
      for (const auto& y : shifts) {
        Point p;
        p.theta = VecC(n);
        for (int a = 0; a < n; ++a) p.theta[a] = Cplx(th[a], y[a]);
        // r on the sphere |r| = μ² (complex direction)
        VecC rdir(n);
        for (int a = 0; a < n; ++a) rdir[a] = rng.cnormal();
        p.r = rdir / rdir.norm() * (mu * mu);
        // ζ with ||ζ||_α = μ
        VecC z(lat.dim());
        for (int i = 0; i < lat.dim(); ++i) z[i] = rng.cnormal();
        const Real na = vec_norm_alpha(lat, z, alpha);
        p.z = z * (mu / na);
        plan.pts.push_back(std::move(p));
      }
    }
    return plan;
  }

  // rescaled plan (same seed-paths, new domain parameters)
  NormSamples rescaled(const SiteLattice& lat, Real sigma2, Real mu2) const {
    NormSamples out = *this;
    out.sigma = sigma2;
    out.mu = mu2;
    for (auto& p : out.pts) {
      for (int a = 0; a < p.theta.size(); ++a)
        p.theta[a] = Cplx(p.theta[a].real(),
                          p.theta[a].imag() * (sigma2 / sigma));
      p.r *= (mu2 * mu2) / (mu * mu);
      p.z *= mu2 / mu;
    }
    return out;
  }
};

// evaluator interface: any object providing value/gradients at a point
struct JetData {
  Cplx value{0, 0};
  VecC grad_z;      // 2L
  MatC hess_z;      // 2L x 2L
};

inline JetData jet_data_at(const Jet& f, const NormSamples::Point& p) {
  JetData d;
  const VecC vr = f.fr.eval(p.theta);
  const VecC vz = f.fz.eval(p.theta);
  const MatC vzz = f.fzz.eval(p.theta);
  d.value = f.f0.eval(p.theta) + (vr.transpose() * p.r).value() +
            (vz.transpose() * p.z).value() +
            Cplx(0.5) * (p.z.transpose() * vzz * p.z).value();
  d.grad_z = vz + vzz * p.z;
  d.hess_z = vzz;
  return d;
}

// The surrogate ⟦·⟧ norm for any evaluator; beta_plus selects the β+ norms
// (used for the solutions S of the homological equation).
template <typename Eval>
Real sampled_jet_norm(const SiteLattice& lat, const NormSamples& plan,
                      Eval&& data_at, bool beta_plus = false) {
  Real best = 0;
  for (const auto& p : plan.pts) {
    const JetData d = data_at(p);
    best = std::max(best, std::abs(d.value));
    best = std::max(best, plan.mu * vec_norm_alpha(lat, d.grad_z, plan.alpha));
    best = std::max(best, plan.mu * vec_norm_beta(lat, d.grad_z, plan.beta, beta_plus));
    best = std::max(best,
                    plan.mu * plan.mu * dense_mat_norm(lat, d.hess_z, plan.beta, beta_plus));
  }
  return best;
}

inline Real jet_norm(const Jet& f, const NormSamples& plan, bool beta_plus = false) {
  return sampled_jet_norm(*f.lattice, plan,
                          [&](const NormSamples::Point& p) { return jet_data_at(f, p); },
                          beta_plus);
}

}  // namespace kamwave
