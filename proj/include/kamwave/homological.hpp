// homological.hpp
// The four linear homological component equations and the nonlinear cascade.
// Everything is solved per Fourier mode in the complex convention:
//   θ:  ω·∇S_θ + f_θ = C + R_θ
//   r:  ω·∇S_r + f_r = χ + R_r
//   ζ:  ω·∇S_z + G S_z + f_z = R_z
//   ζζ: ω·∇S_zz + G S_zz + S_zz ᵗG + f_zz = K̂ δ_{k0} + R_zz
// with G = H_z J_z block-diagonal; the per-block unitary V turns the ζ and
// ζζ equations into entrywise divisions by i(k·ω + λ̃_a (+ λ̃_b)), with
// λ̃ = ∓α the signed eigenvalues of the Hermitian block forms. Small
// divisors are gated by κ / κ̃ thresholds and reported; a failed gate names
// the mode and block and signals parameter exclusion. Solutions are
// realified as ½(S(θ) + conj(S(θ̄))) (with the ξ↔η swap), which preserves
// every solved identity for real data.
#pragma once

#include <optional>
#include <sstream>

#include "kamwave/normal_form.hpp"
#include "kamwave/poly.hpp"

namespace kamwave {

struct DivisorRow {
  std::vector<int> k;
  int s = 0, sp = 0;
  std::string family;  // k.omega | first | sum | difference
  Real value = 0, threshold = 0;
};

struct DivisorReport {
  std::vector<DivisorRow> rows;   // failures and near-misses
  Real near_ratio = 4.0;          // record rows with value < near_ratio * threshold
  long checks = 0;
  Real worst_ratio = std::numeric_limits<Real>::infinity();

  void record(const std::vector<int>& k, int s, int sp, const std::string& fam,
              Real value, Real threshold) {
    ++checks;
    if (threshold > 0) worst_ratio = std::min(worst_ratio, value / threshold);
    if (value < near_ratio * threshold)
      rows.push_back({k, s, sp, fam, value, threshold});
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "k,s,s_prime,type,value,threshold\n";
    for (const auto& r : rows) {
      os << "\"(";
      for (size_t i = 0; i < r.k.size(); ++i)
        os << r.k[i] << (i + 1 < r.k.size() ? " " : "");
      os << ")\"," << r.s << "," << r.sp << "," << r.family << ","
         << r.value << "," << r.threshold << "\n";
    }
    return os.str();
  }
};

struct HomologicalOptions {
  Real kappa = 1e-3;
  Real kappa_tilde = 0;   // 0: derive from kappa via the paper's formula
  int N = 8;
  Real delta = 0.2;       // used by the κ̃ formula
  Real beta = 0.5;
  Real expose_rel = 1e-13;  // entries below expose_rel * scale are junk
  bool enforce = true;      // throw ResonanceError on a failed gate

  Real kappa_tilde_eff() const {
    if (kappa_tilde > 0) return kappa_tilde;
    return delta * std::pow(kappa / delta, 6.0 * beta / (9.0 + 2.0 * beta));
  }
};

struct LadderParams {  // σ/μ ladder of the nonlinear cascade (reporting)
  Real sigma = 0.8, sigma_prime = 0.4;
  Real mu = 0.2, mu_prime = 0.1;
  Real sigma_i(int i) const { return sigma + (sigma_prime - sigma) * i / 5.0; }
  Real mu_i(int i) const {
    return mu * std::pow(mu_prime / mu, i / 5.0);
  }
};

struct HomologicalSolution {
  Jet S, R;            // complex convention, realified
  Cplx C{0, 0};        // mean of the θ-component
  VecC chi;            // mean of the r-component
  MatC Khat_z;         // symmetric complex quadratic form of K̂
  BlockMatR Khat;      // real normal-form block matrix
  DivisorReport report;
  Real residual = 0;       // max per-mode linear residual (∞-norm)
  Real cascade_leak = 0;   // weight-count sanity: jets that must vanish
};

class HomologicalSolver {
 public:
  HomologicalSolver(const NormalFormHam& h, HomologicalOptions opts)
      : h_(h), opts_(opts), bs_(block_spectral(h)) {
    const MatC Hz = h.hz_matrix();
    const MatC Jz = jz_matrix(*h.lattice, Convention::Complex);
    G_ = Hz * Jz;
    Gt_ = G_.transpose();
  }

  const HomologicalOptions& options() const { return opts_; }

  // --- component solvers -------------------------------------------------

  // prototype angle equation ∇_θφ·ω = ψ − R: φ̂(k) = −i ψ̂(k)/(k·ω) on the
  // solved modes, R the modes beyond N (ψ must be mean-free)
  std::pair<ScalarSeries, ScalarSeries> solve_angle(
      const ScalarSeries& psi, DivisorReport& rep, Real scale,
      const std::string& fam = "k.omega") const {
    const auto& md = *psi.modes;
    ScalarSeries phi(psi.modes, Cplx(0)), rem(psi.modes, Cplx(0));
    for (int m = 0; m < md.count(); ++m) {
      if (m == md.zero_mode()) continue;
      if (md.order1(m) > opts_.N) {
        rem.c[m] = psi.c[m];
        continue;
      }
      if (std::abs(psi.c[m]) <= opts_.expose_rel * scale) continue;
      const Real kw = k_dot_omega(md.k(m));
      gate(md.k(m), 0, 0, fam, std::abs(kw), opts_.kappa, rep);
      phi.c[m] = -kI * psi.c[m] / kw;
    }
    return {phi, rem};
  }

  // r-component: vector-valued angle equation; χ = mean
  struct RSolve { VecC chi; VecSeries S, R; };
  RSolve solve_r(const VecSeries& fr, DivisorReport& rep, Real scale) const {
    const auto& md = *fr.modes;
    RSolve out{fr.mean(), VecSeries(fr.modes, VecC::Zero(h_.n)),
               VecSeries(fr.modes, VecC::Zero(h_.n))};
    for (int m = 0; m < md.count(); ++m) {
      if (m == md.zero_mode()) continue;
      if (md.order1(m) > opts_.N) {
        out.R.c[m] = fr.c[m];
        continue;
      }
      if (fr.c[m].cwiseAbs().maxCoeff() <= opts_.expose_rel * scale) continue;
      const Real kw = k_dot_omega(md.k(m));
      gate(md.k(m), 0, 0, "k.omega", std::abs(kw), opts_.kappa, rep);
      out.S.c[m] = kI * fr.c[m] / kw;
    }
    return out;
  }

  // ζ-component: per mode, per eigencolumn division
  struct ZSolve { VecSeries S, R; };
  ZSolve solve_z(const VecSeries& fz, DivisorReport& rep, Real scale) const {
    const auto& md = *fz.modes;
    const int dim = h_.lattice->dim();
    ZSolve out{VecSeries(fz.modes, VecC::Zero(dim)),
               VecSeries(fz.modes, VecC::Zero(dim))};
    for (int m = 0; m < md.count(); ++m) {
      if (md.order1(m) > opts_.N) {
        out.R.c[m] = fz.c[m];
        continue;
      }
      const Real kw = k_dot_omega(md.k(m));
      const VecC fp = bs_.V.adjoint() * fz.c[m];
      VecC sp = VecC::Zero(dim);
      for (int a = 0; a < dim; ++a) {
        if (std::abs(fp[a]) <= opts_.expose_rel * scale) continue;
        const Real dv = kw + bs_.lam_tilde[a];
        const int site = h_.lattice->site(bs_.site_of[a]);
        gate(md.k(m), site, 0, "first", std::abs(dv),
             opts_.kappa * bracket_weight(site), rep);
        sp[a] = kI * fp[a] / dv;
      }
      out.S.c[m] = bs_.V * sp;
    }
    return out;
  }

  // ζζ-component: per mode, entrywise in the V-basis; k=0 same-block
  // ξη entries go to K̂
  struct ZZSolve { MatSeries S, R; MatC Khat_z; };
  ZZSolve solve_zz(const MatSeries& fzz, DivisorReport& rep, Real scale) const {
    const auto& md = *fzz.modes;
    const int dim = h_.lattice->dim();
    ZZSolve out{MatSeries(fzz.modes, MatC::Zero(dim, dim)),
                MatSeries(fzz.modes, MatC::Zero(dim, dim)),
                MatC::Zero(dim, dim)};
    const Real ktil = opts_.kappa_tilde_eff();
    for (int m = 0; m < md.count(); ++m) {
      if (md.order1(m) > opts_.N) {
        out.R.c[m] = fzz.c[m];
        continue;
      }
      const bool zero_mode = (m == md.zero_mode());
      const Real kw = k_dot_omega(md.k(m));
      const MatC fp = bs_.V.adjoint() * fzz.c[m] * bs_.V.conjugate();
      MatC sp = MatC::Zero(dim, dim);
      MatC kp = MatC::Zero(dim, dim);
      for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) {
          if (std::abs(fp(a, b)) <= opts_.expose_rel * scale) continue;
          const bool cross = bs_.eta_side[a] != bs_.eta_side[b];
          const bool same_block = bs_.block_of[a] == bs_.block_of[b];
          if (zero_mode && cross && same_block) {
            kp(a, b) = fp(a, b);  // normal-form extraction
            continue;
          }
          const int sa = h_.lattice->site(bs_.site_of[a]);
          const int sb = h_.lattice->site(bs_.site_of[b]);
          const Real dv = kw + bs_.lam_tilde[a] + bs_.lam_tilde[b];
          if (cross) {
            const Real thr =
                ktil * (1.0 + std::abs(std::abs(sa) - std::abs(sb)));
            gate(md.k(m), sa, sb, "difference", std::abs(dv), thr, rep);
          } else {
            const Real thr =
                opts_.kappa * (bracket_weight(sa) + bracket_weight(sb));
            gate(md.k(m), sa, sb, "sum", std::abs(dv), thr, rep);
          }
          sp(a, b) = kI * fp(a, b) / dv;
        }
      out.S.c[m] = bs_.V * sp * bs_.V.transpose();
      if (zero_mode) out.Khat_z = bs_.V * kp * bs_.V.transpose();
    }
    return out;
  }

  // --- full solves --------------------------------------------------------

  HomologicalSolution solve_linear(const Jet& fT) const {
    if (fT.conv != Convention::Complex)
      throw DimensionError("solve_linear expects the complex convention");
    HomologicalSolution sol;
    sol.S = Jet(fT.modes, fT.lattice, fT.n, Convention::Complex);
    sol.R = sol.S;
    const Real scale = jet_scale(fT);

    sol.C = fT.f0.mean();
    // θ-equation ω·∇S_θ = C − f_θ + R_θ via the prototype with ψ = C − f_θ
    ScalarSeries psi = fT.f0;
    psi *= Cplx(-1);
    psi.c[psi.modes->zero_mode()] = 0;
    auto [sth, rth] = solve_angle(psi, sol.report, scale);
    sol.S.f0 = sth;
    sol.R.f0 = rth;
    sol.R.f0 *= Cplx(-1);  // R_θ carries the high modes of f_θ itself

    auto rs = solve_r(fT.fr, sol.report, scale);
    sol.chi = rs.chi;
    sol.S.fr = rs.S;
    sol.R.fr = rs.R;

    auto zs = solve_z(fT.fz, sol.report, scale);
    sol.S.fz = zs.S;
    sol.R.fz = zs.R;

    auto zzs = solve_zz(fT.fzz, sol.report, scale);
    sol.S.fzz = zzs.S;
    sol.R.fzz = zzs.R;
    sol.Khat_z = zzs.Khat_z;

    realify_solution(sol);
    sol.residual = linear_residual(sol, fT);
    return sol;
  }

  // Nonlinear cascade {h,S} + {f-f^T,S}^T + f^T = ĥ + R (three stages).
  HomologicalSolution solve_nonlinear(const PolyHamiltonian& f,
                                      const LadderParams& lad = {}) const {
    (void)lad;
    if (f.conv != Convention::Complex)
      throw DimensionError("solve_nonlinear expects the complex convention");
    const Jet fT = f.jet();
    const Real scale = jet_scale(fT);
    HomologicalSolution sol;
    sol.S = Jet(fT.modes, fT.lattice, fT.n, Convention::Complex);
    sol.R = sol.S;

    // stage 0: θ-field
    sol.C = fT.f0.mean();
    ScalarSeries psi = fT.f0;
    psi *= Cplx(-1);
    psi.c[psi.modes->zero_mode()] = 0;
    auto [s0, r0] = solve_angle(psi, sol.report, scale);
    s0 = kamwave::realify(s0);
    sol.S.f0 = s0;
    sol.R.f0 = r0;
    sol.R.f0 *= Cplx(-1);

    const PolyHamiltonian fmT = f.minus_jet();

    Jet S0j(fT.modes, fT.lattice, fT.n, Convention::Complex);
    S0j.f0 = s0;
    const Jet j1 = poisson_bracket(fmT, PolyHamiltonian::from_jet(S0j, f.opts)).jet();
    sol.cascade_leak = std::max(sol.cascade_leak, series_sup(j1.f0));

    // stage 1: r and ζ fields of f^T + j1
    VecSeries fr_in = fT.fr; fr_in += j1.fr;
    VecSeries fz_in = fT.fz; fz_in += j1.fz;
    auto rs = solve_r(fr_in, sol.report, scale);
    auto zs = solve_z(fz_in, sol.report, scale);
    Jet S1j(fT.modes, fT.lattice, fT.n, Convention::Complex);
    S1j.fr = rs.S;
    S1j.fz = zs.S;
    S1j = kamwave::realify(S1j);
    sol.chi = rs.chi;
    sol.S.fr = S1j.fr;
    sol.S.fz = S1j.fz;
    sol.R.fr = rs.R;
    sol.R.fz = zs.R;

    const Jet j2 = poisson_bracket(fmT, PolyHamiltonian::from_jet(S1j, f.opts)).jet();
    sol.cascade_leak = std::max(sol.cascade_leak, series_sup(j2.f0));
    for (int m = 0; m < fT.modes->count(); ++m)
      sol.cascade_leak =
          std::max(sol.cascade_leak, j2.fz.c[m].cwiseAbs().maxCoeff());

    // stage 2: ζζ field of f^T + j1 + j2, plus the r-field of j2
    MatSeries fzz_in = fT.fzz;
    fzz_in += j1.fzz;
    fzz_in += j2.fzz;
    auto zzs = solve_zz(fzz_in, sol.report, scale);
    auto rs2 = solve_r(j2.fr, sol.report, scale);
    sol.S.fzz = zzs.S;
    sol.R.fzz = zzs.R;
    sol.Khat_z = zzs.Khat_z;
    sol.chi += rs2.chi;
    sol.S.fr += rs2.S;
    sol.R.fr += rs2.R;

    realify_solution(sol);
    return sol;
  }

  // exact jet of {h, S} (used by residual checks and the KAM step)
  Jet h_bracket(const Jet& S) const {
    Jet out(S.modes, S.lattice, S.n, Convention::Complex);
    for (int m = 0; m < S.modes->count(); ++m) {
      const Cplx ikw = kI * k_dot_omega(S.modes->k(m));
      out.f0.c[m] = ikw * S.f0.c[m];
      out.fr.c[m] = ikw * S.fr.c[m];
      out.fz.c[m] = ikw * S.fz.c[m] + G_ * S.fz.c[m];
      out.fzz.c[m] = ikw * S.fzz.c[m] + G_ * S.fzz.c[m] + S.fzz.c[m] * Gt_;
    }
    return out;
  }

  // max per-mode algebraic residual of {h,S} + fT − ĥ − R = 0
  Real linear_residual(const HomologicalSolution& sol, const Jet& fT) const {
    const Jet hs = h_bracket(sol.S);
    Real worst = 0;
    const auto& md = *fT.modes;
    for (int m = 0; m < md.count(); ++m) {
      Cplx r0 = hs.f0.c[m] + fT.f0.c[m] - sol.R.f0.c[m];
      VecC rr = hs.fr.c[m] + fT.fr.c[m] - sol.R.fr.c[m];
      if (m == md.zero_mode()) {
        r0 -= sol.C;
        rr -= sol.chi;
      }
      const VecC rz = hs.fz.c[m] + fT.fz.c[m] - sol.R.fz.c[m];
      MatC rzz = hs.fzz.c[m] + fT.fzz.c[m] - sol.R.fzz.c[m];
      if (m == md.zero_mode()) rzz -= sol.Khat_z;
      worst = std::max({worst, std::abs(r0), rr.cwiseAbs().maxCoeff(),
                        rz.cwiseAbs().maxCoeff(), rzz.cwiseAbs().maxCoeff()});
    }
    return worst;
  }

  Real k_dot_omega(const std::vector<int>& k) const {
    Real kw = 0;
    for (int a = 0; a < h_.n; ++a) kw += k[a] * h_.omega[a];
    return kw;
  }

  // ĥ = C + χ·r + ½⟨K̂_z z, z⟩ as a jet
  Jet hhat_jet(const HomologicalSolution& sol, const Jet& like) const {
    Jet out(like.modes, like.lattice, like.n, Convention::Complex);
    const int z = like.modes->zero_mode();
    out.f0.c[z] = sol.C;
    out.fr.c[z] = sol.chi;
    out.fzz.c[z] = sol.Khat_z;
    return out;
  }

  // pointwise residual of {h,S} + {f−f^T,S}^T + f^T − ĥ − R at sample points
  Real nonlinear_residual(const PolyHamiltonian& f,
                          const HomologicalSolution& sol,
                          const std::vector<NormSamples::Point>& pts) const {
    const Jet fT = f.jet();
    const Jet hs = h_bracket(sol.S);
    const Jet cross =
        poisson_bracket(f.minus_jet(), PolyHamiltonian::from_jet(sol.S, f.opts))
            .jet();
    const Jet hh = hhat_jet(sol, fT);
    Real worst = 0;
    for (const auto& p : pts) {
      const Cplx v = hs.eval(p.theta, p.r, p.z) + cross.eval(p.theta, p.r, p.z) +
                     fT.eval(p.theta, p.r, p.z) - hh.eval(p.theta, p.r, p.z) -
                     sol.R.eval(p.theta, p.r, p.z);
      worst = std::max(worst, std::abs(v));
    }
    return worst;
  }

  const MatC& g_matrix() const { return G_; }
  const BlockSpectral& spectral() const { return bs_; }

 private:
  void gate(const std::vector<int>& k, int s, int sp, const std::string& fam,
            Real value, Real threshold, DivisorReport& rep) const {
    rep.record(k, s, sp, fam, value, threshold);
    if (opts_.enforce && value < threshold) {
      std::ostringstream os;
      os << "resonance: |" << fam << "| = " << value << " < " << threshold
         << " at k=(";
      for (size_t i = 0; i < k.size(); ++i)
        os << k[i] << (i + 1 < k.size() ? "," : "");
      os << "), s=" << s << ", s'=" << sp;
      throw ResonanceError(os.str(), k, s, sp, fam, value, threshold);
    }
  }

  static Real series_sup(const ScalarSeries& f) {
    Real m = 0;
    for (const auto& c : f.c) m = std::max(m, std::abs(c));
    return m;
  }

  static Real jet_scale(const Jet& f) {
    Real s = 0;
    for (int m = 0; m < f.modes->count(); ++m) {
      s = std::max(s, std::abs(f.f0.c[m]));
      s = std::max(s, f.fr.c[m].cwiseAbs().maxCoeff());
      s = std::max(s, f.fz.c[m].cwiseAbs().maxCoeff());
      s = std::max(s, f.fzz.c[m].cwiseAbs().maxCoeff());
    }
    return s;
  }

  void realify_solution(HomologicalSolution& sol) const {
    sol.S = kamwave::realify(sol.S);
    sol.R = kamwave::realify(sol.R);
    sol.C = Cplx(sol.C.real(), 0.0);
    sol.chi = 0.5 * (sol.chi + sol.chi.conjugate());
    sol.Khat_z = 0.5 * (sol.Khat_z + swap_components(MatC(sol.Khat_z.conjugate())));
    // real normal-form block matrix: K̂_real = C^T K̂_z C per site pair
    const Mat2c C2 = cmat();
    const MatC kr = apply_per_site(C2.transpose(), sol.Khat_z, C2);
    sol.Khat = BlockMatR(h_.lattice);
    sol.Khat.m = kr.real();
    sol.Khat.symmetrize_project();
    sol.Khat.nf_flag = true;
  }

  const NormalFormHam& h_;
  HomologicalOptions opts_;
  BlockSpectral bs_;
  MatC G_, Gt_;
};

}  // namespace kamwave
