// kam.hpp
// The Newton-like KAM iteration: parameter schedule, the elementary step
// (nonlinear homological solve, time-one flow, new perturbation), domain
// pruning, convergence records and the assembled limit objects.
//
// Step k transforms h_k + f_k into h_{k+1} + f_{k+1} with
//   f_{k+1} = R + (f−f^T) + {f,S} − {f−f^T,S}^T + ∫₀¹(1−t){{h+f,S},S}∘Φ_S^t dt,
// where {h+f,S} is assembled in the cancellation form
//   ĥ − f^T + R + {f^T,S} + ({f−f^T,S} − {f−f^T,S}^T)
// so that every coefficient is O(ε²) before the double bracket. The
// t-integral is evaluated at the jet level through the composed chain rule
// (Gauss–Legendre nodes); its non-jet remainder is absorbed uncomposed.
#pragma once

#include <chrono>

#include "kamwave/flow.hpp"
#include "kamwave/homological.hpp"
#include "kamwave/resonance.hpp"

namespace kamwave {

struct ScheduleValues {
  Real sigma_next = 0, mu_next = 0, kappa = 0;
  long N = 0;
};

// §-exact formulas: σ_k = (1/2 + 1/2^{k+1})σ, N_k = 10(σ_k−σ_{k+1})^{-1} ln ε_k^{-1},
// κ_k = ε_k^{1/20}
inline ScheduleValues schedule(int k, Real eps_k, Real sigma, Real mu) {
  if (!(eps_k > 0 && eps_k < 1))
    throw std::runtime_error("schedule: eps_k must lie in (0,1)");
  ScheduleValues out;
  const Real sig_k = (0.5 + std::pow(0.5, k + 1)) * sigma;
  out.sigma_next = (0.5 + std::pow(0.5, k + 2)) * sigma;
  out.mu_next = (0.5 + std::pow(0.5, k + 2)) * mu;
  const Real N = 10.0 / (sig_k - out.sigma_next) * std::log(1.0 / eps_k);
  out.N = static_cast<long>(std::ceil(N));
  if (out.N < 1) throw std::runtime_error("schedule: degenerate N_k < 1");
  out.kappa = std::pow(eps_k, 1.0 / 20.0);
  return out;
}

struct KamParams {
  Real sigma = 0.8, mu = 0.2;
  Real alpha = 1.0, beta = 0.5;
  Real kappa_cap = 5e-3;          // desk-scale cap on the schedule κ_k
  Real kappa_tilde_override = 0;  // 0: paper formula from the effective κ
  int k_max = 3;
  Real jet_tol = 1e-13;
  int quad_nodes = 5;
  std::uint64_t plan_seed = 20240817;
  Real flow_tol = 1e-12;
  Real expose_rel = 1e-13;
};

struct StepRecord {
  int k = 0;
  Real sigma = 0, mu = 0, kappa_sched = 0, kappa_eff = 0, kappa_tilde = 0;
  long N = 0;
  Real eps = 0, Xi = 0;
  Real phi_dist = 0;       // ||Φ_k − id||_α
  Real step_seconds = 0;
  Real resid_linear = 0;   // per-mode residual of the cascade stages
  Real dropped_mass = 0;
  Real s_norm = 0;         // ⟦S⟧ (β+ plan)
  Real khat_beta = 0;      // |K̂|_β
  Real chi_norm = 0;       // |χ|
  long domain_alive = 0;
};

struct KamState {
  int k = 0;
  NormalFormHam h;
  PolyHamiltonian f;
  ParamDomain domain;
  KamParams params;
  NormSamples plan;        // base plan at (σ, μ)
  std::vector<FlowMap> transforms;
  std::vector<StepRecord> records;
  VecR omega0;             // initial frequencies at ρ*
  VecR lambda0;            // initial site frequencies
  // per-sample base frequencies for the domain ledger
  std::function<VecR(const VecR&)> omega0_of;
  std::function<VecR(const VecR&)> lambda0_of;
  std::vector<int> tangential_sites;
};

struct KamResult {
  NormalFormHam h_final;
  PolyHamiltonian f_final;
  std::vector<FlowMap> transforms;
  std::vector<StepRecord> table;
  Real f_inf_jet_norm = 0;
  Real omega_drift = 0;    // |ω̃ − ω|
  Real a_drift_beta = 0;   // |Ã − A|_β
  Real conj_residual = 0;  // pointwise conjugacy check
  Real excluded_fraction = 0;
  std::string status = "ok";
};

inline KamState kam_init(const NormalFormHam& h, const PolyHamiltonian& f,
                         const ParamDomain& dom, const KamParams& p) {
  KamState st;
  st.h = h;
  st.f = f;
  st.domain = dom;
  st.params = p;
  st.plan = NormSamples::make(*h.lattice, h.n, p.sigma, p.mu, p.alpha, p.beta,
                              p.plan_seed);
  st.omega0 = h.omega;
  st.lambda0 = h.lambda;
  return st;
}

inline Real sigma_k(const KamParams& p, int k) {
  return (0.5 + std::pow(0.5, k + 1)) * p.sigma;
}
inline Real mu_k(const KamParams& p, int k) {
  return (0.5 + std::pow(0.5, k + 1)) * p.mu;
}

// Gauss–Legendre nodes/weights on [0,1]
inline std::vector<std::pair<Real, Real>> gauss_legendre01(int n) {
  if (n == 5)
    return {{0.04691007703066800, 0.11846344252809454},
            {0.23076534494715845, 0.23931433524968324},
            {0.5, 0.28444444444444444},
            {0.76923465505284155, 0.23931433524968324},
            {0.95308992296933200, 0.11846344252809454}};
  if (n == 3)
    return {{0.11270166537925831, 0.2777777777777778},
            {0.5, 0.4444444444444444},
            {0.88729833462074169, 0.2777777777777778}};
  throw std::runtime_error("gauss_legendre01: unsupported node count");
}

inline Real displacement_alpha(const FlowMap& flow, const NormSamples& plan,
                               Real alpha) {
  Real worst = 0;
  const auto& lat = *flow.gen.lattice;
  for (const auto& p : plan.pts) {
    VecC th = p.theta, r = p.r, z = p.z;
    flow.apply(th, r, z);
    const Real dth = (th - p.theta).norm();
    const Real dr = (r - p.r).norm();
    const Real dz = vec_norm_alpha(lat, VecC(z - p.z), alpha);
    worst = std::max({worst, dth, dr, dz});
  }
  return worst;
}

// one elementary step; mutates the state
inline void kam_step(KamState& st) {
  const auto t_start = std::chrono::steady_clock::now();
  const KamParams& P = st.params;
  const int k = st.k;
  StepRecord rec;
  rec.k = k;
  rec.sigma = sigma_k(P, k);
  rec.mu = mu_k(P, k);

  NormSamples plan_k = st.plan.rescaled(*st.h.lattice, rec.sigma, rec.mu);
  const Jet fT = st.f.jet();
  rec.eps = jet_norm(fT, plan_k);
  rec.Xi = jet_norm(st.f, plan_k);
  if (rec.eps <= 0) throw std::runtime_error("kam_step: zero jet, nothing to do");

  // schedule (paper formulas) + desk-scale cap
  const ScheduleValues sv = schedule(k, rec.eps, P.sigma, P.mu);
  rec.kappa_sched = sv.kappa;
  rec.N = sv.N;
  rec.kappa_eff = std::min(sv.kappa, P.kappa_cap);

  st.h.check_hypothesis_b();
  const Real freq_drift = (st.h.omega - st.omega0).cwiseAbs().maxCoeff();
  if (freq_drift > st.h.hypo.delta0)
    throw std::runtime_error("kam_step: frequency drift exceeds delta0");

  HomologicalOptions hopts;
  hopts.kappa = rec.kappa_eff;
  hopts.kappa_tilde = P.kappa_tilde_override;
  hopts.N = static_cast<int>(std::min<long>(sv.N, st.f.modes->kmax()));
  hopts.delta = st.h.hypo.delta;
  hopts.beta = P.beta;
  hopts.expose_rel = P.expose_rel;
  rec.kappa_tilde = hopts.kappa_tilde_eff();

  HomologicalSolver solver(st.h, hopts);
  HomologicalSolution sol = solver.solve_nonlinear(st.f);
  rec.khat_beta = mat_norm(sol.Khat, P.beta);
  rec.chi_norm = sol.chi.cwiseAbs().maxCoeff();

  // flow of S (smallness against the ladder margins)
  NormSamples plan_next =
      st.plan.rescaled(*st.h.lattice, sigma_k(P, k + 1), mu_k(P, k + 1));
  rec.s_norm = jet_norm(sol.S, plan_k, /*beta_plus=*/true);
  const Real eta = (rec.sigma - sigma_k(P, k + 1)) / 2.0;
  const Real nu = (rec.mu - mu_k(P, k + 1)) / 2.0;
  FlowMap flow = flow_time(sol.S, 1.0, P.flow_tol, rec.s_norm, eta, nu);

  // new perturbation
  const PolyHamiltonian S_poly = PolyHamiltonian::from_jet(sol.S, st.f.opts);
  const PolyHamiltonian fmT = st.f.minus_jet();
  const PolyHamiltonian fT_poly = PolyHamiltonian::from_jet(fT, st.f.opts);
  PolyHamiltonian BR = poisson_bracket(fmT, S_poly);
  const Jet BRjet = BR.jet();
  PolyHamiltonian fTS = poisson_bracket(fT_poly, S_poly);

  // pointwise residual of the cascade identity at a few plan points
  {
    const Jet hs = solver.h_bracket(sol.S);
    const Jet hh = solver.hhat_jet(sol, fT);
    Real worst = 0;
    int used = 0;
    for (const auto& p : plan_k.pts) {
      if (used++ >= 8) break;
      const Cplx v = hs.eval(p.theta, p.r, p.z) + BRjet.eval(p.theta, p.r, p.z) +
                     fT.eval(p.theta, p.r, p.z) - hh.eval(p.theta, p.r, p.z) -
                     sol.R.eval(p.theta, p.r, p.z);
      worst = std::max(worst, std::abs(v));
    }
    rec.resid_linear = worst;
  }

  PolyHamiltonian A = PolyHamiltonian::from_jet(solver.hhat_jet(sol, fT), st.f.opts);
  {
    PolyHamiltonian negfT = fT_poly;
    negfT *= Cplx(-1);
    A += negfT;
    A += PolyHamiltonian::from_jet(sol.R, st.f.opts);
    A += fTS;
    A += BR;
    PolyHamiltonian negBRjet = PolyHamiltonian::from_jet(BRjet, st.f.opts);
    negBRjet *= Cplx(-1);
    A += negBRjet;
  }
  PolyHamiltonian Gint = poisson_bracket(A, S_poly);

  std::vector<std::pair<Real, Real>> tq;
  for (auto [t, w] : gauss_legendre01(P.quad_nodes)) tq.push_back({t, w * (1.0 - t)});
  const Jet int_jet = composed_jet(Gint, flow, tq);

  PolyHamiltonian f_next = PolyHamiltonian::from_jet(sol.R, st.f.opts);
  f_next += fmT;
  f_next += fTS;
  f_next += BR;
  {
    PolyHamiltonian negBRjet = PolyHamiltonian::from_jet(BRjet, st.f.opts);
    negBRjet *= Cplx(-1);
    f_next += negBRjet;
  }
  f_next += PolyHamiltonian::from_jet(int_jet, st.f.opts);
  {
    PolyHamiltonian tail = Gint.minus_jet();  // uncomposed remainder, weight ≥ 3
    tail *= Cplx(0.5);                        // ∫₀¹(1−t)dt
    f_next += tail;
  }
  f_next.compact();
  rec.dropped_mass = f_next.dropped_mass;

  // new normal form
  st.h.offset += sol.C.real();
  st.h.omega += sol.chi.real();
  st.h.N.m += sol.Khat.m;
  st.h.N.symmetrize_project();
  st.h.N.nf_flag = true;

  rec.phi_dist = displacement_alpha(flow, plan_next, P.alpha);

  // prune the domain ledger at the solver's thresholds and exposure
  MarginScanOptions mopt;
  mopt.N = hopts.N;
  mopt.momentum_filter = true;
  mopt.tangential = st.tangential_sites;
  const VecR dw = st.h.omega - st.omega0;
  VecR dl = VecR::Zero(st.h.lattice->n_sites());
  {
    const BlockSpectral bs = block_spectral(st.h);
    for (int i = 0; i < st.h.lattice->n_sites(); ++i)
      dl[i] = bs.lam_tilde[2 * i + 1] - st.lambda0[i];
  }
  if (st.omega0_of && st.lambda0_of) {
    for (size_t i = 0; i < st.domain.samples.size(); ++i) {
      if (!st.domain.alive[i]) continue;
      const VecR w = st.omega0_of(st.domain.samples[i]) + dw;
      const VecR l = st.lambda0_of(st.domain.samples[i]) + dl;
      const SampleMargins sm = scan_margins(*st.h.lattice, w, l, mopt);
      const bool ok = sm.m[0] >= rec.kappa_eff && sm.m[1] >= rec.kappa_eff &&
                      sm.m[2] >= rec.kappa_eff && sm.m[3] >= rec.kappa_tilde;
      if (!ok) st.domain.alive[i] = 0;
    }
  }
  rec.domain_alive = st.domain.alive_count();
  if (rec.domain_alive == 0)
    throw std::runtime_error("kam_step: resonance exhaustion, no alive samples");

  st.f = std::move(f_next);
  st.transforms.push_back(std::move(flow));
  rec.step_seconds =
      std::chrono::duration<Real>(std::chrono::steady_clock::now() - t_start)
          .count();
  st.records.push_back(rec);
  st.k += 1;
}

inline KamResult kam_run(KamState& st, int k_max, Real jet_tol) {
  KamResult res;
  const long initial_alive = st.domain.alive_count();
  while (st.k < k_max) {
    NormSamples plan_k =
        st.plan.rescaled(*st.h.lattice, sigma_k(st.params, st.k), mu_k(st.params, st.k));
    const Real eps_now = jet_norm(st.f.jet(), plan_k);
    if (eps_now <= jet_tol) break;
    if (st.k == 0 && eps_now >= st.h.hypo.delta0 / 8.0) {
      res.status = "smallness violated: eps0 >= delta0/8";
      break;
    }
    kam_step(st);
    const auto& r = st.records.back();
    if (st.records.size() >= 2) {
      const auto& prev = st.records[st.records.size() - 2];
      if (r.eps >= prev.eps && prev.eps > 0) {
        res.status = "non-contraction detected at step " + std::to_string(r.k);
        break;
      }
    }
  }
  res.h_final = st.h;
  res.f_final = st.f;
  res.transforms = st.transforms;
  res.table = st.records;
  {
    NormSamples plan_k =
        st.plan.rescaled(*st.h.lattice, sigma_k(st.params, st.k), mu_k(st.params, st.k));
    res.f_inf_jet_norm = jet_norm(st.f.jet(), plan_k);
  }
  res.omega_drift = (st.h.omega - st.omega0).cwiseAbs().maxCoeff();
  {
    BlockMatR dN = st.h.N;  // A − A₀ = N (initial N was zero for the wave)
    res.a_drift_beta = mat_norm(dN, st.params.beta);
  }
  const long final_alive = st.domain.alive_count();
  res.excluded_fraction =
      initial_alive > 0 ? 1.0 - Real(final_alive) / initial_alive : 0.0;
  return res;
}

// pointwise conjugacy: |(h₀+f₀)(Φ₁∘…∘Φ_k(x)) − (h_k+f_k)(x)| at sample points
inline Real conjugacy_residual(const NormalFormHam& h0, const PolyHamiltonian& f0,
                               const KamResult& res, const NormSamples& plan,
                               int npts = 20) {
  Real worst = 0;
  int used = 0;
  for (const auto& p : plan.pts) {
    if (used++ >= npts) break;
    VecC th = p.theta, r = p.r, z = p.z;
    for (auto it = res.transforms.rbegin(); it != res.transforms.rend(); ++it)
      it->apply(th, r, z);
    const Cplx lhs = h0.eval_c(r, z, f0.conv) + f0.eval(th, r, z);
    const Cplx rhs = res.h_final.eval_c(p.r, p.z, f0.conv) +
                     res.f_final.eval(p.theta, p.r, p.z);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

inline std::string convergence_csv(const std::vector<StepRecord>& rows) {
  std::ostringstream os;
  os << "k,sigma_k,mu_k,kappa_k,kappa_eff,kappa_tilde,N_k,eps_k,Xi_k,"
        "phi_dist,S_norm,Khat_beta,chi_norm,resid,dropped_mass,"
        "domain_alive,step_seconds\n";
  for (const auto& r : rows) {
    os << r.k << "," << r.sigma << "," << r.mu << "," << r.kappa_sched << ","
       << r.kappa_eff << "," << r.kappa_tilde << "," << r.N << "," << r.eps
       << "," << r.Xi << "," << r.phi_dist << "," << r.s_norm << ","
       << r.khat_beta << "," << r.chi_norm << "," << r.resid_linear << ","
       << r.dropped_mass << "," << r.domain_alive << "," << r.step_seconds
       << "\n";
  }
  return os.str();
}

}  // namespace kamwave
