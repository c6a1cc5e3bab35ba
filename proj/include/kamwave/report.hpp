// report.hpp
// Run orchestration: single runs (build → hypothesis checks → exclusion →
// KAM → reconstruction → PDE residual) and sweeps, with report emission
// (report.json + CSV tables). Every asserted bound in the report names its
// tolerance and the measured value.
#pragma once

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "kamwave/config.hpp"

namespace kamwave {

struct RunReport {
  std::string run_id;
  RunConfig config;
  std::vector<StepRecord> convergence;
  std::vector<SampleMargins> exclusion_margins;
  ParamDomain domain;
  Real omega_drift = 0, a_drift_beta = 0;
  Real conj_residual = 0;
  Real f_inf_jet_norm = 0;
  Real excluded_fraction = 0;
  Real torus_distance = 0;
  Real residual_naive = 0, residual_final = 0;
  Real regularity_mismatch = 0;
  VecR rho_star;
  std::string status = "ok";
  std::vector<std::pair<std::string, bool>> checks;  // name -> pass
  ResidualReport residual_table;
  TorusSolution torus;

  bool all_pass() const {
    for (const auto& [n, p] : checks)
      if (!p) return false;
    return status == "ok";
  }
};

inline void add_check(RunReport& rep, const std::string& name, Real value,
                      Real tol, bool leq = true) {
  std::ostringstream os;
  os << name << " (measured " << value << (leq ? " <= " : " >= ") << tol << ")";
  rep.checks.emplace_back(os.str(), leq ? value <= tol : value >= tol);
}

inline RunReport run_single(const RunConfig& rc, bool verbose = false) {
  RunReport rep;
  rep.config = rc;
  rep.run_id = "run-" + std::to_string(rc.seed);
  auto log = [&](const std::string& s) {
    if (verbose) std::printf("[kamwave] %s\n", s.c_str());
  };

  // A1 margins fix c0, c1 from the truncation itself
  WaveConfig wc = rc.wave;
  {
    const WaveFrequencies fr = frequencies(wc, wc.rho_lo);
    const A1Report a1 = check_a1(*fr.lattice, fr.lambda, 0.0, 0.0);
    wc.hypo.c0 = a1.c0_margin;
    wc.hypo.c1 = a1.c1_margin;
    add_check(rep, "A1 c0 margin positive", a1.c0_margin, 1e-6, false);
    add_check(rep, "A1 c1 margin positive", a1.c1_margin, 1e-6, false);
  }

  // sampled domain + exclusion at the run thresholds
  ParamDomain dom = ParamDomain::make(wc.rho_lo, wc.rho_hi, rc.domain_counts,
                                      rc.domain_jitter, rc.seed);
  auto omega_of = [&](const VecR& rho) { return frequencies(wc, rho).omega; };
  auto lambda_of = [&](const VecR& rho) { return frequencies(wc, rho).lambda; };
  const WaveFrequencies fr0 = frequencies(wc, wc.rho_lo);
  HomologicalOptions probe;
  probe.kappa = rc.kam.kappa_cap;
  probe.kappa_tilde = rc.kam.kappa_tilde_override;
  probe.delta = wc.hypo.delta;
  probe.beta = rc.kam.beta;
  MarginScanOptions mopt;
  mopt.N = wc.k_theta;
  mopt.momentum_filter = true;
  mopt.tangential = wc.sites_A;
  auto excl = melnikov_exclude(dom, omega_of, lambda_of, *fr0.lattice,
                               probe.kappa, wc.k_theta, probe.kappa_tilde_eff(),
                               &mopt);
  rep.exclusion_margins = excl.margins;
  log("exclusion done, alive fraction " + std::to_string(dom.alive_fraction()));

  // ρ*: configured, else the alive sample with the best worst-margin
  VecR rho_star = rc.rho_star;
  if (rho_star.size() == 0) {
    Real best = -1;
    for (size_t i = 0; i < dom.samples.size(); ++i) {
      if (!dom.alive[i]) continue;
      const Real m = excl.margins[i].overall(
          probe.kappa_tilde_eff() / probe.kappa);
      if (m > best) {
        best = m;
        rho_star = dom.samples[i];
      }
    }
    if (rho_star.size() == 0)
      throw std::runtime_error("run_single: no alive sample to run at");
  }
  rep.rho_star = rho_star;

  // build and verify regularity
  WaveSystem sys = build_hamiltonian(wc, rho_star);
  log("hamiltonian built, f terms " + std::to_string(sys.f.size()));
  const RegularityReport reg = verify_regularity(wc, sys);
  rep.regularity_mismatch = reg.hess_entry_mismatch;
  add_check(rep, "regularity hessian route mismatch", reg.hess_entry_mismatch,
            1e-8 * std::max(1.0, reg.hess_half_norm));

  // KAM run
  KamState st = kam_init(sys.h, sys.f, dom, rc.kam);
  st.omega0_of = omega_of;
  st.lambda0_of = lambda_of;
  st.tangential_sites = wc.sites_A;
  KamResult res;
  try {
    res = kam_run(st, rc.kam_k_max, rc.jet_tol);
  } catch (const std::exception& e) {
    rep.status = std::string("kam aborted: ") + e.what();
    rep.convergence = st.records;
    rep.domain = st.domain;
    return rep;
  }
  rep.convergence = res.table;
  rep.domain = st.domain;
  rep.omega_drift = res.omega_drift;
  rep.a_drift_beta = res.a_drift_beta;
  rep.f_inf_jet_norm = res.f_inf_jet_norm;
  rep.excluded_fraction = res.excluded_fraction;
  rep.status = res.status;
  log("kam finished: " + res.status);

  // conjugacy diagnostic
  {
    WaveSystem fresh = build_hamiltonian(wc, rho_star);
    NormSamples plan = NormSamples::make(
        *fresh.lattice, fresh.h.n, sigma_k(rc.kam, st.k), mu_k(rc.kam, st.k),
        rc.kam.alpha, rc.kam.beta, rc.kam.plan_seed + 1);
    rep.conj_residual = conjugacy_residual(fresh.h, fresh.f, res, plan);
  }

  // reconstruction and PDE residual
  rep.torus = reconstruct_solution(wc, sys, res.transforms, res.h_final.omega);
  rep.torus.provenance = rep.run_id;
  rep.torus_distance = torus_distance_halpha(wc, sys, rep.torus, rc.kam.alpha);
  std::vector<Real> tgrid;
  for (int i = 0; i < rc.residual_tsteps; ++i)
    tgrid.push_back(rc.residual_tmax * i / std::max(1, rc.residual_tsteps - 1));
  VecR th0 = VecR::Constant(wc.n(), rc.theta0);
  rep.residual_table = pde_residual(wc, sys, rep.torus, tgrid, rho_star, th0);
  Real l2max = 0;
  for (Real v : rep.residual_table.l2) l2max = std::max(l2max, v);
  rep.residual_final = l2max;
  {
    TorusSolution naive =
        reconstruct_solution(wc, sys, {}, sys.h.omega);
    const auto nrep = pde_residual(wc, sys, naive, tgrid, rho_star, th0);
    Real nl2 = 0;
    for (Real v : nrep.l2) nl2 = std::max(nl2, v);
    rep.residual_naive = nl2;
  }
  return rep;
}

inline nlohmann::json report_json(const RunReport& rep) {
  nlohmann::json j;
  j["run_id"] = rep.run_id;
  j["status"] = rep.status;
  j["config_echo"] = rep.config.echo();
  j["rho_star"] = std::vector<Real>(rep.rho_star.data(),
                                    rep.rho_star.data() + rep.rho_star.size());
  j["omega_drift"] = rep.omega_drift;
  j["a_drift_beta"] = rep.a_drift_beta;
  j["conjugacy_residual"] = rep.conj_residual;
  j["f_inf_jet_norm"] = rep.f_inf_jet_norm;
  j["excluded_fraction"] = rep.excluded_fraction;
  j["torus_distance_halpha"] = rep.torus_distance;
  j["pde_residual_naive"] = rep.residual_naive;
  j["pde_residual_final"] = rep.residual_final;
  j["regularity_mismatch"] = rep.regularity_mismatch;
  j["alive_fraction"] = rep.domain.alive_fraction();
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& r : rep.convergence) {
    nlohmann::json s;
    s["k"] = r.k;
    s["sigma"] = r.sigma;
    s["mu"] = r.mu;
    s["kappa_schedule"] = r.kappa_sched;
    s["kappa_eff"] = r.kappa_eff;
    s["N"] = r.N;
    s["eps"] = r.eps;
    s["Xi"] = r.Xi;
    s["phi_dist"] = r.phi_dist;
    s["seconds"] = r.step_seconds;
    steps.push_back(s);
  }
  j["convergence"] = steps;
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& [name, pass] : rep.checks) {
    nlohmann::json c;
    c["check"] = name;
    c["pass"] = pass;
    checks.push_back(c);
  }
  j["checks"] = checks;
  return j;
}

inline void write_report(const RunReport& rep, const std::string& outdir) {
  namespace fs = std::filesystem;
  fs::create_directories(outdir);
  {
    std::ofstream f(outdir + "/report.json");
    f << report_json(rep).dump(2) << "\n";
  }
  {
    std::ofstream f(outdir + "/convergence.csv");
    f << convergence_csv(rep.convergence);
  }
  {
    std::ofstream f(outdir + "/exclusion.csv");
    f << exclusion_csv(rep.domain, rep.exclusion_margins);
  }
  {
    std::ofstream f(outdir + "/residual.csv");
    f << rep.residual_table.to_csv();
  }
  if (rep.torus.modes) {
    std::ofstream f(outdir + "/torus.csv");
    f << rep.torus.to_csv();
  }
}

// κ- or N-sweep of the exclusion scan; ρ-sweep of full runs
inline std::string run_sweep(const RunConfig& rc, const std::string& axis,
                             const std::vector<Real>& values) {
  std::ostringstream os;
  if (values.empty()) {
    os << axis << "\n";
    return os.str();
  }
  WaveConfig wc = rc.wave;
  auto omega_of = [&](const VecR& rho) { return frequencies(wc, rho).omega; };
  auto lambda_of = [&](const VecR& rho) { return frequencies(wc, rho).lambda; };
  const WaveFrequencies fr0 = frequencies(wc, wc.rho_lo);
  if (axis == "kappa" || axis == "N") {
    os << axis << ",excluded_fraction,alive_fraction\n";
    for (Real v : values) {
      ParamDomain dom = ParamDomain::make(wc.rho_lo, wc.rho_hi,
                                          rc.domain_counts, rc.domain_jitter,
                                          rc.seed);
      const Real kappa = axis == "kappa" ? v : rc.kam.kappa_cap;
      const int N = axis == "N" ? static_cast<int>(v) : 6;
      auto ex = melnikov_exclude(dom, omega_of, lambda_of, *fr0.lattice, kappa, N);
      os << v << "," << ex.excluded_fraction << "," << dom.alive_fraction()
         << "\n";
    }
  } else if (axis == "rho") {
    os << "rho0,status,eps_final,omega_drift\n";
    for (Real v : values) {
      RunConfig rc2 = rc;
      rc2.rho_star = VecR::Constant(wc.n(), v);
      RunReport rep = run_single(rc2);
      os << v << "," << rep.status << "," << rep.f_inf_jet_norm << ","
         << rep.omega_drift << "\n";
    }
  } else {
    throw std::runtime_error("run_sweep: unknown axis " + axis);
  }
  return os.str();
}

}  // namespace kamwave
