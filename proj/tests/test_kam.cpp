// Schedule arithmetic and the elementary KAM step on trivial and small
// wave configurations.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kamwave/kam.hpp"
#include "kamwave/wave.hpp"
#include "oracles.hpp"

using namespace kamwave;

TEST_CASE("schedule formulas") {
  // k=0, σ=1, μ=1, ε₀=1e−6: σ₁ = 3/4, N₀ = ⌈552.62⌉ = 553, κ₀ ≈ 0.501187
  auto sv = schedule(0, 1e-6, 1.0, 1.0);
  CHECK(sv.sigma_next == doctest::Approx(0.75));
  CHECK(sv.mu_next == doctest::Approx(0.75));
  CHECK(sv.N == 553);
  CHECK(sv.kappa == doctest::Approx(std::pow(1e-6, 0.05)).epsilon(1e-12));
  CHECK(sv.kappa == doctest::Approx(0.501187).epsilon(1e-4));

  // geometric/arithmetic ladder: σ₂ = 5/8 σ
  auto sv1 = schedule(1, 1e-9, 1.0, 1.0);
  CHECK(sv1.sigma_next == doctest::Approx(5.0 / 8.0));

  // ε ≥ 1 is rejected; ε → 1⁻ would force N → 0 (degenerate guard)
  CHECK_THROWS(schedule(0, 1.0, 1.0, 1.0));
  CHECK_THROWS(schedule(0, 0.999999999999, 1.0, 1.0));
}

TEST_CASE("run with zero perturbation is the identity") {
  WaveConfig wc = WaveConfig::defaults();
  wc.s_max = 4;
  wc.k_theta = 4;
  wc.m_x = 64;
  wc.g_poly.clear();
  WaveSystem sys = build_hamiltonian(wc, VecR::Constant(2, 1.3));
  KamParams P;
  ParamDomain dom = ParamDomain::make(wc.rho_lo, wc.rho_hi, {3, 3}, false, 2);
  KamState st = kam_init(sys.h, sys.f, dom, P);
  KamResult res = kam_run(st, 3, 1e-13);
  CHECK(res.table.empty());
  CHECK(res.transforms.empty());
  CHECK(res.omega_drift == 0.0);
}

TEST_CASE("normal-form-shaped jet is absorbed in one step") {
  WaveConfig wc = WaveConfig::defaults();
  wc.s_max = 4;
  wc.k_theta = 4;
  wc.m_x = 64;
  wc.g_poly.clear();
  WaveSystem sys = build_hamiltonian(wc, VecR::Constant(2, 1.3));
  // f = mean r-term only
  PolyHamiltonian f(sys.modes, sys.lattice, 2, Convention::Complex);
  f.add_term(sys.modes->zero_mode(), {1}, {}, Cplx(3e-7, 0.0));
  KamParams P;
  ParamDomain dom = ParamDomain::make(wc.rho_lo, wc.rho_hi, {3, 3}, false, 2);
  KamState st = kam_init(sys.h, f, dom, P);
  st.omega0_of = [&](const VecR& rho) { return frequencies(wc, rho).omega; };
  st.lambda0_of = [&](const VecR& rho) { return frequencies(wc, rho).lambda; };
  st.tangential_sites = wc.sites_A;
  kam_step(st);
  CHECK(st.records.back().eps == doctest::Approx(3e-7).epsilon(1e-10));
  // ĥ absorbed the mean: ω moved by χ = 3e-7 and the new jet is zero
  CHECK(std::abs(st.h.omega[0] - sys.h.omega[0] - 3e-7) < 1e-18);
  NormSamples plan = st.plan.rescaled(*sys.lattice, sigma_k(P, 1), mu_k(P, 1));
  CHECK(jet_norm(st.f.jet(), plan) < 1e-18);
}

TEST_CASE("one wave step contracts the jet and keeps the conjugacy") {
  WaveConfig wc = WaveConfig::defaults();
  wc.s_max = 5;
  wc.k_theta = 4;
  wc.m_x = 128;
  wc.eps = 1e-5;
  VecR rho(2);
  rho << 1.26, 1.82;
  WaveSystem sys = build_hamiltonian(wc, rho);

  KamParams P;
  P.k_max = 1;
  ParamDomain dom = ParamDomain::make(wc.rho_lo, wc.rho_hi, {3, 3}, false, 2);
  KamState st = kam_init(sys.h, sys.f, dom, P);
  st.omega0_of = [&](const VecR& r) { return frequencies(wc, r).omega; };
  st.lambda0_of = [&](const VecR& r) { return frequencies(wc, r).lambda; };
  st.tangential_sites = wc.sites_A;
  KamResult res = kam_run(st, 1, 1e-14);
  REQUIRE(res.table.size() == 1);
  const Real eps0 = res.table[0].eps;
  NormSamples plan1 = st.plan.rescaled(*sys.lattice, sigma_k(P, 1), mu_k(P, 1));
  const Real eps1 = jet_norm(st.f.jet(), plan1);
  CHECK(eps1 < 1e-2 * eps0);

  // conjugacy: (h₀+f₀)∘Φ = h₁+f₁ pointwise
  WaveSystem fresh = build_hamiltonian(wc, rho);
  NormSamples cp = NormSamples::make(*sys.lattice, 2, sigma_k(P, 1), mu_k(P, 1),
                                     P.alpha, P.beta, 555);
  const Real conj = conjugacy_residual(fresh.h, fresh.f, res, cp);
  CHECK(conj < 1e-8);

  // Φ stays near the identity at the iterative-lemma rate
  CHECK(res.table[0].phi_dist <= std::pow(eps0, 0.8));
}
