// Wave-equation frontend: frequencies, Hamiltonian assembly against
// independent quadrature/finite-difference oracles, regularity, the
// reconstructed linear torus and its PDE residual.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kamwave/wave.hpp"
#include "oracles.hpp"

using namespace kamwave;

TEST_CASE("frequencies: direct values and exact derivative") {
  WaveConfig wc = WaveConfig::defaults();
  wc.sites_A = {3, 5};
  wc.actions = VecR::Constant(2, 0.05);
  wc.rho_lo = VecR::Constant(2, 1.0);
  wc.rho_hi = VecR::Constant(2, 2.0);
  wc.s_max = 8;
  VecR rho(2);
  rho << 1.0, 1.5;
  const auto fr = frequencies(wc, rho);
  CHECK(fr.omega[0] == doctest::Approx(std::sqrt(10.0)).epsilon(1e-14));
  // V̂ ≡ 0 off A (away from 0): λ_4 = 4
  CHECK(fr.lambda[fr.lattice->site_index(4)] == doctest::Approx(4.0));

  // ∂ω/∂ρ against finite differences
  for (int a = 0; a < 2; ++a) {
    const Real h = 1e-6;
    VecR rp = rho, rm = rho;
    rp[a] += h;
    rm[a] -= h;
    const Real fd =
        (frequencies(wc, rp).omega[a] - frequencies(wc, rm).omega[a]) / (2 * h);
    CHECK(std::abs(fr.domega(a, a) - fd) < 1e-9);
  }
}

TEST_CASE("config validation names the offending site") {
  WaveConfig wc = WaveConfig::defaults();
  wc.s_max = 4;
  wc.vhat_fixed[0] = 0.0;  // a = 0 violates a² + V̂(a) > 0
  CHECK_THROWS_WITH_AS(wc.validate(), doctest::Contains("a = 0"),
                       std::runtime_error);
}

TEST_CASE("g = 0 gives f = 0") {
  WaveConfig wc = WaveConfig::defaults();
  wc.s_max = 4;
  wc.k_theta = 4;
  wc.m_x = 64;
  wc.g_poly.clear();
  WaveSystem sys = build_hamiltonian(wc, VecR::Constant(2, 1.3));
  CHECK(sys.f.size() == 0);
}

TEST_CASE("g = u: the ζζ jet block is the exact Fourier integral") {
  WaveConfig wc = WaveConfig::defaults();
  wc.s_max = 4;
  wc.k_theta = 4;
  wc.m_x = 64;
  wc.eps = 1.0;
  wc.g_poly.clear();
  wc.g_poly[1][0] = 1.0;  // g = u, G = u²/2
  WaveSystem sys = build_hamiltonian(wc, VecR::Constant(2, 1.3));
  const Jet j = sys.f.jet();
  const MatC fzz = j.fzz.c[sys.modes->zero_mode()];
  for (int i = 0; i < sys.lattice->n_sites(); ++i) {
    // ∂²f/∂ξ_s ∂η_s = 1/(2λ_s) (the φ_s φ_{-s} pairing); the ξ_s ξ_s entry
    // needs x-momentum 2s = 0, so it survives only at the site s = 0
    const Real expect = 1.0 / (2.0 * sys.freq.lambda[i]);
    CHECK(std::abs(fzz(2 * i, 2 * i + 1) - expect) < 1e-12);
    if (sys.lattice->site(i) != 0)
      CHECK(std::abs(fzz(2 * i, 2 * i)) < 1e-12);
    else
      CHECK(std::abs(fzz(2 * i, 2 * i) - expect) < 1e-12);
  }
}

TEST_CASE("cubic nonlinearity: f(θ,0,0) matches direct quadrature") {
  WaveConfig wc = WaveConfig::defaults();
  wc.s_max = 6;
  wc.k_theta = 6;
  wc.m_x = 128;
  wc.eps = 1.0;  // scale-free comparison
  VecR rho(2);
  rho << 1.25, 1.75;
  WaveSystem sys = build_hamiltonian(wc, rho);
  Rng rng(10);
  const int MQ = 512;  // independent quadrature grid
  for (int t = 0; t < 10; ++t) {
    VecC th(2);
    th << Cplx(rng.uniform(0, 2 * kPi), 0), Cplx(rng.uniform(0, 2 * kPi), 0);
    // direct: ∫ G(x, u_{I,V}(θ,x)) dx, G = u⁴ for g = 4u³
    const auto u = torus_field(wc, sys.freq, th, MQ);
    Cplx acc = 0;
    for (int g = 0; g < MQ; ++g) acc += u[g] * u[g] * u[g] * u[g];
    acc *= 2.0 * kPi / MQ;
    const Cplx built =
        sys.f.eval(th, VecC::Zero(2), VecC::Zero(sys.lattice->dim()));
    CHECK(std::abs(built - acc) < 1e-9);
  }
}

TEST_CASE("jet of the wave f against central finite differences") {
  WaveConfig wc = WaveConfig::defaults();
  wc.s_max = 4;
  wc.k_theta = 4;
  wc.m_x = 64;
  wc.eps = 1.0;
  WaveSystem sys = build_hamiltonian(wc, VecR::Constant(2, 1.4));
  const Jet j = sys.f.jet();
  VecC th(2);
  th << 0.9, 2.3;
  const VecC r0 = VecC::Zero(2), z0 = VecC::Zero(sys.lattice->dim());
  for (int a = 0; a < 2; ++a) {
    const Cplx fd = oracles::fd1([&](Real h) {
      VecC r = r0;
      r[a] += h;
      return sys.f.eval(th, r, z0);
    });
    CHECK(std::abs(j.fr.eval(th)[a] - fd) < 1e-8);
  }
  for (int u : {0, 3, 5}) {
    const Cplx fd = oracles::fd1([&](Real h) {
      VecC z = z0;
      z[u] += h;
      return sys.f.eval(th, r0, z);
    });
    CHECK(std::abs(j.fz.eval(th)[u] - fd) < 1e-8);
    for (int v : {1, 2}) {
      const Cplx fd2 = oracles::fd2([&](Real ha, Real hb) {
        VecC z = z0;
        z[u] += ha;
        z[v] += hb;
        return sys.f.eval(th, r0, z);
      });
      CHECK(std::abs(j.fzz.eval(th)(u, v) - fd2) < 1e-6);
    }
  }
}

TEST_CASE("regularity report: two hessian routes agree") {
  WaveConfig wc = WaveConfig::defaults();
  wc.s_max = 6;
  wc.k_theta = 6;
  wc.m_x = 128;
  WaveSystem sys = build_hamiltonian(wc, VecR::Constant(2, 1.5));
  const auto rep = verify_regularity(wc, sys, 5);
  CHECK(rep.hess_entry_mismatch < 1e-12);
  CHECK(rep.hess_half_norm > 0);
  CHECK(rep.hess_oracle > 0);

  // doubling S_max changes the hessian sup by < 1% (decay check)
  WaveConfig wc2 = wc;
  wc2.s_max = 12;
  WaveSystem sys2 = build_hamiltonian(wc2, VecR::Constant(2, 1.5));
  const auto rep2 = verify_regularity(wc2, sys2, 5);
  CHECK(std::abs(rep2.hess_half_norm - rep.hess_half_norm) <
        0.01 * rep.hess_half_norm);

  WaveConfig wc0 = wc;
  wc0.g_poly.clear();
  WaveSystem sys0 = build_hamiltonian(wc0, VecR::Constant(2, 1.5));
  const auto rep0 = verify_regularity(wc0, sys0, 3);
  CHECK(rep0.hess_half_norm == 0.0);
  CHECK(rep0.hess_oracle == 0.0);
}

TEST_CASE("identity reconstruction: u = u_{I,V}, real, residual at round-off") {
  WaveConfig wc = WaveConfig::defaults();
  wc.s_max = 6;
  wc.k_theta = 4;
  wc.m_x = 128;
  wc.eps = 0.0;  // linear wave equation
  VecR rho(2);
  rho << 1.2, 1.9;
  WaveSystem sys = build_hamiltonian(wc, rho);

  TorusSolution sol = reconstruct_solution(wc, sys, {}, sys.h.omega);
  CHECK(torus_distance_halpha(wc, sys, sol, 1.0) < 1e-12);

  // reality of u on real (θ, x)
  Rng rng(3);
  for (int t = 0; t < 5; ++t) {
    VecC th(2);
    th << Cplx(rng.uniform(0, 2 * kPi), 0), Cplx(rng.uniform(0, 2 * kPi), 0);
    const Cplx u = sol.u_at(th, rng.uniform(0, 2 * kPi));
    CHECK(std::abs(std::imag(u)) < 1e-12);
  }

  std::vector<Real> tg{0.0, 0.3, 0.7, 1.0};
  const auto rep = pde_residual(wc, sys, sol, tg, rho, VecR::Zero(2));
  Real worst = 0;
  for (Real v : rep.l2) worst = std::max(worst, v);
  CHECK(worst < 1e-10);
}

TEST_CASE("naive torus residual is Θ(ε)") {
  WaveConfig wc = WaveConfig::defaults();
  wc.s_max = 6;
  wc.k_theta = 4;
  wc.m_x = 128;
  wc.eps = 1e-6;
  VecR rho(2);
  rho << 1.2, 1.9;
  WaveSystem sys = build_hamiltonian(wc, rho);
  TorusSolution sol = reconstruct_solution(wc, sys, {}, sys.h.omega);
  std::vector<Real> tg{0.0, 0.25, 0.5, 0.75, 1.0};
  const auto rep = pde_residual(wc, sys, sol, tg, rho, VecR::Zero(2));
  Real worst = 0;
  for (Real v : rep.l2) worst = std::max(worst, v);
  CHECK(worst >= 1e-3 * wc.eps);
  CHECK(worst <= 1e+2 * wc.eps);
}

TEST_CASE("torus csv serialization") {
  WaveConfig wc = WaveConfig::defaults();
  wc.s_max = 3;
  wc.k_theta = 2;
  wc.m_x = 64;
  WaveSystem sys = build_hamiltonian(wc, VecR::Constant(2, 1.1));
  TorusSolution sol = reconstruct_solution(wc, sys, {}, sys.h.omega);
  const std::string csv = sol.to_csv();
  CHECK(csv.find("k,x_mode,re,im") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') >= 4);
}
