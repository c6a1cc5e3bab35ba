// Fourier series plumbing, jets, coordinate conventions, Poisson brackets.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kamwave/poly.hpp"
#include "oracles.hpp"

using namespace kamwave;

TEST_CASE("mode table and grid transform round trip") {
  auto [modes, lat] = oracles::small_setup(2, 4, 3);
  Rng rng(11);
  ScalarSeries f(modes, Cplx(0));
  for (int m = 0; m < modes->count(); ++m) f.c[m] = rng.cnormal();
  auto vals = f.to_grid();
  ScalarSeries g = ScalarSeries::from_grid(modes, vals, Cplx(0));
  Real worst = 0;
  for (int m = 0; m < modes->count(); ++m)
    worst = std::max(worst, std::abs(f.c[m] - g.c[m]));
  CHECK(worst < 1e-13);

  // product via convolution agrees with pointwise values
  ScalarSeries h(modes, Cplx(0));
  for (int m = 0; m < modes->count(); ++m)
    h.c[m] = rng.cnormal() * std::exp(-1.0 * modes->order1(m));
  // restrict f to low modes so that the product stays within the cap
  ScalarSeries flow_modes(modes, Cplx(0));
  for (int m = 0; m < modes->count(); ++m)
    if (modes->order1(m) <= 1) flow_modes.c[m] = f.c[m];
  ScalarSeries fl(modes, Cplx(0));
  for (int m = 0; m < modes->count(); ++m)
    if (modes->order1(m) <= 3) fl.c[m] = h.c[m];
  ScalarSeries p = product(flow_modes, fl);
  Rng rng2(31);
  for (int t = 0; t < 5; ++t) {
    VecC th(2);
    th << Cplx(rng2.uniform(0, 2 * kPi), 0.0), Cplx(rng2.uniform(0, 2 * kPi), 0.0);
    CHECK(std::abs(p.eval(th) - flow_modes.eval(th) * fl.eval(th)) < 1e-12);
  }
}

TEST_CASE("complex change of variables") {
  // the point map z = Cζ sends the real point (p,q) = (1,0) to (1/√2, 1/√2)
  const Mat2c C = cmat();
  Eigen::Vector2cd z = C * Eigen::Vector2cd(1.0, 0.0);
  CHECK(std::abs(z[0] - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(z[1] - 1.0 / std::sqrt(2.0)) < 1e-15);

  // jet round trip to_real ∘ to_complex = id
  auto [modes, lat] = oracles::small_setup(2, 3, 3);
  Jet j = oracles::random_jet(modes, lat, 2, 1.0, 77);
  j.conv = Convention::Real;
  Jet back = to_real(to_complex(j));
  Real worst = 0;
  for (int m = 0; m < modes->count(); ++m) {
    worst = std::max(worst, (back.fz.c[m] - j.fz.c[m]).cwiseAbs().maxCoeff());
    worst = std::max(worst, (back.fzz.c[m] - j.fzz.c[m]).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-14);

  // values are preserved under the change of variables
  Rng rng(5);
  for (int t = 0; t < 5; ++t) {
    VecC th(2), zeta(lat->dim());
    th << Cplx(rng.uniform(0, 2 * kPi), 0), Cplx(rng.uniform(0, 2 * kPi), 0);
    for (int u = 0; u < lat->dim(); ++u) zeta[u] = rng.cnormal();
    VecC r = VecC::Zero(2);
    VecC zc(lat->dim());
    for (int i = 0; i < lat->n_sites(); ++i)
      zc.segment<2>(2 * i) = cmat() * zeta.segment<2>(2 * i);
    const Jet jc = to_complex(j);
    CHECK(std::abs(j.eval(th, r, zeta) - jc.eval(th, r, zc)) < 1e-12);
  }
}

TEST_CASE("jet extraction is exact and idempotent") {
  auto [modes, lat] = oracles::small_setup(2, 3, 3);
  PolyHamiltonian F(modes, lat, 2, Convention::Complex);
  CHECK(F.jet().is_zero());

  Jet j = oracles::random_jet(modes, lat, 2, 0.5, 31);
  PolyHamiltonian P = PolyHamiltonian::from_jet(j);
  Jet j2 = P.jet();
  Real worst = 0;
  for (int m = 0; m < modes->count(); ++m) {
    worst = std::max(worst, std::abs(j.f0.c[m] - j2.f0.c[m]));
    worst = std::max(worst, (j.fr.c[m] - j2.fr.c[m]).cwiseAbs().maxCoeff());
    worst = std::max(worst, (j.fz.c[m] - j2.fz.c[m]).cwiseAbs().maxCoeff());
    worst = std::max(worst, (j.fzz.c[m] - j2.fzz.c[m]).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-14);

  // jet of a polynomial by finite differences of its evaluation
  Rng rng(8);
  PolyHamiltonian Q = P;  // jet part
  Q.add_term(1, {1}, {0, 1, 2}, Cplx(0.3, -0.1));  // a weight-5 term, not jet
  Q.add_term(0, {0, 2}, {}, Cplx(0.2, 0.0));       // r² term, not jet
  const Jet jq = Q.jet();
  VecC th(2);
  th << 0.7, 1.9;
  const VecC r0 = VecC::Zero(2);
  const VecC z0 = VecC::Zero(lat->dim());
  // value
  CHECK(std::abs(jq.f0.eval(th) - Q.eval(th, r0, z0)) < 1e-12);
  // ∂/∂r_a
  for (int a = 0; a < 2; ++a) {
    const Cplx fd = oracles::fd1([&](Real h) {
      VecC r = r0;
      r[a] += h;
      return Q.eval(th, r, z0);
    });
    CHECK(std::abs(jq.fr.eval(th)[a] - fd) < 1e-8);
  }
  // ∂/∂ζ_u and ∂²/∂ζ_u∂ζ_v
  for (int u = 0; u < std::min(4, lat->dim()); ++u) {
    const Cplx fd = oracles::fd1([&](Real h) {
      VecC z = z0;
      z[u] += h;
      return Q.eval(th, r0, z);
    });
    CHECK(std::abs(jq.fz.eval(th)[u] - fd) < 1e-8);
    for (int v = 0; v < std::min(4, lat->dim()); ++v) {
      const Cplx fd2 = oracles::fd2([&](Real ha, Real hb) {
        VecC z = z0;
        z[u] += ha;
        z[v] += hb;
        return Q.eval(th, r0, z);
      });
      CHECK(std::abs(jq.fzz.eval(th)(u, v) - fd2) < 1e-6);
    }
  }
}

TEST_CASE("poisson bracket canonical pairs") {
  auto [modes, lat] = oracles::small_setup(1, 3, 2);

  SUBCASE("complex convention: {xi_s, eta_s} = i") {
    PolyHamiltonian F(modes, lat, 1, Convention::Complex);
    PolyHamiltonian G(modes, lat, 1, Convention::Complex);
    F.add_term(modes->zero_mode(), {}, {0}, 1.0);  // ξ of site 0
    G.add_term(modes->zero_mode(), {}, {1}, 1.0);  // η of site 0
    PolyHamiltonian B = poisson_bracket(F, G);
    CHECK(B.size() == 1);
    for (const auto& [k, c] : B.terms()) CHECK(std::abs(c - kI) < 1e-15);
  }

  SUBCASE("real convention: {(p²+q²)/2, p} = q") {
    PolyHamiltonian F(modes, lat, 1, Convention::Real);
    F.add_term(modes->zero_mode(), {}, {0, 0}, 0.5);
    F.add_term(modes->zero_mode(), {}, {1, 1}, 0.5);
    PolyHamiltonian G(modes, lat, 1, Convention::Real);
    G.add_term(modes->zero_mode(), {}, {0}, 1.0);
    PolyHamiltonian B = poisson_bracket(F, G);
    CHECK(B.size() == 1);
    for (const auto& [k, c] : B.terms()) {
      CHECK(k.slot(0) == 1);  // q
      CHECK(std::abs(c - Cplx(1.0)) < 1e-15);
    }
  }

  SUBCASE("canonical pair against the angle: {r_1, e^{iθ_1}} = i e^{iθ_1}") {
    PolyHamiltonian F(modes, lat, 1, Convention::Complex);
    F.add_term(modes->zero_mode(), {1}, {}, 1.0);
    PolyHamiltonian G(modes, lat, 1, Convention::Complex);
    std::vector<int> k1{1};
    G.add_term(modes->index(k1), {}, {}, 1.0);
    PolyHamiltonian B = poisson_bracket(F, G);
    CHECK(B.size() == 1);
    for (const auto& [k, c] : B.terms()) {
      CHECK(modes->k(k.mode())[0] == 1);
      CHECK(std::abs(c - kI) < 1e-15);
    }
  }
}

namespace {
PolyHamiltonian random_poly(ModesPtr modes, LatticePtr lat, int n, int zdeg,
                            int rdeg, Real amp, std::uint64_t seed,
                            int mode_cap = 99) {
  PolyHamiltonian P(modes, lat, n, Convention::Complex);
  Rng rng(seed);
  const int dim = lat->dim();
  for (int t = 0; t < 40; ++t) {
    int m = rng.integer(0, modes->count() - 1);
    while (modes->order1(m) > mode_cap) m = rng.integer(0, modes->count() - 1);
    std::array<int, 4> re{}, sl{};
    int ns = rng.integer(0, zdeg);
    for (int j = 0; j < ns; ++j) sl[j] = rng.integer(0, dim - 1);
    if (rdeg > 0 && rng.integer(0, 2) == 0) re[rng.integer(0, n - 1)] = 1;
    P.add_term(MonoKey::make(m, re, sl, ns), amp * rng.cnormal());
  }
  return P;
}
}  // namespace

TEST_CASE("bracket antisymmetry and Jacobi residual") {
  auto [modes, lat] = oracles::small_setup(2, 4, 2);
  auto F = random_poly(modes, lat, 2, 3, 1, 0.3, 101);
  auto G = random_poly(modes, lat, 2, 3, 1, 0.3, 202);

  PolyHamiltonian FG = poisson_bracket(F, G);
  PolyHamiltonian GF = poisson_bracket(G, F);
  PolyHamiltonian sum = FG;
  sum += GF;
  Rng rng(404);
  Real worst = 0;
  for (int t = 0; t < 10; ++t) {
    VecC th(2), r(2), z(lat->dim());
    th << Cplx(rng.uniform(0, 2 * kPi), 0), Cplx(rng.uniform(0, 2 * kPi), 0);
    r << 0.1 * rng.cnormal(), 0.1 * rng.cnormal();
    for (int u = 0; u < lat->dim(); ++u) z[u] = 0.3 * rng.cnormal();
    worst = std::max(worst, std::abs(sum.eval(th, r, z)));
  }
  CHECK(worst < 1e-12);

  // Jacobi: cubic-in-ζ r-free F, G against an r-linear ζ-free H keeps every
  // nested bracket inside the degree caps, so the identity holds exactly
  auto Fc = random_poly(modes, lat, 2, 3, 0, 0.3, 111, 1);
  auto Gc = random_poly(modes, lat, 2, 3, 0, 0.3, 222, 1);
  PolyHamiltonian H(modes, lat, 2, Convention::Complex);
  {
    Rng hr(333);
    for (int m = 0; m < modes->count(); ++m)
      if (modes->order1(m) <= 1) {
        std::array<int, 4> re{}, sl{};
        re[hr.integer(0, 1)] = 1;
        H.add_term(MonoKey::make(m, re, sl, 0), 0.3 * hr.cnormal());
      }
  }
  auto strip_r = [&](PolyHamiltonian& P) {
    PolyHamiltonian out(modes, lat, 2, Convention::Complex);
    for (const auto& [k, c] : P.terms())
      if (k.rdeg() == 0 && k.zdeg() == 3) out.add_term(k, c);
    P = out;
  };
  strip_r(Fc);
  strip_r(Gc);
  PolyHamiltonian J1 = poisson_bracket(Fc, poisson_bracket(Gc, H));
  PolyHamiltonian J2 = poisson_bracket(Gc, poisson_bracket(H, Fc));
  PolyHamiltonian J3 = poisson_bracket(H, poisson_bracket(Fc, Gc));
  PolyHamiltonian jac = J1;
  jac += J2;
  jac += J3;
  worst = 0;
  for (int t = 0; t < 10; ++t) {
    VecC th(2), r(2), z(lat->dim());
    th << Cplx(rng.uniform(0, 2 * kPi), 0), Cplx(rng.uniform(0, 2 * kPi), 0);
    r << 0.1 * rng.cnormal(), 0.1 * rng.cnormal();
    for (int u = 0; u < lat->dim(); ++u) z[u] = 0.3 * rng.cnormal();
    worst = std::max(worst, std::abs(jac.eval(th, r, z)));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("bracket bilinearity and convention mismatch") {
  auto [modes, lat] = oracles::small_setup(1, 2, 2);
  auto F = random_poly(modes, lat, 1, 2, 1, 1.0, 11);
  auto G = random_poly(modes, lat, 1, 2, 1, 1.0, 22);
  PolyHamiltonian F2 = F;
  F2 *= Cplx(2.0);
  PolyHamiltonian B1 = poisson_bracket(F2, G);
  PolyHamiltonian B2 = poisson_bracket(F, G);
  B2 *= Cplx(2.0);
  Rng rng(33);
  VecC th(1), r(1), z(lat->dim());
  th << Cplx(1.1, 0);
  r << 0.05;
  for (int u = 0; u < lat->dim(); ++u) z[u] = 0.2 * rng.cnormal();
  CHECK(std::abs(B1.eval(th, r, z) - B2.eval(th, r, z)) < 1e-13);

  PolyHamiltonian R(modes, lat, 1, Convention::Real);
  CHECK_THROWS_AS((void)poisson_bracket(F, R), DimensionError);
}

TEST_CASE("jet norm basics") {
  auto [modes, lat] = oracles::small_setup(2, 3, 3);
  NormSamples plan = NormSamples::make(*lat, 2, 0.8, 0.2, 1.0, 0.5, 999);
  Jet zero(modes, lat, 2, Convention::Complex);
  CHECK(jet_norm(zero, plan) == 0.0);

  Jet c(modes, lat, 2, Convention::Complex);
  c.f0.c[modes->zero_mode()] = Cplx(0.37, 0.0);
  CHECK(jet_norm(c, plan) == doctest::Approx(0.37));

  // monotone in the sample plan: more points can only increase the max
  Jet j = oracles::random_jet(modes, lat, 2, 1.0, 555);
  NormSamples small = plan;
  small.pts.resize(16);
  CHECK(jet_norm(j, small) <= jet_norm(j, plan) + 1e-15);
}
