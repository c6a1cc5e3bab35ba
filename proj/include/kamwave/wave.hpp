// wave.hpp
// Application frontend: the wave equation u_tt − u_xx + V⋆u + εg(x,u) = 0 on
// the circle, with the convolution acting as a Fourier multiplier V̂(m) and
// the tangential symbols V̂(a), a ∈ A, serving as the parameters ρ.
// Assembles the normal form h = ω·r + Σ λ_s ξ_s η_s and the perturbation
// f = ε∫ G(x, u(θ,r,ζ;x)) dx as a polynomial in (r, ζ) with θ-Fourier
// coefficients (x-integrals by spectral quadrature on the M_x grid, exact
// for polynomial g and the truncated Fourier data).
#pragma once

#include <map>

#include "kamwave/flow.hpp"
#include "kamwave/homological.hpp"
#include "kamwave/resonance.hpp"

namespace kamwave {

struct WaveConfig {
  std::vector<int> sites_A{1, 2};
  VecR actions;                        // I_a
  std::map<int, Real> vhat_fixed;      // V̂(m) for m ∉ A
  VecR rho_lo, rho_hi;                 // ranges of V̂(a), a ∈ A
  std::map<int, std::map<int, Cplx>> g_poly;  // u-power -> x-mode -> coeff
  Real eps = 1e-6;
  int s_max = 16;
  int k_theta = 8;
  int m_x = 256;
  PolyOptions poly;
  HypoParams hypo;

  static WaveConfig defaults() {
    WaveConfig c;
    c.actions = VecR::Constant(2, 0.05);
    c.rho_lo = VecR::Constant(2, 1.0);
    c.rho_hi = VecR::Constant(2, 2.0);
    c.vhat_fixed[0] = 0.25;     // keeps a² + V̂(a) > 0 at a = 0
    c.g_poly[3][0] = 4.0;       // g = 4u³
    return c;
  }

  int n() const { return static_cast<int>(sites_A.size()); }

  // The tangential oscillator a carries both x-modes ±a, so the symbol is
  // symmetric there: V̂(±a) = ρ_a. Off A the fixed coefficients are used
  // (looked up by the literal mode, symmetric defaults).
  Real vhat_at(int m, const VecR& rho) const {
    for (int a = 0; a < n(); ++a)
      if (sites_A[a] == m || sites_A[a] == -m) return rho[a];
    auto it = vhat_fixed.find(m);
    if (it != vhat_fixed.end()) return it->second;
    it = vhat_fixed.find(-m);
    return it == vhat_fixed.end() ? 0.0 : it->second;
  }

  bool is_tangential_mode(int m) const {
    for (int a : sites_A)
      if (a == m || a == -m) return true;
    return false;
  }

  void validate() const {
    if (actions.size() != n()) throw std::runtime_error("config: actions size");
    for (int a = 0; a < n(); ++a)
      if (actions[a] <= 0)
        throw std::runtime_error("config: I_a must be positive at a = " +
                                 std::to_string(sites_A[a]));
    for (int m = -s_max; m <= s_max; ++m) {
      const Real v =
          vhat_at(m, rho_lo.size() ? rho_lo : VecR::Zero(n()));
      if (m * m + v <= 0)
        throw std::runtime_error("config: a^2 + V(a) <= 0 at a = " +
                                 std::to_string(m));
    }
  }
};

struct WaveFrequencies {
  VecR omega;    // n
  MatR domega;   // exact ∂ω_a/∂ρ_b
  VecR lambda;   // per lattice site index
  LatticePtr lattice;
};

inline WaveFrequencies frequencies(const WaveConfig& cfg, const VecR& rho) {
  WaveFrequencies out;
  const int n = cfg.n();
  out.omega.resize(n);
  out.domega = MatR::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    const Real w2 = sqr(Real(cfg.sites_A[a])) + rho[a];
    if (w2 <= 0) throw std::runtime_error("frequencies: a^2 + rho_a <= 0");
    out.omega[a] = std::sqrt(w2);
    out.domega(a, a) = 1.0 / (2.0 * out.omega[a]);
  }
  // Normal sites exclude both ±a: the tangential oscillator already carries
  // the x-mode pair, and a residual site at -a would be identically resonant
  // with ω_a (λ_{-a} = ω_a under the real, symmetric symbol).
  std::map<int, Real> lam;
  std::vector<int> excluded;
  for (int s = -cfg.s_max; s <= cfg.s_max; ++s) {
    if (cfg.is_tangential_mode(s)) {
      excluded.push_back(s);
      continue;
    }
    lam[s] = std::sqrt(sqr(Real(s)) + cfg.vhat_at(s, rho));
  }
  out.lattice = std::make_shared<SiteLattice>(excluded, cfg.s_max, lam);
  out.lambda.resize(out.lattice->n_sites());
  for (int i = 0; i < out.lattice->n_sites(); ++i)
    out.lambda[i] = lam.at(out.lattice->site(i));
  // λ_s ≠ λ_{s'} for s ≠ ±s' (checked on the truncation)
  for (int i = 0; i < out.lattice->n_sites(); ++i)
    for (int j = 0; j < out.lattice->n_sites(); ++j) {
      if (std::abs(out.lattice->site(i)) == std::abs(out.lattice->site(j)))
        continue;
      if (std::abs(out.lambda[i] - out.lambda[j]) < 1e-12)
        throw std::runtime_error("config: lambda collision between sites " +
                                 std::to_string(out.lattice->site(i)) + " and " +
                                 std::to_string(out.lattice->site(j)));
    }
  return out;
}

struct WaveSystem {
  NormalFormHam h;
  PolyHamiltonian f;   // complex convention, includes the ε factor
  ModesPtr modes;
  LatticePtr lattice;
  WaveFrequencies freq;
};

namespace wave_detail {

struct Atom {
  int xmode = 0;
  int axis = -1;        // tangential axis, or -1
  int theta_sign = 0;   // ±1 for e^{±iθ_a}
  int slot = -1;        // ζ slot id for normal atoms
  Real base = 1.0;      // 1/√(2λ) or √(I_a/(2ω_a)), includes 1/√(2π)
};

inline Real gen_binom(Real nu, int j) {
  Real b = 1.0;
  for (int i = 0; i < j; ++i) b *= (nu - i) / (i + 1);
  return b;
}

}  // namespace wave_detail

inline WaveSystem build_hamiltonian(const WaveConfig& cfg, const VecR& rho) {
  cfg.validate();
  const int n = cfg.n();
  WaveFrequencies fr = frequencies(cfg, rho);
  const LatticePtr lat = fr.lattice;
  auto modes = std::make_shared<ThetaModes>(n, cfg.k_theta);

  NormalFormHam h(lat, n, fr.omega, fr.domega, fr.lambda, cfg.hypo);
  PolyHamiltonian f(modes, lat, n, Convention::Complex, cfg.poly);

  // atoms of u = Σ √(I+r)(e^{±iθ}φ_{±a})/√(2ω) + Σ (ξ_s φ_s + η_s φ_{-s})/√(2λ_s)
  using wave_detail::Atom;
  std::vector<Atom> atoms;
  const Real is2pi = 1.0 / std::sqrt(2.0 * kPi);
  for (int a = 0; a < n; ++a) {
    const Real base = std::sqrt(cfg.actions[a] / (2.0 * fr.omega[a])) * is2pi;
    atoms.push_back({cfg.sites_A[a], a, +1, -1, base});
    atoms.push_back({-cfg.sites_A[a], a, -1, -1, base});
  }
  for (int i = 0; i < lat->n_sites(); ++i) {
    const int s = lat->site(i);
    const Real base = is2pi / std::sqrt(2.0 * fr.lambda[i]);
    atoms.push_back({s, -1, 0, 2 * i, base});        // ξ_s at x-mode s
    atoms.push_back({-s, -1, 0, 2 * i + 1, base});   // η_s at x-mode -s
  }
  const int na = static_cast<int>(atoms.size());

  // x-grid tables
  const int M = cfg.m_x;
  std::vector<std::vector<Cplx>> agrid(na, std::vector<Cplx>(M));
  for (int i = 0; i < na; ++i)
    for (int g = 0; g < M; ++g)
      agrid[i][g] = std::exp(kI * (2.0 * kPi * g / M * atoms[i].xmode));

  // G = Σ_m c_m(x) u^{m+1}/(m+1): one multiset enumeration per power
  for (const auto& [upow, cmodes] : cfg.g_poly) {
    const int p = upow + 1;
    if (p > cfg.poly.deg_z_max)
      throw std::runtime_error("build_hamiltonian: caps too small for g degree " +
                               std::to_string(upow));
    int cmax = 0;
    std::vector<Cplx> cgrid(M, Cplx(0));
    for (const auto& [xm, cc] : cmodes) {
      cmax = std::max(cmax, std::abs(xm));
      for (int g = 0; g < M; ++g)
        cgrid[g] += cc * std::exp(kI * (2.0 * kPi * g / M * xm));
    }
    const int maxshift = cfg.s_max;

    std::vector<int> pick(p, 0);
    std::function<void(int, int, long)> rec = [&](int depth, int start, long mom) {
      const int remaining = p - depth;
      if (std::abs(mom) > static_cast<long>(remaining) * maxshift + cmax) return;
      if (depth == p) {
        if (std::abs(mom) > cmax) return;
        // exact x-integral on the grid: (2π/M) Σ_g c(x_g) ∏ atoms
        Cplx xint = 0;
        for (int g = 0; g < M; ++g) {
          Cplx prod = cgrid[g];
          for (int j = 0; j < p; ++j) prod *= agrid[pick[j]][g];
          xint += prod;
        }
        xint *= 2.0 * kPi / M;
        if (std::abs(xint) < 1e-300) return;
        // multinomial and bases
        Real mult = 1.0;
        {
          int run = 1;
          Real fact_p = 1.0;
          for (int j = 2; j <= p; ++j) fact_p *= j;
          mult = fact_p;
          for (int j = 1; j < p; ++j) {
            if (pick[j] == pick[j - 1]) {
              ++run;
              mult /= run;
            } else
              run = 1;
          }
        }
        Cplx coeff = xint * mult * (cfg.eps / Real(p));
        std::array<int, 4> slots{};
        int ns = 0;
        std::vector<int> kvec(n, 0);
        std::vector<int> tang_count(n, 0);
        for (int j = 0; j < p; ++j) {
          const Atom& at = atoms[pick[j]];
          coeff *= at.base;
          if (at.slot >= 0) {
            slots[ns++] = at.slot;
          } else {
            kvec[at.axis] += at.theta_sign;
            tang_count[at.axis] += 1;
          }
        }
        const int mode = modes->index(kvec);
        if (mode < 0) {
          f.dropped_mass += std::abs(coeff);
          return;
        }
        // √(I+r) expansion: ∏_a (1 + r_a/I_a)^{count_a/2} to r-degree caps
        std::vector<std::pair<std::array<int, 4>, Real>> rterms{{{}, 1.0}};
        for (int a = 0; a < n; ++a) {
          if (tang_count[a] == 0) continue;
          const Real nu = tang_count[a] / 2.0;
          std::vector<std::pair<std::array<int, 4>, Real>> next;
          for (const auto& [re, rc] : rterms) {
            int used = 0;
            for (int b = 0; b < 4; ++b) used += re[b];
            for (int j = 0; j + used <= cfg.poly.deg_r_max; ++j) {
              auto r2 = re;
              r2[a] += j;
              next.emplace_back(
                  r2, rc * wave_detail::gen_binom(nu, j) /
                          std::pow(cfg.actions[a], j));
            }
          }
          rterms = std::move(next);
        }
        for (const auto& [re, rc] : rterms)
          f.add_term(MonoKey::make(mode, re, slots, ns), coeff * rc);
        return;
      }
      for (int i = start; i < na; ++i) {
        pick[depth] = i;
        rec(depth + 1, i, mom + atoms[i].xmode);
      }
    };
    rec(0, 0, 0);
  }

  WaveSystem sys{std::move(h), std::move(f), modes, lat, fr};
  return sys;
}

// u_{I,V}(θ, x) on the x-grid (the unperturbed torus field)
inline std::vector<Cplx> torus_field(const WaveConfig& cfg,
                                     const WaveFrequencies& fr,
                                     const VecC& theta, int M) {
  std::vector<Cplx> u(M, Cplx(0));
  for (int a = 0; a < cfg.n(); ++a) {
    const Real amp = std::sqrt(cfg.actions[a] / (2.0 * fr.omega[a]) / (2.0 * kPi));
    for (int g = 0; g < M; ++g) {
      const Real x = 2.0 * kPi * g / M;
      u[g] += amp * (std::exp(kI * theta[a] + kI * Real(cfg.sites_A[a]) * x) +
                     std::exp(-kI * theta[a] - kI * Real(cfg.sites_A[a]) * x));
    }
  }
  return u;
}

// Regularity report: the assembled Hessian |∇²_ζ f|_{1/2} against the
// independently computed sup_s |∂²_u G-hat(s)| route, and the Y_α decay of
// the gradient.
struct RegularityReport {
  Real hess_half_norm = 0;      // |∇²_ζ f|_{1/2} from the assembled jet
  Real hess_oracle = 0;         // max over θ samples of the G'' route
  Real hess_entry_mismatch = 0; // worst entrywise difference of the two routes
  Real grad_alpha_norm = 0;     // ||∇_ζ f||_α at ζ=0 (max over θ samples)
};

inline RegularityReport verify_regularity(const WaveConfig& cfg,
                                          const WaveSystem& sys,
                                          int theta_samples = 10,
                                          std::uint64_t seed = 4242) {
  RegularityReport rep;
  const Jet jf = sys.f.jet();
  const auto& lat = *sys.lattice;
  Rng rng(seed);
  const int M = cfg.m_x;
  // derivative polynomial g_u = Σ upow * c_m(x) u^(upow-1) … we need G'' = g_u' in u
  for (int t = 0; t < theta_samples; ++t) {
    VecC th(cfg.n());
    for (int a = 0; a < cfg.n(); ++a) th[a] = rng.uniform(0.0, 2.0 * kPi);
    const MatC fzz = jf.fzz.eval(th);
    rep.hess_half_norm =
        std::max(rep.hess_half_norm, dense_mat_norm(lat, fzz, 0.5) / cfg.eps);
    rep.grad_alpha_norm = std::max(
        rep.grad_alpha_norm, vec_norm_alpha(lat, jf.fz.eval(th), 1.0) / cfg.eps);

    // oracle route: ∂²_u G on the torus field, Fourier transformed
    const auto u = torus_field(cfg, sys.freq, th, M);
    std::vector<Cplx> g2(M, Cplx(0));
    for (const auto& [upow, cmodes] : cfg.g_poly) {
      for (int g = 0; g < M; ++g) {
        const Real x = 2.0 * kPi * g / M;
        Cplx cx = 0;
        for (const auto& [xm, cc] : cmodes) cx += cc * std::exp(kI * Real(xm) * x);
        // ∂²_u G = ∂_u g = upow * c(x) u^{upow-1}
        Cplx up = 1.0;
        for (int j = 0; j < upow - 1; ++j) up *= u[g];
        g2[g] += Real(upow) * cx * up;
      }
    }
    // Fourier coefficients of ∂²_u G
    std::vector<Cplx> ghat(2 * cfg.s_max + 1);
    Real supg = 0;
    for (int m = -cfg.s_max; m <= cfg.s_max; ++m) {
      Cplx acc = 0;
      for (int g = 0; g < M; ++g)
        acc += g2[g] * std::exp(-kI * Real(m) * (2.0 * kPi * g / M));
      ghat[m + cfg.s_max] = acc / Real(M) * 2.0 * kPi;
      supg = std::max(supg, std::abs(ghat[m + cfg.s_max]));
    }
    rep.hess_oracle = std::max(rep.hess_oracle, supg / (2.0 * kPi));

    // entrywise cross-check: ∂²f/∂ξ_s∂ξ_{s'} = Ĝ''(-(s+s'))/(2√(λλ')·2π)
    for (int i = 0; i < lat.n_sites(); i += 7)
      for (int j = 0; j < lat.n_sites(); j += 5) {
        const int s = lat.site(i), sp = lat.site(j);
        if (std::abs(s + sp) > cfg.s_max) continue;
        const Cplx lhs = fzz(2 * i, 2 * j);
        const Cplx rhs = cfg.eps * ghat[-(s + sp) + cfg.s_max] /
                         (2.0 * std::sqrt(sys.freq.lambda[i] * sys.freq.lambda[j]) *
                          2.0 * kPi);
        rep.hess_entry_mismatch =
            std::max(rep.hess_entry_mismatch, std::abs(lhs - rhs));
      }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Torus reconstruction and PDE residual
// ---------------------------------------------------------------------------
struct TorusSolution {
  ModesPtr modes;
  int x_max = 0;
  MatC coeff;        // (n_modes) x (2 x_max + 1): u(θ,x) = Σ û(k,m) e^{ikθ} e^{imx}
  VecR omega_prime;
  std::string provenance;

  Cplx u_at(const VecC& theta, Real x) const {
    Cplx acc = 0;
    for (int m = 0; m < modes->count(); ++m) {
      Cplx e = 0;
      const auto& k = modes->k(m);
      for (size_t a = 0; a < k.size(); ++a) e += Real(k[a]) * theta[a];
      for (int xm = -x_max; xm <= x_max; ++xm)
        acc += coeff(m, xm + x_max) * std::exp(kI * (e + Real(xm) * x));
    }
    return acc;
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "k,x_mode,re,im\n";
    for (int m = 0; m < modes->count(); ++m)
      for (int xm = -x_max; xm <= x_max; ++xm) {
        const Cplx c = coeff(m, xm + x_max);
        if (std::abs(c) < 1e-300) continue;
        os << "\"(";
        const auto& k = modes->k(m);
        for (size_t a = 0; a < k.size(); ++a)
          os << k[a] << (a + 1 < k.size() ? " " : "");
        os << ")\"," << xm << "," << c.real() << "," << c.imag() << "\n";
      }
    return os.str();
  }
};

// Push the torus {r=0, ζ=0} through the composed transforms (applied
// innermost-last) and collect the u field as a (θ-mode, x-mode) table.
inline TorusSolution reconstruct_solution(const WaveConfig& cfg,
                                          const WaveSystem& sys,
                                          const std::vector<FlowMap>& transforms,
                                          const VecR& omega_prime) {
  const auto& md = *sys.modes;
  const auto& lat = *sys.lattice;
  const int n = cfg.n();
  const int G = md.grid_total();
  const int xmax = cfg.s_max;
  TorusSolution sol;
  sol.modes = sys.modes;
  sol.x_max = xmax;
  sol.omega_prime = omega_prime;

  std::vector<std::vector<Cplx>> ufield(2 * xmax + 1, std::vector<Cplx>(G, Cplx(0)));
  for (int g = 0; g < G; ++g) {
    VecC th = md.grid_point(g).cast<Cplx>();
    VecC r = VecC::Zero(n);
    VecC z = VecC::Zero(lat.dim());
    for (auto it = transforms.rbegin(); it != transforms.rend(); ++it)
      it->apply(th, r, z);
    for (int a = 0; a < n; ++a) {
      const Cplx xi = std::sqrt(Cplx(cfg.actions[a]) + r[a]) * std::exp(kI * th[a]);
      const Cplx eta = std::sqrt(Cplx(cfg.actions[a]) + r[a]) * std::exp(-kI * th[a]);
      const Real den = std::sqrt(2.0 * sys.freq.omega[a] * 2.0 * kPi);
      ufield[cfg.sites_A[a] + xmax][g] += xi / den;
      ufield[-cfg.sites_A[a] + xmax][g] += eta / den;
    }
    for (int i = 0; i < lat.n_sites(); ++i) {
      const int s = lat.site(i);
      const Real den = std::sqrt(2.0 * sys.freq.lambda[i] * 2.0 * kPi);
      ufield[s + xmax][g] += z[2 * i] / den;
      ufield[-s + xmax][g] += z[2 * i + 1] / den;
    }
  }
  sol.coeff = MatC::Zero(md.count(), 2 * xmax + 1);
  for (int xm = -xmax; xm <= xmax; ++xm) {
    const ScalarSeries s =
        ScalarSeries::from_grid(sys.modes, ufield[xm + xmax], Cplx(0));
    for (int m = 0; m < md.count(); ++m) sol.coeff(m, xm + xmax) = s.c[m];
  }
  return sol;
}

// sup over the θ-grid of ||u(θ,·) − u_{I,V}(θ,·)||_{H^α}
inline Real torus_distance_halpha(const WaveConfig& cfg, const WaveSystem& sys,
                                  const TorusSolution& sol, Real alpha) {
  // u_{I,V} as a coefficient table: modes ±e_a at x-modes ±a
  const auto& md = *sol.modes;
  MatC ref = MatC::Zero(md.count(), 2 * sol.x_max + 1);
  for (int a = 0; a < cfg.n(); ++a) {
    const Real amp = std::sqrt(
        cfg.actions[a] / (2.0 * sys.freq.omega[a] * 2.0 * kPi));
    std::vector<int> kp(cfg.n(), 0);
    kp[a] = 1;
    ref(md.index(kp), cfg.sites_A[a] + sol.x_max) += amp;
    kp[a] = -1;
    ref(md.index(kp), -cfg.sites_A[a] + sol.x_max) += amp;
  }
  const MatC diff = sol.coeff - ref;
  Real worst = 0;
  const int G = md.grid_total();
  for (int g = 0; g < G; ++g) {
    Real acc = 0;
    for (int xm = -sol.x_max; xm <= sol.x_max; ++xm) {
      Cplx c = 0;
      for (int m = 0; m < md.count(); ++m) c += diff(m, xm + sol.x_max) * md.phase(m, g);
      acc += std::norm(c) * std::pow(bracket_weight(xm), 2 * alpha);
    }
    worst = std::max(worst, std::sqrt(2.0 * kPi * acc));
  }
  return worst;
}

struct ResidualReport {
  std::vector<Real> t;
  std::vector<Real> l2;   // L² residual per t
  Real sup = 0;

  std::string to_csv() const {
    std::ostringstream os;
    os << "t,l2_residual\n";
    for (size_t i = 0; i < t.size(); ++i) os << t[i] << "," << l2[i] << "\n";
    return os.str();
  }
};

// residual of u(θ₀+tω′, x) in u_tt − u_xx + V⋆u + εg(x,u) = 0, evaluated
// mode-wise (∂_t² ↦ −(k·ω′)², V⋆ spectral) plus pointwise nonlinearity
inline ResidualReport pde_residual(const WaveConfig& cfg, const WaveSystem& sys,
                                   const TorusSolution& sol,
                                   const std::vector<Real>& t_grid,
                                   const VecR& rho, const VecR& theta0) {
  ResidualReport rep;
  const auto& md = *sol.modes;
  const int xmax = sol.x_max;
  const int MX = 4 * xmax + 9;  // x-grid for the nonlinearity (alias-free)
  for (Real t : t_grid) {
    VecC th(cfg.n());
    for (int a = 0; a < cfg.n(); ++a)
      th[a] = theta0[a] + t * sol.omega_prime[a];
    // assemble u-hat(m) and u_tt-hat(m)
    VecC uh = VecC::Zero(2 * xmax + 1), uth = VecC::Zero(2 * xmax + 1);
    for (int m = 0; m < md.count(); ++m) {
      Cplx e = 0;
      Real kw = 0;
      const auto& k = md.k(m);
      for (int a = 0; a < cfg.n(); ++a) {
        e += Real(k[a]) * th[a];
        kw += k[a] * sol.omega_prime[a];
      }
      const Cplx ph = std::exp(kI * e);
      for (int xm = -xmax; xm <= xmax; ++xm) {
        uh[xm + xmax] += sol.coeff(m, xm + xmax) * ph;
        uth[xm + xmax] += sol.coeff(m, xm + xmax) * ph * (-kw * kw);
      }
    }
    // linear part mode-wise
    VecC res = uth;
    for (int xm = -xmax; xm <= xmax; ++xm)
      res[xm + xmax] += (sqr(Real(xm)) + cfg.vhat_at(xm, rho)) * uh[xm + xmax];
    // nonlinearity pointwise on the x-grid
    std::vector<Cplx> ux(MX, Cplx(0));
    for (int g = 0; g < MX; ++g) {
      const Real x = 2.0 * kPi * g / MX;
      for (int xm = -xmax; xm <= xmax; ++xm)
        ux[g] += uh[xm + xmax] * std::exp(kI * Real(xm) * x);
    }
    std::vector<Cplx> gx(MX, Cplx(0));
    for (const auto& [upow, cmodes] : cfg.g_poly)
      for (int g = 0; g < MX; ++g) {
        const Real x = 2.0 * kPi * g / MX;
        Cplx cx = 0;
        for (const auto& [xm, cc] : cmodes) cx += cc * std::exp(kI * Real(xm) * x);
        Cplx up = 1.0;
        for (int j = 0; j < upow; ++j) up *= ux[g];
        gx[g] += cx * up;
      }
    for (int xm = -xmax; xm <= xmax; ++xm) {
      Cplx acc = 0;
      for (int g = 0; g < MX; ++g)
        acc += gx[g] * std::exp(-kI * Real(xm) * (2.0 * kPi * g / MX));
      res[xm + xmax] += cfg.eps * acc / Real(MX);
    }
    Real l2 = 0, sup_mode = 0;
    for (int xm = -xmax; xm <= xmax; ++xm) {
      l2 += std::norm(res[xm + xmax]);
      sup_mode = std::max(sup_mode, std::abs(res[xm + xmax]));
    }
    rep.t.push_back(t);
    rep.l2.push_back(std::sqrt(2.0 * kPi * l2));
    rep.sup = std::max(rep.sup, sup_mode * (2 * xmax + 1.0));
  }
  return rep;
}

}  // namespace kamwave
