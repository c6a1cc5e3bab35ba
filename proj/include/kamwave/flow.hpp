// flow.hpp
// Time-t Hamiltonian flows of jet functions, built per starting point from
// the iterated-integral (Picard) series of the paper:
//   θ(t) = K(θ⁰;t)                         (RK4 on θ̇ = S_r(θ))
//   ζ(t) = T(θ⁰;t) + U(θ⁰;t) ζ⁰            (U = I + ∫B + ∫∫BB + ..., B = J S_ζζ(θ(t)))
//   r(t) = L(θ⁰,ζ⁰;t) + Smat(θ⁰;t) r⁰      (L = l0 + l1 ζ⁰ + ½⟨l2 ζ⁰, ζ⁰⟩)
// Series terms are cumulated on a uniform time grid with an O(h⁴)
// integrator and truncated when the next term's sup-norm drops below tol
// (hard cap 60 terms). Nothing is cached per grid: composition and
// application stream one starting point at a time.
#pragma once

#include "kamwave/poly.hpp"
#include "kamwave/normal_form.hpp"

namespace kamwave {

struct PointFlow {
  VecC theta;            // θ(t)
  VecC T;                // 2L
  MatC U;                // 2L x 2L
  VecC l0;               // n
  MatC l1;               // n x 2L
  std::vector<MatC> l2;  // n symmetric 2L x 2L
  MatC Smat;             // n x n
  int terms_used = 0;
};

namespace detail {

// cumulative integral on a uniform grid, O(h^4): Simpson start + AM3 body
template <typename T>
std::vector<T> cumint(const std::vector<T>& v, Real h) {
  const int n = static_cast<int>(v.size());
  std::vector<T> c(n, T(v[0] * 0.0));
  if (n >= 3) {
    c[1] = (v[0] * 5.0 + v[1] * 8.0 - v[2] * 1.0) * (h / 12.0);
    c[2] = (v[0] + v[1] * 4.0 + v[2]) * (h / 3.0);
  } else if (n == 2) {
    c[1] = (v[0] + v[1]) * (h / 2.0);
  }
  for (int i = 3; i < n; ++i)
    c[i] = c[i - 1] +
           (v[i] * 9.0 + v[i - 1] * 19.0 - v[i - 2] * 5.0 + v[i - 3] * 1.0) *
               (h / 24.0);
  return c;
}

// quartic interpolation of grid values at an off-grid time
template <typename T>
T interp4(const std::vector<T>& v, Real h, Real t) {
  const int n = static_cast<int>(v.size());
  int i0 = static_cast<int>(std::floor(t / h)) - 2;
  i0 = std::max(0, std::min(i0, n - 5));
  T acc = v[i0] * 0.0;
  for (int j = 0; j < 5; ++j) {
    Real lj = 1.0;
    for (int l = 0; l < 5; ++l)
      if (l != j) lj *= (t - (i0 + l) * h) / ((j - l) * h);
    acc += v[i0 + j] * lj;
  }
  return acc;
}

}  // namespace detail

class FlowMap {
 public:
  Jet gen;          // generating jet S
  Real t_end = 1.0;
  Real tol = 1e-12;
  int tnodes = 33;
  int max_terms = 60;

  FlowMap() = default;
  FlowMap(Jet S, Real t, Real tol_ = 1e-12, int tnodes_ = 33)
      : gen(std::move(S)), t_end(t), tol(tol_), tnodes(tnodes_) {
    jz_ = jz_matrix(*gen.lattice, gen.conv);
    for (int a = 0; a < gen.n; ++a) {
      d0_.push_back(gen.f0.deriv(a));
      dr_.push_back(gen.fr.deriv(a));
      dz_.push_back(gen.fz.deriv(a));
      dzz_.push_back(gen.fzz.deriv(a));
    }
  }

  // flows at every time node from θ⁰; caller picks the nodes it needs
  struct NodeData {
    std::vector<VecC> theta;
    std::vector<VecC> T;
    std::vector<MatC> U;
    std::vector<VecC> l0;
    std::vector<MatC> l1;
    std::vector<std::vector<MatC>> l2;  // [node][axis]
    std::vector<MatC> Smat;
    Real h = 0;
    int terms_used = 0;
  };

  NodeData flow_nodes(const VecC& theta0) const {
    const int dim = gen.lattice->dim();
    const int n = gen.n;
    const int tn = tnodes;
    const Real h = t_end / (tn - 1);
    NodeData nd;
    nd.h = h;

    // θ path: RK4 with 2 substeps per interval
    nd.theta.assign(tn, theta0);
    VecC th = theta0;
    for (int i = 1; i < tn; ++i) {
      for (int sub = 0; sub < 2; ++sub) {
        const Real hh = h / 2;
        const VecC k1 = gen.fr.eval(th);
        const VecC k2 = gen.fr.eval(th + 0.5 * hh * k1);
        const VecC k3 = gen.fr.eval(th + 0.5 * hh * k2);
        const VecC k4 = gen.fr.eval(th + hh * k3);
        th += (hh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      nd.theta[i] = th;
    }

    // node-wise fields
    std::vector<MatC> B(tn);
    std::vector<VecC> a(tn);
    std::vector<MatC> Lam(tn);
    for (int i = 0; i < tn; ++i) {
      B[i] = jz_ * gen.fzz.eval(nd.theta[i]);
      a[i] = jz_ * gen.fz.eval(nd.theta[i]);
      // Λ_{j,l} = ∂(S_r)_l/∂θ_j along the path (ṙ = -α - Λ r)
      MatC L(n, n);
      for (int ax = 0; ax < n; ++ax)
        L.row(ax) = dr_[ax].eval(nd.theta[i]).transpose();
      Lam[i] = L;
    }

    // Picard for U and T
    const MatC Izero = MatC::Zero(dim, dim);
    const VecC vzero = VecC::Zero(dim);
    nd.U.assign(tn, MatC::Identity(dim, dim));
    std::vector<MatC> curU(tn, MatC::Identity(dim, dim));
    nd.T.assign(tn, vzero);
    std::vector<VecC> curT(tn);
    {  // first T term: ∫ a
      std::vector<VecC> av(a);
      curT = detail::cumint(av, h);
      for (int i = 0; i < tn; ++i) nd.T[i] += curT[i];
    }
    int used = 1;
    for (int m = 1; m <= max_terms; ++m) {
      std::vector<MatC> pu(tn);
      std::vector<VecC> pt(tn);
      for (int i = 0; i < tn; ++i) {
        pu[i] = B[i] * curU[i];
        pt[i] = B[i] * curT[i];
      }
      curU = detail::cumint(pu, h);
      curT = detail::cumint(pt, h);
      Real sz = 0;
      for (int i = 0; i < tn; ++i) {
        nd.U[i] += curU[i];
        nd.T[i] += curT[i];
        sz = std::max(sz, curU[i].cwiseAbs().maxCoeff());
        sz = std::max(sz, curT[i].cwiseAbs().maxCoeff());
      }
      used = m + 1;
      if (sz < tol) break;
      if (m == max_terms)
        throw std::runtime_error("flow series did not converge within 60 terms");
    }
    nd.terms_used = used;

    // α pieces along the path (ζ(t) = T + U ζ⁰ substituted)
    std::vector<VecC> al0(tn, VecC::Zero(n));
    std::vector<MatC> al1(tn, MatC::Zero(n, dim));
    std::vector<std::vector<MatC>> al2(tn, std::vector<MatC>(n, Izero));
    for (int i = 0; i < tn; ++i)
      for (int ax = 0; ax < n; ++ax) {
        const Cplx d0 = d0_[ax].eval(nd.theta[i]);
        const VecC dz = dz_[ax].eval(nd.theta[i]);
        const MatC dzz = dzz_[ax].eval(nd.theta[i]);
        al0[i][ax] = d0 + (dz.transpose() * nd.T[i]).value() +
                     Cplx(0.5) * (nd.T[i].transpose() * dzz * nd.T[i]).value();
        al1[i].row(ax) = ((dz + dzz * nd.T[i]).transpose() * nd.U[i]);
        al2[i][ax] = nd.U[i].transpose() * dzz * nd.U[i];
      }

    // Picard for Smat and the l pieces: Ẏ = -Λ Y (Y(0)=I), l̇ = -α - Λ l
    nd.Smat.assign(tn, MatC::Identity(n, n));
    nd.l0.assign(tn, VecC::Zero(n));
    nd.l1.assign(tn, MatC::Zero(n, dim));
    nd.l2.assign(tn, std::vector<MatC>(n, Izero));
    const MatC nzero = MatC::Zero(n, n);
    std::vector<MatC> curS(tn, MatC::Identity(n, n));
    std::vector<VecC> cl0(tn);
    std::vector<MatC> cl1(tn);
    std::vector<std::vector<MatC>> cl2(tn);
    {  // first l terms: -∫ α
      std::vector<VecC> v0(al0);
      cl0 = detail::cumint(v0, h);
      cl1 = detail::cumint(al1, h);
      std::vector<std::vector<MatC>> v2(al2);
      cl2.assign(tn, std::vector<MatC>(n, Izero));
      for (int ax = 0; ax < n; ++ax) {
        std::vector<MatC> col(tn);
        for (int i = 0; i < tn; ++i) col[i] = v2[i][ax];
        auto ic = detail::cumint(col, h);
        for (int i = 0; i < tn; ++i) cl2[i][ax] = ic[i];
      }
      for (int i = 0; i < tn; ++i) {
        nd.l0[i] -= cl0[i];
        nd.l1[i] -= cl1[i];
        for (int ax = 0; ax < n; ++ax) nd.l2[i][ax] -= cl2[i][ax];
        cl0[i] = -cl0[i];
        cl1[i] = -cl1[i];
        for (int ax = 0; ax < n; ++ax) cl2[i][ax] = -cl2[i][ax];
      }
    }
    for (int m = 1; m <= max_terms; ++m) {
      std::vector<MatC> ps(tn), p1(tn);
      std::vector<VecC> p0(tn);
      std::vector<std::vector<MatC>> p2(tn, std::vector<MatC>(n, Izero));
      for (int i = 0; i < tn; ++i) {
        ps[i] = Lam[i] * curS[i];
        p0[i] = Lam[i] * cl0[i];
        p1[i] = Lam[i] * cl1[i];
        for (int ax = 0; ax < n; ++ax)
          for (int bx = 0; bx < n; ++bx)
            p2[i][ax] += Lam[i](ax, bx) * cl2[i][bx];
      }
      auto csn = detail::cumint(ps, h);
      auto c0n = detail::cumint(p0, h);
      auto c1n = detail::cumint(p1, h);
      std::vector<std::vector<MatC>> c2n(tn, std::vector<MatC>(n, Izero));
      for (int ax = 0; ax < n; ++ax) {
        std::vector<MatC> col(tn);
        for (int i = 0; i < tn; ++i) col[i] = p2[i][ax];
        auto ic = detail::cumint(col, h);
        for (int i = 0; i < tn; ++i) c2n[i][ax] = ic[i];
      }
      Real sz = 0;
      for (int i = 0; i < tn; ++i) {
        curS[i] = -csn[i];
        cl0[i] = -c0n[i];
        cl1[i] = -c1n[i];
        for (int ax = 0; ax < n; ++ax) cl2[i][ax] = -c2n[i][ax];
        nd.Smat[i] += curS[i];
        nd.l0[i] += cl0[i];
        nd.l1[i] += cl1[i];
        for (int ax = 0; ax < n; ++ax) nd.l2[i][ax] += cl2[i][ax];
        sz = std::max(sz, curS[i].cwiseAbs().maxCoeff());
        sz = std::max(sz, cl0[i].cwiseAbs().maxCoeff());
        sz = std::max(sz, cl1[i].cwiseAbs().maxCoeff());
        for (int ax = 0; ax < n; ++ax)
          sz = std::max(sz, cl2[i][ax].cwiseAbs().maxCoeff());
      }
      if (sz < tol) break;
      if (m == max_terms)
        throw std::runtime_error("flow series (r-part) did not converge within 60 terms");
    }
    return nd;
  }

  PointFlow at(const VecC& theta0) const {
    const NodeData nd = flow_nodes(theta0);
    return node_at(nd, tnodes - 1);
  }

  static PointFlow node_at(const NodeData& nd, int i) {
    PointFlow p;
    p.theta = nd.theta[i];
    p.T = nd.T[i];
    p.U = nd.U[i];
    p.l0 = nd.l0[i];
    p.l1 = nd.l1[i];
    p.l2 = nd.l2[i];
    p.Smat = nd.Smat[i];
    p.terms_used = nd.terms_used;
    return p;
  }

  // image of a phase point
  void apply(VecC& theta, VecC& r, VecC& z) const {
    const PointFlow p = at(theta);
    VecC r2 = p.Smat * r + p.l0 + p.l1 * z;
    for (int ax = 0; ax < gen.n; ++ax)
      r2[ax] += Cplx(0.5) * (z.transpose() * p.l2[ax] * z).value();
    theta = p.theta;
    z = p.T + p.U * z;
    r = r2;
  }

  const MatC& jz() const { return jz_; }

 private:
  MatC jz_;
  std::vector<ScalarSeries> d0_;
  std::vector<VecSeries> dr_, dz_;
  std::vector<MatSeries> dzz_;
};

// Smallness gate of the flow lemma: ⟦S⟧ ≤ ½ η ν² for the margins in use.
inline FlowMap flow_time(const Jet& S, Real t, Real tol, Real measured_norm = -1,
                         Real eta = 0, Real nu = 0) {
  if (measured_norm >= 0 && eta > 0 && nu > 0) {
    const Real bound = 0.5 * eta * nu * nu;
    if (measured_norm > bound)
      throw std::runtime_error(
          "flow_time: smallness violated, [S] = " + std::to_string(measured_norm) +
          " > eta*nu^2/2 = " + std::to_string(bound));
  }
  return FlowMap(S, t, tol);
}

// Jacobian of Φ at a point, assembled from the structured components; the
// θ-derivatives use a 5-point stencil (the θ-dependence is analytic and the
// non-identity part is O([S]), so the h⁴ error is far below round-off of
// interest).
inline MatC flow_jacobian(const FlowMap& f, const VecC& theta, const VecC& r,
                          const VecC& z, Real hstep = 0.02) {
  const int n = f.gen.n;
  const int dim = f.gen.lattice->dim();
  const int tot = 2 * n + dim;
  MatC D = MatC::Zero(tot, tot);
  const PointFlow p = f.at(theta);

  // column blocks: x = (r, θ, ζ)
  // ∂(r')/∂r = Smat ; ∂(θ')/∂r = 0 ; ∂(ζ')/∂r = 0
  D.block(0, 0, n, n) = p.Smat;
  // ∂/∂ζ: r' rows: l1 + l2 ζ ; ζ' rows: U
  MatC drdz = p.l1;
  for (int ax = 0; ax < n; ++ax)
    drdz.row(ax) += (p.l2[ax] * z).transpose();
  D.block(0, 2 * n, n, dim) = drdz;
  D.block(2 * n, 2 * n, dim, dim) = p.U;

  // θ-columns by the 5-point stencil on each axis
  for (int ax = 0; ax < n; ++ax) {
    auto image = [&](Real shift) {
      VecC th = theta;
      th[ax] += shift;
      VecC rr = r, zz = z;
      VecC t2 = th;
      f.apply(t2, rr, zz);
      VecC out(tot);
      out.segment(0, n) = rr;
      out.segment(n, n) = t2;
      out.segment(2 * n, dim) = zz;
      return out;
    };
    const VecC d = (image(-2 * hstep) - 8.0 * image(-hstep) +
                    8.0 * image(hstep) - image(2 * hstep)) /
                   (12.0 * hstep);
    D.col(n + ax) = d;
  }
  return D;
}

// canonical form matrix Ω on (r, θ, ζ): dr∧dθ + the ζ-form that the flow of
// ẋ = J∇H preserves (σ2 blocks in the real convention, its unitary image in
// the complex one)
inline MatC omega_form(const SiteLattice& lat, int n, Convention conv) {
  const int dim = lat.dim();
  MatC W = MatC::Zero(2 * n + dim, 2 * n + dim);
  for (int a = 0; a < n; ++a) {
    W(a, n + a) = -1.0;
    W(n + a, a) = 1.0;
  }
  for (int i = 0; i < lat.n_sites(); ++i) {
    const int u = 2 * n + 2 * i;
    if (conv == Convention::Real) {
      W(u, u + 1) = -1.0;
      W(u + 1, u) = 1.0;
    } else {
      W(u, u + 1) = -kI;
      W(u + 1, u) = kI;
    }
  }
  return W;
}

// max over points of ||DΦᵀ Ω DΦ − Ω||_∞
inline Real check_symplectic(const FlowMap& f,
                             const std::vector<NormSamples::Point>& pts) {
  const MatC W = omega_form(*f.gen.lattice, f.gen.n, f.gen.conv);
  Real worst = 0;
  for (const auto& p : pts) {
    const MatC D = flow_jacobian(f, p.theta, p.r, p.z);
    worst = std::max(worst,
                     (D.transpose() * W * D - W).cwiseAbs().maxCoeff());
  }
  return worst;
}

// jet of P∘Φ^{t} accumulated over weighted times (streamed over the grid)
inline Jet composed_jet(const PolyHamiltonian& P, const FlowMap& flow,
                        const std::vector<std::pair<Real, Real>>& t_weights) {
  const auto& md = *P.modes;
  const auto& lat = *P.lattice;
  const int n = P.n, dim = lat.dim();
  const int G = md.grid_total();
  const int tn = flow.tnodes;

  std::vector<Cplx> val(G, Cplx(0));
  std::vector<VecC> gr(G, VecC::Zero(n));
  std::vector<VecC> gz(G, VecC::Zero(dim));
  std::vector<MatC> hz(G, MatC::Zero(dim, dim));

  for (int g = 0; g < G; ++g) {
    VecC th0 = md.grid_point(g).cast<Cplx>();
    const FlowMap::NodeData nd = flow.flow_nodes(th0);
    for (const auto& [t, w] : t_weights) {
      // interpolate the flow pieces at t
      const Real hh = nd.h;
      PointFlow p;
      p.theta = detail::interp4(nd.theta, hh, t);
      p.T = detail::interp4(nd.T, hh, t);
      p.U = detail::interp4(nd.U, hh, t);
      p.l0 = detail::interp4(nd.l0, hh, t);
      p.l1 = detail::interp4(nd.l1, hh, t);
      p.Smat = detail::interp4(nd.Smat, hh, t);
      p.l2.resize(n);
      for (int ax = 0; ax < n; ++ax) {
        std::vector<MatC> col(tn);
        for (int i = 0; i < tn; ++i) col[i] = nd.l2[i][ax];
        p.l2[ax] = detail::interp4(col, hh, t);
      }
      const auto d = P.eval_full(p.theta, p.l0, p.T);
      val[g] += w * d.value;
      gr[g] += w * (p.Smat.transpose() * d.grad_r);
      gz[g] += w * (p.U.transpose() * d.grad_z + p.l1.transpose() * d.grad_r);
      MatC H = p.U.transpose() * d.hess_zz * p.U;
      const MatC mix = p.U.transpose() * d.hess_rz.transpose() * p.l1;
      H += mix + mix.transpose();
      H += p.l1.transpose() * d.hess_rr * p.l1;
      for (int ax = 0; ax < n; ++ax) H += d.grad_r[ax] * p.l2[ax];
      hz[g] += w * H;
    }
  }

  Jet out(P.modes, P.lattice, n, P.conv);
  out.f0 = ScalarSeries::from_grid(P.modes, val, Cplx(0));
  out.fr = VecSeries::from_grid(P.modes, gr, VecC::Zero(n));
  out.fz = VecSeries::from_grid(P.modes, gz, VecC::Zero(dim));
  out.fzz = MatSeries::from_grid(P.modes, hz, MatC::Zero(dim, dim));
  return out;
}

// Exact composition H∘Φ as a polynomial (grid-assembled). Intended for
// moderate expansions; throws when the result would exceed the budget.
inline PolyHamiltonian compose_hamiltonian(const PolyHamiltonian& H,
                                           const FlowMap& flow,
                                           std::size_t key_budget = 200000) {
  const auto& md = *H.modes;
  const int n = H.n, dim = H.lattice->dim();
  const int G = md.grid_total();

  std::unordered_map<MonoKey, std::vector<Cplx>, MonoKeyHash> acc;
  using TermList = std::vector<std::pair<MonoKey, Cplx>>;

  for (int g = 0; g < G; ++g) {
    VecC th0 = md.grid_point(g).cast<Cplx>();
    const PointFlow p = flow.at(th0);
    // per-point polynomials for the images of r_j and ζ_u (zero mode only)
    auto r_image = [&](int j) {
      TermList t;
      t.emplace_back(MonoKey::make(md.zero_mode(), {}, {}, 0), p.l0[j]);
      std::array<int, 4> re{};
      for (int u = 0; u < dim; ++u)
        if (p.l1(j, u) != Cplx(0))
          t.emplace_back(MonoKey::make(md.zero_mode(), re, {u, 0, 0, 0}, 1),
                         p.l1(j, u));
      for (int u = 0; u < dim; ++u)
        for (int v = u; v < dim; ++v) {
          const Cplx c = (u == v ? 0.5 : 1.0) * p.l2[j](u, v);
          if (c != Cplx(0))
            t.emplace_back(MonoKey::make(md.zero_mode(), re, {u, v, 0, 0}, 2), c);
        }
      for (int b = 0; b < n; ++b)
        if (p.Smat(j, b) != Cplx(0)) {
          std::array<int, 4> rb{};
          rb[b] = 1;
          t.emplace_back(MonoKey::make(md.zero_mode(), rb, {}, 0), p.Smat(j, b));
        }
      return t;
    };
    auto z_image = [&](int u) {
      TermList t;
      t.emplace_back(MonoKey::make(md.zero_mode(), {}, {}, 0), p.T[u]);
      std::array<int, 4> re{};
      for (int v = 0; v < dim; ++v)
        if (p.U(u, v) != Cplx(0))
          t.emplace_back(MonoKey::make(md.zero_mode(), re, {v, 0, 0, 0}, 1),
                         p.U(u, v));
      return t;
    };

    std::vector<TermList> rimg(n), zimg(dim);
    for (int j = 0; j < n; ++j) rimg[j] = r_image(j);
    bool need_z[1] = {false};
    (void)need_z;
    for (const auto& [k, c] : H.terms()) {
      // phase from the θ-image
      Cplx e = 0;
      const auto& kk = md.k(k.mode());
      for (int a = 0; a < md.n(); ++a) e += Real(kk[a]) * p.theta[a];
      TermList cur;
      cur.emplace_back(MonoKey::make(md.zero_mode(), {}, {}, 0),
                       c * std::exp(kI * e));
      auto mul = [&](const TermList& f) {
        TermList next;
        for (const auto& [ka, ca] : cur)
          for (const auto& [kb, cb] : f) {
            std::array<int, 4> re{}, sl{};
            for (int a2 = 0; a2 < 4; ++a2) re[a2] = ka.rexp(a2) + kb.rexp(a2);
            int ns = 0;
            bool ok = true;
            for (int j2 = 0; j2 < 4; ++j2)
              if (ka.slot(j2) >= 0) {
                if (ns == 4) { ok = false; break; }
                sl[ns++] = ka.slot(j2);
              }
            for (int j2 = 0; j2 < 4 && ok; ++j2)
              if (kb.slot(j2) >= 0) {
                if (ns == 4) { ok = false; break; }
                sl[ns++] = kb.slot(j2);
              }
            int rd = 0;
            for (int a2 = 0; a2 < 4; ++a2) rd += re[a2];
            if (!ok || rd > H.opts.deg_r_max || ns > H.opts.deg_z_max) continue;
            next.emplace_back(MonoKey::make(md.zero_mode(), re, sl, ns), ca * cb);
          }
        cur = std::move(next);
      };
      for (int j = 0; j < n; ++j)
        for (int e2 = 0; e2 < k.rexp(j); ++e2) mul(rimg[j]);
      for (int j2 = 0; j2 < 4; ++j2) {
        const int u = k.slot(j2);
        if (u < 0) continue;
        if (zimg[u].empty()) zimg[u] = z_image(u);
        mul(zimg[u]);
      }
      for (const auto& [ko, co] : cur) {
        auto it = acc.find(ko);
        if (it == acc.end()) {
          if (acc.size() >= key_budget)
            throw std::runtime_error("compose_hamiltonian: cap overflow");
          it = acc.emplace(ko, std::vector<Cplx>(G, Cplx(0))).first;
        }
        it->second[g] += co;
      }
    }
  }

  PolyHamiltonian out(H.modes, H.lattice, n, H.conv, H.opts);
  const Real inv = 1.0 / G;
  for (const auto& [key, vals] : acc) {
    for (int m = 0; m < md.count(); ++m) {
      Cplx coeff = 0;
      for (int g = 0; g < G; ++g) coeff += vals[g] * std::conj(md.phase(m, g));
      coeff *= inv;
      if (std::abs(coeff) > 1e-300) {
        std::array<int, 4> re{}, sl{};
        for (int a2 = 0; a2 < 4; ++a2) re[a2] = key.rexp(a2);
        int ns = 0;
        for (int j2 = 0; j2 < 4; ++j2)
          if (key.slot(j2) >= 0) sl[ns++] = key.slot(j2);
        out.add_term(MonoKey::make(m, re, sl, ns), coeff);
      }
    }
  }
  out.compact();
  return out;
}

}  // namespace kamwave
