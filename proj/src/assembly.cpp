// SPDX-License-Identifier: Apache-2.0
#include "hexhp/assembly.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "hexhp/error.hpp"

namespace hexhp {

void AlocBloc::reset(const std::vector<int>& sizes) {
  nattr = static_cast<int>(sizes.size());
  itest.assign(nattr, 0);
  itrial.assign(nattr, 0);
  aloc.resize(static_cast<size_t>(nattr) * nattr);
  bloc.resize(nattr);
  for (int i = 0; i < nattr; ++i) {
    bloc[i] = Eigen::VectorXd::Zero(sizes[i]);
    for (int j = 0; j < nattr; ++j) aloc[i * nattr + j] = Eigen::MatrixXd::Zero(sizes[i], sizes[j]);
  }
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mutex;
  auto run = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mutex);
        if (!err) err = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

// ------------------------------------------------------------ condensation

namespace {

void split(const std::vector<char>& bubble, std::vector<int>& I, std::vector<int>& B) {
  I.clear();
  B.clear();
  for (int i = 0; i < static_cast<int>(bubble.size()); ++i) (bubble[i] ? B : I).push_back(i);
}

Eigen::MatrixXd sub(const Eigen::MatrixXd& K, const std::vector<int>& r, const std::vector<int>& c) {
  Eigen::MatrixXd S(r.size(), c.size());
  for (size_t i = 0; i < r.size(); ++i)
    for (size_t j = 0; j < c.size(); ++j) S(i, j) = K(r[i], c[j]);
  return S;
}

Eigen::VectorXd sub(const Eigen::VectorXd& f, const std::vector<int>& r) {
  Eigen::VectorXd s(r.size());
  for (size_t i = 0; i < r.size(); ++i) s[i] = f[r[i]];
  return s;
}

struct BubbleFactor {
  bool symmetric;
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;

  BubbleFactor(const Eigen::MatrixXd& Kbb, bool sym) : symmetric(sym) {
    if (sym) {
      llt.compute(Kbb);
      if (llt.info() != Eigen::Success)
        fail(ErrorCode::Numeric, "static condensation: bubble block is not positive definite");
      Eigen::VectorXd d = llt.matrixLLT().diagonal();
      if (d.minCoeff() <= 1e-12 * std::max(1.0, d.maxCoeff()))
        fail(ErrorCode::Numeric, "static condensation: bubble block is singular");
    } else {
      lu.compute(Kbb);
      if (!(lu.rcond() > 1e-14)) fail(ErrorCode::Numeric, "static condensation: bubble block is singular");
    }
  }
  template <class M>
  Eigen::MatrixXd solve(const M& rhs) const {
    return symmetric ? Eigen::MatrixXd(llt.solve(rhs)) : Eigen::MatrixXd(lu.solve(rhs));
  }
};

}  // namespace

CondensedLocal static_condense(const Eigen::MatrixXd& K, const Eigen::VectorXd& f,
                               const std::vector<char>& bubble, bool store, bool symmetric) {
  if (K.rows() != K.cols() || K.rows() != f.size() || static_cast<size_t>(K.rows()) != bubble.size())
    fail(ErrorCode::Contract, "static_condense: inconsistent sizes");
  std::vector<int> I, B;
  split(bubble, I, B);
  CondensedLocal out;
  out.symmetric = symmetric;
  if (B.empty()) {
    out.K = K;
    out.f = f;
    return out;
  }
  Eigen::MatrixXd Kbb = sub(K, B, B), Kbi = sub(K, B, I), Kib = sub(K, I, B);
  Eigen::VectorXd fb = sub(f, B);
  BubbleFactor fac(Kbb, symmetric);
  Eigen::MatrixXd X = fac.solve(Kbi);
  Eigen::VectorXd y = fac.solve(fb);
  out.K = sub(K, I, I) - Kib * X;
  out.f = sub(f, I) - Kib * y;
  if (symmetric) out.K = 0.5 * (out.K + out.K.transpose()).eval();
  if (store) {
    out.stored = true;
    if (symmetric)
      out.llt = fac.llt;
    else
      out.lu = fac.lu;
    out.Kbi = Kbi;
    out.fb = fb;
  }
  return out;
}

Eigen::VectorXd recover_bubbles(const Eigen::MatrixXd& K, const Eigen::VectorXd& f,
                                const std::vector<char>& bubble, const Eigen::VectorXd& ui,
                                const CondensedLocal* stored) {
  std::vector<int> I, B;
  split(bubble, I, B);
  if (B.empty()) return Eigen::VectorXd();
  if (static_cast<size_t>(ui.size()) != I.size())
    fail(ErrorCode::Contract, "recover_bubbles: interface vector size mismatch");
  if (stored && stored->stored) {
    Eigen::VectorXd rhs = stored->fb - stored->Kbi * ui;
    return stored->symmetric ? Eigen::VectorXd(stored->llt.solve(rhs))
                             : Eigen::VectorXd(stored->lu.solve(rhs));
  }
  bool sym = stored ? stored->symmetric : true;
  BubbleFactor fac(sub(K, B, B), sym);
  Eigen::VectorXd rhs = sub(f, B) - sub(K, B, I) * ui;
  return fac.solve(rhs);
}

// ------------------------------------------------------------------ solvers

CgResult cg_solve(const SparseMatrix& A, const Eigen::VectorXd& b, double tol, int maxit) {
  const int n = static_cast<int>(b.size());
  if (A.rows() != n || A.cols() != n) fail(ErrorCode::Contract, "cg_solve: dimension mismatch");
  if (maxit <= 0) maxit = 10 * n + 100;
  CgResult res;
  res.x = Eigen::VectorXd::Zero(n);
  const double bn = b.norm();
  if (n == 0 || bn == 0.0) return res;
  Eigen::VectorXd dinv(n);
  for (int i = 0; i < n; ++i) {
    double d = A.coeff(i, i);
    dinv[i] = d > 0.0 ? 1.0 / d : 1.0;
  }
  Eigen::VectorXd r = b, z, p, q;
  int it = 0;
  for (int restart = 0; restart < 4; ++restart) {
    r = b - A * res.x;
    z = dinv.cwiseProduct(r);
    p = z;
    double rz = r.dot(z);
    while (r.norm() > tol * bn && it < maxit) {
      q = A * p;
      double pq = p.dot(q);
      if (pq <= 0.0) fail(ErrorCode::Solve, "cg_solve: matrix is not positive definite");
      double alpha = rz / pq;
      res.x += alpha * p;
      r -= alpha * q;
      z = dinv.cwiseProduct(r);
      double rz2 = r.dot(z);
      p = z + (rz2 / rz) * p;
      rz = rz2;
      ++it;
    }
    res.relres = (b - A * res.x).norm() / bn;
    if (res.relres <= tol || it >= maxit) break;
  }
  res.iterations = it;
  if (!(res.relres <= std::max(tol, 1e-15) * 10.0))
    fail(ErrorCode::Solve, "cg_solve: no convergence after " + std::to_string(it) +
                               " iterations, relative residual " + std::to_string(res.relres));
  return res;
}

Eigen::VectorXd dense_solve(const SparseMatrix& A, const Eigen::VectorXd& b) {
  if (A.rows() > 2000) fail(ErrorCode::Config, "dense solver limited to 2000 unknowns");
  Eigen::MatrixXd D(A);
  Eigen::LLT<Eigen::MatrixXd> llt(D);
  if (llt.info() != Eigen::Success) fail(ErrorCode::Solve, "dense solve: matrix is not positive definite");
  return llt.solve(b);
}

// ----------------------------------------------------------------- assembly

namespace {

// Global index of every stored dof; -1 for dofs outside the global system.
struct Numbering {
  std::vector<int> base;  // per (node-1)*nattr + a
  std::vector<int> gid;
  int n = 0;
  int nattr = 0;
  int lookup(int node, int a, int d) const { return gid[base[(node - 1) * nattr + a] + d]; }
};

bool node_in_system(const Mesh& mesh, int id) {
  const Node& nd = mesh.node(id);
  if (nd.kind == EntityKind::Middle) return nd.sons.empty();
  return nd.active && mesh.constraining_parent(id) == 0;
}

Numbering number_dofs(const Mesh& mesh, bool istc) {
  const auto& ph = mesh.physics();
  Numbering num;
  num.nattr = ph.nr_physa();
  num.base.resize(static_cast<size_t>(mesh.nrnodes()) * num.nattr);
  for (int id = 1; id <= mesh.nrnodes(); ++id) {
    const Node& nd = mesh.node(id);
    bool in = node_in_system(mesh, id);
    for (int a = 0; a < num.nattr; ++a) {
      const auto& at = ph.attrs[a];
      num.base[(id - 1) * num.nattr + a] = static_cast<int>(num.gid.size());
      const int nd_dofs = static_cast<int>(nd.dofs[a].size());
      for (int d = 0; d < nd_dofs; ++d) {
        int c = d % at.ncomp;
        bool keep = in && at.enabled;
        if (nd.kind == EntityKind::Middle) {
          if (istc && !at.is_trace) keep = false;
        } else if (at.space == Space::H1 && nd.bcond[ph.comp_offset(a) + c] == 1) {
          keep = false;
        }
        num.gid.push_back(keep ? num.n++ : -1);
      }
    }
  }
  return num;
}

struct ElementWork {
  ModifiedElement me;
  std::vector<std::pair<int, int>> free;  // (attr, modified dof) of the free dofs
  std::vector<char> bubble;               // over free dofs
  Eigen::MatrixXd Kff;
  Eigen::VectorXd ff;
  CondensedLocal cond;
  std::vector<int> gidx;  // over interface (or all free) dofs
};

}  // namespace

int count_global_dofs(const Mesh& mesh, bool istc) { return number_dofs(mesh, istc).n; }

int count_active_dofs(const Mesh& mesh) {
  const auto& ph = mesh.physics();
  int n = 0;
  for (int id = 1; id <= mesh.nrnodes(); ++id) {
    if (!node_in_system(mesh, id)) continue;
    for (int a = 0; a < ph.nr_physa(); ++a)
      if (ph.attrs[a].enabled) n += mesh.node_attr_dofs(id, a);
  }
  return n;
}

SolveReport assemble_and_solve(Mesh& mesh, const ElementRoutine& elem, const SolverOptions& opt) {
  const auto& order = mesh.traverse_active();
  const auto& ph = mesh.physics();
  const int nattr = ph.nr_physa();
  const Numbering num = number_dofs(mesh, opt.istc);
  const int ne = static_cast<int>(order.size());
  std::vector<ElementWork> work(ne);

  parallel_for(ne, opt.workers, [&](int ie) {
    const int mdle = order[ie];
    ElementWork& w = work[ie];
    w.me = modified_element(mesh, mdle);
    const auto& me = w.me;
    std::vector<int> sizes(nattr);
    for (int a = 0; a < nattr; ++a) sizes[a] = me.attrs[a].nloc;
    AlocBloc ab;
    ab.reset(sizes);
    elem(mesh, mdle, ab);

    std::vector<int> att;
    for (int a = 0; a < nattr; ++a) {
      if (!ph.attrs[a].enabled) continue;
      if (ab.itest[a] != ab.itrial[a])
        fail(ErrorCode::Contract, "element routine: test and trial attribute sets differ");
      if (ab.itrial[a]) att.push_back(a);
    }
    for (int i : att) {
      if (ab.bloc[i].size() != sizes[i])
        fail(ErrorCode::Contract, "element routine: load block size mismatch for attribute " +
                                      ph.attrs[i].nickname);
      for (int j : att)
        if (ab.block(i, j).rows() != sizes[i] || ab.block(i, j).cols() != sizes[j])
          fail(ErrorCode::Contract, "element routine: stiffness block size mismatch for (" +
                                        ph.attrs[i].nickname + "," + ph.attrs[j].nickname + ")");
    }
    // modified system over the participating attributes
    std::vector<int> moff{0};
    for (int a : att) moff.push_back(moff.back() + me.attrs[a].nmod);
    const int nm = moff.back();
    Eigen::MatrixXd Km(nm, nm);
    Eigen::VectorXd fm(nm);
    for (size_t i = 0; i < att.size(); ++i) {
      const auto& Ci = me.attrs[att[i]].C;
      fm.segment(moff[i], moff[i + 1] - moff[i]) = Ci.transpose() * ab.bloc[att[i]];
      for (size_t j = 0; j < att.size(); ++j)
        Km.block(moff[i], moff[j], moff[i + 1] - moff[i], moff[j + 1] - moff[j]) =
            Ci.transpose() * ab.block(att[i], att[j]) * me.attrs[att[j]].C;
    }
    // Dirichlet elimination
    std::vector<int> fr, dr;
    Eigen::VectorXd ud = Eigen::VectorXd::Zero(nm);
    for (size_t i = 0; i < att.size(); ++i) {
      const int a = att[i];
      const auto& b = me.attrs[a];
      Eigen::VectorXd vals = modified_values(mesh, me, a);
      for (int d = 0; d < b.nmod; ++d) {
        int g = moff[i] + d;
        if (b.dirichlet[d]) {
          dr.push_back(g);
          ud[g] = vals[d];
        } else {
          fr.push_back(g);
          w.free.push_back({a, d});
          w.bubble.push_back(opt.istc ? b.bubble[d] : 0);
        }
      }
    }
    w.Kff = sub(Km, fr, fr);
    w.ff = sub(fm, fr);
    if (!dr.empty()) w.ff -= sub(Km, fr, dr) * sub(ud, dr);
    w.cond = static_condense(w.Kff, w.ff, w.bubble, opt.store_stc, opt.symmetric);
    for (size_t k = 0; k < w.free.size(); ++k) {
      if (w.bubble[k]) continue;
      auto [a, d] = w.free[k];
      const auto& b = me.attrs[a];
      int ni = static_cast<int>(std::upper_bound(b.node_offset.begin(), b.node_offset.end(), d) -
                                b.node_offset.begin()) - 1;
      int g = num.lookup(me.nodes[ni], a, d - b.node_offset[ni]);
      if (g < 0) fail(ErrorCode::Contract, "modified dof outside the global numbering");
      w.gidx.push_back(g);
    }
    if (!opt.store_stc) w.cond.Kbi.resize(0, 0);
  });

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(num.n);
  for (const auto& w : work) {
    const int n = static_cast<int>(w.gidx.size());
    for (int i = 0; i < n; ++i) {
      b[w.gidx[i]] += w.cond.f[i];
      for (int j = 0; j < n; ++j)
        if (w.cond.K(i, j) != 0.0) trip.emplace_back(w.gidx[i], w.gidx[j], w.cond.K(i, j));
    }
  }
  SolveReport rep;
  rep.ndof = num.n;
  rep.nreles = ne;
  SparseMatrix A(num.n, num.n);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(num.n);
  if (num.n > 0) {
    bool dense = opt.kind == SolverKind::Dense || (opt.kind == SolverKind::Auto && num.n <= 2000);
    if (dense) {
      x = dense_solve(A, b);
      rep.dense = true;
      rep.relres = b.norm() > 0 ? (A * x - b).norm() / b.norm() : 0.0;
    } else {
      auto r = cg_solve(A, b, opt.tol, opt.maxit);
      x = r.x;
      rep.iterations = r.iterations;
      rep.relres = r.relres;
    }
  }
  // interface dofs
  for (int id = 1; id <= mesh.nrnodes(); ++id)
    for (int a = 0; a < nattr; ++a) {
      auto& d = mesh.node(id).dofs[a];
      for (int k = 0; k < static_cast<int>(d.size()); ++k) {
        int g = num.lookup(id, a, k);
        if (g >= 0) d[k] = x[g];
      }
    }
  // bubbles
  if (opt.istc) {
    parallel_for(ne, opt.workers, [&](int ie) {
      const ElementWork& w = work[ie];
      Eigen::VectorXd ui(w.gidx.size());
      for (size_t i = 0; i < w.gidx.size(); ++i) ui[i] = x[w.gidx[i]];
      Eigen::VectorXd ub = recover_bubbles(w.Kff, w.ff, w.bubble, ui, &w.cond);
      const int mdle = order[ie];
      int k = 0;
      for (size_t i = 0; i < w.free.size(); ++i) {
        if (!w.bubble[i]) continue;
        auto [a, d] = w.free[i];
        const auto& blk = w.me.attrs[a];
        int ni = static_cast<int>(std::find(w.me.nodes.begin(), w.me.nodes.end(), mdle) -
                                  w.me.nodes.begin());
        mesh.node(mdle).dofs[a][d - blk.node_offset[ni]] = ub[k++];
      }
    });
  }
  mesh.set_solved(true);
  if (opt.keep_system) {
    rep.system.A = std::move(A);
    rep.system.b = std::move(b);
    rep.x = std::move(x);
  }
  return rep;
}

}  // namespace hexhp
