#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace sovxxz {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline const cplx kI{0.0, 1.0};

struct NumError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Mixed tolerance |x-y| <= atol + rtol*max(|x|,|y|).
struct Tolerance {
  double atol = 1e-10;
  double rtol = 1e-9;
  bool close(cplx x, cplx y) const {
    return std::abs(x - y) <= atol + rtol * std::max(std::abs(x), std::abs(y));
  }
};

/// Ascending coefficients.
struct CPoly {
  std::vector<cplx> coeffs;
  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  cplx operator()(cplx z) const {
    cplx r = 0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) r = r * z + *it;
    return r;
  }
  cplx derivative(cplx z) const {
    cplx r = 0;
    for (int k = degree(); k >= 1; --k) r = r * z + double(k) * coeffs[k];
    return r;
  }
};

inline bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

inline double max_abs(const CMatrix& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

/// max|a-b| / max(max|a|, max|b|), 0 for two zero matrices.
inline double rel_diff(const CMatrix& a, const CMatrix& b) {
  double s = std::max(max_abs(a), max_abs(b));
  double d = max_abs(a - b);
  return s > 0 ? d / s : d;
}

inline double rel_diff(cplx a, cplx b) {
  double s = std::max(std::abs(a), std::abs(b));
  return s > 0 ? std::abs(a - b) / s : 0.0;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return r;
}

inline cplx det(const CMatrix& a) {
  if (a.rows() != a.cols()) throw NumError("det: non-square matrix");
  if (a.rows() == 0) return 1.0;
  return a.partialPivLu().determinant();
}

/// Diagonal similarity scaling (Parlett-Reinsch, base 2); returns D^{-1} A D.
inline CMatrix balance(const CMatrix& a_in) {
  CMatrix a = a_in;
  const Eigen::Index n = a.rows();
  bool done = false;
  for (int sweep = 0; sweep < 100 && !done; ++sweep) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0, r = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0 || r == 0) continue;
      double f = 1, s = c + r;
      while (c < r / 2) { c *= 2; r /= 2; f *= 2; }
      while (c >= r * 2) { c /= 2; r *= 2; f /= 2; }
      if (c + r < 0.95 * s) {
        done = false;
        a.col(i) *= f;
        a.row(i) /= f;
      }
    }
  }
  return a;
}

/// Monic characteristic polynomial by Faddeev-LeVerrier on the balanced matrix.
inline CPoly char_poly(const CMatrix& a_in) {
  if (a_in.rows() != a_in.cols()) throw NumError("char_poly: non-square matrix");
  const Eigen::Index n = a_in.rows();
  if (n < 1 || n > 256) throw NumError("char_poly: dimension outside [1, 256]");
  CMatrix a = balance(a_in);
  CPoly p;
  p.coeffs.assign(n + 1, 0.0);
  p.coeffs[n] = 1.0;
  CMatrix m = CMatrix::Zero(n, n);
  const CMatrix id = CMatrix::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    m = a * m + p.coeffs[n - k + 1] * id;
    p.coeffs[n - k] = -(a * m).trace() / double(k);
  }
  return p;
}

inline bool lex_less(cplx a, cplx b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

/// Aberth-Ehrlich iteration, roots sorted by (re, im).
inline std::vector<cplx> poly_roots(const CPoly& p_in, int max_iter = 500) {
  CPoly p = p_in;
  while (p.degree() > 0 && p.coeffs.back() == cplx(0)) p.coeffs.pop_back();
  const int n = p.degree();
  if (n < 1) throw NumError("poly_roots: degree < 1");
  for (auto& c : p.coeffs) c /= p_in.coeffs[n];
  if (n == 1) return {-p.coeffs[0]};

  // Cauchy bound for the initial circle
  double bound = 0;
  for (int k = 0; k < n; ++k) bound = std::max(bound, std::abs(p.coeffs[k]));
  double radius = std::min(1.0 + bound, std::pow(std::abs(p.coeffs[0]) + 1e-300, 1.0 / n) + 1.0);
  std::vector<cplx> z(n);
  for (int k = 0; k < n; ++k)
    z[k] = radius * std::polar(1.0, 2 * kPi * k / n + 0.4);

  auto ratio = [&](cplx x) { return p(x) / p.derivative(x); };
  bool ok = false;
  for (int it = 0; it < max_iter; ++it) {
    double worst = 0;
    for (int k = 0; k < n; ++k) {
      cplx r = ratio(z[k]);
      if (!finite(r)) r = 1e-8;
      cplx s = 0;
      for (int j = 0; j < n; ++j)
        if (j != k) s += 1.0 / (z[k] - z[j]);
      cplx w = r / (1.0 - r * s);
      z[k] -= w;
      worst = std::max(worst, std::abs(w) / std::max(1.0, std::abs(z[k])));
    }
    if (worst < 1e-15) { ok = true; break; }
  }
  double worst = 0;
  for (int k = 0; k < n; ++k) {
    cplx r = ratio(z[k]);
    if (finite(r)) z[k] -= r;
    worst = std::max(worst, std::abs(ratio(z[k])) / std::max(1.0, std::abs(z[k])));
  }
  if (!ok && worst > 1e-12) throw NumError("poly_roots: no convergence");
  std::sort(z.begin(), z.end(), lex_less);
  return z;
}

/// Shifted inverse iteration with all-ones start and seeded restarts.
inline CVector inverse_iteration(const CMatrix& a, cplx mu, std::uint64_t seed = 1,
                                 double tol = 1e-9) {
  if (a.rows() != a.cols()) throw NumError("inverse_iteration: non-square matrix");
  const Eigen::Index n = a.rows();
  const double scale = std::max(max_abs(a), 1e-300);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  CVector v = CVector::Ones(n) / std::sqrt(double(n));
  for (int restart = 0; restart < 6; ++restart) {
    double eps = 0;
    for (int tries = 0; tries < 4; ++tries) {
      CMatrix shifted = a - (mu + eps * scale) * CMatrix::Identity(n, n);
      Eigen::PartialPivLU<CMatrix> lu(shifted);
      bool broke = false;
      for (int it = 0; it < 8; ++it) {
        CVector w = lu.solve(v);
        double nw = w.norm();
        if (!std::isfinite(nw) || nw == 0) { broke = true; break; }
        v = w / nw;
        cplx lam = v.dot(a * v);
        if ((a * v - lam * v).norm() < tol * scale) return v;
      }
      if (!broke) break;
      eps = eps == 0 ? 1e-14 : eps * 100;
    }
    for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(gauss(rng), gauss(rng));
    v.normalize();
  }
  throw NumError("inverse_iteration: no convergence");
}

/// Runs fn(i) for i in [0, count) on `workers` threads; results must be written by index.
template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  const unsigned nt = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  for (unsigned t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace sovxxz
