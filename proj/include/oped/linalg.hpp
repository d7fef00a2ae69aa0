#pragma once

// Dense numerics behind the linear-class diagnostics:
//
//  - max_rayleigh: supremum of a generalized Rayleigh quotient on a pair of
//    PSD forms, with explicit reporting of denominator-null directions that
//    still carry numerator energy (the caller decides what those mean);
//
//  - ball_max: exact maximization of a convex quadratic ||G w + c||^2 over
//    the ellipsoid ||B w - t||^2 <= r^2 via the secular equation, including
//    the hard case.
//
// Everything here works in plain Euclidean norms; callers fold seminorm
// weights into the matrix rows beforehand.

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "oped/common.hpp"

namespace oped {
namespace linalg {

struct RayleighResult {
  double max_ratio = 0.0;      // sup over directions with positive denominator
  bool null_numerator = false; // a denominator-null direction has numerator energy
  bool degenerate = false;     // both forms vanish identically
};

// sup_x (x'QA x) / (x'QB x) over x with x'QB x > 0. QA, QB symmetric PSD.
// Directions in the kernel of QB are excluded from the quotient and instead
// reported through null_numerator when QA sees them.
inline RayleighResult max_rayleigh(const Eigen::MatrixXd& QA,
                                   const Eigen::MatrixXd& QB,
                                   double rel_tol = 1e-11) {
  RayleighResult out;
  const long d = QB.rows();
  if (d == 0) {
    out.degenerate = true;
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esB(QB);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esA(QA);
  double lmaxB = std::max(0.0, esB.eigenvalues()(d - 1));
  double lmaxA = std::max(0.0, esA.eigenvalues()(d - 1));
  if (lmaxB <= 0.0 && lmaxA <= 0.0) {
    out.degenerate = true;
    return out;
  }
  // QA and QB are quadratic forms over the same space, so roundoff in QA is
  // bounded by eps^2 times the scale QB carries; below that floor the
  // numerator is identically zero and no ratio or null flag is meaningful.
  if (lmaxA <= 1e-22 * lmaxB) return out;
  double cutB = lmaxB * rel_tol;
  long rank = 0;
  for (long i = 0; i < d; ++i)
    if (esB.eigenvalues()(i) > cutB) ++rank;
  long nnull = d - rank;
  if (nnull > 0 && lmaxA > 0.0) {
    Eigen::MatrixXd N = esB.eigenvectors().leftCols(nnull);
    Eigen::MatrixXd E = N.transpose() * QA * N;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esE(0.5 * (E + E.transpose()));
    if (esE.eigenvalues()(nnull - 1) > rel_tol * lmaxA) out.null_numerator = true;
  }
  if (rank == 0) return out;
  Eigen::MatrixXd Vr = esB.eigenvectors().rightCols(rank);
  Eigen::VectorXd lr = esB.eigenvalues().tail(rank);
  Eigen::MatrixXd W = Vr * lr.cwiseSqrt().cwiseInverse().asDiagonal();
  Eigen::MatrixXd M = W.transpose() * QA * W;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esM(0.5 * (M + M.transpose()));
  out.max_ratio = std::max(0.0, esM.eigenvalues()(rank - 1));
  return out;
}

struct BallMaxResult {
  bool empty = false;          // constraint set is empty at this radius
  double value = 0.0;          // max of ||G w + c||^2 over the set
  double min_residual_sq = 0.0;  // min_w ||B w - t||^2 (feasibility threshold)
};

// maximize ||G w + c||^2 subject to ||B w - t||^2 <= r^2.
//
// Requires null(B'B) to lie inside null(G'G), which holds whenever both
// forms are weighted by the same distribution and G factors through a
// projection residual; kernel directions are quotiented out.
inline BallMaxResult ball_max(const Eigen::MatrixXd& G, const Eigen::VectorXd& c,
                              const Eigen::MatrixXd& B, const Eigen::VectorXd& t,
                              double r) {
  BallMaxResult out;
  const long d = G.cols();
  Eigen::MatrixXd Sc = B.transpose() * B;
  Eigen::MatrixXd So = G.transpose() * G;
  Eigen::VectorXd bc = B.transpose() * t;
  double h = t.squaredNorm();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esC(Sc);
  double lmaxC = d > 0 ? std::max(0.0, esC.eigenvalues()(d - 1)) : 0.0;
  double cut = lmaxC * 1e-13;
  long rank = 0;
  for (long i = 0; i < d; ++i)
    if (esC.eigenvalues()(i) > cut) ++rank;

  if (rank == 0) {
    // Constraint reads ||t||^2 <= r^2 regardless of w; objective must be
    // constant in w by the kernel requirement.
    out.min_residual_sq = h;
    if (h > r * r + 1e-12 * std::max(1.0, h)) {
      out.empty = true;
      return out;
    }
    out.value = c.squaredNorm();
    return out;
  }

  Eigen::MatrixXd Vr = esC.eigenvectors().rightCols(rank);
  Eigen::VectorXd lr = esC.eigenvalues().tail(rank);

  // Constraint center (minimum-norm) and minimal residual.
  Eigen::VectorXd y = Vr.transpose() * bc;
  Eigen::VectorXd wc = Vr * (y.array() / lr.array()).matrix();
  double g_min = h - bc.dot(wc);
  if (g_min < 0.0) g_min = 0.0;
  out.min_residual_sq = g_min;
  if (r * r < g_min - 1e-12 * std::max(1.0, h)) {
    out.empty = true;
    return out;
  }
  double rho2 = std::max(0.0, r * r - g_min);
  double rho = std::sqrt(rho2);

  // Whitened coordinates: w = wc + W x with ||x|| the constraint radius.
  Eigen::MatrixXd W = Vr * lr.cwiseSqrt().cwiseInverse().asDiagonal();
  Eigen::MatrixXd M = W.transpose() * So * W;
  Eigen::VectorXd b = W.transpose() * (So * wc + G.transpose() * c);
  double q0 = (G * wc + c).squaredNorm();

  if (rho == 0.0) {
    out.value = q0;
    return out;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esM(0.5 * (M + M.transpose()));
  Eigen::VectorXd sig = esM.eigenvalues();
  Eigen::VectorXd beta = esM.eigenvectors().transpose() * b;
  long k = sig.size();
  double smax = sig(k - 1);
  double tol_g = std::max(std::abs(smax), 1e-300) * 1e-12;

  // Energy aligned with the top eigenspace decides between the regular
  // secular root and the hard case.
  double top_energy = 0.0, phi_lim = 0.0;
  for (long i = 0; i < k; ++i) {
    if (sig(i) >= smax - tol_g)
      top_energy += beta(i) * beta(i);
    else
      phi_lim += beta(i) * beta(i) / ((smax - sig(i)) * (smax - sig(i)));
  }

  auto psi_value = [&](const Eigen::VectorXd& x) {
    double v = q0;
    for (long i = 0; i < k; ++i) v += sig(i) * x(i) * x(i) + 2.0 * beta(i) * x(i);
    return v;
  };

  double bscale = std::sqrt(top_energy);
  if (bscale <= 1e-14 * std::max(1.0, b.norm()) && phi_lim <= rho2) {
    // Hard case: fill the remaining radius along the top eigenvector.
    Eigen::VectorXd x = Eigen::VectorXd::Zero(k);
    for (long i = 0; i < k; ++i)
      if (sig(i) < smax - tol_g) x(i) = beta(i) / (smax - sig(i));
    double used = x.squaredNorm();
    double tau = std::sqrt(std::max(0.0, rho2 - used));
    x(k - 1) += tau;
    out.value = psi_value(x);
    return out;
  }

  // Regular case: bisect phi(nu) = sum beta_i^2/(nu - sig_i)^2 = rho^2 on
  // (smax, inf); phi is strictly decreasing there.
  auto phi = [&](double nu) {
    double acc = 0.0;
    for (long i = 0; i < k; ++i) {
      double den = nu - sig(i);
      acc += beta(i) * beta(i) / (den * den);
    }
    return acc;
  };
  double lo = smax + 0.5 * bscale / rho;
  if (!(lo > smax)) lo = smax + 1e-300;
  double hi = smax + 2.0 * b.norm() / rho + 1e-300;
  while (phi(hi) > rho2) hi = smax + 2.0 * (hi - smax);
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (phi(mid) > rho2)
      lo = mid;
    else
      hi = mid;
  }
  double nu = 0.5 * (lo + hi);
  Eigen::VectorXd x(k);
  for (long i = 0; i < k; ++i) x(i) = beta(i) / (nu - sig(i));
  // Scale exactly onto the sphere to absorb bisection residue.
  double xn = x.norm();
  if (xn > 0.0) x *= rho / xn;
  out.value = psi_value(x);
  return out;
}

}  // namespace linalg
}  // namespace oped
