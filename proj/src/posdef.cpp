#include "minsurf/posdef.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>

namespace minsurf {

int thread_budget() {
  if (const char* env = std::getenv("MINSURF_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void check_symmetric(const Matrix& m, const char* name) {
  if (m.rows() != m.cols())
    throw DomainError(std::string(name) + ": expected a square matrix, got " +
                      std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  double scale = m.cwiseAbs().maxCoeff();
  double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(scale, 1.0)) {
    std::ostringstream os;
    os << name << ": matrix is not symmetric (max asymmetry " << asym << ")";
    throw DomainError(os.str());
  }
}

void check_spd(const Matrix& m, const char* name) {
  check_symmetric(m, name);
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().maxCoeff();
  if (hi > 0 && std::abs(lo) < 1e-300 && lo != 0.0) {
    std::ostringstream os;
    os << name << ": eigenvalue magnitude " << lo
       << " is below 1e-300; refusing to proceed (would be silently denormal)";
    throw DomainError(os.str());
  }
  if (!(lo > 1e-14 * std::max(hi, 0.0))) {
    std::ostringstream os;
    os << name << ": matrix is not positive definite (min eigenvalue " << lo
       << ", max " << hi << ")";
    throw DomainError(os.str());
  }
}

Matrix matrix_exp_sym(const Matrix& x) {
  check_symmetric(x, "matrix_exp_sym");
  Eigen::SelfAdjointEigenSolver<Matrix> es(x);
  return es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
         es.eigenvectors().transpose();
}

Matrix matrix_log_spd(const Matrix& b) {
  check_spd(b, "matrix_log_spd");
  Eigen::SelfAdjointEigenSolver<Matrix> es(b);
  return es.eigenvectors() * es.eigenvalues().array().log().matrix().asDiagonal() *
         es.eigenvectors().transpose();
}

// Upper-triangular Cholesky factor L with L^T L = b.
Matrix chol_upper(const Matrix& b, const char* name) {
  check_spd(b, name);
  Eigen::LLT<Matrix> llt(b);
  if (llt.info() != Eigen::Success)
    throw DomainError(std::string(name) + ": Cholesky factorization failed");
  return Matrix(llt.matrixL()).transpose();
}

// Whiten c by the Cholesky factor of b: L^{-T} c L^{-1}, symmetric, whose
// eigenvalues are the generalized eigenvalues of (c, b).
static Matrix whiten(const Matrix& b, const Matrix& c, const char* name) {
  Matrix lu = chol_upper(b, name);
  Matrix half = lu.transpose().triangularView<Eigen::Lower>().solve(c);
  // half^T = c L^{-1}, so solving once more on the left finishes the
  // congruence: L^{-T} (c L^{-1}).
  Matrix w = lu.transpose().triangularView<Eigen::Lower>().solve(half.transpose());
  return 0.5 * (w + w.transpose());
}

double dist_p(const Matrix& b, const Matrix& c) {
  if (b.rows() != c.rows() || b.cols() != c.cols())
    throw DomainError("dist_p: dimension mismatch");
  Matrix w = whiten(b, c, "dist_p");
  check_spd(w, "dist_p (whitened second argument)");
  Eigen::SelfAdjointEigenSolver<Matrix> es(w, Eigen::EigenvaluesOnly);
  double s = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    double l = std::log(es.eigenvalues()[i]);
    s += l * l;
  }
  return std::sqrt(s);
}

double inner_product_at(const Matrix& b, const Matrix& x, const Matrix& y) {
  check_spd(b, "inner_product_at");
  check_symmetric(x, "inner_product_at (x)");
  check_symmetric(y, "inner_product_at (y)");
  Matrix wx = whiten(b, x, "inner_product_at");
  Matrix wy = whiten(b, y, "inner_product_at");
  return (wx * wy).trace();
}

Matrix geodesic(const Matrix& b, const Matrix& x, double t) {
  check_symmetric(x, "geodesic (velocity)");
  Matrix w = whiten(b, x, "geodesic");
  Matrix lu = chol_upper(b, "geodesic");
  Matrix g = lu.transpose() * matrix_exp_sym(t * w) * lu;
  return 0.5 * (g + g.transpose());
}

double vol_ratio(const Matrix& b, const Matrix& g) {
  check_spd(b, "vol_ratio (b)");
  check_spd(g, "vol_ratio (g)");
  if (b.rows() != g.rows()) throw DomainError("vol_ratio: dimension mismatch");
  return std::sqrt(b.determinant() / g.determinant());
}

double dist_vol(const Matrix& b, const Matrix& g) {
  return std::abs(std::log(vol_ratio(b, g)));
}

Certificate certify_spd_perturbation(const Matrix& b, const Matrix& g, const Matrix& x) {
  check_symmetric(x, "certify_spd_perturbation (x)");
  double d_gb = dist_p(g, b);
  double xnorm = norm_at(g, x);
  Certificate cert;
  cert.applicable = xnorm < std::exp(-d_gb);
  if (!cert.applicable) return cert;

  Matrix sum = b + x;
  Eigen::SelfAdjointEigenSolver<Matrix> es(sum, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 0)) {
    std::ostringstream os;
    os << "certify_spd_perturbation: hypothesis holds (|x|_g = " << xnorm
       << " < exp(-" << d_gb << ")) but b + x has min eigenvalue "
       << es.eigenvalues().minCoeff();
    throw CertificateViolation(os.str());
  }
  cert.actual = dist_p(b, sum);
  // r < 1 by the hypothesis.  The naive bound exp(d) |x|_g fails when the
  // whitened perturbation has eigenvalues near -1, where |log(1+mu)| grows
  // like -log(1-|mu|) rather than |mu|; -log(1-r) absorbs that blowup and
  // is tight for x a negative multiple of b.
  double r = std::exp(d_gb) * xnorm;
  cert.bound = -std::log1p(-r);
  if (violates(cert.actual, cert.bound)) {
    std::ostringstream os;
    os << "certify_spd_perturbation: dist_p(b, b+x) = " << cert.actual
       << " exceeds -log(1 - exp(dist_p(g,b)) |x|_g) = " << cert.bound;
    throw CertificateViolation(os.str());
  }
  return cert;
}

}  // namespace minsurf
