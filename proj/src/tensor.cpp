#include "shellhom/tensor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "shellhom/errors.hpp"

namespace shellhom {

ElasticTensor& ElasticTensor::operator+=(const ElasticTensor& o) {
  for (int p = 0; p < 6; ++p)
    for (int q = 0; q < 6; ++q) c[p][q] += o.c[p][q];
  return *this;
}

ElasticTensor& ElasticTensor::operator-=(const ElasticTensor& o) {
  for (int p = 0; p < 6; ++p)
    for (int q = 0; q < 6; ++q) c[p][q] -= o.c[p][q];
  return *this;
}

ElasticTensor& ElasticTensor::operator*=(double s) {
  for (int p = 0; p < 6; ++p)
    for (int q = 0; q < 6; ++q) c[p][q] *= s;
  return *this;
}

ElasticTensor operator+(ElasticTensor a, const ElasticTensor& b) {
  a += b;
  return a;
}

ElasticTensor operator-(ElasticTensor a, const ElasticTensor& b) {
  a -= b;
  return a;
}

ElasticTensor operator*(double s, ElasticTensor a) {
  a *= s;
  return a;
}

ElasticTensor isotropic_tensor(double E, double nu) {
  if (!(E > 0.0)) throw ConfigError("Young modulus must be positive");
  if (!(nu > -1.0) || !(nu < 0.5))
    throw ConfigError("Poisson ratio must lie in (-1, 0.5)");
  const double lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  const double mu = E / (2.0 * (1.0 + nu));
  ElasticTensor C;
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q < 3; ++q) C.c[p][q] = lambda + (p == q ? 2.0 * mu : 0.0);
  for (int p = 3; p < 6; ++p) C.c[p][p] = mu;
  return C;
}

Strain6 contract(const ElasticTensor& C, const Strain6& e) {
  Strain6 s{};
  for (int p = 0; p < 6; ++p) {
    double acc = 0.0;
    for (int q = 0; q < 6; ++q) acc += kPairWeight[q] * C.c[p][q] * e[q];
    s[p] = acc;
  }
  return s;
}

double double_contract(const ElasticTensor& C, const Strain6& a,
                       const Strain6& b) {
  double acc = 0.0;
  for (int p = 0; p < 6; ++p)
    for (int q = 0; q < 6; ++q)
      acc += kPairWeight[p] * kPairWeight[q] * a[p] * C.c[p][q] * b[q];
  return acc;
}

double max_abs(const ElasticTensor& C) {
  double m = 0.0;
  for (int p = 0; p < 6; ++p)
    for (int q = 0; q < 6; ++q) m = std::max(m, std::fabs(C.c[p][q]));
  return m;
}

double max_abs_diff(const ElasticTensor& A, const ElasticTensor& B) {
  double m = 0.0;
  for (int p = 0; p < 6; ++p)
    for (int q = 0; q < 6; ++q) m = std::max(m, std::fabs(A.c[p][q] - B.c[p][q]));
  return m;
}

double major_asymmetry(const ElasticTensor& C) {
  double m = 0.0;
  for (int p = 0; p < 6; ++p)
    for (int q = 0; q < 6; ++q) m = std::max(m, std::fabs(C.c[p][q] - C.c[q][p]));
  return m;
}

ElasticTensor symmetrized(const ElasticTensor& C) {
  ElasticTensor S;
  for (int p = 0; p < 6; ++p)
    for (int q = 0; q < 6; ++q) S.c[p][q] = 0.5 * (C.c[p][q] + C.c[q][p]);
  return S;
}

static Eigen::Matrix<double, 6, 6> mandel_matrix(const ElasticTensor& C) {
  Eigen::Matrix<double, 6, 6> M;
  for (int p = 0; p < 6; ++p)
    for (int q = 0; q < 6; ++q)
      M(p, q) = std::sqrt(kPairWeight[p] * kPairWeight[q]) * C.c[p][q];
  return M;
}

std::array<double, 6> mandel_eigenvalues(const ElasticTensor& C) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(
      mandel_matrix(C));
  std::array<double, 6> ev{};
  for (int i = 0; i < 6; ++i) ev[i] = es.eigenvalues()(i);
  return ev;
}

ElasticTensor inverse(const ElasticTensor& C) {
  // invert in Mandel form so that the pair weights come out right:
  // S_mandel = C_mandel^{-1}, then strip the sqrt(2) scalings
  const Eigen::Matrix<double, 6, 6> Minv = mandel_matrix(C).inverse();
  ElasticTensor S;
  for (int p = 0; p < 6; ++p)
    for (int q = 0; q < 6; ++q)
      S.c[p][q] = Minv(p, q) / std::sqrt(kPairWeight[p] * kPairWeight[q]);
  return S;
}

}  // namespace shellhom
