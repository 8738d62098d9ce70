#pragma once
// 6x6 storage for rank-4 elastic tensors with both minor symmetries.
// Component pair order everywhere in this library: 11, 22, 33, 12, 23, 13.
// Entries are raw tensor components (no engineering doubling); contractions
// over a symmetric pair carry the weight 2 for the off-diagonal slots.

#include <array>
#include <vector>

namespace shellhom {

inline constexpr std::array<std::array<int, 2>, 6> kPairIndex = {
    {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {1, 2}, {0, 2}}};

inline constexpr int kPairOf[3][3] = {{0, 3, 5}, {3, 1, 4}, {5, 4, 2}};

inline constexpr double kPairWeight[6] = {1, 1, 1, 2, 2, 2};

using Strain6 = std::array<double, 6>;

struct ElasticTensor {
  double c[6][6] = {};

  double& operator()(int p, int q) { return c[p][q]; }
  double operator()(int p, int q) const { return c[p][q]; }

  // full-index access, e.g. at(0,0,1,1) = C_1122
  double at(int i, int j, int k, int l) const {
    return c[kPairOf[i][j]][kPairOf[k][l]];
  }

  ElasticTensor& operator+=(const ElasticTensor& o);
  ElasticTensor& operator-=(const ElasticTensor& o);
  ElasticTensor& operator*=(double s);
};

ElasticTensor operator+(ElasticTensor a, const ElasticTensor& b);
ElasticTensor operator-(ElasticTensor a, const ElasticTensor& b);
ElasticTensor operator*(double s, ElasticTensor a);

// Lame parameters lambda = E nu / ((1+nu)(1-2nu)), mu = E / (2(1+nu))
ElasticTensor isotropic_tensor(double E, double nu);

// sigma_p = sum_q w_q C_pq e_q, strain given in tensor components
Strain6 contract(const ElasticTensor& C, const Strain6& e);

// e : C : e with pair weights on both slots
double double_contract(const ElasticTensor& C, const Strain6& a,
                       const Strain6& b);

double max_abs(const ElasticTensor& C);
double max_abs_diff(const ElasticTensor& A, const ElasticTensor& B);

// major-symmetry deviation max_pq |c_pq - c_qp|, absolute
double major_asymmetry(const ElasticTensor& C);
ElasticTensor symmetrized(const ElasticTensor& C);

// eigenvalues of the Mandel matrix sqrt(w_p) c_pq sqrt(w_q), ascending.
// These are the spectral invariants used for positive definiteness and
// Voigt/Reuss sandwich checks.
std::array<double, 6> mandel_eigenvalues(const ElasticTensor& C);

// inverse as a tensor: S such that S : (C : e) = e for symmetric e
ElasticTensor inverse(const ElasticTensor& C);

struct Material {
  ElasticTensor C;
  double yield_strength = 0.0;  // von Mises threshold, Pa; 0 = not set
};

// phase id -> material, dense from 0
using MaterialTable = std::vector<Material>;

}  // namespace shellhom
