#pragma once

// Reference computations used to validate the solver pipeline: closed-form
// effective tensors for layered media, mixture bounds, mesh-exact norms of
// piecewise-linear fields, a direct fine-scale solve of the heterogeneous
// problem, and the scale-convergence study comparing the two-scale
// approximants against it. The layered formulas are plain block algebra on
// 6x6 matrices and share no code with the cell machinery; the fine-scale
// solve reuses the single-scale FEM layer only.

#include <array>
#include <string>
#include <vector>

#include "shellhom/curvilinear.hpp"
#include "shellhom/fem.hpp"
#include "shellhom/macro.hpp"
#include "shellhom/mesh.hpp"
#include "shellhom/tensor.hpp"

namespace shellhom {

// Effective tensor of a 1D-layered medium (Backus / Schoenberg-Muir block
// averaging). `layers` holds (tensor, volume fraction); fractions must sum
// to 1 within 1e-12. `axis` is the layering normal, 0-based. Exact for any
// phase anisotropy, since fields vary only along the normal.
ElasticTensor layered_effective_tensor(
    const std::vector<std::pair<ElasticTensor, double>>& layers, int axis);

// Arithmetic (Voigt) and harmonic (Reuss) mixture averages. Any effective
// tensor of the same phases is bracketed by these in the Loewner order.
ElasticTensor voigt_average(
    const std::vector<std::pair<ElasticTensor, double>>& phases);
ElasticTensor reuss_average(
    const std::vector<std::pair<ElasticTensor, double>>& phases);

struct FieldNorms {
  double l2 = 0.0;       // sqrt of sum_i \int u_i^2 H dOmega
  double h1_semi = 0.0;  // sqrt of sum_{ij} \int (psi_j u_i)^2 H dOmega
};

// Norms of a nodal 3-component field. The L2 part integrates the linear
// interpolant exactly per element; the metric factor H and the 1/H_j scale
// inside psi_j are taken at the element centroid (exact on plates). Micro
// mode freezes the metric at alpha_I and drops the H weight.
FieldNorms field_norms(const TetMesh& mesh, const std::vector<double>& u,
                       const LameModel& model, StrainMode mode,
                       const Vec3& alpha_I = Vec3::Zero());

// Same norms for the difference a - b.
FieldNorms difference_norms(const TetMesh& mesh, const std::vector<double>& a,
                            const std::vector<double>& b,
                            const LameModel& model, StrainMode mode,
                            const Vec3& alpha_I = Vec3::Zero());

// Whole periods of length epsilon spanned by each axis of the domain; a
// non-integer period count is a configuration error (the periodic
// microstructure must tile the domain exactly).
std::array<int, 3> period_counts(const MacroDomain& dom, double epsilon);

// Direct solve of the heterogeneous structure: every element carries the
// phase of its centroid under the epsilon-periodic classifier, and the
// full curvilinear operator with the metric weight is assembled at the
// fine scale. `resolution` is elements per period per axis.
struct DnsResult {
  TetMesh mesh;
  NodalField u;
  SolveStats stats;
  std::array<int, 3> divisions{};
  std::vector<std::string> warnings;  // under-resolution, budget overruns
};

DnsResult dns_solve(const MacroDomain& dom, const LameModel& model,
                    double epsilon, const PhaseGeometry& phase,
                    const MaterialTable& materials,
                    const MacroProblem& problem, int resolution,
                    const SolveOptions& opts = {});

// One scale in the convergence study: weighted L2 and H1-seminorm errors of
// the direct solution against the order-0/1/2 approximants, with observed
// rates between consecutive rows (first row has none).
struct ConvergenceRow {
  double epsilon = 0.0;
  long dof = 0;
  std::array<double, 3> l2{};       // error per order
  std::array<double, 3> h1{};
  std::array<double, 3> rate_l2{};  // zero on the first row
  std::array<double, 3> rate_h1{};
};

// Everything a study run needs; the homogenized pipeline is solved once and
// reused across scales, the direct solve is repeated per scale on its own
// fine mesh, which doubles as the common evaluation mesh.
struct ConvergenceFixture {
  MacroDomain domain;
  LameModel model;
  PhaseGeometry phase;
  MaterialTable materials;
  MacroProblem problem;
  std::array<int, 3> macro_divisions{4, 4, 2};
  int cell_subdivisions = 8;
  int representative_count = 1;
  int dns_resolution = 4;  // elements per period per axis
  int threads = 1;
  SolveOptions solve;
};

// Rows are computed scale by scale so the direct solve stays the memory
// high-water mark of its own row.
std::vector<ConvergenceRow> convergence_study(
    const ConvergenceFixture& fixture, const std::vector<double>& epsilons,
    std::vector<std::string>* warnings = nullptr);

std::string convergence_csv(const std::vector<ConvergenceRow>& rows);

}  // namespace shellhom
