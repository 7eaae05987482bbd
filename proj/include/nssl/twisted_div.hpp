#pragma once

#include <vector>

#include "nssl/estimates.hpp"
#include "nssl/field.hpp"

// The twisted divergence equation div(A z) = g, g = div R, solved per time
// slice by the fixed point z = Psi(z) = grad Lap^{-1} div((Id - A) z + R).
// Matrix fields store A_ij at component i*ndim + j; (A z)_i = A_ij z_j.

namespace nssl {

struct TwistedDivProblem {
  std::vector<double> t;
  std::vector<PhysicalField> a;  // det A = 1
  std::vector<PhysicalField> r;
  std::vector<PhysicalField> g;  // optional; div R when empty
};

struct TwistedDivOptions {
  double tol = 1e-10;      // on the L2 difference of successive sweeps
  int max_sweeps = 200;
  double gate = 0.3;       // ||Id - A||_Linf + ||A_t||_L2(Linf)
  double p = 4.0;          // sum-space exponent, p > ndim
  double det_tol = 1e-6;
};

struct TwistedDivSlice {
  PhysicalField z;
  std::vector<double> diffs;  // ||z_{k+1} - z_k||_L2 per sweep
  double contraction = 0.0;   // max ratio of successive diffs
  double residual = 0.0;      // ||div(A z) - g||_L2
  int sweeps = 0;
};

/// Measured constants of the a-priori bounds
///   ||z||_Linf(L2) <= C ||R||_Linf(L2),  ||grad z||_L2(L2) <= C ||g||_L2(L2),
///   ||z_t||_N <= C (||R||_Linf(L2) + ||R_t||_L_{2p/(2p-n)}(L_{2p/(p+2)})).
/// z_t is split as b = P(-A_t z) in L2(L2) and a = z_t - b, so the sum-space
/// value is an upper bound of the infimum over all splittings.
struct DivLedger {
  double id_minus_a = 0.0;  // ||Id - A||_Linf (pointwise operator norm)
  double a_t = 0.0;         // ||A_t||_L2(Linf)
  double gate = 0.0;
  double z_sup = 0.0, r_sup = 0.0, c_r = 0.0;
  double grad_z = 0.0, g_norm = 0.0, c_g = 0.0;
  double zt_a = 0.0, zt_b = 0.0, rt_norm = 0.0, c_t = 0.0;
  bool timed = false;  // at least two slices, so the time terms are defined
};

struct TwistedDivSolution {
  std::vector<TwistedDivSlice> slices;
  DivLedger ledger;
  double max_contraction = 0.0;
  double max_residual = 0.0;
  std::vector<MonitorReport> monitors;
};

/// grad Lap^{-1} div((Id - A) z + R), mean-free.
PhysicalField psi_apply(const PhysicalField& z, const PhysicalField& a, const PhysicalField& r);
/// div(A z), spectral divergence of the pointwise product.
PhysicalField twisted_divergence(const PhysicalField& a, const PhysicalField& z);
/// sum_ij A_ij d_i z_j; equals div(A z) when sum_i d_i A_ij = 0, as for the
/// inverse Jacobian of a volume-preserving flow map.
PhysicalField twisted_divergence_contracted(const PhysicalField& a, const PhysicalField& z);
/// max over points of the operator 2-norm of Id - A.
double id_minus_a_norm(const PhysicalField& a);

/// Picard iteration from z = 0 on every slice. Throws CertifiedRegionError
/// (with the measured value) when the gate fails, ConfigError on det A or
/// g = div R violations, NonContractionError when sweeps stop contracting.
TwistedDivSolution solve_twisted_div(const TwistedDivProblem& problem,
                                     const TwistedDivOptions& opt = {});

/// z1 of the difference system: div(A1 z) = div((A1 - A2) w2).
TwistedDivSolution z1_solve(const std::vector<double>& t, const std::vector<PhysicalField>& a1,
                            const std::vector<PhysicalField>& a2,
                            const std::vector<PhysicalField>& w2,
                            const TwistedDivOptions& opt = {});

}  // namespace nssl
