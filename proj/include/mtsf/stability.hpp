#pragma once

// Numerical certificates for the singularly perturbed closed loop:
// Lyapunov solutions for the boundary-layer and reduced systems, composite
// matrices Q_eps whose positive definiteness bounds each epsilon, and the
// two-time-scale growth-constant bounds eps* and d*.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "mtsf/cbt.hpp"
#include "mtsf/control.hpp"

namespace mtsf {

struct HurwitzVerdict {
  bool hurwitz = false;
  double abscissa = 0.0;  // max real part of the spectrum
  Eigen::VectorXcd eigenvalues;
};

HurwitzVerdict hurwitzCheck(const Eigen::MatrixXd& A);

struct LyapunovCertificate {
  Eigen::MatrixXd A;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd P;
  double residual = 0.0;  // max |A^T P + P A + Q|
};

// Solves A^T P + P A = -Q through the vectorized (Kronecker) linear system.
// Throws CertificateError if A is not Hurwitz (listing the offending
// eigenvalues) and DomainError if Q is not symmetric positive definite.
LyapunovCertificate solveLyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q);

// Companion matrix [[0, I], [-k1 I, -k2 I]] of size 2n.
Eigen::MatrixXd companionMatrix(Eigen::Index n, const PdGains& gains);
// Same with per-row gains: [[0, I], [-diag(k1), -diag(k2)]].
Eigen::MatrixXd companionMatrix(const Eigen::VectorXd& k1, const Eigen::VectorXd& k2);

// Input matrix [[0, 0], [0, -Kbar]] through which a slower level's error
// state enters a faster level: (2 rows(Kbar)) x (2 cols(Kbar)).
Eigen::MatrixXd couplingInput(const Eigen::MatrixXd& kbar);

// Positive definiteness of the symmetric part (M + M^T)/2.
double minSymmetricEigenvalue(const Eigen::MatrixXd& M);
bool isPositiveDefinite(const Eigen::MatrixXd& M);

// One step of the composite-Lyapunov construction:
//
//   Q_eps = [[A, B], [B^T, d / (sigma_prev eps) Q_fast]],  A = (1 - d) Q_prev
//
// Q_eps > 0 iff A > 0 and the Schur complement stays PD, i.e. for
// eps < d / (sigma_prev lambda_max(B^T A^-1 B, Q_fast)).
struct EpsilonBound {
  double bound = 0.0;    // admissible upper bound, or the cap when unconstrained
  bool capped = false;
  double weight = 0.5;   // d
  double previous_scale = 1.0;  // sigma_prev
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd fast_Q;
  // det(A) det(Cbar - B^T A^-1 B) with Cbar = d Q_fast, reported for reference.
  double determinant_diagnostic = 0.0;
  // Minimum eigenvalue of Q_eps at 0.99 * bound; positive when verified.
  double min_eigenvalue_at_99 = 0.0;

  Eigen::MatrixXd assemble(double eps) const;
  bool verified() const { return min_eigenvalue_at_99 > 0.0; }
};

// Generic step. `slow_Q` is the already-assembled composite matrix of the
// slower levels (or Q_c); `couplings` are the input matrices A_{fast,j} for
// each slower block in the order they appear in slow_Q. Throws DomainError if
// (1 - d) slow_Q is not positive definite or d is outside (0, 1).
EpsilonBound compositeEpsilonBound(const Eigen::MatrixXd& slow_Q, double d,
                                   const Eigen::MatrixXd& fast_P, const Eigen::MatrixXd& fast_Q,
                                   const std::vector<Eigen::MatrixXd>& couplings,
                                   double previous_scale, double cap);

// First step: slow E_c, fast E_r.
EpsilonBound epsilon1Bound(const Eigen::MatrixXd& Q_c, const Eigen::MatrixXd& P_r,
                           const Eigen::MatrixXd& Q_r, const Eigen::MatrixXd& A_rc, double d1,
                           double cap = 1.0);

// Second step: slow (E_c, E_r) with Q_eps1 evaluated at eps1, fast E_s.
EpsilonBound epsilon2Bound(const EpsilonBound& first, double eps1, const Eigen::MatrixXd& P_s,
                           const Eigen::MatrixXd& Q_s, const Eigen::MatrixXd& A_sr,
                           const Eigen::MatrixXd& A_sc, double d2, double cap = 1.0);

struct GridPoint {
  double eps = 0.0;
  double min_eigenvalue = 0.0;
  bool positive_definite = false;
};

// Eigenvalue check of Q_eps at each multiple of the bound.
std::vector<GridPoint> gridVerification(const EpsilonBound& bound,
                                        const std::vector<double>& multiples);

struct GrowthConstants {
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double beta1 = 1.0;
  double beta2 = 1.0;
  double gamma = 0.0;
};

struct EpsStar {
  double eps_star = 0.0;
  double d_star = 0.0;
  // eps_d evaluated at d_star; equals eps_star whenever 0 < d_star < 1.
  std::optional<double> eps_at_d_star;
};

// eps* = a1 a2 / (a1 g + b1 b2), d* = b1 / (b1 + b2). Throws DomainError for
// nonpositive alphas, negative betas/gamma or vanishing denominators.
EpsStar twoTimescaleEpsStar(const GrowthConstants& c);

// eps_d = a1 a2 / (a1 g + [(1-d) b1 + d b2]^2 / (4 d (1-d))); 0 outside (0, 1).
double epsilonD(const GrowthConstants& c, double d);

// d(1-d) a1 (a2/eps - g) > [(1-d) b1 + d b2]^2 / 4.
bool quadraticFormNegative(const GrowthConstants& c, double eps, double d);

struct StabilityOptions {
  std::vector<double> weights;      // d per chain step; missing entries default to 0.5
  double epsilon_cap = 1.0;
  // When the configured epsilon is not strictly admissible, later steps are
  // evaluated at this fraction of its bound.
  double fallback_fraction = 0.5;
  std::optional<GrowthConstants> growth;
};

struct LevelCertificate {
  std::string level;
  HurwitzVerdict verdict;
  std::optional<LyapunovCertificate> certificate;  // absent when not Hurwitz
};

struct ChainStep {
  std::string fast_level;
  std::string parameter;   // e.g. "epsilon_1"
  double configured = 0.0; // configured ratio sigma_fast / sigma_prev
  double evaluated = 0.0;  // value used when assembling later steps
  bool admissible = false; // configured strictly inside the bound
  EpsilonBound bound;
  std::vector<GridPoint> grid;
};

struct StabilityReport {
  std::vector<LevelCertificate> levels;  // slowest first
  std::vector<ChainStep> chain;
  std::optional<GrowthConstants> growth;
  std::optional<EpsStar> eps_star;

  bool allHurwitz() const;
};

// Certificates for every level (companion matrices of the base gains) and the
// composite bound chain c -> r -> intra levels (slowest to fastest). The chain
// is skipped when any level is not Hurwitz.
StabilityReport analyzeStability(const ControllerConfig& config, const GroupLayout& layout,
                                 const StabilityOptions& options);

}  // namespace mtsf
